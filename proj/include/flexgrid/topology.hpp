#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace flexgrid {

using NodeId = std::size_t;
using LinkId = std::size_t;

class TopologyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Link {
  LinkId id = 0;
  NodeId a = 0;
  NodeId b = 0;
  double length_km = 0.0;
  double bandwidth_ghz = 0.0;

  NodeId other(NodeId n) const { return n == a ? b : a; }
};

struct Path {
  std::vector<NodeId> nodes;
  std::vector<LinkId> links;

  bool operator==(const Path&) const = default;
};

enum class RoutingMetric { hops, km };

RoutingMetric parse_routing_metric(std::string_view name);
std::string_view to_string(RoutingMetric metric);

/// Undirected optical network graph. Immutable once built; construction
/// validates indices, rejects self-loops and duplicate edges, and requires
/// the graph to be connected.
class Topology {
 public:
  Topology(std::string name, std::size_t node_count, std::vector<Link> links);

  const std::string& name() const { return name_; }
  std::size_t node_count() const { return node_count_; }
  const std::vector<Link>& links() const { return links_; }
  const Link& link(LinkId id) const { return links_.at(id); }

  /// Link ids incident to `n`, sorted by the neighbour's index.
  const std::vector<LinkId>& incident(NodeId n) const { return adjacency_.at(n); }

  Topology with_link_bandwidth(double bandwidth_ghz) const;

 private:
  std::string name_;
  std::size_t node_count_;
  std::vector<Link> links_;
  std::vector<std::vector<LinkId>> adjacency_;
};

/// Parses the plain-text topology format: '#' starts a comment, the first
/// remaining line is the node count, each further line is "u v length_km".
/// Link ids follow file order; bandwidth is set to `bandwidth_ghz`.
Topology load_topology(std::string_view source, std::string name = "custom",
                       double bandwidth_ghz = 4000.0);

Topology load_topology_file(const std::string& path, double bandwidth_ghz = 4000.0);

/// One of "nsfnet", "usnet", "single_link".
Topology builtin_topology(std::string_view name, double bandwidth_ghz = 4000.0);
bool is_builtin_topology(std::string_view name);
std::vector<std::string> builtin_topology_names();

double average_nodal_degree(const Topology& t);

double link_cost(const Link& link, RoutingMetric metric);
double path_cost(const Topology& t, const Path& path, RoutingMetric metric);

/// Minimum-cost simple path; among equal-cost paths the lexicographically
/// smallest node sequence wins.
Path shortest_path(const Topology& t, NodeId src, NodeId dst, RoutingMetric metric);

/// All-pairs table of `shortest_path` results, computed once per topology.
class RoutingTable {
 public:
  RoutingTable(const Topology& t, RoutingMetric metric);

  const Path& path(NodeId src, NodeId dst) const { return paths_.at(src * node_count_ + dst); }

 private:
  std::size_t node_count_;
  std::vector<Path> paths_;
};

}  // namespace flexgrid
