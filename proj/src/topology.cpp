#include "flexgrid/topology.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <set>
#include <sstream>
#include <utility>

#include "bundled_data.hpp"

namespace flexgrid {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string line_error(std::size_t line_no, const std::string& what) {
  return "topology line " + std::to_string(line_no) + ": " + what;
}

bool near_equal(double a, double b) {
  return std::fabs(a - b) <= 1e-9 * std::max({1.0, std::fabs(a), std::fabs(b)});
}

// Distances from `root` to every node under `metric`.
std::vector<double> dijkstra(const Topology& t, NodeId root, RoutingMetric metric) {
  std::vector<double> dist(t.node_count(), std::numeric_limits<double>::infinity());
  using Entry = std::pair<double, NodeId>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  dist[root] = 0.0;
  heap.emplace(0.0, root);
  while (!heap.empty()) {
    auto [d, u] = heap.top();
    heap.pop();
    if (d > dist[u]) continue;
    for (LinkId id : t.incident(u)) {
      const Link& l = t.link(id);
      const NodeId v = l.other(u);
      const double nd = d + link_cost(l, metric);
      if (nd < dist[v]) {
        dist[v] = nd;
        heap.emplace(nd, v);
      }
    }
  }
  return dist;
}

// Walks from src towards dst, always stepping to the smallest-index
// neighbour that stays on some minimum-cost path.
Path trace_path(const Topology& t, NodeId src, NodeId dst, const std::vector<double>& to_dst,
                RoutingMetric metric) {
  if (std::isinf(to_dst[src])) {
    throw TopologyError("no path from node " + std::to_string(src) + " to node " +
                        std::to_string(dst));
  }
  Path path;
  path.nodes.push_back(src);
  NodeId u = src;
  while (u != dst) {
    // incident() is sorted by neighbour index, so the first match is smallest.
    bool stepped = false;
    for (LinkId id : t.incident(u)) {
      const Link& l = t.link(id);
      const NodeId v = l.other(u);
      if (near_equal(link_cost(l, metric) + to_dst[v], to_dst[u])) {
        path.nodes.push_back(v);
        path.links.push_back(id);
        u = v;
        stepped = true;
        break;
      }
    }
    if (!stepped) throw TopologyError("shortest path reconstruction failed");
  }
  return path;
}

}  // namespace

RoutingMetric parse_routing_metric(std::string_view name) {
  if (name == "hops") return RoutingMetric::hops;
  if (name == "km") return RoutingMetric::km;
  throw std::invalid_argument("unknown routing metric '" + std::string(name) +
                              "' (expected hops or km)");
}

std::string_view to_string(RoutingMetric metric) {
  return metric == RoutingMetric::hops ? "hops" : "km";
}

Topology::Topology(std::string name, std::size_t node_count, std::vector<Link> links)
    : name_(std::move(name)), node_count_(node_count), links_(std::move(links)) {
  if (node_count_ < 1) throw TopologyError("node count must be positive");
  adjacency_.resize(node_count_);
  std::set<std::pair<NodeId, NodeId>> seen;
  for (std::size_t i = 0; i < links_.size(); ++i) {
    Link& l = links_[i];
    l.id = i;
    if (l.a >= node_count_ || l.b >= node_count_) {
      throw TopologyError("link " + std::to_string(i) + " has endpoint out of range [0, " +
                          std::to_string(node_count_) + ")");
    }
    if (l.a == l.b) throw TopologyError("link " + std::to_string(i) + " is a self-loop");
    if (!(l.length_km > 0.0)) {
      throw TopologyError("link " + std::to_string(i) + " has nonpositive length");
    }
    if (!(l.bandwidth_ghz > 0.0)) {
      throw TopologyError("link " + std::to_string(i) + " has nonpositive bandwidth");
    }
    if (!seen.emplace(std::min(l.a, l.b), std::max(l.a, l.b)).second) {
      throw TopologyError("duplicate link between nodes " + std::to_string(l.a) + " and " +
                          std::to_string(l.b));
    }
    adjacency_[l.a].push_back(i);
    adjacency_[l.b].push_back(i);
  }
  for (NodeId n = 0; n < node_count_; ++n) {
    auto& adj = adjacency_[n];
    std::sort(adj.begin(), adj.end(), [&](LinkId x, LinkId y) {
      return links_[x].other(n) < links_[y].other(n);
    });
  }

  std::vector<bool> reached(node_count_, false);
  std::vector<NodeId> stack{0};
  reached[0] = true;
  std::size_t count = 1;
  while (!stack.empty()) {
    const NodeId u = stack.back();
    stack.pop_back();
    for (LinkId id : adjacency_[u]) {
      const NodeId v = links_[id].other(u);
      if (!reached[v]) {
        reached[v] = true;
        ++count;
        stack.push_back(v);
      }
    }
  }
  if (count != node_count_) throw TopologyError("topology '" + name_ + "' is disconnected");
}

Topology Topology::with_link_bandwidth(double bandwidth_ghz) const {
  auto links = links_;
  for (auto& l : links) l.bandwidth_ghz = bandwidth_ghz;
  return Topology(name_, node_count_, std::move(links));
}

Topology load_topology(std::string_view source, std::string name, double bandwidth_ghz) {
  std::optional<std::size_t> node_count;
  std::vector<Link> links;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= source.size()) {
    auto end = source.find('\n', pos);
    if (end == std::string_view::npos) end = source.size();
    std::string_view line = source.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    std::istringstream in{std::string(line)};
    if (!node_count) {
      long long n = 0;
      std::string rest;
      if (!(in >> n) || (in >> rest)) throw TopologyError(line_error(line_no, "expected node count"));
      if (n < 1) throw TopologyError(line_error(line_no, "node count must be positive"));
      node_count = static_cast<std::size_t>(n);
      continue;
    }
    long long u = 0, v = 0;
    double km = 0.0;
    std::string rest;
    if (!(in >> u >> v >> km) || (in >> rest)) {
      throw TopologyError(line_error(line_no, "expected 'u v length_km'"));
    }
    if (u < 0 || v < 0) throw TopologyError(line_error(line_no, "negative node index"));
    links.push_back(Link{links.size(), static_cast<NodeId>(u), static_cast<NodeId>(v), km,
                         bandwidth_ghz});
  }
  if (!node_count) throw TopologyError("topology source has no node count");
  return Topology(std::move(name), *node_count, std::move(links));
}

Topology load_topology_file(const std::string& path, double bandwidth_ghz) {
  std::ifstream in(path);
  if (!in) throw TopologyError("cannot open topology file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  std::string name = path;
  if (auto slash = name.find_last_of('/'); slash != std::string::npos) name = name.substr(slash + 1);
  if (auto dot = name.find_last_of('.'); dot != std::string::npos && dot > 0) name = name.substr(0, dot);
  return load_topology(buf.str(), name, bandwidth_ghz);
}

Topology builtin_topology(std::string_view name, double bandwidth_ghz) {
  const auto source = bundled::topology_source(name);
  if (!source) throw TopologyError("unknown topology preset '" + std::string(name) + "'");
  return load_topology(*source, std::string(name), bandwidth_ghz);
}

bool is_builtin_topology(std::string_view name) {
  return bundled::topology_source(name).has_value();
}

std::vector<std::string> builtin_topology_names() { return bundled::topology_names(); }

double average_nodal_degree(const Topology& t) {
  return 2.0 * static_cast<double>(t.links().size()) / static_cast<double>(t.node_count());
}

double link_cost(const Link& link, RoutingMetric metric) {
  return metric == RoutingMetric::hops ? 1.0 : link.length_km;
}

double path_cost(const Topology& t, const Path& path, RoutingMetric metric) {
  double cost = 0.0;
  for (LinkId id : path.links) cost += link_cost(t.link(id), metric);
  return cost;
}

Path shortest_path(const Topology& t, NodeId src, NodeId dst, RoutingMetric metric) {
  if (src >= t.node_count() || dst >= t.node_count()) {
    throw TopologyError("shortest_path: node index out of range");
  }
  if (src == dst) throw TopologyError("shortest_path: source equals destination");
  return trace_path(t, src, dst, dijkstra(t, dst, metric), metric);
}

RoutingTable::RoutingTable(const Topology& t, RoutingMetric metric)
    : node_count_(t.node_count()), paths_(node_count_ * node_count_) {
  for (NodeId dst = 0; dst < node_count_; ++dst) {
    const auto to_dst = dijkstra(t, dst, metric);
    for (NodeId src = 0; src < node_count_; ++src) {
      if (src != dst) paths_[src * node_count_ + dst] = trace_path(t, src, dst, to_dst, metric);
    }
  }
}

}  // namespace flexgrid
