#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <utility>

#include "flexgrid/topology.hpp"
#include "flexgrid/traffic.hpp"

namespace flexgrid {

struct SimConfig {
  explicit SimConfig(Topology t) : topology(std::move(t)) {
    traffic.node_count = topology.node_count();
  }

  Topology topology;
  double slot_width_ghz = 12.5;
  double link_bandwidth_ghz = 4000.0;
  double guard_ghz = 10.0;
  DistributionSpec dist = UniformBandwidth{};
  TrafficParams traffic;
  std::uint64_t total_requests = 200000;
  double warmup_multiplier = 3.0;
  std::uint64_t master_seed = 1;
  std::uint64_t run_index = 0;
  RoutingMetric routing_metric = RoutingMetric::hops;

  /// Validates the config; TrafficParams::node_count must match the topology.
  void validate() const;
};

struct RunOptions {
  /// Per-event trace sink; nullptr disables tracing.
  std::ostream* trace = nullptr;
  /// Full state check every this many events; 0 disables it.
  std::uint64_t check_interval = 0;
};

struct MetricsReport {
  std::uint64_t arrived = 0;
  std::uint64_t blocked = 0;
  double requested_gbps_sum = 0.0;
  double blocked_gbps_sum = 0.0;
  double used_bw_time_integral = 0.0;
  double allocated_data_bw_time_integral = 0.0;
  std::optional<double> bp;
  std::optional<double> bbp;
  std::optional<double> spectrum_efficiency;
  std::pair<double, double> measured_window{0.0, 0.0};

  bool operator==(const MetricsReport&) const = default;
};

/// An invariant broke mid-run. what() carries the violated condition and an
/// occupancy raster of every link.
class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Runs `config.total_requests` arrivals through shortest-path first-fit
/// admission. Arrivals before warmup_multiplier / mu load the network but
/// are not counted; every measured connection is held to its departure so
/// the efficiency integrals cover whole holding times.
MetricsReport run(const SimConfig& config, const RunOptions& options = {});

/// Erlang B blocking for `servers` servers offered `load_erlang`.
double erlang_b(std::size_t servers, double load_erlang);

}  // namespace flexgrid
