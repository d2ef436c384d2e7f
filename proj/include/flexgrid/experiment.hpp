#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "flexgrid/engine.hpp"
#include "flexgrid/topology.hpp"
#include "flexgrid/traffic.hpp"

namespace flexgrid {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Slot widths 6.25 * y GHz for y = 1, 2, ... up to `max_ghz`.
std::vector<double> itu_grid(double max_ghz);

/// start, start + step, ... up to `stop` inclusive.
std::vector<double> arithmetic_grid(double start, double stop, double step = 2.0);

struct SweepDefaults {
  double link_bandwidth_ghz = 4000.0;
  double guard_ghz = 10.0;
  std::uint64_t total_requests = 200000;
  double warmup_multiplier = 3.0;
  double mu = 0.001;
  std::uint64_t master_seed = 1;
  RoutingMetric routing_metric = RoutingMetric::hops;
};

struct SweepSpec {
  std::vector<Topology> topologies;
  std::vector<double> slot_widths_ghz;
  std::vector<double> loads_erlang;
  std::vector<DistributionSpec> dist_variants;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  SweepDefaults fixed;

  std::size_t run_count() const;
  void validate() const;
};

/// Parses the sweep config format:
///
///   # comment
///   [sweep]
///   topologies = nsfnet, usnet, path/to/custom.txt
///   slot_widths_ghz = itu:100, arith:2:100:2, 37.5
///   loads_erlang = 15, 20, 25
///   seeds = 1, 2, 3, 4, 5
///   [traffic]
///   dist = uniform
///   b_max_gbps = 100
///
/// Section headers group keys for readability; keys are global. Topology
/// paths are resolved against `base_dir`.
SweepSpec parse_sweep_config(std::string_view text, const std::filesystem::path& base_dir = {});
SweepSpec load_sweep_config(const std::filesystem::path& path);

std::vector<std::string> preset_names();
/// Bundled config text for a named preset.
std::optional<std::string_view> preset_config(std::string_view name);

struct RunPoint {
  std::size_t topology = 0;
  double slot_width_ghz = 0.0;
  double load_erlang = 0.0;
  std::size_t dist = 0;
  std::uint64_t seed = 0;
};

/// Grid order: topology, distribution variant, load, slot width, seed.
std::vector<RunPoint> enumerate_runs(const SweepSpec& spec);
SimConfig make_sim_config(const SweepSpec& spec, const RunPoint& point);

struct ResultRow {
  std::string topology;
  double slot_width_ghz = 0.0;
  double load_erlang_per_node = 0.0;
  std::string dist;
  std::string dist_param1;
  std::string dist_param2;
  double guard_ghz = 0.0;
  double link_bandwidth_ghz = 0.0;
  std::uint64_t total_requests = 0;
  std::uint64_t seed = 0;
  std::uint64_t arrived_measured = 0;
  std::uint64_t blocked = 0;
  std::optional<double> bp;
  std::optional<double> bbp;
  std::optional<double> spectrum_efficiency;
  double sim_seconds_modeled = 0.0;
  std::optional<double> wall_ms;
  std::string status = "ok";

  bool ok() const { return status == "ok"; }
};

struct SweepOptions {
  std::size_t parallelism = 1;
  /// Fill wall_ms. Off by default so output is byte-reproducible.
  bool timing = false;
  /// Per-event trace of every run; forces serial execution.
  std::ostream* trace = nullptr;
};

std::vector<ResultRow> run_sweep_rows(const SweepSpec& spec, const SweepOptions& options);

/// Runs the full grid and returns the CSV text (header plus one row per run).
std::string run_sweep(const SweepSpec& spec, std::size_t parallelism);

const std::vector<std::string>& csv_columns();
std::string to_csv(const std::vector<ResultRow>& rows);

/// Splits CSV text into records, honouring double-quoted fields.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

/// Collapses seed replicates of a sweep CSV into mean and standard error of
/// bp, bbp and spectrum efficiency per grid point.
std::string aggregate_csv(std::string_view sweep_csv);

}  // namespace flexgrid
