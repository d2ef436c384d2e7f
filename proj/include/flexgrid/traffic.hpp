#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

#include "flexgrid/topology.hpp"

namespace flexgrid {

/// SplitMix64 finalizer over the pair; stable across platforms.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t run_index);

/// Deterministic random source. mt19937_64 has a standard-mandated output
/// sequence; every variate below is derived from its raw 64-bit words, so
/// the same seed gives the same samples on every conforming platform.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t run_index)
      : engine_(derive_seed(master_seed, run_index)) {}
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1).
  double uniform_open() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Unbiased integer on [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

struct UniformBandwidth {
  double b_min_gbps = 1.0;
  double b_max_gbps = 100.0;
};

struct PoissonBandwidth {
  double b_avg_gbps = 100.0;
  double granule_ghz = 0.001;
};

struct ConstantBandwidth {
  double b_gbps = 100.0;
};

using DistributionSpec = std::variant<UniformBandwidth, PoissonBandwidth, ConstantBandwidth>;

std::string_view distribution_name(const DistributionSpec& spec);
void validate(const DistributionSpec& spec);

struct TrafficParams {
  double lambda_per_node = 0.02;
  double mu = 0.001;
  std::size_t node_count = 2;
};

struct Request {
  std::uint64_t id = 0;
  NodeId src = 0;
  NodeId dst = 0;
  double b_req_gbps = 0.0;
  double arrival_s = 0.0;
  double holding_s = 0.0;
};

/// Erlangs per node, lambda / mu.
double offered_load(const TrafficParams& params);

/// Inverse-CDF exponential: -ln(u) / rate.
double exponential_from_uniform(double u, double rate);

double next_interarrival(RngStream& rng, double total_rate);
double sample_holding(RngStream& rng, double mu);
std::pair<NodeId, NodeId> sample_endpoints(RngStream& rng, std::size_t node_count);

/// B_avg expressed in granules of `granule_ghz`, rounded to nearest.
std::uint64_t granules(double b_avg_gbps, double granule_ghz);

/// Poisson variate with the given mean. Multiplicative inversion for small
/// means, PTRS transformed rejection (Hormann 1993) from 10 upwards.
std::uint64_t sample_poisson(RngStream& rng, double mean);

double sample_bandwidth(RngStream& rng, const DistributionSpec& spec);

/// Produces the request stream of one run. Arrivals, endpoints, bandwidth and
/// holding times come from separate sub-streams so that a replicate sees the
/// same demands regardless of slot width.
class RequestGenerator {
 public:
  RequestGenerator(std::uint64_t run_seed, TrafficParams params, DistributionSpec dist);

  Request next();

 private:
  TrafficParams params_;
  DistributionSpec dist_;
  double total_rate_;
  double clock_ = 0.0;
  std::uint64_t next_id_ = 0;
  RngStream arrivals_;
  RngStream endpoints_;
  RngStream bandwidth_;
  RngStream holding_;
};

}  // namespace flexgrid
