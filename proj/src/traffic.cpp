#include "flexgrid/traffic.hpp"

#include <cmath>
#include <tuple>

namespace flexgrid {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Sub-stream labels for RequestGenerator.
enum : std::uint64_t { k_arrivals = 1, k_endpoints = 2, k_bandwidth = 3, k_holding = 4 };

std::uint64_t poisson_inversion(RngStream& rng, double mean) {
  const double limit = std::exp(-mean);
  std::uint64_t k = 0;
  double prod = rng.uniform_open();
  while (prod > limit) {
    ++k;
    prod *= rng.uniform_open();
  }
  return k;
}

std::uint64_t poisson_ptrs(RngStream& rng, double mean) {
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = rng.uniform_open() - 0.5;
    const double v = rng.uniform_open();
    const double us = 0.5 - std::fabs(u);
    const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
        -mean + k * loglam - std::lgamma(k + 1.0)) {
      return static_cast<std::uint64_t>(k);
    }
  }
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t run_index) {
  return splitmix64(master_seed ^ splitmix64(run_index));
}

std::uint64_t RngStream::below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("RngStream::below: empty range");
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const std::uint64_t r = engine_();
    if (r >= threshold) return r % n;
  }
}

std::string_view distribution_name(const DistributionSpec& spec) {
  switch (spec.index()) {
    case 0: return "uniform";
    case 1: return "poisson";
    default: return "constant";
  }
}

void validate(const DistributionSpec& spec) {
  if (const auto* u = std::get_if<UniformBandwidth>(&spec)) {
    if (!(u->b_min_gbps > 0.0) || !(u->b_max_gbps > 0.0)) {
      throw std::invalid_argument("uniform bandwidth bounds must be positive");
    }
    if (u->b_min_gbps > u->b_max_gbps) {
      throw std::invalid_argument("uniform bandwidth requires b_min_gbps <= b_max_gbps");
    }
  } else if (const auto* p = std::get_if<PoissonBandwidth>(&spec)) {
    if (!(p->b_avg_gbps > 0.0)) throw std::invalid_argument("b_avg_gbps must be positive");
    if (!(p->granule_ghz > 0.0)) throw std::invalid_argument("granule must be positive");
    granules(p->b_avg_gbps, p->granule_ghz);
  } else {
    if (!(std::get<ConstantBandwidth>(spec).b_gbps > 0.0)) {
      throw std::invalid_argument("b_gbps must be positive");
    }
  }
}

double offered_load(const TrafficParams& params) { return params.lambda_per_node / params.mu; }

double exponential_from_uniform(double u, double rate) { return -std::log(u) / rate; }

double next_interarrival(RngStream& rng, double total_rate) {
  return exponential_from_uniform(rng.uniform_open(), total_rate);
}

double sample_holding(RngStream& rng, double mu) {
  return exponential_from_uniform(rng.uniform_open(), mu);
}

std::pair<NodeId, NodeId> sample_endpoints(RngStream& rng, std::size_t node_count) {
  if (node_count < 2) throw std::invalid_argument("sample_endpoints needs at least two nodes");
  const auto src = static_cast<NodeId>(rng.below(node_count));
  auto dst = static_cast<NodeId>(rng.below(node_count - 1));
  if (dst >= src) ++dst;
  return {src, dst};
}

std::uint64_t granules(double b_avg_gbps, double granule_ghz) {
  const double q = std::round(b_avg_gbps / granule_ghz);
  if (!(q >= 1.0)) {
    throw std::invalid_argument("average bandwidth is smaller than one granule");
  }
  return static_cast<std::uint64_t>(q);
}

std::uint64_t sample_poisson(RngStream& rng, double mean) {
  return mean < 10.0 ? poisson_inversion(rng, mean) : poisson_ptrs(rng, mean);
}

double sample_bandwidth(RngStream& rng, const DistributionSpec& spec) {
  if (const auto* u = std::get_if<UniformBandwidth>(&spec)) {
    return u->b_min_gbps + (u->b_max_gbps - u->b_min_gbps) * rng.uniform();
  }
  if (const auto* p = std::get_if<PoissonBandwidth>(&spec)) {
    const auto mean = static_cast<double>(granules(p->b_avg_gbps, p->granule_ghz));
    std::uint64_t k = 0;
    while (k == 0) k = sample_poisson(rng, mean);
    return static_cast<double>(k) * p->granule_ghz;
  }
  return std::get<ConstantBandwidth>(spec).b_gbps;
}

RequestGenerator::RequestGenerator(std::uint64_t run_seed, TrafficParams params,
                                   DistributionSpec dist)
    : params_(params),
      dist_(dist),
      total_rate_(static_cast<double>(params.node_count) * params.lambda_per_node),
      arrivals_(run_seed, k_arrivals),
      endpoints_(run_seed, k_endpoints),
      bandwidth_(run_seed, k_bandwidth),
      holding_(run_seed, k_holding) {
  if (!(params_.lambda_per_node > 0.0)) throw std::invalid_argument("lambda must be positive");
  if (!(params_.mu > 0.0)) throw std::invalid_argument("mu must be positive");
  if (params_.node_count < 2) throw std::invalid_argument("traffic needs at least two nodes");
  validate(dist_);
}

Request RequestGenerator::next() {
  Request r;
  r.id = next_id_++;
  clock_ += next_interarrival(arrivals_, total_rate_);
  r.arrival_s = clock_;
  std::tie(r.src, r.dst) = sample_endpoints(endpoints_, params_.node_count);
  r.b_req_gbps = sample_bandwidth(bandwidth_, dist_);
  r.holding_s = sample_holding(holding_, params_.mu);
  return r;
}

}  // namespace flexgrid
