#include "flexgrid/metrics.hpp"

#include <algorithm>

#include "flexgrid/spectrum.hpp"

namespace flexgrid {

void BandwidthTally::add(double gbps) {
  if (count_ == 0) {
    first_ = gbps;
  } else if (gbps != first_) {
    uniform_ = false;
  }
  sum_ += gbps;
  ++count_;
}

std::optional<double> BandwidthTally::common_value() const {
  if (count_ == 0 || !uniform_) return std::nullopt;
  return first_;
}

std::optional<double> blocking_probability(std::size_t blocked, std::size_t arrived) {
  if (arrived == 0) return std::nullopt;
  return static_cast<double>(blocked) / static_cast<double>(arrived);
}

std::optional<double> bandwidth_blocking_probability(double blocked_gbps_sum,
                                                     double requested_gbps_sum) {
  if (!(requested_gbps_sum > 0.0)) return std::nullopt;
  return blocked_gbps_sum / requested_gbps_sum;
}

std::optional<double> bandwidth_blocking_probability(const BandwidthTally& blocked,
                                                     const BandwidthTally& requested) {
  if (blocked.count() == 0) return bandwidth_blocking_probability(0.0, requested.sum());
  const auto common = requested.common_value();
  if (common && blocked.common_value() == common) {
    return blocking_probability(blocked.count(), requested.count());
  }
  return bandwidth_blocking_probability(blocked.sum(), requested.sum());
}

std::optional<double> spectrum_efficiency(double used_bw_time_integral,
                                          double allocated_data_bw_time_integral) {
  if (!(allocated_data_bw_time_integral > 0.0)) return std::nullopt;
  // Slot counts snap quotients within 1e-9 of an integer, so the raw ratio
  // can exceed one by that much.
  return std::min(1.0, used_bw_time_integral / allocated_data_bw_time_integral);
}

double connection_efficiency(double b_req_gbps, double slot_width_ghz) {
  const auto demand = slots_required(b_req_gbps, slot_width_ghz, 0.0);
  return std::min(1.0, b_req_gbps / (static_cast<double>(demand.data_slots) * slot_width_ghz));
}

}  // namespace flexgrid
