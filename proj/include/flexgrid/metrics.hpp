#pragma once

#include <cstddef>
#include <optional>

namespace flexgrid {

/// Running sum of bandwidth values that also remembers whether every value
/// added so far was identical, so ratios of two tallies over the same
/// constant cancel exactly.
class BandwidthTally {
 public:
  void add(double gbps);

  double sum() const { return sum_; }
  std::size_t count() const { return count_; }
  /// The shared value when every added value was equal.
  std::optional<double> common_value() const;

 private:
  double sum_ = 0.0;
  std::size_t count_ = 0;
  double first_ = 0.0;
  bool uniform_ = true;
};

/// blocked / arrived; absent when nothing arrived.
std::optional<double> blocking_probability(std::size_t blocked, std::size_t arrived);

/// blocked / requested bandwidth; absent for a zero denominator.
std::optional<double> bandwidth_blocking_probability(double blocked_gbps_sum,
                                                     double requested_gbps_sum);
std::optional<double> bandwidth_blocking_probability(const BandwidthTally& blocked,
                                                     const BandwidthTally& requested);

/// Carried over allocated data-slot bandwidth, both time-integrated over
/// accepted connections. Guard slots appear in neither integral.
std::optional<double> spectrum_efficiency(double used_bw_time_integral,
                                          double allocated_data_bw_time_integral);

/// b_req / (data_slots * W) for a single connection.
double connection_efficiency(double b_req_gbps, double slot_width_ghz);

}  // namespace flexgrid
