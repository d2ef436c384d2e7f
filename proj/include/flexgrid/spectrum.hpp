#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "flexgrid/topology.hpp"
#include "flexgrid/traffic.hpp"

namespace flexgrid {

using ConnectionId = std::uint64_t;
inline constexpr ConnectionId k_no_owner = std::numeric_limits<ConnectionId>::max();

/// Raised when spectrum state would become inconsistent. Always an engine
/// bug; the run that hits it must be aborted.
class SpectrumError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Fixed-length bit set over slot indices. Bits past size() stay zero.
class SlotMask {
 public:
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  SlotMask() = default;
  explicit SlotMask(std::size_t size, bool value = false);
  static SlotMask from_indices(std::size_t size, std::span<const std::size_t> indices);

  std::size_t size() const { return size_; }
  bool test(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1U; }
  void set(std::size_t i) { words_[i >> 6] |= std::uint64_t{1} << (i & 63); }
  void reset(std::size_t i) { words_[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }
  void set_all();
  std::size_t count() const;
  bool none() const;

  /// First set bit at or after `from`, or npos.
  std::size_t find_set(std::size_t from) const;
  /// First clear bit at or after `from`, or size().
  std::size_t find_clear(std::size_t from) const;

  SlotMask& operator&=(const SlotMask& other);
  /// In-place `*this = ~other` and `*this &= ~other`, reusing storage.
  void assign_complement(const SlotMask& other);
  void and_complement(const SlotMask& other);
  SlotMask operator~() const;
  bool operator==(const SlotMask&) const = default;

  std::vector<std::size_t> indices() const;

 private:
  void clear_tail();

  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

struct SlotDemand {
  std::size_t data_slots = 1;
  std::size_t guard_slots = 0;

  std::size_t total() const { return data_slots + guard_slots; }
  bool operator==(const SlotDemand&) const = default;
};

/// Occupancy of one link: |slots| = floor(B_l / W), an occupancy bitmap and
/// the owning connection of every occupied slot.
class SlotGrid {
 public:
  SlotGrid(double slot_width_ghz, std::size_t total_slots);

  double slot_width_ghz() const { return slot_width_ghz_; }
  std::size_t total_slots() const { return occupied_.size(); }
  const SlotMask& occupied() const { return occupied_; }
  SlotMask free_mask() const { return ~occupied_; }
  ConnectionId owner(std::size_t slot) const { return owner_[slot]; }

  void occupy(std::size_t first, std::size_t count, ConnectionId id);
  void vacate(std::size_t first, std::size_t count, ConnectionId id);

  bool operator==(const SlotGrid&) const = default;

 private:
  double slot_width_ghz_;
  SlotMask occupied_;
  std::vector<ConnectionId> owner_;
};

struct ActiveConnection {
  Request request;
  Path path;
  std::size_t start_slot = 0;
  SlotDemand demand;
  double departure_s = 0.0;
};

/// floor(bandwidth / slot_width), tolerant to representation error in the
/// quotient. Throws std::invalid_argument if that is zero.
std::size_t slot_count(double bandwidth_ghz, double slot_width_ghz);

/// ceil(b_req / W) data slots plus ceil(guard / W) guard slots.
SlotDemand slots_required(double b_req_gbps, double slot_width_ghz, double guard_ghz);

/// Lowest s with [s, s + need) all set in `free_mask`.
std::optional<std::size_t> first_fit(const SlotMask& free_mask, std::size_t need);

/// Intersection of the free sets of `links`. Grids must agree in width and size.
SlotMask path_free_mask(const std::vector<SlotGrid>& grids, std::span<const LinkId> links);
void path_free_mask(const std::vector<SlotGrid>& grids, std::span<const LinkId> links,
                    SlotMask& out);

void allocate(std::vector<SlotGrid>& grids, const Path& path, std::size_t start,
              const SlotDemand& demand, ConnectionId id);
void release(std::vector<SlotGrid>& grids, const ActiveConnection& conn);

/// One line per link, 'X' for occupied and '.' for free slots.
std::string occupancy_raster(const std::vector<SlotGrid>& grids);

}  // namespace flexgrid
