#include "flexgrid/spectrum.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace flexgrid {

namespace {

constexpr double k_quotient_tolerance = 1e-9;

// Integer nearest to q when q is within rounding noise of it.
std::optional<double> snapped(double q) {
  const double r = std::round(q);
  if (std::fabs(q - r) <= k_quotient_tolerance * std::max(1.0, q)) return r;
  return std::nullopt;
}

std::size_t floor_quotient(double num, double den) {
  const double q = num / den;
  return static_cast<std::size_t>(snapped(q).value_or(std::floor(q)));
}

std::size_t ceil_quotient(double num, double den) {
  const double q = num / den;
  return static_cast<std::size_t>(snapped(q).value_or(std::ceil(q)));
}

std::string connection_label(ConnectionId id) { return "connection " + std::to_string(id); }

}  // namespace

SlotMask::SlotMask(std::size_t size, bool value) : size_(size), words_((size + 63) / 64, 0) {
  if (value) set_all();
}

SlotMask SlotMask::from_indices(std::size_t size, std::span<const std::size_t> indices) {
  SlotMask m(size);
  for (auto i : indices) m.set(i);
  return m;
}

void SlotMask::set_all() {
  std::fill(words_.begin(), words_.end(), ~std::uint64_t{0});
  clear_tail();
}

void SlotMask::clear_tail() {
  if (size_ % 64 != 0) words_.back() &= (std::uint64_t{1} << (size_ % 64)) - 1;
}

std::size_t SlotMask::count() const {
  std::size_t n = 0;
  for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

bool SlotMask::none() const {
  return std::all_of(words_.begin(), words_.end(), [](auto w) { return w == 0; });
}

std::size_t SlotMask::find_set(std::size_t from) const {
  if (from >= size_) return npos;
  std::size_t wi = from >> 6;
  std::uint64_t w = words_[wi] & (~std::uint64_t{0} << (from & 63));
  while (w == 0) {
    if (++wi == words_.size()) return npos;
    w = words_[wi];
  }
  return (wi << 6) + static_cast<std::size_t>(std::countr_zero(w));
}

std::size_t SlotMask::find_clear(std::size_t from) const {
  if (from >= size_) return size_;
  std::size_t wi = from >> 6;
  std::uint64_t w = ~words_[wi] & (~std::uint64_t{0} << (from & 63));
  while (w == 0) {
    if (++wi == words_.size()) return size_;
    w = ~words_[wi];
  }
  return std::min(size_, (wi << 6) + static_cast<std::size_t>(std::countr_zero(w)));
}

SlotMask& SlotMask::operator&=(const SlotMask& other) {
  if (other.size_ != size_) throw SpectrumError("slot mask size mismatch");
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= other.words_[i];
  return *this;
}

void SlotMask::assign_complement(const SlotMask& other) {
  size_ = other.size_;
  words_.resize(other.words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] = ~other.words_[i];
  clear_tail();
}

void SlotMask::and_complement(const SlotMask& other) {
  if (other.size_ != size_) throw SpectrumError("slot mask size mismatch");
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= ~other.words_[i];
}

SlotMask SlotMask::operator~() const {
  SlotMask m = *this;
  for (auto& w : m.words_) w = ~w;
  m.clear_tail();
  return m;
}

std::vector<std::size_t> SlotMask::indices() const {
  std::vector<std::size_t> out;
  for (auto i = find_set(0); i != npos; i = find_set(i + 1)) out.push_back(i);
  return out;
}

SlotGrid::SlotGrid(double slot_width_ghz, std::size_t total_slots)
    : slot_width_ghz_(slot_width_ghz), occupied_(total_slots), owner_(total_slots, k_no_owner) {}

void SlotGrid::occupy(std::size_t first, std::size_t count, ConnectionId id) {
  if (first + count > total_slots()) {
    throw SpectrumError(connection_label(id) + " exceeds the slot grid");
  }
  for (std::size_t i = first; i < first + count; ++i) {
    if (occupied_.test(i)) {
      throw SpectrumError("occupancy conflict: slot " + std::to_string(i) + " held by " +
                          connection_label(owner_[i]) + ", requested by " +
                          connection_label(id));
    }
  }
  for (std::size_t i = first; i < first + count; ++i) {
    occupied_.set(i);
    owner_[i] = id;
  }
}

void SlotGrid::vacate(std::size_t first, std::size_t count, ConnectionId id) {
  if (first + count > total_slots()) {
    throw SpectrumError(connection_label(id) + " exceeds the slot grid");
  }
  for (std::size_t i = first; i < first + count; ++i) {
    if (owner_[i] != id) {
      throw SpectrumError("ownership mismatch: slot " + std::to_string(i) + " is not held by " +
                          connection_label(id));
    }
  }
  for (std::size_t i = first; i < first + count; ++i) {
    occupied_.reset(i);
    owner_[i] = k_no_owner;
  }
}

std::size_t slot_count(double bandwidth_ghz, double slot_width_ghz) {
  if (!(bandwidth_ghz > 0.0) || !(slot_width_ghz > 0.0)) {
    throw std::invalid_argument("bandwidth and slot width must be positive");
  }
  const auto n = floor_quotient(bandwidth_ghz, slot_width_ghz);
  if (n == 0) {
    throw std::invalid_argument("slot width exceeds link bandwidth (zero slots)");
  }
  return n;
}

SlotDemand slots_required(double b_req_gbps, double slot_width_ghz, double guard_ghz) {
  if (!(b_req_gbps > 0.0) || !(slot_width_ghz > 0.0) || guard_ghz < 0.0) {
    throw std::invalid_argument("slots_required: invalid arguments");
  }
  SlotDemand d;
  d.data_slots = std::max<std::size_t>(1, ceil_quotient(b_req_gbps, slot_width_ghz));
  d.guard_slots = guard_ghz > 0.0 ? ceil_quotient(guard_ghz, slot_width_ghz) : 0;
  return d;
}

std::optional<std::size_t> first_fit(const SlotMask& free_mask, std::size_t need) {
  if (need == 0) throw std::invalid_argument("first_fit: need must be positive");
  std::size_t pos = 0;
  while (pos + need <= free_mask.size()) {
    const auto start = free_mask.find_set(pos);
    if (start == SlotMask::npos || start + need > free_mask.size()) return std::nullopt;
    const auto end = free_mask.find_clear(start);
    if (end - start >= need) return start;
    pos = end;
  }
  return std::nullopt;
}

void path_free_mask(const std::vector<SlotGrid>& grids, std::span<const LinkId> links,
                    SlotMask& out) {
  if (links.empty()) throw SpectrumError("path_free_mask: empty path");
  const SlotGrid& first = grids.at(links.front());
  out.assign_complement(first.occupied());
  for (auto id : links.subspan(1)) {
    const SlotGrid& g = grids.at(id);
    if (g.total_slots() != first.total_slots() || g.slot_width_ghz() != first.slot_width_ghz()) {
      throw SpectrumError("path_free_mask: mismatched grid dimensions");
    }
    out.and_complement(g.occupied());
  }
}

SlotMask path_free_mask(const std::vector<SlotGrid>& grids, std::span<const LinkId> links) {
  SlotMask out;
  path_free_mask(grids, links, out);
  return out;
}

void allocate(std::vector<SlotGrid>& grids, const Path& path, std::size_t start,
              const SlotDemand& demand, ConnectionId id) {
  // Check every link first so a conflict leaves no partial allocation.
  for (auto l : path.links) {
    const SlotGrid& g = grids.at(l);
    if (start + demand.total() > g.total_slots()) {
      throw SpectrumError(connection_label(id) + " exceeds the slot grid on link " +
                          std::to_string(l));
    }
    for (auto i = start; i < start + demand.total(); ++i) {
      if (g.occupied().test(i)) {
        throw SpectrumError("occupancy conflict on link " + std::to_string(l) + " slot " +
                            std::to_string(i) + " for " + connection_label(id));
      }
    }
  }
  for (auto l : path.links) grids[l].occupy(start, demand.total(), id);
}

void release(std::vector<SlotGrid>& grids, const ActiveConnection& conn) {
  const auto id = conn.request.id;
  for (auto l : conn.path.links) {
    const SlotGrid& g = grids.at(l);
    for (auto i = conn.start_slot; i < conn.start_slot + conn.demand.total(); ++i) {
      if (i >= g.total_slots() || g.owner(i) != id) {
        throw SpectrumError("ownership mismatch on link " + std::to_string(l) + " slot " +
                            std::to_string(i) + " for " + connection_label(id));
      }
    }
  }
  for (auto l : conn.path.links) grids[l].vacate(conn.start_slot, conn.demand.total(), id);
}

std::string occupancy_raster(const std::vector<SlotGrid>& grids) {
  std::string out;
  for (const auto& g : grids) {
    for (std::size_t i = 0; i < g.total_slots(); ++i) out += g.occupied().test(i) ? 'X' : '.';
    out += '\n';
  }
  return out;
}

}  // namespace flexgrid
