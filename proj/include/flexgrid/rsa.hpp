#pragma once

#include <variant>
#include <vector>

#include "flexgrid/spectrum.hpp"
#include "flexgrid/topology.hpp"
#include "flexgrid/traffic.hpp"

namespace flexgrid {

struct Accepted {
  Path path;
  std::size_t start_slot = 0;
  SlotDemand demand;
};

enum class BlockReason { no_contiguous_run };

struct Blocked {
  BlockReason reason = BlockReason::no_contiguous_run;
  SlotDemand demand;
};

using AdmissionResult = std::variant<Accepted, Blocked>;

struct SpectrumPolicy {
  double slot_width_ghz = 12.5;
  double guard_ghz = 10.0;
};

/// Shortest-path routing plus first-fit assignment under the contiguity and
/// continuity constraints. On acceptance the slots are allocated to
/// `request.id` before returning; a blocked request leaves `grids` untouched.
AdmissionResult admit(const Topology& topology, std::vector<SlotGrid>& grids,
                      const Request& request, const SpectrumPolicy& policy,
                      RoutingMetric metric);

/// Same decision against a precomputed routing table; `scratch` holds the
/// path free mask between calls.
AdmissionResult admit(const RoutingTable& routes, std::vector<SlotGrid>& grids,
                      const Request& request, const SpectrumPolicy& policy, SlotMask& scratch);

}  // namespace flexgrid
