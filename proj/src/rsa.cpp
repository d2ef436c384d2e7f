#include "flexgrid/rsa.hpp"

namespace flexgrid {

namespace {

AdmissionResult admit_on_path(const Path& path, std::vector<SlotGrid>& grids,
                              const Request& request, const SpectrumPolicy& policy,
                              SlotMask& scratch) {
  const auto demand = slots_required(request.b_req_gbps, policy.slot_width_ghz, policy.guard_ghz);
  path_free_mask(grids, path.links, scratch);
  const auto start = first_fit(scratch, demand.total());
  if (!start) return Blocked{BlockReason::no_contiguous_run, demand};
  allocate(grids, path, *start, demand, request.id);
  return Accepted{path, *start, demand};
}

}  // namespace

AdmissionResult admit(const Topology& topology, std::vector<SlotGrid>& grids,
                      const Request& request, const SpectrumPolicy& policy,
                      RoutingMetric metric) {
  SlotMask scratch;
  return admit_on_path(shortest_path(topology, request.src, request.dst, metric), grids, request,
                       policy, scratch);
}

AdmissionResult admit(const RoutingTable& routes, std::vector<SlotGrid>& grids,
                      const Request& request, const SpectrumPolicy& policy, SlotMask& scratch) {
  return admit_on_path(routes.path(request.src, request.dst), grids, request, policy, scratch);
}

}  // namespace flexgrid
