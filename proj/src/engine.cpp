#include "flexgrid/engine.hpp"

#include <algorithm>
#include <functional>
#include <ostream>
#include <queue>
#include <sstream>
#include <unordered_map>
#include <variant>
#include <vector>

#include "flexgrid/format.hpp"
#include "flexgrid/metrics.hpp"
#include "flexgrid/rsa.hpp"
#include "flexgrid/spectrum.hpp"

namespace flexgrid {

namespace {

enum class EventKind : std::uint8_t { arrival, departure };

struct Event {
  double time_s;
  std::uint64_t sequence;
  EventKind kind;
  std::uint64_t id;  // request id for both kinds

  // Min-heap order on (time, sequence).
  bool operator>(const Event& o) const {
    return time_s != o.time_s ? time_s > o.time_s : sequence > o.sequence;
  }
};

struct Connection {
  ActiveConnection state;
  bool measured = false;
};

class Simulation {
 public:
  Simulation(const SimConfig& config, const RunOptions& options)
      : config_(config),
        options_(options),
        topology_(config.topology.with_link_bandwidth(config.link_bandwidth_ghz)),
        routes_(topology_, config.routing_metric),
        policy_{config.slot_width_ghz, config.guard_ghz},
        generator_(derive_seed(config.master_seed, config.run_index), config.traffic, config.dist),
        warmup_end_(config.warmup_multiplier / config.traffic.mu) {
    const auto slots = slot_count(config.link_bandwidth_ghz, config.slot_width_ghz);
    grids_.assign(topology_.links().size(), SlotGrid(config.slot_width_ghz, slots));
  }

  MetricsReport execute() {
    schedule_arrival();
    std::uint64_t processed = 0;
    while (!events_.empty()) {
      const Event ev = events_.top();
      events_.pop();
      if (ev.time_s < now_) fail("event queue popped out of time order");
      now_ = ev.time_s;
      if (ev.kind == EventKind::arrival) {
        on_arrival();
      } else {
        on_departure(ev.id);
      }
      ++processed;
      if (options_.check_interval != 0 && processed % options_.check_interval == 0) check_state();
    }
    if (options_.check_interval != 0) check_state();
    return finish();
  }

 private:
  void schedule(double time, EventKind kind, std::uint64_t id) {
    events_.push(Event{time, sequence_++, kind, id});
  }

  void schedule_arrival() {
    if (generated_ == config_.total_requests) return;
    pending_ = generator_.next();
    ++generated_;
    schedule(pending_.arrival_s, EventKind::arrival, pending_.id);
  }

  void on_arrival() {
    const Request req = pending_;
    schedule_arrival();

    const bool measured = req.arrival_s >= warmup_end_;
    if (measured) {
      ++report_.arrived;
      requested_.add(req.b_req_gbps);
      last_measured_ = req.arrival_s;
    }

    AdmissionResult result;
    try {
      result = admit(routes_, grids_, req, policy_, scratch_);
    } catch (const SpectrumError& e) {
      fail(e.what());
    }
    if (auto* blocked = std::get_if<Blocked>(&result)) {
      if (measured) {
        ++report_.blocked;
        blocked_.add(req.b_req_gbps);
      }
      trace("BLK", req, std::nullopt, blocked->demand.total());
      return;
    }
    auto& acc = std::get<Accepted>(result);
    const double departure = req.arrival_s + req.holding_s;
    if (!(departure > req.arrival_s)) fail("departure not after arrival");
    trace("ARR", req, acc.start_slot, acc.demand.total());
    active_.emplace(req.id, Connection{ActiveConnection{req, std::move(acc.path), acc.start_slot,
                                                        acc.demand, departure},
                                       measured});
    schedule(departure, EventKind::departure, req.id);
  }

  void on_departure(std::uint64_t id) {
    auto it = active_.find(id);
    if (it == active_.end()) fail("departure for unknown connection " + std::to_string(id));
    const Connection& conn = it->second;
    try {
      release(grids_, conn.state);
    } catch (const SpectrumError& e) {
      fail(e.what());
    }
    if (conn.measured) {
      const auto& s = conn.state;
      const double held = now_ - s.request.arrival_s;
      report_.used_bw_time_integral += s.request.b_req_gbps * held;
      report_.allocated_data_bw_time_integral +=
          static_cast<double>(s.demand.data_slots) * config_.slot_width_ghz * held;
      last_measured_departure_ = now_;
    }
    trace("DEP", conn.state.request, conn.state.start_slot, conn.state.demand.total());
    active_.erase(it);
  }

  void trace(const char* tag, const Request& r, std::optional<std::size_t> start,
             std::size_t slots) {
    if (options_.trace == nullptr) return;
    auto& out = *options_.trace;
    out << "t=" << format_double(now_) << ' ' << tag << " id=" << r.id << " src=" << r.src
        << " dst=" << r.dst << " bw=" << format_double(r.b_req_gbps) << " start=";
    if (start) {
      out << *start;
    } else {
      out << '-';
    }
    out << " n=" << slots << '\n';
  }

  // Conservation, ownership and continuity of every active connection,
  // derived from the per-link owner maps.
  void check_state() const {
    std::vector<std::size_t> expected(grids_.size(), 0);
    for (const auto& [id, conn] : active_) {
      const auto& s = conn.state;
      for (auto l : s.path.links) {
        expected[l] += s.demand.total();
        for (auto i = s.start_slot; i < s.start_slot + s.demand.total(); ++i) {
          if (grids_[l].owner(i) != id) {
            fail("connection " + std::to_string(id) + " lost slot " + std::to_string(i) +
                 " on link " + std::to_string(l));
          }
        }
      }
    }
    for (std::size_t l = 0; l < grids_.size(); ++l) {
      const auto& g = grids_[l];
      if (g.occupied().count() != expected[l]) {
        fail("slot conservation violated on link " + std::to_string(l));
      }
      for (std::size_t i = 0; i < g.total_slots(); ++i) {
        if (g.occupied().test(i) != (g.owner(i) != k_no_owner)) {
          fail("occupancy and owner map disagree on link " + std::to_string(l));
        }
      }
    }
  }

  [[noreturn]] void fail(const std::string& what) const {
    std::ostringstream msg;
    msg << what << " (t=" << now_ << ", active=" << active_.size() << ")\n"
        << occupancy_raster(grids_);
    throw SimulationError(msg.str());
  }

  MetricsReport finish() {
    report_.requested_gbps_sum = requested_.sum();
    report_.blocked_gbps_sum = blocked_.sum();
    report_.bp = blocking_probability(report_.blocked, report_.arrived);
    report_.bbp = bandwidth_blocking_probability(blocked_, requested_);
    report_.spectrum_efficiency = spectrum_efficiency(report_.used_bw_time_integral,
                                                      report_.allocated_data_bw_time_integral);
    const double start = std::max(warmup_end_, 0.0);
    const double end = std::max(last_measured_.value_or(start), last_measured_departure_);
    report_.measured_window = {start, std::max(start, end)};
    return report_;
  }

  const SimConfig& config_;
  const RunOptions& options_;
  Topology topology_;
  RoutingTable routes_;
  SpectrumPolicy policy_;
  RequestGenerator generator_;
  double warmup_end_;

  std::vector<SlotGrid> grids_;
  SlotMask scratch_;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> events_;
  std::unordered_map<std::uint64_t, Connection> active_;
  Request pending_;
  std::uint64_t generated_ = 0;
  std::uint64_t sequence_ = 0;
  double now_ = 0.0;

  MetricsReport report_;
  BandwidthTally requested_;
  BandwidthTally blocked_;
  std::optional<double> last_measured_;
  double last_measured_departure_ = 0.0;
};

}  // namespace

void SimConfig::validate() const {
  if (!(slot_width_ghz > 0.0)) throw std::invalid_argument("slot width must be positive");
  if (!(link_bandwidth_ghz > 0.0)) throw std::invalid_argument("link bandwidth must be positive");
  if (slot_width_ghz > link_bandwidth_ghz) {
    throw std::invalid_argument("slot width exceeds link bandwidth");
  }
  if (guard_ghz < 0.0) throw std::invalid_argument("guard band must be nonnegative");
  if (total_requests < 1) throw std::invalid_argument("total_requests must be at least 1");
  if (warmup_multiplier < 0.0) throw std::invalid_argument("warmup multiplier must be nonnegative");
  if (!(traffic.lambda_per_node > 0.0)) throw std::invalid_argument("lambda must be positive");
  if (!(traffic.mu > 0.0)) throw std::invalid_argument("mu must be positive");
  if (traffic.node_count != topology.node_count()) {
    throw std::invalid_argument("traffic node count does not match the topology");
  }
  if (topology.node_count() < 2) throw std::invalid_argument("topology needs at least two nodes");
  flexgrid::validate(dist);
}

MetricsReport run(const SimConfig& config, const RunOptions& options) {
  config.validate();
  Simulation sim(config, options);
  return sim.execute();
}

double erlang_b(std::size_t servers, double load_erlang) {
  if (servers < 1) throw std::invalid_argument("erlang_b needs at least one server");
  if (!(load_erlang > 0.0)) throw std::invalid_argument("erlang_b needs a positive load");
  double e = 1.0;
  for (std::size_t c = 1; c <= servers; ++c) {
    e = load_erlang * e / (static_cast<double>(c) + load_erlang * e);
  }
  return e;
}

}  // namespace flexgrid
