#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "tcal/microsim.hpp"
#include "tcal/simd.hpp"

namespace tcal::sim {

namespace {

constexpr double kWaitingSpeed = 0.1;
constexpr double kStopReach = 0.5;
constexpr double kFreeGap = 1e9;
constexpr double kEps = 1e-9;

}  // namespace

std::string_view to_string(VehicleKind k) noexcept { return k == VehicleKind::bus ? "bus" : "car"; }

void check_config(const SimConfig& c) {
  auto fail = [](const std::string& msg) { throw ConfigError("sim config: " + msg); };
  if (!(std::isfinite(c.begin) && c.begin >= 0)) fail("begin must be >= 0");
  if (!(c.end > c.begin)) fail("end must be greater than begin");
  if (!(c.end <= kDaySeconds)) fail("end must not exceed one day (86400 s)");
  if (!(c.step_length > 0 && c.step_length <= 60)) fail("step_length must lie in (0, 60]");
  if (!(c.ignore_junction_blocker >= 0)) fail("ignore_junction_blocker must be >= 0");
  if (!(c.time_to_teleport > 0)) fail("time_to_teleport must be > 0");
  if (!(c.rerouting_probability >= 0 && c.rerouting_probability <= 1))
    fail("rerouting_probability must lie in [0, 1]");
  if (!(c.rerouting_period > 0)) fail("rerouting_period must be > 0");
  if (!(c.actuation_max_gap >= 0)) fail("actuation_max_gap must be >= 0");
  if (!(c.actuation_zone > 0)) fail("actuation_zone must be > 0");
  if (!(c.speed_smoothing > 0 && c.speed_smoothing <= 1)) fail("speed_smoothing must lie in (0, 1]");
  if (!(c.edge_cost_interval > 0 && c.edge_cost_interval <= kDaySeconds)) fail("edge_cost_interval must lie in (0, 86400]");
  check_params(c.car, "car");
  check_params(c.bus, "bus");
}

Simulation::Simulation(const net::RoadNetwork& net, std::vector<demand::VehicleRoute> routes,
                       std::vector<BusLine> bus_lines, std::vector<Detector> detectors, SimConfig config)
    : net_(&net), cfg_(std::move(config)) {
  check_config(cfg_);
  sim_key_ = substream_seed(cfg_.seed, "sim");
  const std::uint64_t equip_key = substream_seed(cfg_.seed, "rerouting");
  const std::size_t n_edges = net.edge_count();

  lane_offset_.resize(n_edges + 1, 0);
  for (EdgeIdx e = 0; e < n_edges; ++e) {
    lane_offset_[e] = lanes_.size();
    const int count = std::max(1, net.edge(e).lane_count);
    for (int l = 0; l < count; ++l) lanes_.push_back(Lane{e, {}, UINT32_MAX, 0});
  }
  lane_offset_[n_edges] = lanes_.size();

  std::size_t max_in = 0;
  for (std::size_t i = 0; i < net.tls_programs().size(); ++i) {
    const auto& prog = net.tls_programs()[i];
    tls_.emplace_back(prog, cfg_.actuation_max_gap, cfg_.begin);
    const auto j = net.find_junction(prog.junction_id);
    if (!j) throw DanglingReference(prog.junction_id, "signal program");
    tls_junction_.push_back(*j);
    max_in = std::max(max_in, net.incoming(*j).size());
  }
  occupied_ = std::make_unique<bool[]>(max_in + 1);
  edge_tls_.assign(n_edges, -1);
  for (EdgeIdx e = 0; e < n_edges; ++e) edge_tls_[e] = net.tls_index(net.to_junction(e));

  std::sort(detectors.begin(), detectors.end(), [](const Detector& a, const Detector& b) { return a.id < b.id; });
  edge_detectors_.resize(n_edges);
  for (std::size_t i = 0; i < detectors.size(); ++i) {
    const Detector& d = detectors[i];
    if (i > 0 && detectors[i - 1].id == d.id) throw ConfigError("duplicate detector id '" + d.id + "'");
    const EdgeIdx e = net.edge_index(d.edge_id);
    const auto& edge = net.edge(e);
    if (d.lane < -1 || d.lane >= std::max(1, edge.lane_count))
      throw ConfigError("detector '" + d.id + "': lane out of range");
    if (!(d.position >= 0 && d.position <= edge.length))
      throw ConfigError("detector '" + d.id + "': position outside its edge");
    const double windows = kDaySeconds / d.window;
    if (!(d.window > 0) || std::abs(windows - std::round(windows)) > 1e-9)
      throw ConfigError("detector '" + d.id + "': window must divide one day");
    detectors_.push_back(DetectorRt{d, e, std::vector<double>(static_cast<std::size_t>(std::round(windows)), 0.0)});
    edge_detectors_[e].push_back(i);
  }

  edge_parking_.assign(n_edges, -1);
  for (std::size_t i = 0; i < net.parking_areas().size(); ++i) {
    const auto& pa = net.parking_areas()[i];
    const EdgeIdx e = net.edge_index(pa.edge_id);
    if (edge_parking_[e] < 0) edge_parking_[e] = static_cast<int>(i);
    parking_occupancy_.push_back(pa.initial_occupancy);
  }

  auto check_route = [&](const std::string& id, const std::vector<EdgeIdx>& r) {
    if (r.empty()) throw ConfigError("route of '" + id + "' is empty");
    for (std::size_t k = 0; k < r.size(); ++k) {
      if (r[k] >= n_edges) throw ConfigError("route of '" + id + "' names an unknown edge");
      if (k == 0) continue;
      const auto succ = net.successors(r[k - 1]);
      if (std::find(succ.begin(), succ.end(), r[k]) == succ.end())
        throw ConfigError("route of '" + id + "' is not connected at '" + net.edge(r[k]).id + "'");
    }
  };
  auto check_depart = [](const std::string& id, double t) {
    if (!(std::isfinite(t) && t >= 0)) throw ConfigError("vehicle '" + id + "' has an invalid depart time");
  };

  for (auto& r : routes) {
    check_route(r.trip_id, r.edges);
    check_depart(r.trip_id, r.depart);
    VehicleState v;
    v.id = std::move(r.trip_id);
    v.route = std::move(r.edges);
    v.depart = r.depart;
    const std::uint64_t serial = vehicles_.size();
    v.equipped = r.equipped || uniform01(equip_key, serial) < cfg_.rerouting_probability;
    vehicles_.push_back(std::move(v));
    bus_stops_.emplace_back();
    bus_dwell_.push_back(0.0);
  }

  std::unordered_map<std::string, const net::BusStop*> stop_by_id;
  for (const auto& s : net.bus_stops()) stop_by_id.emplace(s.id, &s);
  for (const auto& line : bus_lines) {
    std::vector<EdgeIdx> route;
    for (const auto& id : line.route) route.push_back(net.edge_index(id));
    check_route(line.id, route);
    if (!(line.dwell >= 0)) throw ConfigError("bus line '" + line.id + "': dwell must be >= 0");
    std::vector<BusStopPlan> stops;
    std::size_t from = 0;
    double last_pos = -1.0;
    for (const auto& sid : line.stop_sequence) {
      const auto it = stop_by_id.find(sid);
      if (it == stop_by_id.end()) throw DanglingReference(sid, "bus line '" + line.id + "'");
      const EdgeIdx e = net.edge_index(it->second->edge_id);
      std::size_t k = from;
      while (k < route.size() && (route[k] != e || (k == from && it->second->position < last_pos))) ++k;
      if (k == route.size())
        throw ConfigError("bus line '" + line.id + "': stop '" + sid + "' is not on the route in order");
      stops.push_back({k, it->second->position});
      from = k;
      last_pos = it->second->position;
    }
    for (std::size_t k = 0; k < line.departures.size(); ++k) {
      VehicleState v;
      v.id = line.id + "." + std::to_string(k);
      check_depart(v.id, line.departures[k]);
      v.route = route;
      v.depart = line.departures[k];
      v.kind = VehicleKind::bus;
      vehicles_.push_back(std::move(v));
      bus_stops_.push_back(stops);
      bus_dwell_.push_back(line.dwell);
    }
  }
  if (vehicles_.size() >= UINT32_MAX) throw ConfigError("too many vehicles");

  const std::size_t n = vehicles_.size();
  plan_.resize(n);
  next_speed_.assign(n, 0.0);
  entered_at_.assign(n, 0.0);
  blocked_since_.assign(n, kInf);
  moved_.assign(n, 0);
  next_stop_.assign(n, 0);
  dwell_until_.assign(n, -kInf);
  next_reroute_.assign(n, kInf);
  schedule_.resize(n);
  std::iota(schedule_.begin(), schedule_.end(), 0u);
  std::stable_sort(schedule_.begin(), schedule_.end(), [&](std::uint32_t a, std::uint32_t b) {
    const auto& va = vehicles_[a];
    const auto& vb = vehicles_[b];
    return std::tie(va.depart, va.id) < std::tie(vb.depart, vb.id);
  });

  speed_sum_.assign(n_edges, 0.0);
  speed_samples_.assign(n_edges, 0);
  est_speed_.resize(n_edges);
  est_cost_.resize(n_edges);
  for (EdgeIdx e = 0; e < n_edges; ++e) {
    const auto& edge = net.edge(e);
    est_speed_[e] = edge.speed_limit;
    est_cost_[e] = edge.bus_only ? kInf : net::free_flow_time(edge);
  }
  next_estimate_ = cfg_.begin + cfg_.rerouting_period;
  router_.emplace(net);
  traverse_sum_.assign(n_edges, 0.0);
  traverse_count_.assign(n_edges, 0);
  bins_ = static_cast<std::size_t>(std::ceil(kDaySeconds / cfg_.edge_cost_interval));
  bin_sum_.assign(n_edges * bins_, 0.0);
  bin_count_.assign(n_edges * bins_, 0);

  running_.assign(static_cast<std::size_t>(std::ceil((cfg_.end - cfg_.begin) / 60.0 - kEps)), 0);
  time_ = cfg_.begin;
  insert_departures(time_);
  reroute(time_);
  sample_running(time_);
}

const CarFollowParams& Simulation::params(const VehicleState& v) const noexcept {
  return v.kind == VehicleKind::bus ? cfg_.bus : cfg_.car;
}

const std::deque<std::uint32_t>& Simulation::lane_occupants(EdgeIdx e, int lane) const {
  return lanes_.at(lane_id(e, lane)).queue;
}

double Simulation::lane_length(std::size_t lane) const { return net_->edge(lanes_[lane].edge).length; }

double Simulation::free_entry(std::size_t lane) const {
  const auto& q = lanes_[lane].queue;
  if (q.empty()) return lane_length(lane);
  const auto& last = vehicles_[q.back()];
  return last.position - params(last).veh_length;
}

std::size_t Simulation::best_lane(EdgeIdx e) const {
  std::size_t best = lane_offset_[e];
  double room = free_entry(best);
  for (std::size_t l = best + 1; l < lane_offset_[e + 1]; ++l) {
    const double r = free_entry(l);
    if (r > room) {
      room = r;
      best = l;
    }
  }
  return best;
}

std::optional<Simulation::Ghost> Simulation::overhang(std::size_t lane) const {
  const Lane& ln = lanes_[lane];
  if (ln.exit_vehicle == UINT32_MAX) return std::nullopt;
  const auto& v = vehicles_[ln.exit_vehicle];
  if (v.status != VehicleState::Status::running || v.route_index != ln.exit_route_index) return std::nullopt;
  const double len = params(v).veh_length;
  if (v.position >= len) return std::nullopt;
  return Ghost{lane_length(lane) + v.position - len, v.speed};
}

char Simulation::signal_for(EdgeIdx e) const {
  const int t = edge_tls_[e];
  if (t < 0) return 'G';
  return tls_[static_cast<std::size_t>(t)].signal(net_->approach_index(e));
}

bool Simulation::finished() const noexcept { return time_ + 0.5 * cfg_.step_length > cfg_.end; }

void Simulation::step() {
  if (finished()) return;
  const double now = time_;
  const double next = cfg_.begin + static_cast<double>(step_ + 1) * cfg_.step_length;
  update_signals(now);
  compute_speeds(now);
  advance(now, next);
  ++step_;
  time_ = next;
  teleports(next);
  insert_departures(next);
  reroute(next);
  sample_running(next);
}

SimOutput Simulation::run_to_end() {
  while (!finished()) step();
  return output();
}

void Simulation::update_signals(double now) {
  for (std::size_t i = 0; i < tls_.size(); ++i) {
    const auto in = net_->incoming(tls_junction_[i]);
    if (tls_[i].program().logic == net::TlsLogic::actuated) {
      for (std::size_t k = 0; k < in.size(); ++k) {
        const EdgeIdx e = in[k];
        const double zone_start = net_->edge(e).length - cfg_.actuation_zone;
        bool occ = false;
        for (std::size_t l = lane_offset_[e]; l < lane_offset_[e + 1] && !occ; ++l) {
          const auto& q = lanes_[l].queue;
          occ = !q.empty() && vehicles_[q.front()].position >= zone_start;
        }
        occupied_[k] = occ;
      }
    }
    tls_[i].update(now, std::span<const bool>(occupied_.get(), in.size()));
  }
}

void Simulation::compute_speeds(double now) {
  for (int k = 0; k < 2; ++k) {
    batch_ids_[k].clear();
    b_speed_[k].clear();
    b_leader_[k].clear();
    b_gap_[k].clear();
    b_vmax_[k].clear();
    b_rand_[k].clear();
  }

  for (std::size_t li = 0; li < lanes_.size(); ++li) {
    const Lane& lane = lanes_[li];
    if (lane.queue.empty()) continue;
    const auto& edge = net_->edge(lane.edge);
    for (std::size_t qi = 0; qi < lane.queue.size(); ++qi) {
      const std::uint32_t id = lane.queue[qi];
      VehicleState& v = vehicles_[id];
      const CarFollowParams& p = params(v);
      Plan& plan = plan_[id];
      plan = Plan{};

      double best_eff = kInf, gap = kFreeGap, lead = 0.0;
      auto consider = [&](double g, double vl) {
        const double eff = g + vl * vl / (2.0 * p.decel);
        if (eff < best_eff) {
          best_eff = eff;
          gap = g;
          lead = vl;
        }
      };

      if (qi > 0) {
        const auto& leader = vehicles_[lane.queue[qi - 1]];
        consider(leader.position - params(leader).veh_length - v.position - p.min_gap, leader.speed);
      } else {
        if (const auto ghost = overhang(li)) consider(ghost->back - v.position - p.min_gap, ghost->speed);
        if (v.route_index + 1 < v.route.size()) {
          const double dist = edge.length - v.position;
          const char sig = signal_for(lane.edge);
          const bool stop = sig == 'r' || (sig == 'y' && v.speed * v.speed / (2.0 * p.decel) <= dist);
          if (!stop) {
            const std::size_t target = best_lane(v.route[v.route_index + 1]);
            const double room = free_entry(target);
            const bool override_blocker = now - blocked_since_[id] >= cfg_.ignore_junction_blocker;
            const double need = override_blocker ? p.min_gap : p.veh_length + p.min_gap;
            const auto& tq = lanes_[target].queue;
            // A moving tail on the target lane is followed across the line.
            const bool flowing = !tq.empty() && vehicles_[tq.back()].speed >= kWaitingSpeed;
            if (room >= need || (flowing && room >= p.min_gap)) {
              plan.may_cross = true;
              plan.target_lane = target;
              if (!tq.empty()) {
                const auto& last = vehicles_[tq.back()];
                consider(dist + room - p.min_gap, last.speed);
              }
            } else {
              plan.held = true;
            }
          }
          if (!plan.may_cross) consider(dist, 0.0);
        }
      }

      if (v.kind == VehicleKind::bus) {
        if (now < dwell_until_[id]) {
          consider(0.0, 0.0);
        } else if (next_stop_[id] < bus_stops_[id].size() &&
                   bus_stops_[id][next_stop_[id]].route_index == v.route_index) {
          consider(bus_stops_[id][next_stop_[id]].position - v.position, 0.0);
        }
      }

      const int k = v.kind == VehicleKind::bus ? 1 : 0;
      v.v_cap = std::min(p.v_max, edge.speed_limit);
      batch_ids_[k].push_back(id);
      b_speed_[k].push_back(v.speed);
      b_leader_[k].push_back(lead);
      b_gap_[k].push_back(gap);
      b_vmax_[k].push_back(v.v_cap);
      b_rand_[k].push_back(uniform01(sim_key_, id, step_));
    }
  }

  for (int k = 0; k < 2; ++k) {
    const std::size_t n = batch_ids_[k].size();
    if (n == 0) continue;
    const CarFollowParams& p = k == 1 ? cfg_.bus : cfg_.car;
    b_out_[k].resize(n);
    simd::krauss_batch({p.accel, p.decel, p.tau, p.sigma, cfg_.step_length}, b_speed_[k], b_leader_[k],
                       b_gap_[k], b_vmax_[k], b_rand_[k], b_out_[k]);
    for (std::size_t i = 0; i < n; ++i) next_speed_[batch_ids_[k][i]] = b_out_[k][i];
  }
}

void Simulation::count_detectors(EdgeIdx e, int lane, std::uint32_t, double from, double to, double now,
                                 double next) {
  for (std::size_t di : edge_detectors_[e]) {
    DetectorRt& d = detectors_[di];
    if (d.def.lane != -1 && d.def.lane != lane) continue;
    if (!(from < d.def.position && d.def.position <= to)) continue;
    const double t = now + (next - now) * (d.def.position - from) / (to - from);
    const auto w = static_cast<std::size_t>(std::floor(t / d.def.window));
    if (w < d.counts.size()) d.counts[w] += 1.0;
  }
}

void Simulation::leave_edge(std::uint32_t id, double when) {
  const EdgeIdx e = vehicles_[id].route[vehicles_[id].route_index];
  traverse_sum_[e] += when - entered_at_[id];
  ++traverse_count_[e];
  const auto b = std::min(bins_ - 1, static_cast<std::size_t>(std::max(0.0, entered_at_[id]) / cfg_.edge_cost_interval));
  bin_sum_[e * bins_ + b] += when - entered_at_[id];
  ++bin_count_[e * bins_ + b];
}

void Simulation::enter_edge(std::uint32_t id, std::size_t route_index, std::size_t lane, double pos,
                            double when) {
  VehicleState& v = vehicles_[id];
  v.route_index = route_index;
  v.lane = static_cast<int>(lane - lane_offset_[lanes_[lane].edge]);
  v.position = pos;
  lanes_[lane].queue.push_back(id);
  entered_at_[id] = when;
  v.free_time += net::free_flow_time(net_->edge(v.route[route_index]));
  v.driven_length += net_->edge(v.route[route_index]).length;
  blocked_since_[id] = kInf;
}

void Simulation::arrive(std::uint32_t id, double when, bool completed_edge) {
  VehicleState& v = vehicles_[id];
  const EdgeIdx e = v.route[v.route_index];
  if (completed_edge) leave_edge(id, when);
  v.status = VehicleState::Status::arrived;
  v.arrived_at = when;
  v.lane = -1;
  v.speed = 0.0;
  ++arrived_;
  if (v.route_index + 1 == v.route.size()) {
    const int pa = edge_parking_[e];
    if (pa >= 0) {
      const auto cap = net_->parking_areas()[static_cast<std::size_t>(pa)].capacity;
      if (parking_occupancy_[static_cast<std::size_t>(pa)] < cap) ++parking_occupancy_[static_cast<std::size_t>(pa)];
    }
  }
}

void Simulation::advance(double now, double next) {
  const double dt = cfg_.step_length;
  const std::uint64_t stamp = step_ + 1;
  std::vector<std::uint32_t> snapshot;

  for (std::size_t li = 0; li < lanes_.size(); ++li) {
    if (lanes_[li].queue.empty()) continue;
    const EdgeIdx e = lanes_[li].edge;
    const double len = net_->edge(e).length;
    const int lane_local = static_cast<int>(li - lane_offset_[e]);
    snapshot.assign(lanes_[li].queue.begin(), lanes_[li].queue.end());

    double limit_ahead = kInf;
    if (const auto ghost = overhang(li)) limit_ahead = ghost->back;

    for (const std::uint32_t id : snapshot) {
      if (moved_[id] == stamp) continue;
      moved_[id] = stamp;
      VehicleState& v = vehicles_[id];
      const CarFollowParams& p = params(v);
      const Plan& plan = plan_[id];
      const bool last_edge = v.route_index + 1 == v.route.size();
      const double old = v.position;
      const double want = old + next_speed_[id] * dt;

      double limit = limit_ahead;
      const bool has_stop = v.kind == VehicleKind::bus && next_stop_[id] < bus_stops_[id].size() &&
                            bus_stops_[id][next_stop_[id]].route_index == v.route_index;
      if (has_stop) limit = std::min(limit, bus_stops_[id][next_stop_[id]].position);
      if (!plan.may_cross && !last_edge) limit = std::min(limit, len);
      const double pos = std::max(old, std::min(want, limit));
      double moved_by = pos - old;

      if (pos > len && last_edge) {
        count_detectors(e, lane_local, id, old, pos, now, next);
        lanes_[li].queue.pop_front();
        v.speed = next_speed_[id];
        arrive(id, next);
        limit_ahead = len;
        continue;
      }

      bool crossed = false;
      if (pos > len && plan.may_cross) {
        const std::size_t target = plan.target_lane;
        const std::size_t ri = v.route_index + 1;
        double entry = std::min({pos - len, free_entry(target), lane_length(target)});
        if (v.kind == VehicleKind::bus && next_stop_[id] < bus_stops_[id].size() &&
            bus_stops_[id][next_stop_[id]].route_index == ri)
          entry = std::min(entry, bus_stops_[id][next_stop_[id]].position);
        if (entry > 0) {
          count_detectors(e, lane_local, id, old, len, now, next);
          lanes_[li].queue.pop_front();
          leave_edge(id, next);
          lanes_[li].exit_vehicle = id;
          lanes_[li].exit_route_index = ri;
          enter_edge(id, ri, target, entry, next);
          const EdgeIdx ne = lanes_[target].edge;
          count_detectors(ne, v.lane, id, old - len, entry, now, next);
          moved_by = len - old + entry;
          limit_ahead = std::min(len, len + entry - p.veh_length);
          crossed = true;
        } else {
          moved_by = len - old;
        }
      }
      if (!crossed) {
        const double stay = std::min(pos, len);
        count_detectors(e, lane_local, id, old, stay, now, next);
        v.position = stay;
        moved_by = stay - old;
        limit_ahead = stay - p.veh_length;
      }

      v.speed = moved_by == next_speed_[id] * dt ? next_speed_[id] : std::min(next_speed_[id], moved_by / dt);
      if (v.speed < kWaitingSpeed) {
        if (!v.waiting_since) v.waiting_since = now;
      } else {
        v.waiting_since.reset();
      }
      if (plan.held && v.speed < kWaitingSpeed) {
        if (!(blocked_since_[id] < kInf)) blocked_since_[id] = now;
      } else if (!crossed) {
        blocked_since_[id] = kInf;
      }

      if (has_stop && !crossed) {
        const auto& stop = bus_stops_[id][next_stop_[id]];
        if (dwell_until_[id] < now && stop.position - v.position <= kStopReach) {
          dwell_until_[id] = next + bus_dwell_[id];
        }
      }
      if (v.kind == VehicleKind::bus && dwell_until_[id] > -kInf && next >= dwell_until_[id]) {
        ++next_stop_[id];
        dwell_until_[id] = -kInf;
      }

      const EdgeIdx at = v.route[v.route_index];
      speed_sum_[at] += v.speed;
      ++speed_samples_[at];
    }
  }
}

void Simulation::teleports(double now) {
  std::erase_if(active_, [&](std::uint32_t id) { return vehicles_[id].status != VehicleState::Status::running; });
  for (const std::uint32_t id : active_) {
    VehicleState& v = vehicles_[id];
    if (v.status != VehicleState::Status::running || !v.waiting_since) continue;
    if (now - *v.waiting_since < cfg_.time_to_teleport) continue;

    const CarFollowParams& p = params(v);
    auto& q = lanes_[lane_id(v.route[v.route_index], v.lane)].queue;
    q.erase(std::find(q.begin(), q.end(), id));
    leave_edge(id, now);
    ++v.teleport_count;
    ++teleports_;
    v.speed = 0.0;
    v.waiting_since.reset();

    bool placed = false;
    for (std::size_t k = v.route_index + 1; k < v.route.size() && !placed; ++k) {
      const std::size_t lane = best_lane(v.route[k]);
      if (free_entry(lane) >= p.veh_length + p.min_gap) {
        enter_edge(id, k, lane, 0.0, now);
        placed = true;
      }
    }
    if (!placed) {
      v.route_index = v.route.size() - 1;
      arrive(id, now, false);
      continue;
    }
    if (v.kind == VehicleKind::bus) {
      while (next_stop_[id] < bus_stops_[id].size() && bus_stops_[id][next_stop_[id]].route_index < v.route_index)
        ++next_stop_[id];
      dwell_until_[id] = -kInf;
    }
  }
}

void Simulation::insert_departures(double now) {
  while (schedule_pos_ < schedule_.size() && vehicles_[schedule_[schedule_pos_]].depart <= now + kEps) {
    waiting_insert_.push_back(schedule_[schedule_pos_++]);
  }
  for (auto it = waiting_insert_.begin(); it != waiting_insert_.end();) {
    const std::uint32_t id = *it;
    VehicleState& v = vehicles_[id];
    const std::size_t lane = best_lane(v.route.front());
    if (free_entry(lane) < params(v).min_gap) {
      ++it;
      continue;
    }
    v.status = VehicleState::Status::running;
    v.inserted_at = now;
    v.speed = 0.0;
    ++departed_;
    active_.push_back(id);
    enter_edge(id, 0, lane, 0.0, now);
    if (v.equipped) next_reroute_[id] = now;
    it = waiting_insert_.erase(it);
  }
}

void Simulation::reroute(double now) {
  if (now + kEps >= next_estimate_) {
    const double a = cfg_.speed_smoothing;
    for (EdgeIdx e = 0; e < net_->edge_count(); ++e) {
      const auto& edge = net_->edge(e);
      const double measured = speed_samples_[e] > 0 ? speed_sum_[e] / speed_samples_[e] : edge.speed_limit;
      est_speed_[e] = a * measured + (1.0 - a) * est_speed_[e];
      est_cost_[e] = edge.bus_only ? kInf : edge.length / std::max(est_speed_[e], 0.1);
      speed_sum_[e] = 0.0;
      speed_samples_[e] = 0;
    }
    next_estimate_ += cfg_.rerouting_period;
  }
  for (const std::uint32_t id : active_) {
    VehicleState& v = vehicles_[id];
    if (v.status != VehicleState::Status::running || !v.equipped || now + kEps < next_reroute_[id]) continue;
    next_reroute_[id] = now + cfg_.rerouting_period;
    if (v.route_index + 1 >= v.route.size()) continue;
    const auto r = router_->route(v.route[v.route_index], v.route.back(), est_cost_);
    if (!r) continue;
    v.route.resize(v.route_index);
    v.route.insert(v.route.end(), r->edges.begin(), r->edges.end());
  }
}

void Simulation::sample_running(double now) {
  while (next_minute_ < running_.size() && cfg_.begin + 60.0 * static_cast<double>(next_minute_) <= now + kEps) {
    running_[next_minute_++] = departed_ - arrived_;
  }
}

Totals Simulation::totals() const {
  Totals t;
  t.departed = departed_;
  t.arrived = arrived_;
  t.still_running = departed_ - arrived_;
  t.not_inserted = static_cast<long long>(vehicles_.size()) - departed_;
  t.teleports = teleports_;
  return t;
}

double Simulation::min_gap() const {
  double best = kInf;
  for (std::size_t li = 0; li < lanes_.size(); ++li) {
    const auto& q = lanes_[li].queue;
    if (q.empty()) continue;
    if (const auto ghost = overhang(li)) best = std::min(best, ghost->back - vehicles_[q.front()].position);
    for (std::size_t i = 1; i < q.size(); ++i) {
      const auto& leader = vehicles_[q[i - 1]];
      best = std::min(best, leader.position - params(leader).veh_length - vehicles_[q[i]].position);
    }
  }
  return best;
}

SimOutput Simulation::output() const {
  SimOutput out;
  for (const auto& d : detectors_) {
    out.detector_series.emplace(d.def.id, DetectorSeries{d.def.id, d.counts, SeriesOrigin::simulated});
  }
  out.running_count = running_;
  for (const std::uint32_t id : schedule_) {
    const auto& v = vehicles_[id];
    if (v.status == VehicleState::Status::pending) continue;
    VehicleResult r;
    r.id = v.id;
    r.kind = v.kind;
    r.arrived = v.status == VehicleState::Status::arrived;
    r.depart = v.inserted_at;
    r.travel_time = (r.arrived ? v.arrived_at : time_) - v.inserted_at;
    r.time_loss = std::max(0.0, r.travel_time - v.free_time);
    r.route_length = v.driven_length;
    r.teleport_count = v.teleport_count;
    out.vehicles.push_back(std::move(r));
  }
  out.totals = totals();
  out.edge_travel_times.resize(net_->edge_count());
  for (EdgeIdx e = 0; e < net_->edge_count(); ++e) {
    out.edge_travel_times[e] = traverse_count_[e] > 0 ? traverse_sum_[e] / traverse_count_[e]
                                                      : net::free_flow_time(net_->edge(e));
  }
  out.edge_cost_interval = cfg_.edge_cost_interval;
  out.edge_time_bins.resize(bin_sum_.size());
  for (std::size_t k = 0; k < bin_sum_.size(); ++k) {
    out.edge_time_bins[k] = bin_count_[k] > 0 ? bin_sum_[k] / bin_count_[k] : out.edge_travel_times[k / bins_];
  }
  for (std::size_t i = 0; i < parking_occupancy_.size(); ++i) {
    out.parking_occupancy.emplace(net_->parking_areas()[i].id, parking_occupancy_[i]);
  }
  return out;
}

double SimOutput::edge_cost_at(EdgeIdx e, double t) const {
  const std::size_t bins = bins_per_edge();
  if (bins == 0) return edge_travel_times[e];
  const auto b = std::min(bins - 1, static_cast<std::size_t>(std::max(0.0, t) / edge_cost_interval));
  return edge_time_bins[e * bins + b];
}

SimOutput run(const net::RoadNetwork& net, std::vector<demand::VehicleRoute> routes,
              std::vector<BusLine> bus_lines, std::vector<Detector> detectors, const SimConfig& config) {
  Simulation sim(net, std::move(routes), std::move(bus_lines), std::move(detectors), config);
  return sim.run_to_end();
}

}  // namespace tcal::sim
