#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "tcal/demandgen.hpp"

namespace tcal::demand {

std::string_view to_string(Purpose p) noexcept {
  switch (p) {
    case Purpose::work:
      return "work";
    case Purpose::school_dropoff:
      return "school_dropoff";
    case Purpose::university:
      return "university";
    case Purpose::incoming:
      return "incoming";
    case Purpose::outgoing:
      return "outgoing";
    case Purpose::free_time:
      return "free_time";
  }
  return "?";
}

std::vector<WorkHours> default_work_hours() {
  return {{8 * 3600.0, 17 * 3600.0, 0.60}, {6 * 3600.0, 14 * 3600.0, 0.25}, {14 * 3600.0, 22 * 3600.0, 0.15}};
}

namespace {

constexpr double kLastSecond = kDaySeconds - 1.0;
constexpr double kFreeTimeStart = 10 * 3600.0;
constexpr double kFreeTimeSpan = 4 * 3600.0;

void check_config(const std::vector<DistrictStats>& stats, const std::vector<CityGate>& gates,
                  const std::vector<School>& schools, const DemandConfig& cfg) {
  if (stats.empty()) throw EmptyDistrictsError();
  if ((cfg.incoming_total > 0 || cfg.outgoing_total > 0) && gates.empty()) throw NoGateError();
  auto in_unit = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (!in_unit(cfg.car_rate) || !in_unit(cfg.car_preference_rate) || !in_unit(cfg.free_time_rate)) {
    throw ConfigError("car_rate, car_preference_rate and free_time_rate must lie in [0, 1]");
  }
  if (cfg.incoming_total < 0 || cfg.outgoing_total < 0) throw ConfigError("external totals must be >= 0");
  if (!(cfg.departure_jitter_sd >= 0.0)) throw ConfigError("departure_jitter_sd must be >= 0");
  double share = 0.0;
  for (const auto& w : cfg.work_hours) {
    if (w.worker_share < 0.0) throw ConfigError("negative worker_share");
    share += w.worker_share;
  }
  if (!cfg.work_hours.empty() && std::abs(share - 1.0) > 1e-9) throw ConfigError("work_hours shares must sum to 1");
  if (!gates.empty()) {
    double in = 0.0, out = 0.0;
    for (const auto& g : gates) {
      if (!in_unit(g.incoming_share) || !in_unit(g.outgoing_share)) {
        throw ConfigError("gate '" + g.id + "' share outside [0, 1]");
      }
      in += g.incoming_share;
      out += g.outgoing_share;
    }
    if (std::abs(in - 1.0) > 1e-9 || std::abs(out - 1.0) > 1e-9) {
      throw ConfigError("gate incoming and outgoing shares must each sum to 1");
    }
  }
  for (const auto& d : stats) {
    const long long counts[] = {d.inhabitants, d.households, d.workers, d.work_positions, d.unemployed, d.vehicles};
    if (std::any_of(std::begin(counts), std::end(counts), [](long long c) { return c < 0; }) ||
        std::any_of(d.age_brackets.begin(), d.age_brackets.end(), [](long long c) { return c < 0; })) {
      throw ConfigError("district '" + d.id + "' has negative counts");
    }
    if (std::accumulate(d.age_brackets.begin(), d.age_brackets.end(), 0LL) != d.inhabitants) {
      throw ConfigError("district '" + d.id + "' age brackets do not sum to inhabitants");
    }
    if (d.edge_ids.empty()) throw ConfigError("district '" + d.id + "' has no edges");
  }
  for (const auto& s : schools) {
    if (s.age_min > s.age_max || !(s.opening_h < s.closing_h) || s.capacity < 0) {
      throw ConfigError("school '" + s.id + "' needs age_min <= age_max and opening_h < closing_h");
    }
  }
}

/// Children of ages [age_min, age_max] in a district, assuming ages spread
/// uniformly inside each bracket.
double people_in_age_range(const DistrictStats& d, int age_min, int age_max) {
  double total = 0.0;
  for (std::size_t b = 0; b < kAgeBrackets; ++b) {
    const double lo = kAgeBracketBounds[b];
    const double hi = kAgeBracketBounds[b + 1];
    const double overlap = std::min<double>(hi, age_max + 1.0) - std::max<double>(lo, age_min);
    if (overlap > 0.0) total += static_cast<double>(d.age_brackets[b]) * overlap / (hi - lo);
  }
  return total;
}

/// Split `total` into integer parts proportional to `weights` (largest
/// remainder; ties go to the earlier index). Each part is within 1 of exact.
std::vector<long long> apportion(long long total, const std::vector<double>& weights) {
  std::vector<long long> parts(weights.size(), 0);
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (total <= 0 || sum <= 0.0) return parts;
  std::vector<std::pair<double, std::size_t>> remainders;
  long long assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double exact = static_cast<double>(total) * weights[i] / sum;
    parts[i] = static_cast<long long>(std::floor(exact));
    assigned += parts[i];
    remainders.emplace_back(exact - static_cast<double>(parts[i]), i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < total; ++k, ++assigned) ++parts[remainders[k % remainders.size()].second];
  return parts;
}

class Generator {
 public:
  Generator(const std::vector<DistrictStats>& stats, const std::vector<CityGate>& gates,
            const std::vector<School>& schools, const DemandConfig& cfg, const net::RoadNetwork& net)
      : stats_(stats),
        gates_(gates),
        schools_(schools),
        cfg_(cfg),
        net_(net),
        router_(net),
        costs_(net::car_free_flow_costs(net)),
        rng_(substream_seed(cfg.seed, "demand")),
        jitter_(0.0, std::max(cfg.departure_jitter_sd, 0.0)) {
    std::vector<double> positions;
    for (const auto& d : stats_) positions.push_back(static_cast<double>(d.work_positions));
    total_positions_ = std::accumulate(positions.begin(), positions.end(), 0.0);
    if (total_positions_ > 0.0) work_district_ = std::discrete_distribution<std::size_t>(positions.begin(), positions.end());
    std::vector<double> shares;
    for (const auto& w : cfg_.work_hours) shares.push_back(w.worker_share);
    if (!shares.empty()) shift_ = std::discrete_distribution<std::size_t>(shares.begin(), shares.end());
    for (const auto& s : schools_) school_left_.push_back(s.capacity);
    for (EdgeIdx e = 0; e < net_.edge_count(); ++e) {
      if (!net_.edge(e).bus_only) car_edges_.push_back(e);
    }
  }

  TripTable run() {
    const double p = cfg_.drive_probability();
    // Cumulative rounding keeps the grand total within 1 of the exact product.
    std::vector<long long> drivers(stats_.size());
    double cumulative = 0.0;
    long long rounded_before = 0;
    for (std::size_t i = 0; i < stats_.size(); ++i) {
      cumulative += static_cast<double>(stats_[i].workers) * p;
      const long long rounded = std::llround(cumulative);
      drivers[i] = rounded - rounded_before;
      rounded_before = rounded;
    }
    for (std::size_t i = 0; i < stats_.size(); ++i) district_trips(i, drivers[i]);
    external_trips();

    std::sort(table_.trips.begin(), table_.trips.end(),
              [](const Trip& a, const Trip& b) { return std::tie(a.depart, a.id) < std::tie(b.depart, b.id); });
    return std::move(table_);
  }

 private:
  void district_trips(std::size_t di, long long drivers) {
    const auto& d = stats_[di];
    const double p = cfg_.drive_probability();
    if (drivers > 0 && (total_positions_ <= 0.0 || cfg_.work_hours.empty())) {
      throw ConfigError("workers need work positions and work_hours");
    }

    // Drop-off chains: a driving parent takes the child to school first.
    long long chain_id = 0;
    long long uni_id = 0;
    for (std::size_t si = 0; si < schools_.size(); ++si) {
      const auto& s = schools_[si];
      const double eligible = people_in_age_range(d, s.age_min, s.age_max);
      const long long attend = std::min(std::llround(eligible), school_left_[si]);
      school_left_[si] -= attend;
      const long long driven = std::llround(static_cast<double>(attend) * p);
      if (s.age_min >= 18) {
        for (long long k = 0; k < driven; ++k) university_trip(d, s, uni_id++);
        continue;
      }
      for (long long k = 0; k < driven; ++k) {
        if (drivers > 0) {
          --drivers;
          worker_trip(d, chain_id++, &s);
        } else {
          parent_dropoff(d, s, chain_id++);
        }
      }
    }
    for (long long k = 0; k < drivers; ++k) worker_trip(d, chain_id++, nullptr);

    const long long free_time = std::llround(static_cast<double>(d.unemployed) * cfg_.free_time_rate);
    for (long long k = 0; k < free_time; ++k) free_time_trip(d, k);
  }

  void worker_trip(const DistrictStats& d, long long k, const School* school) {
    const std::string home = pick(d.edge_ids);
    const auto& wd = stats_[work_district_(rng_)];
    const std::string work = pick(wd.edge_ids);
    const WorkHours& shift = cfg_.work_hours[shift_(rng_)];
    const std::string base = d.id + ".work" + std::to_string(k);
    if (school != nullptr) {
      add(base + ".0", before(school->opening_h, home, school->edge_id), home, school->edge_id,
          Purpose::school_dropoff);
      add(base + ".1", clamp_day(std::max(school->opening_h, before(shift.opening_h, school->edge_id, work))),
          school->edge_id, work, Purpose::work);
    } else {
      add(base + ".0", before(shift.opening_h, home, work), home, work, Purpose::work);
    }
    add(base + ".2", after(shift.closing_h), work, home, Purpose::work);
  }

  void parent_dropoff(const DistrictStats& d, const School& s, long long k) {
    const std::string home = pick(d.edge_ids);
    const std::string base = d.id + ".school" + std::to_string(k);
    add(base + ".0", before(s.opening_h, home, s.edge_id), home, s.edge_id, Purpose::school_dropoff);
    add(base + ".1", clamp_day(s.opening_h), s.edge_id, home, Purpose::school_dropoff);
  }

  void university_trip(const DistrictStats& d, const School& s, long long k) {
    const std::string home = pick(d.edge_ids);
    const std::string base = d.id + ".uni" + std::to_string(k);
    add(base + ".0", before(s.opening_h, home, s.edge_id), home, s.edge_id, Purpose::university);
    add(base + ".1", after(s.closing_h), s.edge_id, home, Purpose::university);
  }

  void free_time_trip(const DistrictStats& d, long long k) {
    if (car_edges_.empty()) return;
    const std::string home = pick(d.edge_ids);
    std::uniform_int_distribution<std::size_t> any_edge(0, car_edges_.size() - 1);
    std::string dest = net_.edge(car_edges_[any_edge(rng_)]).id;
    std::uniform_real_distribution<double> start(kFreeTimeStart, kFreeTimeStart + kFreeTimeSpan);
    std::uniform_real_distribution<double> stay(3600.0, 7200.0);
    const double depart = std::floor(start(rng_));
    const double back = clamp_day(std::floor(depart + stay(rng_)));
    const std::string base = d.id + ".free" + std::to_string(k);
    add(base + ".0", depart, home, dest, Purpose::free_time);
    add(base + ".1", back, dest, home, Purpose::free_time);
  }

  void external_trips() {
    if (gates_.empty()) return;
    const double p = cfg_.drive_probability();
    std::vector<double> in_w, out_w;
    for (const auto& g : gates_) {
      in_w.push_back(g.incoming_share);
      out_w.push_back(g.outgoing_share);
    }
    const auto incoming = apportion(std::llround(static_cast<double>(cfg_.incoming_total) * p), in_w);
    const auto outgoing = apportion(std::llround(static_cast<double>(cfg_.outgoing_total) * p), out_w);

    std::vector<double> home_w;
    for (const auto& d : stats_) home_w.push_back(static_cast<double>(d.workers > 0 ? d.workers : d.inhabitants));
    if (std::accumulate(home_w.begin(), home_w.end(), 0.0) <= 0.0) std::fill(home_w.begin(), home_w.end(), 1.0);
    std::discrete_distribution<std::size_t> home_district(home_w.begin(), home_w.end());

    for (std::size_t gi = 0; gi < gates_.size(); ++gi) {
      const auto& g = gates_[gi];
      if (incoming[gi] > 0 && (total_positions_ <= 0.0 || cfg_.work_hours.empty())) {
        throw ConfigError("incoming traffic needs work positions and work_hours");
      }
      for (long long k = 0; k < incoming[gi]; ++k) {
        const std::string work = pick(stats_[work_district_(rng_)].edge_ids);
        const WorkHours& shift = cfg_.work_hours[shift_(rng_)];
        add(g.id + ".in" + std::to_string(k), before(shift.opening_h, g.in_edge, work), g.in_edge, work,
            Purpose::incoming);
      }
      for (long long k = 0; k < outgoing[gi]; ++k) {
        const std::string home = pick(stats_[home_district(rng_)].edge_ids);
        const double opening = cfg_.work_hours.empty() ? 8 * 3600.0 : cfg_.work_hours[shift_(rng_)].opening_h;
        add(g.id + ".out" + std::to_string(k), before(opening, home, g.out_edge), home, g.out_edge,
            Purpose::outgoing);
      }
    }
  }

  const std::string& pick(const std::vector<std::string>& ids) {
    std::uniform_int_distribution<std::size_t> u(0, ids.size() - 1);
    return ids[u(rng_)];
  }

  double travel_estimate(const std::string& from, const std::string& to) {
    const auto key = std::make_pair(from, to);
    if (auto it = estimates_.find(key); it != estimates_.end()) return it->second;
    double est = 0.0;
    const auto f = net_.find_edge(from);
    const auto t = net_.find_edge(to);
    if (!f) throw DanglingReference(from, "demand statistics");
    if (!t) throw DanglingReference(to, "demand statistics");
    if (auto r = router_.route(*f, *t, costs_)) est = r->cost;
    estimates_.emplace(key, est);
    return est;
  }

  /// Arrive at `deadline`: subtract the free-flow estimate and a half-normal lead.
  double before(double deadline, const std::string& from, const std::string& to) {
    const double lead = std::abs(jitter_(rng_));
    return clamp_day(std::floor(deadline - travel_estimate(from, to) - lead));
  }
  double after(double time) { return clamp_day(std::floor(time + std::abs(jitter_(rng_)))); }
  static double clamp_day(double t) { return std::clamp(t, 0.0, kLastSecond); }

  void add(std::string id, double depart, const std::string& from, const std::string& to, Purpose purpose) {
    table_.trips.push_back({std::move(id), depart, from, to, purpose});
  }

  const std::vector<DistrictStats>& stats_;
  const std::vector<CityGate>& gates_;
  const std::vector<School>& schools_;
  const DemandConfig& cfg_;
  const net::RoadNetwork& net_;
  net::Router router_;
  std::vector<double> costs_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> jitter_;
  std::discrete_distribution<std::size_t> work_district_;
  std::discrete_distribution<std::size_t> shift_;
  double total_positions_ = 0.0;
  std::vector<long long> school_left_;
  std::vector<EdgeIdx> car_edges_;
  std::map<std::pair<std::string, std::string>, double> estimates_;
  TripTable table_;
};

}  // namespace

TripTable generate_trips(const std::vector<DistrictStats>& stats, const std::vector<CityGate>& gates,
                         const std::vector<School>& schools, const DemandConfig& config,
                         const net::RoadNetwork& net) {
  check_config(stats, gates, schools, config);
  for (const auto& d : stats) {
    for (const auto& e : d.edge_ids) {
      if (!net.find_edge(e)) throw DanglingReference(e, "district '" + d.id + "'");
    }
  }
  for (const auto& g : gates) {
    if (!net.find_edge(g.in_edge)) throw DanglingReference(g.in_edge, "gate '" + g.id + "'");
    if (!net.find_edge(g.out_edge)) throw DanglingReference(g.out_edge, "gate '" + g.id + "'");
  }
  for (const auto& s : schools) {
    if (!net.find_edge(s.edge_id)) throw DanglingReference(s.edge_id, "school '" + s.id + "'");
  }
  // District order must not depend on input order.
  std::vector<DistrictStats> sorted = stats;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  std::vector<School> sorted_schools = schools;
  std::sort(sorted_schools.begin(), sorted_schools.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return Generator(sorted, gates, sorted_schools, config, net).run();
}

TripTable generate_trips(const DemandInputs& inputs, const net::RoadNetwork& net) {
  return generate_trips(inputs.districts, inputs.gates, inputs.schools, inputs.config, net);
}

NoPathError::NoPathError(std::vector<std::string> ids)
    : Error([&] {
        std::string msg = "no path for " + std::to_string(ids.size()) + " trip(s):";
        for (std::size_t i = 0; i < ids.size() && i < 20; ++i) msg += " " + ids[i];
        if (ids.size() > 20) msg += " ...";
        return msg;
      }()),
      ids_(std::move(ids)) {}

void require_all_routed(const ExpansionResult& result) {
  if (!result.no_path.empty()) throw NoPathError(result.no_path);
}

ExpansionResult expand_routes(const TripTable& trips, const net::RoadNetwork& net) {
  ExpansionResult out;
  net::Router router(net);
  const auto costs = net::car_free_flow_costs(net);
  for (const auto& t : trips.trips) {
    const EdgeIdx from = net.edge_index(t.from_edge);
    const EdgeIdx to = net.edge_index(t.to_edge);
    if (auto r = router.route(from, to, costs)) {
      out.routes.push_back({t.id, std::move(r->edges), t.depart, false});
    } else {
      out.no_path.push_back(t.id);
    }
  }
  return out;
}

}  // namespace tcal::demand
