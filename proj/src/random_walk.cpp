#include <cmath>
#include <limits>
#include <string>

#include "iptvq/mobility_solver.hpp"
#include "iptvq/rng.hpp"
#include "iptvq/simulator.hpp"
#include "sim_core.hpp"

namespace iptvq {

namespace detail {

namespace {

enum class Move : std::uint8_t { kLegEnd, kOutward, kInward };

struct Walker {
  int zone = 0;
  std::uint32_t generation = 0;
  double x = 0, y = 0;    // position at `since`
  double ux = 0, uy = 0;  // unit heading
  double leg_left = 0;    // distance to the next turn
  double since = 0;
  Move pending = Move::kLegEnd;
};

constexpr double kInf = std::numeric_limits<double>::infinity();

// Distance along the heading to the circle of radius r, taking the exit root
// (larger) or the entry root (smaller, only while heading inward).
double exit_distance(double pu, double pp, double r) {
  const double disc = pu * pu - (pp - r * r);
  if (disc < 0) return 0;  // numerically on or outside the circle
  return -pu + std::sqrt(disc);
}

double entry_distance(double pu, double pp, double r) {
  if (r <= 0 || pu >= 0) return kInf;
  const double disc = pu * pu - (pp - r * r);
  if (disc <= 0) return kInf;
  const double t = -pu - std::sqrt(disc);
  return t > 0 ? t : kInf;
}

class Walk {
 public:
  Walk(const SimConfig& config, const ZoneGeometry& geometry, Rng& rng)
      : geometry_(geometry), rng_(rng) {
    const auto& rw = std::get<RandomWalkEngine>(config.engine);
    step_ = rw.step_distance;
    speed_ = rw.speed_per_second * 60.0;
  }

  void spawn(Walker& w, double now) {
    const double r = std::sqrt(rng_.uniform());
    const double phi = rng_.angle();
    w.x = r * std::cos(phi);
    w.y = r * std::sin(phi);
    w.zone = geometry_.zone_of_radius(r);
    w.since = now;
    turn(w);
  }

  void turn(Walker& w) {
    const double theta = rng_.angle();
    w.ux = std::cos(theta);
    w.uy = std::sin(theta);
    w.leg_left = step_;
  }

  /// Moves the walker to time t along its heading.
  void advance(Walker& w, double t) {
    const double dist = speed_ * (t - w.since);
    w.x += w.ux * dist;
    w.y += w.uy * dist;
    w.leg_left -= dist;
    w.since = t;
  }

  /// Puts the walker exactly on a boundary circle after a crossing.
  static void snap(Walker& w, double r) {
    const double norm = std::hypot(w.x, w.y);
    if (norm > 0) {
      w.x *= r / norm;
      w.y *= r / norm;
    }
  }

  /// Time of the walker's next movement event; sets w.pending.
  double next_event(Walker& w) const {
    const double pu = w.x * w.ux + w.y * w.uy;
    const double pp = w.x * w.x + w.y * w.y;
    double best = w.leg_left;
    w.pending = Move::kLegEnd;
    const double out = exit_distance(pu, pp, geometry_.outer_radius(w.zone));
    if (out < best) {
      best = out;
      w.pending = Move::kOutward;
    }
    const double in = entry_distance(pu, pp, geometry_.inner_radius(w.zone));
    if (in < best) {
      best = in;
      w.pending = Move::kInward;
    }
    return w.since + std::max(best, 0.0) / speed_;
  }

  const ZoneGeometry& geometry() const { return geometry_; }

 private:
  const ZoneGeometry& geometry_;
  Rng& rng_;
  double step_ = 0;
  double speed_ = 0;
};

}  // namespace

ReplicationStats run_random_walk_replication(const SimConfig& config, int index) {
  const auto& scenario = config.scenario;
  const double warmup = config.effective_warmup();
  const auto geometry = ZoneGeometry::of(scenario);
  Rng rng(substream_seed(config.seed, static_cast<std::uint64_t>(index)));
  Walk walk(config, geometry, rng);

  Calendar calendar;
  CellLedger ledger(config, warmup);
  schedule_bookkeeping(calendar, config, warmup);
  if (scenario.lambda() > 0) calendar.push(rng.exponential(scenario.lambda()), EventKind::kArrival);

  std::vector<Walker> pool;
  std::vector<int> free_slots;
  auto release = [&](int id) {
    ++pool[id].generation;
    free_slots.push_back(id);
  };
  auto schedule_move = [&](int id) {
    calendar.push(walk.next_event(pool[id]), EventKind::kConnection, id, pool[id].generation);
  };

  for (;;) {
    const auto e = calendar.pop();
    ledger.advance(e.time);
    if (handle_bookkeeping(e, calendar, ledger, config)) break;

    if (e.kind == EventKind::kArrival) {
      calendar.push(e.time + rng.exponential(scenario.lambda()), EventKind::kArrival);
      Walker w;
      walk.spawn(w, e.time);
      if (!ledger.arrive(w.zone)) continue;
      int id;
      if (free_slots.empty()) {
        id = static_cast<int>(pool.size());
        pool.push_back({});
      } else {
        id = free_slots.back();
        free_slots.pop_back();
      }
      w.generation = pool[id].generation;
      pool[id] = w;
      calendar.push(e.time + rng.exponential(scenario.mu()), EventKind::kSessionEnd, id, w.generation);
      schedule_move(id);
    } else if (e.kind == EventKind::kSessionEnd) {
      if (pool[e.conn].generation != e.generation) continue;
      ledger.depart(pool[e.conn].zone);
      release(e.conn);
    } else if (e.kind == EventKind::kConnection) {
      auto& w = pool[e.conn];
      if (w.generation != e.generation) continue;
      walk.advance(w, e.time);
      switch (w.pending) {
        case Move::kLegEnd:
          walk.turn(w);
          break;
        case Move::kOutward:
          Walk::snap(w, geometry.outer_radius(w.zone));
          if (w.zone == 1) {
            ledger.handover();
            release(e.conn);
            continue;
          }
          if (!ledger.change(w.zone, w.zone - 1)) {
            release(e.conn);
            continue;
          }
          --w.zone;
          break;
        case Move::kInward:
          Walk::snap(w, geometry.inner_radius(w.zone));
          ledger.change(w.zone, w.zone + 1);  // inward moves free slots
          ++w.zone;
          break;
      }
      schedule_move(e.conn);
    }
  }
  ledger.close(config.horizon_minutes);
  return ledger.take();
}

}  // namespace detail

MeasuredMobility measure_transition_rates(const SimConfig& config, std::uint64_t min_crossings) {
  SimConfig pure = config;
  pure.unlimited_capacity = true;
  pure.snapshot_interval = 0;
  const auto sim = run_random_walk(pure);

  const int zones = config.scenario.zones();
  MeasuredMobility out;
  out.rates = TransitionRates(zones);
  out.crossings.assign(static_cast<std::size_t>(zones) * (zones + 1), 0);
  out.zone_time.assign(zones, 0.0);
  for (const auto& r : sim.replications) {
    for (std::size_t i = 0; i < out.crossings.size(); ++i) out.crossings[i] += r.crossings[i];
    for (int m = 0; m < zones; ++m) out.zone_time[m] += r.zone_time[m];
  }
  auto count = [&](int from, int to) {
    return out.crossings[static_cast<std::size_t>(from - 1) * (zones + 1) + to];
  };

  double total_time = 0;
  std::uint64_t total_crossings = 0;
  for (int i = 1; i <= zones; ++i) {
    total_time += out.zone_time[i - 1];
    for (int j : {i - 1, i + 1}) {
      if (j < 0 || j > zones || (j == kOutsideCell && i != 1)) continue;
      const auto c = count(i, j);
      total_crossings += c;
      if (out.zone_time[i - 1] > 0) out.rates.set(i, j, c / out.zone_time[i - 1]);
      if (c < min_crossings) {
        out.sufficient = false;
        out.warnings.push_back("only " + std::to_string(c) + " crossings observed for " +
                               std::to_string(i) + " -> " + std::to_string(j));
      }
    }
  }
  out.mean_sojourn_minutes = mean_sojourn_from_rates(out.rates);
  out.mean_visit_minutes =
      total_crossings > 0 ? total_time / total_crossings : std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace iptvq
