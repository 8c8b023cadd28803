#include "iptvq/simulator.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "iptvq/rng.hpp"
#include "sim_core.hpp"

namespace iptvq {

double SimConfig::effective_warmup() const {
  return warmup_minutes < 0 ? 10.0 / scenario.mu() : warmup_minutes;
}

void SimConfig::validate() const {
  const double warmup = effective_warmup();
  if (!(horizon_minutes > warmup)) throw ValidationError("horizon must exceed the warmup");
  if (replications < 1) throw ValidationError("replications must be at least 1");
  if (!(snapshot_interval >= 0)) throw ValidationError("snapshot interval must be nonnegative");
  if (const auto* rw = std::get_if<RandomWalkEngine>(&engine)) {
    if (!(rw->step_distance > 0)) throw ValidationError("random walk step distance must be positive");
    if (!(rw->speed_per_second > 0)) throw ValidationError("random walk speed must be positive");
  }
}

EventCounts& EventCounts::operator+=(const EventCounts& o) {
  arrivals += o.arrivals;
  admits += o.admits;
  blocks += o.blocks;
  departures += o.departures;
  move_attempts += o.move_attempts;
  zone_changes += o.zone_changes;
  drops += o.drops;
  handovers += o.handovers;
  in_system_start += o.in_system_start;
  in_system_end += o.in_system_end;
  return *this;
}

double ReplicationStats::blocking_rate() const {
  return counts.arrivals > 0 ? static_cast<double>(counts.blocks) / counts.arrivals : 0.0;
}

double ReplicationStats::zone_rejection(int m) const {
  const auto a = arrivals_by_zone[m - 1];
  return a > 0 ? static_cast<double>(blocks_by_zone[m - 1]) / a : 0.0;
}

double ReplicationStats::dropping_rate() const {
  return counts.move_attempts > 0 ? static_cast<double>(counts.drops) / counts.move_attempts : 0.0;
}

std::uint64_t ReplicationStats::crossing_count(int from, int to) const {
  return crossings[static_cast<std::size_t>(from - 1) * (arrivals_by_zone.size() + 1) + to];
}

Estimate summarize(const std::vector<double>& samples) {
  Estimate e;
  const auto n = samples.size();
  if (n == 0) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  double sum = 0;
  for (double x : samples) sum += x;
  e.mean = sum / n;
  if (n < 2) {
    e.ci99 = std::numeric_limits<double>::quiet_NaN();
    return e;
  }
  double ss = 0;
  for (double x : samples) ss += (x - e.mean) * (x - e.mean);
  const double sd = std::sqrt(ss / (n - 1));
  const boost::math::students_t dist(static_cast<double>(n - 1));
  const double t = boost::math::quantile(boost::math::complement(dist, 0.005));
  e.ci99 = t * sd / std::sqrt(static_cast<double>(n));
  return e;
}

namespace {

struct Connection {
  int zone = 0;
  std::uint32_t generation = 0;
};

ReplicationStats run_markov_replication(const SimConfig& config, int index) {
  const auto& scenario = config.scenario;
  const auto& rates = scenario.rates();
  const int zones = scenario.zones();
  const double warmup = config.effective_warmup();
  Rng rng(substream_seed(config.seed, static_cast<std::uint64_t>(index)));

  std::vector<double> cumulative_sigma(zones);
  double acc = 0;
  for (int m = 1; m <= zones; ++m) cumulative_sigma[m - 1] = acc += scenario.area_fraction(m);

  detail::Calendar calendar;
  detail::CellLedger ledger(config, warmup);
  detail::schedule_bookkeeping(calendar, config, warmup);
  if (scenario.lambda() > 0) calendar.push(rng.exponential(scenario.lambda()), detail::EventKind::kArrival);

  std::vector<Connection> pool;
  std::vector<int> free_slots;
  auto schedule = [&](int id, double now) {
    const double total = scenario.mu() + rates.outflow(pool[id].zone);
    calendar.push(now + rng.exponential(total), detail::EventKind::kConnection, id, pool[id].generation);
  };
  auto release = [&](int id) {
    ++pool[id].generation;
    free_slots.push_back(id);
  };

  for (;;) {
    const auto e = calendar.pop();
    ledger.advance(e.time);
    if (detail::handle_bookkeeping(e, calendar, ledger, config)) break;

    if (e.kind == detail::EventKind::kArrival) {
      calendar.push(e.time + rng.exponential(scenario.lambda()), detail::EventKind::kArrival);
      const double u = rng.uniform() * acc;
      int m = 1;
      while (m < zones && u >= cumulative_sigma[m - 1]) ++m;
      if (!ledger.arrive(m)) continue;
      int id;
      if (free_slots.empty()) {
        id = static_cast<int>(pool.size());
        pool.push_back({});
      } else {
        id = free_slots.back();
        free_slots.pop_back();
      }
      pool[id].zone = m;
      schedule(id, e.time);
    } else if (e.kind == detail::EventKind::kConnection) {
      auto& c = pool[e.conn];
      if (c.generation != e.generation) continue;
      const int m = c.zone;
      // The race winner among watch-time end and the zone transitions.
      double u = rng.uniform() * (scenario.mu() + rates.outflow(m));
      if (u < scenario.mu()) {
        ledger.depart(m);
        release(e.conn);
        continue;
      }
      u -= scenario.mu();
      int target = -1;
      for (int j = 0; j <= zones; ++j) {
        if (j == m) continue;
        const double v = rates.at(m, j);
        if (v == 0) continue;
        target = j;
        if (u < v) break;
        u -= v;
      }
      if (target == kOutsideCell) {
        ledger.handover();
        release(e.conn);
      } else if (ledger.change(m, target)) {
        c.zone = target;
        schedule(e.conn, e.time);
      } else {
        release(e.conn);
      }
    }
  }
  ledger.close(config.horizon_minutes);
  return ledger.take();
}

/// With no event in any replication the t interval has zero width; report
/// the exact one-sided 99% bound for zero successes in `trials` instead.
Estimate proportion(const std::vector<double>& samples, std::uint64_t events, std::uint64_t trials) {
  auto e = summarize(samples);
  if (events == 0 && trials > 0 && e.has_ci()) e.ci99 = -std::log(0.01) / static_cast<double>(trials);
  return e;
}

SimulationResult aggregate(const SimConfig& config, std::vector<ReplicationStats> reps) {
  const auto& scenario = config.scenario;
  SimulationResult result;
  std::vector<double> pb, ey, pd;
  std::vector<std::vector<double>> zone(scenario.zones());
  for (const auto& r : reps) {
    pb.push_back(r.blocking_rate());
    ey.push_back(r.mean_load_slots() / scenario.slots(1));
    pd.push_back(r.dropping_rate());
    for (int m = 1; m <= scenario.zones(); ++m) zone[m - 1].push_back(r.zone_rejection(m));
    result.totals += r.counts;
  }
  result.blocking_rate = proportion(pb, result.totals.blocks, result.totals.arrivals);
  result.mean_bandwidth = summarize(ey);
  result.dropping_rate = proportion(pd, result.totals.drops, result.totals.move_attempts);
  for (int m = 1; m <= scenario.zones(); ++m) {
    std::uint64_t blocks = 0, arrivals = 0;
    for (const auto& r : reps) {
      blocks += r.blocks_by_zone[m - 1];
      arrivals += r.arrivals_by_zone[m - 1];
    }
    result.per_zone_rejection.push_back(proportion(zone[m - 1], blocks, arrivals));
  }
  result.replications = std::move(reps);
  return result;
}

template <typename Body>
std::vector<ReplicationStats> run_all(const SimConfig& config, Body body) {
  std::vector<ReplicationStats> reps(config.replications);
  const unsigned threads =
      std::max(1u, std::min<unsigned>(config.threads, static_cast<unsigned>(config.replications)));
  if (threads == 1) {
    for (int i = 0; i < config.replications; ++i) reps[i] = body(config, i);
    return reps;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (int i = static_cast<int>(t); i < config.replications; i += static_cast<int>(threads)) {
          reps[i] = body(config, i);
        }
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return reps;
}

}  // namespace

ReplicationStats run_replication(const SimConfig& config, int index) {
  config.validate();
  if (std::holds_alternative<RandomWalkEngine>(config.engine)) {
    return detail::run_random_walk_replication(config, index);
  }
  return run_markov_replication(config, index);
}

SimulationResult run_markov(const SimConfig& config) {
  config.validate();
  if (!std::holds_alternative<MarkovEngine>(config.engine)) {
    throw ValidationError("run_markov needs the Markov engine");
  }
  return aggregate(config, run_all(config, run_markov_replication));
}

SimulationResult run_random_walk(const SimConfig& config) {
  config.validate();
  if (!std::holds_alternative<RandomWalkEngine>(config.engine)) {
    throw ValidationError("run_random_walk needs the random-walk engine");
  }
  return aggregate(config, run_all(config, detail::run_random_walk_replication));
}

SimulationResult simulate(const SimConfig& config) {
  return std::holds_alternative<RandomWalkEngine>(config.engine) ? run_random_walk(config)
                                                                 : run_markov(config);
}

}  // namespace iptvq
