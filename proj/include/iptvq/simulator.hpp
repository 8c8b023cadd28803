#pragma once

// Discrete-event simulation of one cell: Poisson arrivals, exponential watch
// times, slot-based admission control, drops on outward MCS changes and
// handover at the cell edge.  Two mobility engines: exponential zone sojourns
// driven by the scenario rates, and a random walk over the unit disk.

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "iptvq/model.hpp"

namespace iptvq {

struct MarkovEngine {
  bool operator==(const MarkovEngine&) const = default;
};
struct RandomWalkEngine {
  double step_distance = 0.08;      // cell radii per leg
  double speed_per_second = 1.1e-3;  // cell radii per second
  bool operator==(const RandomWalkEngine&) const = default;
};
using MobilityEngine = std::variant<MarkovEngine, RandomWalkEngine>;

struct SimConfig {
  CellScenario scenario;
  double horizon_minutes = 200000;  // end of each replication
  double warmup_minutes = -1;       // negative selects 10 / mu
  int replications = 20;
  std::uint64_t seed = 1;
  MobilityEngine engine = MarkovEngine{};
  double snapshot_interval = 0;     // > 0 records the state every interval after warmup
  bool unlimited_capacity = false;  // admission and MCS changes never fail
  unsigned threads = 1;

  double effective_warmup() const;
  /// Throws ValidationError on an inconsistent configuration.
  void validate() const;
};

/// Counts over the statistics window [warmup, horizon].
struct EventCounts {
  std::uint64_t arrivals = 0;
  std::uint64_t admits = 0;
  std::uint64_t blocks = 0;
  std::uint64_t departures = 0;      // watch time ended
  std::uint64_t move_attempts = 0;   // zone changes triggered in zones 2..M
  std::uint64_t zone_changes = 0;    // completed zone changes, any zone
  std::uint64_t drops = 0;
  std::uint64_t handovers = 0;
  std::uint64_t in_system_start = 0;
  std::uint64_t in_system_end = 0;

  EventCounts& operator+=(const EventCounts& other);
  bool operator==(const EventCounts&) const = default;
};

struct ReplicationStats {
  EventCounts counts;
  std::vector<std::uint64_t> arrivals_by_zone;
  std::vector<std::uint64_t> blocks_by_zone;
  std::vector<std::uint64_t> crossings;  // zones x (zones + 1), [from-1][to]; to = 0 is handover
  std::vector<double> zone_time;         // integral of n_m over the window
  double load_time = 0;                  // integral of Y over the window, slot minutes
  double window = 0;
  int max_load = 0;
  std::map<std::vector<int>, std::uint64_t> snapshots;

  double blocking_rate() const;
  double zone_rejection(int m) const;
  double mean_load_slots() const { return window > 0 ? load_time / window : 0.0; }
  double dropping_rate() const;
  std::uint64_t crossing_count(int from, int to) const;
};

/// Point estimate and half-width of the Student-t 99% interval over
/// replications; ci99 is NaN with fewer than two samples.  For rates whose
/// event never occurred, ci99 is the exact 99% upper bound -ln(0.01)/trials.
struct Estimate {
  double mean = 0;
  double ci99 = 0;
  bool has_ci() const { return ci99 == ci99; }
};
Estimate summarize(const std::vector<double>& samples);

struct SimulationResult {
  Estimate blocking_rate;
  std::vector<Estimate> per_zone_rejection;
  Estimate mean_bandwidth;  // MCS-1 connection units
  Estimate dropping_rate;
  EventCounts totals;
  std::vector<ReplicationStats> replications;
};

SimulationResult run_markov(const SimConfig& config);
SimulationResult run_random_walk(const SimConfig& config);
/// Dispatches on config.engine.
SimulationResult simulate(const SimConfig& config);

/// One replication, for tests and custom aggregation.
ReplicationStats run_replication(const SimConfig& config, int index);

struct MeasuredMobility {
  TransitionRates rates;
  double mean_sojourn_minutes = 0;  // average over zones of 1 / total outflow
  double mean_visit_minutes = 0;    // zone time per completed crossing
  std::vector<std::uint64_t> crossings;
  std::vector<double> zone_time;
  bool sufficient = true;           // every adjacent direction saw the minimum count
  std::vector<std::string> warnings;
};

/// Rates v_ij = crossings i -> j / time spent in zone i, from random-walk
/// runs without capacity limits.
MeasuredMobility measure_transition_rates(const SimConfig& config,
                                          std::uint64_t min_crossings = 1000);

}  // namespace iptvq
