#pragma once

// JSON scenario documents for the command-line tool.
//
//   {
//     "mcs": [{"label": "QPSK 1/2", "slots": 14, "area_fraction": 0.166352}, ...],
//     "traffic": {"lambda": 1.6, "mean_watch_minutes": 20},
//     "capacity": {"K_connections": 20},            // or {"K_slots": 280}
//     "mobility": {"model": "markov", "w_minutes": 10},
//     "alpha": {"policy": "fixed", "value": 0.4},
//     "sweep": {"parameter": "lambda", "values": [0.4, 0.8]}
//   }
//
// mobility.model is none | markov | random_walk | explicit.  random_walk takes
// "d" and "f_per_second"; explicit takes "rates", M rows of M + 1 entries
// where column j is the rate towards zone j and column 0 is the handover.

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "iptvq/mobility_solver.hpp"
#include "iptvq/model.hpp"
#include "iptvq/simulator.hpp"

namespace iptvq {

enum class MobilityModel { kNone, kMarkov, kRandomWalk, kExplicit };

enum class SweepParameter { kLambda, kCapacity };

struct SweepSection {
  SweepParameter parameter = SweepParameter::kLambda;
  std::vector<double> values;  // capacity values in MCS-1 connection units
  bool operator==(const SweepSection&) const = default;
};

struct ScenarioDocument {
  CellScenario scenario;
  double mean_watch_minutes = 0;  // as written; mu = 1 / mean_watch_minutes
  MobilityModel model = MobilityModel::kNone;
  RandomWalkEngine walk;  // meaningful for random_walk
  AlphaPolicy alpha = FittedAlpha{};
  bool capacity_in_slots = false;
  std::optional<SweepSection> sweep;

  bool operator==(const ScenarioDocument&) const = default;
};

/// Throws ValidationError with the offending field path in the message.
ScenarioDocument parse_scenario(const nlohmann::json& document);
ScenarioDocument parse_scenario_text(const std::string& text);
ScenarioDocument load_scenario(const std::string& path);

nlohmann::json to_json(const ScenarioDocument& document);
std::string dump_scenario(const ScenarioDocument& document);

/// Capacity in slots for a K given in MCS-1 connection units.  Throws if
/// K * slots(1) is not an integer.
int capacity_slots_for(double k_connections, const std::vector<McsClass>& mcs);

}  // namespace iptvq
