#pragma once

// Subcommands of the iptvq tool.  Each writes CSV to `out` and notes to
// `log`; all are pure functions of the document, the options and the seed.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "iptvq/mobility_solver.hpp"
#include "iptvq/scenario_io.hpp"

namespace iptvq {

enum class EngineChoice { kFromDocument, kMarkov, kRandomWalk };

struct CommandOptions {
  std::uint64_t seed = 1;
  int replications = 20;
  double horizon_minutes = 50000;
  double warmup_minutes = -1;  // negative selects 10 / mu
  EngineChoice engine = EngineChoice::kFromDocument;
  std::optional<AlphaPolicy> alpha;  // overrides the document
  double target_pb = 0.01;
  int k_min = 1;
  int k_max = 60;
  bool confirm = false;  // plan: simulate at the chosen K
  bool timing = false;   // fill wall_seconds
  unsigned threads = 1;
  std::optional<std::string> write_scenario;  // measure-mobility
};

/// Thrown for a well-formed request with no answer (e.g. unreachable target).
class CommandError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ResultRow {
  std::optional<double> sweep_value;
  std::optional<double> pb_analysis, pb_sim, pb_ci;
  std::optional<double> ey_analysis, ey_sim, ey_ci;
  std::optional<double> pd_analysis, pd_sim, pd_ci;
  std::optional<double> alpha_used;
  std::optional<std::uint64_t> state_count;
  std::optional<double> wall_seconds;
};

void write_header(std::ostream& out);
void write_row(std::ostream& out, const ResultRow& row);
/// Locale-independent, 10 significant digits.
std::string format_number(double x);

std::vector<ResultRow> cmd_analyze(const ScenarioDocument& doc, const CommandOptions& options,
                                   std::ostream& out, std::ostream& log);
std::vector<ResultRow> cmd_simulate(const ScenarioDocument& doc, const CommandOptions& options,
                                    std::ostream& out, std::ostream& log);
/// Returns the minimal K in MCS-1 connection units; throws CommandError
/// when the target is not met within [k_min, k_max].
int cmd_plan(const ScenarioDocument& doc, const CommandOptions& options, std::ostream& out,
             std::ostream& log);
/// Capped fit (alpha = min{q(x), 1}) unless `ordinary` asks for plain OLS.
QuadraticFit cmd_fit_alpha(const std::string& points_csv_path, bool ordinary, std::ostream& out,
                           std::ostream& log);
MeasuredMobility cmd_measure_mobility(const ScenarioDocument& doc, const CommandOptions& options,
                                      std::ostream& out, std::ostream& log);

/// Reads (mu_w, alpha) pairs; a header row is skipped.
std::vector<AlphaPoint> read_alpha_points(const std::string& path);

}  // namespace iptvq
