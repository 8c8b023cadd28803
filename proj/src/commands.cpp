#include "iptvq/commands.hpp"

#include <charconv>
#include <cmath>
#include <chrono>
#include <fstream>
#include <ostream>
#include <sstream>

#include "iptvq/exact_solver.hpp"
#include "iptvq/simulator.hpp"

namespace iptvq {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void put(std::ostream& out, const std::optional<double>& x) {
  if (x && std::isfinite(*x)) out << format_number(*x);
}

AlphaPolicy alpha_policy(const ScenarioDocument& doc, const CommandOptions& options) {
  return options.alpha ? *options.alpha : doc.alpha;
}

bool walk_engine(const ScenarioDocument& doc, const CommandOptions& options) {
  if (options.engine == EngineChoice::kRandomWalk) return true;
  if (options.engine == EngineChoice::kMarkov) return false;
  return doc.model == MobilityModel::kRandomWalk;
}

SimConfig sim_config(const CellScenario& scenario, const CommandOptions& options,
                     MobilityEngine engine) {
  SimConfig config{scenario};
  config.horizon_minutes = options.horizon_minutes;
  config.warmup_minutes = options.warmup_minutes;
  config.replications = options.replications;
  config.seed = options.seed;
  config.engine = engine;
  config.threads = options.threads;
  return config;
}

/// The scenario the analytical solvers see: random-walk documents (or a
/// random-walk engine) get rates measured from a capacity-free run first.
CellScenario analysis_scenario(const ScenarioDocument& doc, const CommandOptions& options,
                               bool walk, std::ostream& log) {
  if (doc.model != MobilityModel::kRandomWalk && !walk) return doc.scenario;
  const auto measured =
      measure_transition_rates(sim_config(doc.scenario, options, doc.walk));
  for (const auto& w : measured.warnings) log << "warning: " << w << "\n";
  log << "measured mean sojourn w = " << format_number(measured.mean_sojourn_minutes) << " min\n";
  return doc.scenario.with_mobility(ExplicitRates{measured.rates});
}

struct Point {
  CellScenario scenario;
  std::optional<double> sweep_value;
};

std::vector<Point> sweep_points(const ScenarioDocument& doc, const CellScenario& base) {
  std::vector<Point> points;
  if (!doc.sweep) {
    points.push_back({base, std::nullopt});
    return points;
  }
  for (double v : doc.sweep->values) {
    if (doc.sweep->parameter == SweepParameter::kLambda) {
      points.push_back({base.with_lambda(v), v});
    } else {
      points.push_back({base.with_capacity_slots(capacity_slots_for(v, base.mcs())), v});
    }
  }
  return points;
}

void fill_analysis(ResultRow& row, const PerformanceReport& report, const CellScenario& scenario,
                   double alpha) {
  row.pb_analysis = report.blocking_rate;
  row.ey_analysis = report.mean_bandwidth;
  if (report.dropping_defined) row.pd_analysis = report.dropping_rate;
  if (scenario.has_mobility()) row.alpha_used = alpha;
  row.state_count = report.state_count;
}

std::vector<ResultRow> analyze_points(const std::vector<Point>& points, const AlphaPolicy& policy,
                                      bool capacity_sweep_points, bool timing) {
  std::vector<ResultRow> rows(points.size());
  if (points.empty()) return rows;

  if (capacity_sweep_points) {
    // One enumeration pass covers every capacity in the sweep.
    int max_slots = 0;
    for (const auto& p : points) max_slots = std::max(max_slots, p.scenario.capacity_slots());
    const auto start = Clock::now();
    const auto& base = points.front().scenario;
    const double alpha = resolve_alpha(policy, base);
    const auto reports = capacity_sweep(base, alpha, max_slots);
    const double elapsed = seconds_since(start) / static_cast<double>(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
      rows[i].sweep_value = points[i].sweep_value;
      fill_analysis(rows[i], reports[points[i].scenario.capacity_slots()], points[i].scenario, alpha);
      if (timing) rows[i].wall_seconds = elapsed;
    }
    return rows;
  }

  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto start = Clock::now();
    const auto& s = points[i].scenario;
    const double alpha = resolve_alpha(policy, s);
    const auto report = s.has_mobility() ? mobility_report(s, alpha) : exact_report(s);
    rows[i].sweep_value = points[i].sweep_value;
    fill_analysis(rows[i], report, s, alpha);
    if (timing) rows[i].wall_seconds = seconds_since(start);
  }
  return rows;
}

void emit(std::ostream& out, const std::vector<ResultRow>& rows) {
  write_header(out);
  for (const auto& row : rows) write_row(out, row);
}

}  // namespace

std::string format_number(double x) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof buffer, x, std::chars_format::general, 10);
  return std::string(buffer, result.ptr);
}

void write_header(std::ostream& out) {
  out << "sweep_value,Pb_analysis,Pb_sim,Pb_sim_ci99,EY_analysis,EY_sim,EY_sim_ci99,"
         "Pd_analysis,Pd_sim,Pd_sim_ci99,alpha_used,state_count,wall_seconds\n";
}

void write_row(std::ostream& out, const ResultRow& row) {
  put(out, row.sweep_value);
  for (const auto* x : {&row.pb_analysis, &row.pb_sim, &row.pb_ci, &row.ey_analysis, &row.ey_sim,
                        &row.ey_ci, &row.pd_analysis, &row.pd_sim, &row.pd_ci, &row.alpha_used}) {
    out << ',';
    put(out, *x);
  }
  out << ',';
  if (row.state_count) out << *row.state_count;
  out << ',';
  put(out, row.wall_seconds);
  out << '\n';
}

std::vector<ResultRow> cmd_analyze(const ScenarioDocument& doc, const CommandOptions& options,
                                   std::ostream& out, std::ostream& log) {
  const auto base = analysis_scenario(doc, options, false, log);
  const auto points = sweep_points(doc, base);
  const bool by_capacity = doc.sweep && doc.sweep->parameter == SweepParameter::kCapacity;
  auto rows = analyze_points(points, alpha_policy(doc, options), by_capacity, options.timing);
  emit(out, rows);
  return rows;
}

std::vector<ResultRow> cmd_simulate(const ScenarioDocument& doc, const CommandOptions& options,
                                    std::ostream& out, std::ostream& log) {
  const bool walk = walk_engine(doc, options);
  if (options.replications < 2) {
    log << "warning: fewer than two replications, confidence intervals are left empty\n";
  }
  const auto base = analysis_scenario(doc, options, walk, log);
  const auto points = sweep_points(doc, base);
  const bool by_capacity = doc.sweep && doc.sweep->parameter == SweepParameter::kCapacity;
  auto rows = analyze_points(points, alpha_policy(doc, options), by_capacity, false);

  const MobilityEngine engine = walk ? MobilityEngine{doc.walk} : MobilityEngine{MarkovEngine{}};
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto start = Clock::now();
    const auto result = simulate(sim_config(points[i].scenario, options, engine));
    rows[i].pb_sim = result.blocking_rate.mean;
    rows[i].pb_ci = result.blocking_rate.ci99;
    rows[i].ey_sim = result.mean_bandwidth.mean;
    rows[i].ey_ci = result.mean_bandwidth.ci99;
    if (points[i].scenario.has_mobility() || walk) {
      rows[i].pd_sim = result.dropping_rate.mean;
      rows[i].pd_ci = result.dropping_rate.ci99;
    }
    if (options.timing) rows[i].wall_seconds = seconds_since(start);
  }
  emit(out, rows);
  return rows;
}

int cmd_plan(const ScenarioDocument& doc, const CommandOptions& options, std::ostream& out,
             std::ostream& log) {
  if (!(options.target_pb > 0 && options.target_pb < 1)) {
    throw ValidationError("--target-pb must lie in (0, 1)");
  }
  if (options.k_min < 0 || options.k_max < options.k_min) {
    throw ValidationError("need 0 <= --k-min <= --k-max");
  }
  const auto base = analysis_scenario(doc, options, false, log);
  const int c1 = base.slots(1);
  const double alpha = resolve_alpha(alpha_policy(doc, options), base);

  // Start from the no-mobility answer, which is cheap, and widen the range
  // until the target is met.  Cost grows like K^M, so growth is geometric.
  const CellScenario still = base.with_mobility(NoMobility{});
  int hi = options.k_max;
  for (int k = options.k_min; k <= options.k_max; ++k) {
    if (kaufman_roberts_blocking(still.with_capacity_slots(k * c1)).blocking_rate < options.target_pb) {
      hi = std::max(k, options.k_min);
      break;
    }
  }

  std::vector<ResultRow> rows;
  std::optional<int> found;
  for (;;) {
    const auto start = Clock::now();
    const auto reports = capacity_sweep(base, alpha, hi * c1);
    const double elapsed = seconds_since(start);
    rows.clear();
    for (int k = options.k_min; k <= hi; ++k) {
      ResultRow row;
      row.sweep_value = k;
      fill_analysis(row, reports[k * c1], base.with_capacity_slots(k * c1), alpha);
      if (options.timing) row.wall_seconds = elapsed;
      rows.push_back(row);
      if (reports[k * c1].blocking_rate < options.target_pb) {
        found = k;
        break;
      }
    }
    if (found || hi >= options.k_max) break;
    hi = std::min(options.k_max, hi + std::max(2, hi / 8));
  }

  if (found && options.confirm) {
    const auto walk = walk_engine(doc, options);
    const MobilityEngine engine = walk ? MobilityEngine{doc.walk} : MobilityEngine{MarkovEngine{}};
    const auto scenario = walk ? doc.scenario : base;
    const auto result =
        simulate(sim_config(scenario.with_capacity_slots(*found * c1), options, engine));
    auto& row = rows.back();
    row.pb_sim = result.blocking_rate.mean;
    row.pb_ci = result.blocking_rate.ci99;
    row.ey_sim = result.mean_bandwidth.mean;
    row.ey_ci = result.mean_bandwidth.ci99;
    if (base.has_mobility()) {
      row.pd_sim = result.dropping_rate.mean;
      row.pd_ci = result.dropping_rate.ci99;
    }
  }
  emit(out, rows);
  if (!found) {
    throw CommandError("target blocking rate " + format_number(options.target_pb) +
                       " not reached for K up to " + std::to_string(options.k_max));
  }
  log << "minimal K = " << *found << " (P_b = " << format_number(*rows.back().pb_analysis) << ")\n";
  return *found;
}

std::vector<AlphaPoint> read_alpha_points(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open points file " + path);
  std::vector<AlphaPoint> points;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw ValidationError(path + ":" + std::to_string(number) + ": expected mu_w,alpha");
    }
    AlphaPoint p;
    const char* first = line.data();
    const auto a = std::from_chars(first, first + comma, p.mu_w);
    const auto b = std::from_chars(first + comma + 1, first + line.size(), p.alpha);
    if (a.ec != std::errc() || b.ec != std::errc()) {
      if (points.empty() && number == 1) continue;  // header
      throw ValidationError(path + ":" + std::to_string(number) + ": not a number");
    }
    points.push_back(p);
  }
  return points;
}

QuadraticFit cmd_fit_alpha(const std::string& points_csv_path, bool ordinary, std::ostream& out,
                           std::ostream& log) {
  const auto points = read_alpha_points(points_csv_path);
  const auto fit = ordinary ? fit_alpha_curve(points) : fit_capped_alpha_curve(points);
  out << "coefficient,value\n";
  out << "a," << format_number(fit.a) << "\n";
  out << "b," << format_number(fit.b) << "\n";
  out << "c," << format_number(fit.c) << "\n\n";
  out << "mu_w,alpha,fitted,residual\n";
  double worst = 0;
  for (const auto& p : points) {
    const double f = ordinary ? fit.evaluate(p.mu_w) : std::min(fit.evaluate(p.mu_w), 1.0);
    worst = std::max(worst, std::abs(f - p.alpha));
    out << format_number(p.mu_w) << ',' << format_number(p.alpha) << ',' << format_number(f) << ','
        << format_number(f - p.alpha) << "\n";
  }
  log << "max |fit - alpha| = " << format_number(worst) << "\n";
  return fit;
}

MeasuredMobility cmd_measure_mobility(const ScenarioDocument& doc, const CommandOptions& options,
                                      std::ostream& out, std::ostream& log) {
  const auto measured = measure_transition_rates(sim_config(doc.scenario, options, doc.walk));
  const int zones = doc.scenario.zones();
  out << "from,to,rate_per_minute,crossings,zone_minutes\n";
  for (int i = 1; i <= zones; ++i) {
    for (int j : {i + 1, i - 1}) {
      if (j > zones || (j == kOutsideCell && i != 1)) continue;
      out << i << ',' << j << ',' << format_number(measured.rates.at(i, j)) << ','
          << measured.crossings[static_cast<std::size_t>(i - 1) * (zones + 1) + j] << ','
          << format_number(measured.zone_time[i - 1]) << "\n";
    }
  }
  for (const auto& w : measured.warnings) log << "warning: " << w << "\n";
  log << "mean sojourn w = " << format_number(measured.mean_sojourn_minutes) << " min\n";

  if (options.write_scenario) {
    ScenarioDocument derived = doc;
    derived.scenario = doc.scenario.with_mobility(ExplicitRates{measured.rates});
    derived.model = MobilityModel::kExplicit;
    derived.walk = RandomWalkEngine{};
    std::ofstream file(*options.write_scenario);
    if (!file) throw std::runtime_error("cannot write " + *options.write_scenario);
    file << dump_scenario(derived);
  }
  return measured;
}

}  // namespace iptvq
