// Acceptance run: one PASS/FAIL line per criterion.  Exits 0 once every
// criterion has been evaluated; --strict also turns any FAIL into exit 1.

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "iptvq/commands.hpp"
#include "iptvq/exact_solver.hpp"
#include "iptvq/mobility_solver.hpp"
#include "iptvq/oracle.hpp"
#include "iptvq/presets.hpp"
#include "iptvq/scenario_io.hpp"
#include "iptvq/simulator.hpp"
#include "support.hpp"

using namespace iptvq;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Notes {
 public:
  void fail(const std::string& what) {
    pass_ = false;
    if (failures_++ < 6) detail_ << (detail_.tellp() > 0 ? "; " : "") << what;
  }
  void note(const std::string& what) { extra_ << (extra_.tellp() > 0 ? "; " : "") << what; }
  Outcome done() const {
    std::string d = extra_.str();
    if (failures_ > 0) {
      d += (d.empty() ? "" : "; ") + std::to_string(failures_) + " failing check(s): " + detail_.str();
    }
    return {pass_, d};
  }

 private:
  bool pass_ = true;
  int failures_ = 0;
  std::ostringstream detail_, extra_;
};

std::string fmt(double x) { return format_number(x); }

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

ScenarioDocument doc(const std::string& name) {
  return load_scenario(std::string(IPTVQ_SCENARIO_DIR) + "/" + name + ".json");
}

const std::vector<double> kLambdas{0.4, 0.8, 1.2, 1.6, 2.0, 2.4};

/// >= 20 replications with >= 200,000 minutes of statistics each.
SimulationResult long_run(const CellScenario& s, MobilityEngine engine, double window) {
  SimConfig config{s};
  config.engine = engine;
  config.replications = 20;
  config.seed = 2024;
  config.horizon_minutes = config.effective_warmup() + window;
  return simulate(config);
}

/// Per-zone rejection vectors seen by any criterion, for the ordering check.
struct Rejection {
  std::string label;
  CellScenario scenario;
  std::vector<double> by_zone;
};
std::vector<Rejection> g_rejections;

void record(const std::string& label, const CellScenario& s, const PerformanceReport& r) {
  if (r.blocking_rate > 0) g_rejections.push_back({label, s, r.per_zone_rejection});
}

std::vector<CellScenario> random_cells(std::uint64_t seed, int count, std::uint64_t max_states) {
  std::mt19937_64 gen(seed);
  std::vector<CellScenario> cells;
  for (int i = 0; i < count; ++i) cells.push_back(test::random_scenario(gen, 1 + i % 3, max_states));
  return cells;
}

Outcome oracle_equivalence() {
  Notes n;
  const auto start = Clock::now();
  double worst_state = 0, worst_metric = 0;
  const auto cells = random_cells(101, 24, 10000);
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto& s = cells[c];
    const auto g = build_generator(s);
    const auto pi = stationary_solve(g);
    const auto w = exact_weights(s);
    for (std::size_t k = 0; k < pi.size(); ++k) {
      worst_state = std::max(worst_state, std::abs(pi[k] - w.probability({g.states[k], g.loads[k]})));
    }
    const auto truth = oracle_report(s, g, pi);
    const auto r = exact_report(s);
    record("random cell " + std::to_string(c), s, r);
    worst_metric = std::max({worst_metric, std::abs(truth.blocking_rate - r.blocking_rate),
                             std::abs(truth.mean_bandwidth - r.mean_bandwidth)});
  }
  const double elapsed = seconds_since(start);
  if (worst_state > 1e-10) n.fail("per-state error " + fmt(worst_state));
  if (worst_metric > 1e-10) n.fail("metric error " + fmt(worst_metric));
  if (elapsed >= 60) n.fail("runtime " + fmt(elapsed) + " s");
  n.note(std::to_string(cells.size()) + " scenarios, max per-state error " + fmt(worst_state) +
         ", max metric error " + fmt(worst_metric) + ", " + fmt(elapsed) + " s");
  return n.done();
}

Outcome erlang_reduction() {
  Notes n;
  double worst = 0;
  for (double a : {0.5, 1.0, 2.0, 5.0}) {
    for (int k = 1; k <= 20; ++k) {
      const double diff = std::abs(blocking_rate(test::unit_cell(k, a, 1.0)).blocking_rate - erlang_b(a, k));
      worst = std::max(worst, diff);
      if (diff > 1e-12) n.fail("a=" + fmt(a) + " K=" + std::to_string(k) + " diff " + fmt(diff));
    }
  }
  n.note("80 grid points, max difference " + fmt(worst));
  return n.done();
}

Outcome kaufman_roberts() {
  Notes n;
  double worst = 0;
  const auto cells = random_cells(202, 24, 20000);
  for (const auto& s : cells) {
    const double diff = std::abs(kaufman_roberts_blocking(s).blocking_rate - blocking_rate(s).blocking_rate);
    worst = std::max(worst, diff);
    if (diff > 1e-10) n.fail("difference " + fmt(diff));
  }
  n.note(std::to_string(cells.size()) + " scenarios, max difference " + fmt(worst));
  return n.done();
}

Outcome static_reproduction() {
  Notes n;
  const auto base = doc("six_mcs_static").scenario;
  int inside = 0;
  for (double lambda : kLambdas) {
    const auto s = base.with_lambda(lambda);
    const auto r = exact_report(s);
    record("static lambda " + fmt(lambda), s, r);
    const auto sim = long_run(s, MarkovEngine{}, 200000);
    const bool pb = std::abs(r.blocking_rate - sim.blocking_rate.mean) <= sim.blocking_rate.ci99;
    const bool ey = std::abs(r.mean_bandwidth - sim.mean_bandwidth.mean) <= sim.mean_bandwidth.ci99;
    inside += pb + ey;
    if (!pb) n.fail("lambda " + fmt(lambda) + " Pb " + fmt(r.blocking_rate) + " vs " + fmt(sim.blocking_rate.mean) +
                    " +- " + fmt(sim.blocking_rate.ci99));
    if (!ey) n.fail("lambda " + fmt(lambda) + " EY " + fmt(r.mean_bandwidth) + " vs " + fmt(sim.mean_bandwidth.mean) +
                    " +- " + fmt(sim.mean_bandwidth.ci99));
  }
  n.note(std::to_string(inside) + "/12 analytical values inside the 99% CI (20 reps x 200000 min)");
  return n.done();
}

/// Simulated w = 10 sweep shared by criteria 5 and 6.
std::vector<SimulationResult> g_w10_sim;

bool close_enough(double analysis, double sim, double rel, double abs_floor) {
  return std::abs(analysis - sim) <= std::max(rel * std::abs(sim), abs_floor);
}

void accuracy_checks(Notes& n, const std::string& label, const PerformanceReport& r, const SimulationResult& sim,
                     int& checked, int& passed) {
  if (sim.blocking_rate.mean >= 1e-3) {
    ++checked;
    if (close_enough(r.blocking_rate, sim.blocking_rate.mean, 0.10, 0.002)) {
      ++passed;
    } else {
      n.fail(label + " Pb " + fmt(r.blocking_rate) + " vs sim " + fmt(sim.blocking_rate.mean));
    }
  }
  ++checked;
  if (close_enough(r.mean_bandwidth, sim.mean_bandwidth.mean, 0.02, 0)) {
    ++passed;
  } else {
    n.fail(label + " EY " + fmt(r.mean_bandwidth) + " vs sim " + fmt(sim.mean_bandwidth.mean));
  }
  ++checked;
  if (close_enough(r.dropping_rate, sim.dropping_rate.mean, 0.15, 0.002)) {
    ++passed;
  } else {
    n.fail(label + " Pd " + fmt(r.dropping_rate) + " vs sim " + fmt(sim.dropping_rate.mean));
  }
}

Outcome mobility_accuracy() {
  Notes n;
  int checked = 0, passed = 0;
  for (const char* name : {"six_mcs_w5", "six_mcs_w10"}) {
    const auto d = doc(name);
    const double alpha = std::get<FixedAlpha>(d.alpha).value;
    for (double lambda : kLambdas) {
      const auto s = d.scenario.with_lambda(lambda);
      const auto r = mobility_report(s, alpha);
      const auto sim = long_run(s, MarkovEngine{}, 200000);
      const std::string label = std::string(name == std::string("six_mcs_w5") ? "w=5" : "w=10") + " lambda " + fmt(lambda);
      record(label + " alpha " + fmt(alpha), s, r);
      accuracy_checks(n, label, r, sim, checked, passed);
      if (std::string(name) == "six_mcs_w10") g_w10_sim.push_back(sim);
    }
  }
  n.note(std::to_string(passed) + "/" + std::to_string(checked) + " comparisons within tolerance at alpha 0.4");
  return n.done();
}

Outcome alpha_bounds() {
  Notes n;
  const auto d = doc("six_mcs_w10");
  int ok = 0;
  for (std::size_t i = 0; i < kLambdas.size(); ++i) {
    const auto s = d.scenario.with_lambda(kLambdas[i]);
    const auto& sim = g_w10_sim.at(i);
    const auto low = mobility_report(s, 0.0);
    const auto high = mobility_report(s, 1.0);
    record("w=10 alpha 0 lambda " + fmt(kLambdas[i]), s, low);
    record("w=10 alpha 1 lambda " + fmt(kLambdas[i]), s, high);
    const std::string at = "lambda " + fmt(kLambdas[i]);
    const bool checks[] = {
        low.blocking_rate >= sim.blocking_rate.mean - sim.blocking_rate.ci99,
        high.blocking_rate <= sim.blocking_rate.mean + sim.blocking_rate.ci99,
        low.mean_bandwidth >= sim.mean_bandwidth.mean - sim.mean_bandwidth.ci99,
        high.mean_bandwidth <= sim.mean_bandwidth.mean + sim.mean_bandwidth.ci99,
    };
    const char* names[] = {"alpha=0 Pb below sim", "alpha=1 Pb above sim", "alpha=0 EY below sim",
                           "alpha=1 EY above sim"};
    for (int c = 0; c < 4; ++c) {
      if (checks[c]) {
        ++ok;
      } else {
        n.fail(at + " " + names[c]);
      }
    }
  }
  n.note(std::to_string(ok) + "/24 bound checks hold");
  return n.done();
}

Outcome alpha_fit() {
  Notes n;
  std::ostringstream out, log;
  const auto fit = cmd_fit_alpha(std::string(IPTVQ_DATA_DIR) + "/alpha_reference.csv", false, out, log);
  const auto points = read_alpha_points(std::string(IPTVQ_DATA_DIR) + "/alpha_reference.csv");
  double worst = 0;
  for (const auto& p : points) worst = std::max(worst, std::abs(std::min(fit.evaluate(p.mu_w), 1.0) - p.alpha));
  if (std::abs(fit.a - 1.48) > 0.15) n.fail("a = " + fmt(fit.a));
  if (std::abs(fit.b + 1.22) > 0.15) n.fail("b = " + fmt(fit.b));
  if (std::abs(fit.c - 0.63) > 0.15) n.fail("c = " + fmt(fit.c));
  if (worst > 0.08) n.fail("max deviation " + fmt(worst));
  const auto ols = fit_alpha_curve(points);
  n.note("capped least squares (" + fmt(fit.a) + ", " + fmt(fit.b) + ", " + fmt(fit.c) + "), max |fit - alpha| " +
         fmt(worst) + "; plain quadratic (" + fmt(ols.a) + ", " + fmt(ols.b) + ", " + fmt(ols.c) + ")");
  return n.done();
}

Outcome planning_thresholds() {
  Notes n;
  const std::pair<const char*, int> cases[] = {{"plan_lambda_1_6", 22}, {"plan_lambda_2_4", 30}};
  std::string found;
  for (const auto& [name, expected] : cases) {
    CommandOptions options;
    options.target_pb = 0.01;
    std::ostringstream out, log;
    const int k = cmd_plan(doc(name), options, out, log);
    found += (found.empty() ? "" : ", ") + std::string("lambda ") + fmt(doc(name).scenario.lambda()) + " -> K " +
             std::to_string(k) + " (expected " + std::to_string(expected) + " +- 1)";
    if (std::abs(k - expected) > 1) n.fail("lambda " + fmt(doc(name).scenario.lambda()) + " gives K " + std::to_string(k));
  }
  n.note(found);
  return n.done();
}

Outcome random_walk_pipeline() {
  Notes n;
  const auto d = doc("random_walk");
  SimConfig measure{d.scenario};
  measure.engine = d.walk;
  measure.replications = 20;
  measure.seed = 77;
  measure.horizon_minutes = measure.effective_warmup() + 50000;
  const auto m = measure_transition_rates(measure);

  struct Expected {
    int from, to;
    double rate;
  };
  const Expected table[] = {{3, 2, 0.03576}, {2, 3, 0.1122}, {2, 1, 0.1055}, {1, 2, 0.1413}, {1, 0, 0.1373}};
  std::string rates;
  for (const auto& e : table) {
    const double got = m.rates.at(e.from, e.to);
    rates += (rates.empty() ? "" : " ") + std::to_string(e.from) + "->" + std::to_string(e.to) + "=" + fmt(got);
    if (std::abs(got - e.rate) > 0.10 * e.rate) {
      n.fail("v" + std::to_string(e.from) + std::to_string(e.to) + " " + fmt(got) + " vs " + fmt(e.rate));
    }
  }
  if (std::abs(m.mean_sojourn_minutes - 11.9) > 1.19) n.fail("w " + fmt(m.mean_sojourn_minutes) + " vs 11.9");
  n.note("measured " + rates + ", w " + fmt(m.mean_sojourn_minutes) + " min");

  const auto measured = d.scenario.with_mobility(ExplicitRates{m.rates});
  const double alpha = std::get<FixedAlpha>(d.alpha).value;
  int checked = 0, passed = 0;
  for (double lambda : kLambdas) {
    const auto r = mobility_report(measured.with_lambda(lambda), alpha);
    record("random walk lambda " + fmt(lambda), measured.with_lambda(lambda), r);
    const auto sim = long_run(d.scenario.with_lambda(lambda), d.walk, 50000);
    accuracy_checks(n, "lambda " + fmt(lambda), r, sim, checked, passed);
  }
  n.note(std::to_string(passed) + "/" + std::to_string(checked) + " analysis-vs-walk comparisons within tolerance");
  return n.done();
}

Outcome zone_ordering() {
  Notes n;
  for (const char* name : {"mcs_count_2", "mcs_count_3"}) {
    for (double lambda : kLambdas) {
      const auto s = doc(name).scenario.with_lambda(lambda);
      record(std::string(name) + " lambda " + fmt(lambda), s, exact_report(s));
    }
  }
  // Zone m+1 must reject strictly less than zone m unless no state has a
  // load in (K - c_m, K - c_{m+1}], where the two rejection events coincide.
  int tested = 0, forced_ties = 0;
  for (const auto& [label, s, r] : g_rejections) {
    if (r.size() < 2) continue;
    ++tested;
    const int k = s.capacity_slots();
    for (int m = 1; m < s.zones(); ++m) {
      const int lo = k - s.slots(m), hi = k - s.slots(m + 1);
      const bool gap = count_states(s, hi) == count_states(s, lo);
      if (r[m] > r[m - 1] || (r[m] == r[m - 1] && !gap)) {
        n.fail(label + " zones " + std::to_string(m) + "," + std::to_string(m + 1) + ": " + fmt(r[m - 1]) + " vs " +
               fmt(r[m]));
      }
      forced_ties += gap && r[m] == r[m - 1];
    }
  }
  n.note(std::to_string(tested) + " multi-zone scenarios with positive blocking, " + std::to_string(forced_ties) +
         " adjacent ties forced by empty load ranges");
  return n.done();
}

Outcome determinism() {
  Notes n;
  const auto d = doc("six_mcs_w10");
  CommandOptions options;
  options.replications = 4;
  options.horizon_minutes = 5000;
  options.seed = 31337;
  std::ostringstream a, b, c, log;
  cmd_simulate(d, options, a, log);
  cmd_simulate(d, options, b, log);
  options.threads = 4;
  cmd_simulate(d, options, c, log);
  if (a.str() != b.str()) n.fail("repeated run differs");
  if (a.str() != c.str()) n.fail("threaded run differs");
  n.note(std::to_string(a.str().size()) + " bytes compared across 3 runs");
  return n.done();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  bool strict = false;
  std::vector<int> only;
  app.add_flag("--strict", strict, "Exit 1 if any criterion fails");
  app.add_option("--only", only, "Run only these criteria");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"oracle equivalence, exact case", oracle_equivalence},
      {"Erlang-B reduction", erlang_reduction},
      {"Kaufman-Roberts equivalence", kaufman_roberts},
      {"static cell matches simulation", static_reproduction},
      {"mobility approximation accuracy", mobility_accuracy},
      {"alpha endpoint bounds", alpha_bounds},
      {"alpha fitting function", alpha_fit},
      {"capacity planning thresholds", planning_thresholds},
      {"random-walk pipeline", random_walk_pipeline},
      {"zone rejection ordering", zone_ordering},
      {"simulation determinism", determinism},
  };
  std::set<int> selected(only.begin(), only.end());
  if (selected.count(6)) selected.insert(5);  // bounds reuse the w = 10 simulation

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(number)) continue;
    const auto start = Clock::now();
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("error: ") + e.what()};
    }
    failed += !outcome.pass;
    std::cout << "criterion " << number << ": " << (outcome.pass ? "PASS" : "FAIL") << "  " << criteria[i].first
              << " (" << std::fixed << std::setprecision(1) << seconds_since(start) << std::defaultfloat
              << " s): " << outcome.detail << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria pass" : std::to_string(failed) + " criterion/criteria fail") << std::endl;
  return strict && failed > 0 ? 1 : 0;
}
