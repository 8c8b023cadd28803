#include "iptvq/mobility_solver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace iptvq {

double fitted_alpha(double mu, double w_minutes) {
  if (!(mu > 0) || !(w_minutes > 0)) throw ValidationError("fitted alpha needs mu > 0 and w > 0");
  const double x = mu * w_minutes;
  const double alpha = 1.48 * x * x - 1.22 * x + 0.63;
  return std::clamp(alpha, 0.0, 1.0);
}

double mean_sojourn_from_rates(const TransitionRates& rates) {
  double sum = 0;
  int counted = 0;
  for (int m = 1; m <= rates.zones(); ++m) {
    const double out = rates.outflow(m);
    if (out > 0) {
      sum += 1.0 / out;
      ++counted;
    }
  }
  if (counted == 0) return std::numeric_limits<double>::infinity();
  return sum / counted;
}

double resolve_alpha(const AlphaPolicy& policy, const CellScenario& scenario) {
  if (const auto* fixed = std::get_if<FixedAlpha>(&policy)) {
    if (!(fixed->value >= 0 && fixed->value <= 1)) throw ValidationError("alpha must lie in [0, 1]");
    return fixed->value;
  }
  if (!scenario.has_mobility()) return 1.0;
  if (const auto* sojourn = std::get_if<MarkovSojourn>(&scenario.mobility())) {
    return fitted_alpha(scenario.mu(), sojourn->mean_sojourn_minutes);
  }
  return fitted_alpha(scenario.mu(), mean_sojourn_from_rates(scenario.rates()));
}

kernels::MobilityTerms mobility_terms(const CellScenario& scenario, double alpha) {
  if (!(alpha >= 0 && alpha <= 1)) throw ValidationError("alpha must lie in [0, 1]");
  const int zones = scenario.zones();
  if (zones > 64) throw ValidationError("at most 64 zones are supported");
  kernels::MobilityTerms t;
  t.zones = zones;
  t.lambda_total = scenario.lambda();
  t.mu = scenario.mu();
  t.alpha = alpha;
  t.rates.assign(static_cast<std::size_t>(zones) * zones, 0.0);
  for (int i = 1; i <= zones; ++i) {
    t.lambda.push_back(scenario.lambda(i));
    t.outflow.push_back(scenario.rates().outflow(i));
    t.departure.push_back(scenario.mu() + t.outflow.back());
    for (int j = 1; j <= zones; ++j) {
      if (j != i) t.rates[(i - 1) * zones + (j - 1)] = scenario.rates().at(i, j);
    }
  }
  return t;
}

double total_departure_rate(const SystemState& state, const CellScenario& scenario) {
  double r = scenario.lambda();
  for (int k = 1; k <= scenario.zones(); ++k) {
    r += state.count(k) * (scenario.mu() + scenario.rates().outflow(k));
  }
  return r;
}

double local_factor(const SystemState& state, int i, const CellScenario& scenario, double alpha) {
  if (i < 1 || i > scenario.zones()) throw ValidationError("zone index out of range");
  if (static_cast<int>(state.n.size()) != scenario.zones()) {
    throw ValidationError("state has the wrong dimension");
  }
  if (state.count(i) == 0 && alpha > 0 && scenario.has_mobility()) {
    throw ValidationError("f_i(s) needs n_i >= 1 so that s - E_i exists");
  }
  const auto terms = mobility_terms(scenario, alpha);
  return kernels::mobility_factor(terms, state.n, i - 1);
}

namespace {

bool uses_exact_weights(const CellScenario& scenario) {
  return !scenario.has_mobility() || scenario.lambda() == 0;
}

LoadProfile profile_for(const CellScenario& scenario, double alpha, int max_load) {
  if (uses_exact_weights(scenario)) {
    if (!(alpha >= 0 && alpha <= 1)) throw ValidationError("alpha must lie in [0, 1]");
    return build_load_profile(scenario, max_load, std::nullopt);
  }
  return build_load_profile(scenario, max_load, mobility_terms(scenario, alpha));
}

}  // namespace

StationaryWeights mobility_weights(const CellScenario& scenario, double alpha) {
  auto profile = std::make_shared<const LoadProfile>(
      profile_for(scenario, alpha, scenario.capacity_slots()));
  std::optional<kernels::MobilityTerms> terms;
  if (!uses_exact_weights(scenario)) terms = mobility_terms(scenario, alpha);
  return StationaryWeights(scenario, std::move(terms), std::move(profile));
}

std::vector<double> flow_conservation_weights(const TransitionRates& rates) {
  const int zones = rates.zones();
  if (zones < 2) return {};
  // sigma'_m is proportional to prod_{k=2}^{m-1} v_{k,k+1} * prod_{k=m+1}^{M} v_{k,k-1},
  // the division-free solution of the detailed flow balance.
  std::vector<double> weights;
  double sum = 0;
  for (int m = 2; m <= zones; ++m) {
    double w = 1;
    for (int k = 2; k <= m - 1; ++k) w *= rates.at(k, k + 1);
    for (int k = m + 1; k <= zones; ++k) w *= rates.at(k, k - 1);
    weights.push_back(w);
    sum += w;
  }
  for (double& w : weights) w = sum > 0 ? w / sum : 1.0 / (zones - 1);
  return weights;
}

double branch_weight(const TransitionRates& rates, int m, int j) {
  const double out = rates.outflow(m);
  return out > 0 ? rates.at(m, j) / out : 0.0;
}

void add_dropping(PerformanceReport& report, const CellScenario& scenario,
                  const LoadProfile& profile, int capacity_slots) {
  const int zones = scenario.zones();
  const auto& rates = scenario.rates();
  report.per_mcs_drop.assign(zones, 0.0);
  report.dropping_rate = 0;
  report.dropping_defined = zones >= 2 && scenario.has_mobility();
  if (!report.dropping_defined) return;

  const auto shares = flow_conservation_weights(rates);
  for (int m = 2; m <= zones; ++m) {
    const auto occupied = profile.occupied(m);
    double busy = 0;
    for (int y = 0; y <= capacity_slots; ++y) busy += occupied[y];
    if (busy == 0) continue;
    double dropped = 0;
    for (int j = 1; j < m; ++j) {
      const double weight = branch_weight(rates, m, j);
      if (weight == 0) continue;
      const int threshold = capacity_slots - scenario.slots(j) + scenario.slots(m);
      double in_set = 0;
      for (int y = std::max(0, threshold + 1); y <= capacity_slots; ++y) in_set += occupied[y];
      dropped += weight * in_set;
    }
    report.per_mcs_drop[m - 1] = dropped / busy;
    report.dropping_rate += shares[m - 2] * report.per_mcs_drop[m - 1];
  }
}

std::vector<PerformanceReport> capacity_sweep(const CellScenario& scenario, double alpha,
                                              int max_capacity_slots) {
  const auto profile = profile_for(scenario, alpha, max_capacity_slots);
  std::vector<PerformanceReport> reports;
  reports.reserve(max_capacity_slots + 1);
  for (int k = 0; k <= max_capacity_slots; ++k) {
    const auto at_k = scenario.with_capacity_slots(k);
    auto report = report_from_profile(at_k, profile, k);
    add_dropping(report, at_k, profile, k);
    reports.push_back(std::move(report));
  }
  return reports;
}

PerformanceReport mobility_report(const CellScenario& scenario, double alpha) {
  const auto profile = profile_for(scenario, alpha, scenario.capacity_slots());
  auto report = report_from_profile(scenario, profile, scenario.capacity_slots());
  add_dropping(report, scenario, profile, scenario.capacity_slots());
  return report;
}

BlockingResult mobility_blocking(const CellScenario& scenario, double alpha) {
  auto report = mobility_report(scenario, alpha);
  return {report.blocking_rate, std::move(report.per_zone_rejection)};
}

double mobility_bandwidth(const CellScenario& scenario, double alpha) {
  return mobility_report(scenario, alpha).mean_bandwidth;
}

DroppingResult dropping_rate(const CellScenario& scenario, double alpha) {
  auto report = mobility_report(scenario, alpha);
  return {report.dropping_rate, std::move(report.per_mcs_drop), report.dropping_defined};
}

QuadraticFit fit_alpha_curve(std::span<const AlphaPoint> points) {
  std::set<double> distinct;
  for (const auto& p : points) {
    if (!std::isfinite(p.mu_w) || !std::isfinite(p.alpha)) {
      throw ValidationError("fit points must be finite");
    }
    distinct.insert(p.mu_w);
  }
  if (distinct.size() < 3) {
    throw ValidationError("a quadratic fit needs at least three distinct x values");
  }
  Eigen::MatrixXd design(points.size(), 3);
  Eigen::VectorXd target(points.size());
  for (std::size_t r = 0; r < points.size(); ++r) {
    const double x = points[r].mu_w;
    design(r, 0) = 1;
    design(r, 1) = x;
    design(r, 2) = x * x;
    target(r) = points[r].alpha;
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < 3) throw ValidationError("degenerate design matrix for the quadratic fit");
  const Eigen::Vector3d coef = qr.solve(target);
  return {coef(2), coef(1), coef(0)};
}

double capped_residual(const QuadraticFit& fit, std::span<const AlphaPoint> points) {
  double sum = 0;
  for (const auto& p : points) {
    const double r = std::min(fit.evaluate(p.mu_w), 1.0) - p.alpha;
    sum += r * r;
  }
  return sum;
}

QuadraticFit fit_capped_alpha_curve(std::span<const AlphaPoint> points) {
  for (const auto& p : points) {
    if (p.alpha > 1) throw ValidationError("capped fit needs every alpha <= 1");
  }
  QuadraticFit best = fit_alpha_curve(points);
  double best_cost = capped_residual(best, points);
  std::vector<bool> capped(points.size(), false);
  QuadraticFit fit = best;
  for (int iteration = 0; iteration < 64; ++iteration) {
    std::vector<bool> next(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) next[i] = fit.evaluate(points[i].mu_w) >= 1;
    if (next == capped && iteration > 0) break;
    capped = next;
    std::vector<AlphaPoint> free;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (!capped[i]) free.push_back(points[i]);
    }
    try {
      fit = fit_alpha_curve(free);
    } catch (const ValidationError&) {
      break;  // too few uncapped points left
    }
    const double cost = capped_residual(fit, points);
    if (cost < best_cost) {
      best = fit;
      best_cost = cost;
    }
  }
  return best;
}

}  // namespace iptvq
