#pragma once

// Approximate stationary law when connections move between zones (and thus
// change MCS) during a session.  lambda_i/mu in the product form is replaced
// by the state-dependent factor f_i(s), an alpha-weighted blend of the two
// approximate local balance solutions.

#include <span>
#include <variant>
#include <vector>

#include "iptvq/exact_solver.hpp"
#include "iptvq/kernels/kernels.hpp"
#include "iptvq/load_profile.hpp"
#include "iptvq/model.hpp"

namespace iptvq {

struct FixedAlpha {
  double value = 0.4;
  bool operator==(const FixedAlpha&) const = default;
};
struct FittedAlpha {
  bool operator==(const FittedAlpha&) const = default;
};
using AlphaPolicy = std::variant<FixedAlpha, FittedAlpha>;

/// min{1.48 x^2 - 1.22 x + 0.63, 1} with x = mu * w, clamped to [0, 1].
double fitted_alpha(double mu, double w_minutes);

/// Mean zone sojourn implied by a rate matrix: the average over zones of
/// 1 / sum_j v_ij (zones that never leave are skipped).
double mean_sojourn_from_rates(const TransitionRates& rates);

/// Resolves the policy for a scenario.  The fitted policy uses the
/// MarkovSojourn w, or mean_sojourn_from_rates for explicit rates; without
/// mobility it returns 1 (the x -> infinity limit), which has no effect.
double resolve_alpha(const AlphaPolicy& policy, const CellScenario& scenario);

/// R(s) = lambda + sum_k n_k (mu + sum_{l != k} v_kl), handover included.
double total_departure_rate(const SystemState& state, const CellScenario& scenario);

/// f_i(s) for zone i (1-based).  Requires n_i >= 1 when alpha > 0 and
/// lambda > 0 so that s - E_i exists.
double local_factor(const SystemState& state, int i, const CellScenario& scenario, double alpha);

kernels::MobilityTerms mobility_terms(const CellScenario& scenario, double alpha);

StationaryWeights mobility_weights(const CellScenario& scenario, double alpha);

/// Blocking, bandwidth and dropping at the scenario capacity.
PerformanceReport mobility_report(const CellScenario& scenario, double alpha);
BlockingResult mobility_blocking(const CellScenario& scenario, double alpha);
double mobility_bandwidth(const CellScenario& scenario, double alpha);

struct DroppingResult {
  double dropping_rate = 0;
  std::vector<double> per_mcs;  // index m-1, Pr{dropped | MCS m}; entry 0 unused
  bool defined = false;         // false without mobility or with M = 1
};
DroppingResult dropping_rate(const CellScenario& scenario, double alpha);

/// Reports for capacities 0..max_capacity_slots from one pass.  Uses the
/// exact weights when the scenario has no mobility or no arrivals.
std::vector<PerformanceReport> capacity_sweep(const CellScenario& scenario, double alpha,
                                              int max_capacity_slots);

/// Connection shares sigma'_m over zones 2..M from flow conservation,
/// sigma'_m v_{m,m+1} = sigma'_{m+1} v_{m+1,m}.  Index 0 holds zone 2.
std::vector<double> flow_conservation_weights(const TransitionRates& rates);

/// v_mj / sum_{i != m} v_mi (0 when zone m never moves).
double branch_weight(const TransitionRates& rates, int m, int j);

/// Adds dropping terms for capacity `capacity_slots` to a report built from
/// the same profile.
void add_dropping(PerformanceReport& report, const CellScenario& scenario,
                  const LoadProfile& profile, int capacity_slots);

struct AlphaPoint {
  double mu_w = 0;
  double alpha = 0;
};
struct QuadraticFit {
  double a = 0, b = 0, c = 0;  // alpha = a x^2 + b x + c
  double evaluate(double x) const { return (a * x + b) * x + c; }
};

/// Ordinary least squares on the basis (1, x, x^2).  Throws ValidationError
/// for fewer than three distinct x values.
QuadraticFit fit_alpha_curve(std::span<const AlphaPoint> points);

/// Least squares of the capped model alpha = min{a x^2 + b x + c, 1}.  Points
/// the fitted parabola lifts above 1 are served by the cap and drop out of
/// the quadratic fit; the active set is iterated to a fixed point.  Equals
/// fit_alpha_curve when no point is capped.  Requires every alpha <= 1.
QuadraticFit fit_capped_alpha_curve(std::span<const AlphaPoint> points);

/// Sum of squared residuals of min{fit(x), 1} against the points.
double capped_residual(const QuadraticFit& fit, std::span<const AlphaPoint> points);

}  // namespace iptvq
