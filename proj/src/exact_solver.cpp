#include "iptvq/exact_solver.hpp"

#include <cmath>
#include <limits>

namespace iptvq {

namespace {

void require_no_mobility(const CellScenario& scenario) {
  if (scenario.has_mobility()) {
    throw ValidationError("the exact solver requires a scenario without mobility (all v_ij = 0)");
  }
}

}  // namespace

StationaryWeights::StationaryWeights(CellScenario scenario,
                                     std::optional<kernels::MobilityTerms> mobility,
                                     std::shared_ptr<const LoadProfile> profile)
    : scenario_(std::move(scenario)), mobility_(std::move(mobility)), profile_(std::move(profile)) {
  for (int m = 1; m <= scenario_.zones(); ++m) {
    const double ratio = scenario_.lambda(m) / scenario_.mu();
    log_ratio_.push_back(ratio > 0 ? std::log(ratio) : -std::numeric_limits<double>::infinity());
  }
  log_normalizer_ = profile_->log_mass(scenario_.capacity_slots());
}

double StationaryWeights::log_weight(const SystemState& state) const {
  const int zones = scenario_.zones();
  if (static_cast<int>(state.n.size()) != zones) throw ValidationError("state has the wrong dimension");
  for (int c : state.n) {
    if (c < 0) throw ValidationError("state counts must be nonnegative");
  }
  if (load_of(state.n, scenario_) > scenario_.capacity_slots()) {
    throw ValidationError("state lies outside the sample space");
  }
  double lw = 0;
  for (int i = 0; i < zones; ++i) {
    const int n = state.n[i];
    if (n == 0) continue;
    const double log_factor = mobility_ ? std::log(kernels::mobility_factor(*mobility_, state.n, i))
                                        : log_ratio_[i];
    lw += n * log_factor - std::lgamma(n + 1.0);
  }
  return lw;
}

double StationaryWeights::probability(const SystemState& state) const {
  return std::exp(log_weight(state) - log_normalizer_);
}

StationaryWeights exact_weights(const CellScenario& scenario) {
  require_no_mobility(scenario);
  auto profile = std::make_shared<const LoadProfile>(
      build_load_profile(scenario, scenario.capacity_slots(), std::nullopt));
  return StationaryWeights(scenario, std::nullopt, std::move(profile));
}

PerformanceReport exact_report(const CellScenario& scenario) {
  require_no_mobility(scenario);
  const auto profile = build_load_profile(scenario, scenario.capacity_slots(), std::nullopt);
  return report_from_profile(scenario, profile, scenario.capacity_slots());
}

BlockingResult blocking_rate(const CellScenario& scenario) {
  auto report = exact_report(scenario);
  return {report.blocking_rate, std::move(report.per_zone_rejection)};
}

double mean_bandwidth(const CellScenario& scenario) { return exact_report(scenario).mean_bandwidth; }

std::vector<PerformanceReport> exact_capacity_sweep(const CellScenario& scenario,
                                                    int max_capacity_slots) {
  require_no_mobility(scenario);
  const auto profile = build_load_profile(scenario, max_capacity_slots, std::nullopt);
  std::vector<PerformanceReport> reports;
  for (int k = 0; k <= max_capacity_slots; ++k) {
    reports.push_back(report_from_profile(scenario.with_capacity_slots(k), profile, k));
  }
  return reports;
}

PerformanceReport kaufman_roberts_report(const CellScenario& scenario) {
  require_no_mobility(scenario);
  const int zones = scenario.zones();
  const int capacity = scenario.capacity_slots();

  // q[y] is proportional to Pr{Y = y}; y q(y) = sum_m a_m c_m q(y - c_m).
  std::vector<double> q(static_cast<std::size_t>(capacity) + 1, 0.0);
  q[0] = 1.0;
  double log_scale = 0;
  for (int y = 1; y <= capacity; ++y) {
    double acc = 0;
    for (int m = 1; m <= zones; ++m) {
      const int c = scenario.slots(m);
      if (c <= y) acc += scenario.lambda(m) / scenario.mu() * c * q[y - c];
    }
    q[y] = acc / y;
    if (q[y] > 1e200) {
      for (int k = 0; k <= y; ++k) q[k] *= 1e-200;
      log_scale += 200 * std::log(10.0);
    }
  }

  double mass = 0;
  double moment = 0;
  for (int y = 0; y <= capacity; ++y) {
    mass += q[y];
    moment += y * q[y];
  }
  PerformanceReport report;
  report.state_count = count_states(scenario, capacity);
  report.log_normalizer = std::log(mass) + log_scale;
  report.per_zone_rejection.assign(zones, 0.0);
  report.per_mcs_drop.assign(zones, 0.0);
  for (int m = 1; m <= zones; ++m) {
    double blocked = 0;
    for (int y = std::max(0, capacity - scenario.slots(m) + 1); y <= capacity; ++y) blocked += q[y];
    report.per_zone_rejection[m - 1] = blocked / mass;
    report.blocking_rate += scenario.area_fraction(m) * report.per_zone_rejection[m - 1];
  }
  report.mean_bandwidth_slots = moment / mass;
  report.mean_bandwidth = report.mean_bandwidth_slots / scenario.slots(1);
  return report;
}

BlockingResult kaufman_roberts_blocking(const CellScenario& scenario) {
  auto report = kaufman_roberts_report(scenario);
  return {report.blocking_rate, std::move(report.per_zone_rejection)};
}

}  // namespace iptvq
