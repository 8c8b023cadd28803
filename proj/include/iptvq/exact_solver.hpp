#pragma once

// Closed-form performance of the cell when connections never change MCS:
// the stationary law is p(s) = p(0) prod_i (lambda_i/mu)^{n_i} / n_i!.

#include <memory>
#include <optional>
#include <vector>

#include "iptvq/load_profile.hpp"
#include "iptvq/model.hpp"

namespace iptvq {

/// Unnormalized log weights of individual states plus the log normalizer
/// over S.  p(0) = exp(-log_normalizer()).
class StationaryWeights {
 public:
  StationaryWeights(CellScenario scenario, std::optional<kernels::MobilityTerms> mobility,
                    std::shared_ptr<const LoadProfile> profile);

  const CellScenario& scenario() const { return scenario_; }
  const LoadProfile& profile() const { return *profile_; }

  /// Throws ValidationError for states outside S.
  double log_weight(const SystemState& state) const;
  double log_normalizer() const { return log_normalizer_; }
  double probability(const SystemState& state) const;

 private:
  CellScenario scenario_;
  std::optional<kernels::MobilityTerms> mobility_;
  std::shared_ptr<const LoadProfile> profile_;
  std::vector<double> log_ratio_;
  double log_normalizer_;
};

struct BlockingResult {
  double blocking_rate = 0;
  std::vector<double> per_zone_rejection;  // index m-1
};

/// Requires a scenario without mobility.
StationaryWeights exact_weights(const CellScenario& scenario);

/// Blocking, per-zone rejection and bandwidth from one enumeration pass.
PerformanceReport exact_report(const CellScenario& scenario);
BlockingResult blocking_rate(const CellScenario& scenario);
/// Mean bandwidth in connection units of MCS 1.
double mean_bandwidth(const CellScenario& scenario);

/// Reports for every capacity 0..max_capacity_slots from a single pass.
std::vector<PerformanceReport> exact_capacity_sweep(const CellScenario& scenario,
                                                    int max_capacity_slots);

/// Kaufman-Roberts occupancy recursion over total slots, O(M K).
/// The report carries blocking, per-zone rejection and bandwidth.
PerformanceReport kaufman_roberts_report(const CellScenario& scenario);
BlockingResult kaufman_roberts_blocking(const CellScenario& scenario);

}  // namespace iptvq
