#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "iptvq/kernels/kernels.hpp"
#include "iptvq/model.hpp"

namespace iptvq {

/// Unnormalized stationary weight summed per total load Y, kept on a common
/// log scale.  Because state weights do not depend on the capacity, one
/// profile built up to some load answers every capacity K at or below it.
class LoadProfile {
 public:
  LoadProfile(int zones, int max_load);

  int zones() const { return zones_; }
  int max_load() const { return max_load_; }
  std::uint64_t states() const { return states_; }
  /// Number of states with load <= capacity.
  std::uint64_t states_up_to(int capacity) const;

  /// Weight sum of load y is exp(log_scale()) * total()[y].
  double log_scale() const { return log_scale_; }
  std::span<const double> total() const { return total_; }
  /// Same, restricted to states with n_m > 0.
  std::span<const double> occupied(int m) const;

  /// Folds a run of states into the profile given their log weights.
  void add_run(const StateRun& run, int last_slots, std::span<const double> log_weights,
               const kernels::KernelTable& kernels, std::vector<double>& scratch);

  /// Adds another profile over the same zones and load range.
  void merge(const LoadProfile& other);

  /// log of the total weight over loads 0..capacity.
  double log_mass(int capacity) const;

 private:
  void rescale(double new_log_scale);

  int zones_;
  int max_load_;
  std::uint64_t states_ = 0;
  double log_scale_;
  std::vector<double> total_;
  std::vector<double> occupied_;  // zones x (max_load + 1)
  std::vector<std::uint64_t> counts_;
};

/// Builds the profile of all states with load <= max_load.  Without
/// `mobility` the product-form weights prod (lambda_i/mu)^n_i / n_i! are
/// used, otherwise prod f_i(s)^n_i / n_i!.  Partitions by n_1 are evaluated on
/// `threads` workers (0 = hardware concurrency) and merged in order, so the
/// result does not depend on the thread count.
LoadProfile build_load_profile(const CellScenario& scenario, int max_load,
                               const std::optional<kernels::MobilityTerms>& mobility,
                               const kernels::KernelTable& kernels = kernels::active_kernels(),
                               unsigned threads = 0);

struct PerformanceReport {
  double blocking_rate = 0;
  std::vector<double> per_zone_rejection;  // index m-1
  double mean_bandwidth = 0;               // connection units of MCS 1
  double mean_bandwidth_slots = 0;
  double dropping_rate = 0;
  std::vector<double> per_mcs_drop;        // index m-1, zone 1 always 0
  bool dropping_defined = false;
  std::uint64_t state_count = 0;
  double log_normalizer = 0;
};

/// Blocking and bandwidth at capacity `capacity_slots` (<= profile.max_load()).
/// Dropping fields are left at zero.
PerformanceReport report_from_profile(const CellScenario& scenario, const LoadProfile& profile,
                                      int capacity_slots);

}  // namespace iptvq
