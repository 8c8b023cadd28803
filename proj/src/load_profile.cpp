#include "iptvq/load_profile.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace iptvq {

namespace {

// Weights are stored as exp(log w - log_scale_); a new batch may exceed the
// current scale by this much before the profile is rescaled.
constexpr double kHeadroom = 256.0;

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

LoadProfile::LoadProfile(int zones, int max_load)
    : zones_(zones),
      max_load_(max_load),
      log_scale_(kNegInf),
      total_(static_cast<std::size_t>(max_load) + 1, 0.0),
      occupied_(static_cast<std::size_t>(zones) * (max_load + 1), 0.0),
      counts_(static_cast<std::size_t>(max_load) + 1, 0) {}

std::span<const double> LoadProfile::occupied(int m) const {
  const std::size_t width = static_cast<std::size_t>(max_load_) + 1;
  return std::span<const double>(occupied_).subspan((m - 1) * width, width);
}

std::uint64_t LoadProfile::states_up_to(int capacity) const {
  std::uint64_t total = 0;
  for (int y = 0; y <= std::min(capacity, max_load_); ++y) total += counts_[y];
  return total;
}

void LoadProfile::rescale(double new_log_scale) {
  if (log_scale_ != kNegInf) {
    const double factor = std::exp(log_scale_ - new_log_scale);
    for (double& w : total_) w *= factor;
    for (double& w : occupied_) w *= factor;
  }
  log_scale_ = new_log_scale;
}

void LoadProfile::add_run(const StateRun& run, int last_slots, std::span<const double> log_weights,
                          const kernels::KernelTable& kernels, std::vector<double>& scratch) {
  const std::size_t length = log_weights.size();
  const std::size_t width = static_cast<std::size_t>(max_load_) + 1;
  for (std::size_t k = 0; k < length; ++k) ++counts_[run.prefix_load + k * last_slots];
  states_ += length;

  const double batch_max = kernels.max_value(log_weights);
  if (batch_max == kNegInf) return;
  if (log_scale_ == kNegInf || batch_max > log_scale_ + kHeadroom) rescale(batch_max);

  scratch.resize(length);
  kernels.exp_shifted(log_weights, log_scale_, scratch);

  const int last = zones_ - 1;
  for (std::size_t k = 0; k < length; ++k) {
    const double w = scratch[k];
    if (!(w >= 0)) {
      throw std::domain_error("stationary weight is not a nonnegative number");
    }
    const std::size_t y = run.prefix_load + k * last_slots;
    total_[y] += w;
  }
  for (int m = 0; m < last; ++m) {
    if (run.prefix[m] == 0) continue;
    double* row = occupied_.data() + m * width;
    for (std::size_t k = 0; k < length; ++k) row[run.prefix_load + k * last_slots] += scratch[k];
  }
  double* row = occupied_.data() + last * width;
  for (std::size_t k = 1; k < length; ++k) row[run.prefix_load + k * last_slots] += scratch[k];
}

void LoadProfile::merge(const LoadProfile& other) {
  if (other.zones_ != zones_ || other.max_load_ != max_load_) {
    throw std::invalid_argument("cannot merge load profiles of different shape");
  }
  for (std::size_t y = 0; y < counts_.size(); ++y) counts_[y] += other.counts_[y];
  states_ += other.states_;
  if (other.log_scale_ == kNegInf) return;
  if (log_scale_ == kNegInf || other.log_scale_ > log_scale_) rescale(other.log_scale_);
  const double factor = std::exp(other.log_scale_ - log_scale_);
  for (std::size_t i = 0; i < total_.size(); ++i) total_[i] += factor * other.total_[i];
  for (std::size_t i = 0; i < occupied_.size(); ++i) occupied_[i] += factor * other.occupied_[i];
}

double LoadProfile::log_mass(int capacity) const {
  double sum = 0;
  for (int y = 0; y <= std::min(capacity, max_load_); ++y) sum += total_[y];
  return std::log(sum) + log_scale_;
}

namespace {

void accumulate_partition(const CellScenario& scenario, int max_load,
                          const std::optional<kernels::MobilityTerms>& mobility,
                          const kernels::KernelTable& kernels, int leading,
                          std::span<const double> log_factorial, LoadProfile& profile) {
  const int zones = scenario.zones();
  const int last_slots = scenario.slots(zones);

  // Exact weights: per-zone log(lambda_i / mu), -inf for an idle zone.
  std::vector<double> log_ratio(zones);
  for (int m = 1; m <= zones; ++m) {
    const double ratio = scenario.lambda(m) / scenario.mu();
    log_ratio[m - 1] = ratio > 0 ? std::log(ratio) : kNegInf;
  }

  std::vector<double> log_weights;
  std::vector<double> scratch;
  for_each_run(
      scenario, max_load,
      [&](const StateRun& run) {
        log_weights.resize(run.length);
        if (mobility) {
          kernels.mobility_run(*mobility, run.prefix, log_factorial, log_weights);
        } else {
          double base = 0;
          for (std::size_t i = 0; i < run.prefix.size(); ++i) {
            if (run.prefix[i] == 0) continue;
            base += run.prefix[i] * log_ratio[i] - log_factorial[run.prefix[i]];
          }
          kernels.exact_run(base, log_ratio[zones - 1], log_factorial, log_weights);
        }
        profile.add_run(run, last_slots, log_weights, kernels, scratch);
      },
      leading);
}

}  // namespace

LoadProfile build_load_profile(const CellScenario& scenario, int max_load,
                               const std::optional<kernels::MobilityTerms>& mobility,
                               const kernels::KernelTable& kernels, unsigned threads) {
  const int zones = scenario.zones();
  if (max_load < 0) throw ValidationError("profile load bound must be nonnegative");
  if (mobility && mobility->lambda_total <= 0) {
    throw std::invalid_argument("mobility weights need a positive arrival rate");
  }
  const auto log_factorial = kernels::log_factorials(max_load / scenario.slots(zones) + 1);

  if (zones == 1) {
    LoadProfile profile(zones, max_load);
    accumulate_partition(scenario, max_load, mobility, kernels, -1, log_factorial, profile);
    return profile;
  }

  const int partitions = max_load / scenario.slots(1) + 1;
  std::vector<LoadProfile> parts(partitions, LoadProfile(zones, max_load));
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(partitions));

  std::atomic<int> next{0};
  auto worker = [&] {
    for (int p = next.fetch_add(1); p < partitions; p = next.fetch_add(1)) {
      accumulate_partition(scenario, max_load, mobility, kernels, p, log_factorial, parts[p]);
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          worker();
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  LoadProfile profile(zones, max_load);
  for (const auto& part : parts) profile.merge(part);
  return profile;
}

PerformanceReport report_from_profile(const CellScenario& scenario, const LoadProfile& profile,
                                      int capacity_slots) {
  if (capacity_slots > profile.max_load()) {
    throw std::invalid_argument("capacity exceeds the load range of the profile");
  }
  const int zones = scenario.zones();
  const auto total = profile.total();

  double mass = 0;
  double load_moment = 0;
  for (int y = 0; y <= capacity_slots; ++y) {
    mass += total[y];
    load_moment += static_cast<double>(y) * total[y];
  }

  PerformanceReport report;
  report.state_count = profile.states_up_to(capacity_slots);
  report.log_normalizer = std::log(mass) + profile.log_scale();
  report.per_zone_rejection.assign(zones, 0.0);
  report.per_mcs_drop.assign(zones, 0.0);
  for (int m = 1; m <= zones; ++m) {
    double blocked = 0;
    for (int y = std::max(0, capacity_slots - scenario.slots(m) + 1); y <= capacity_slots; ++y) {
      blocked += total[y];
    }
    report.per_zone_rejection[m - 1] = blocked / mass;
    report.blocking_rate += scenario.area_fraction(m) * report.per_zone_rejection[m - 1];
  }
  report.mean_bandwidth_slots = load_moment / mass;
  report.mean_bandwidth = report.mean_bandwidth_slots / scenario.slots(1);
  return report;
}

}  // namespace iptvq
