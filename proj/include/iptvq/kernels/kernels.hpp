#pragma once

// Data-parallel inner loops of the solvers.  Every kernel has a scalar
// reference implementation; vector variants are selected at runtime from the
// host CPU and are tested for equivalence against the reference.

#include <span>
#include <string_view>
#include <vector>

namespace iptvq::kernels {

enum class Isa { kScalar, kAvx2 };

std::string_view isa_name(Isa isa);
bool isa_supported(Isa isa);
/// Widest instruction set that is both compiled in and supported by the CPU.
Isa best_isa();

/// Scenario constants consumed by the mobility weight kernel.  Zone indices
/// are 0-based here.
struct MobilityTerms {
  int zones = 0;
  double lambda_total = 0;
  double mu = 0;
  double alpha = 0;
  std::vector<double> lambda;     // lambda_i = lambda * sigma_i
  std::vector<double> departure;  // mu + sum_{j!=i} v_ij, one occupant's share of R(s)
  std::vector<double> outflow;    // sum_{j!=i} v_ij, handover included
  std::vector<double> rates;      // v_ij between cell zones, row-major zones x zones

  double rate(int from, int to) const { return rates[static_cast<std::size_t>(from) * zones + to]; }
};

/// Row of log(k!) for k = 0..max_count.
std::vector<double> log_factorials(int max_count);

struct KernelTable {
  Isa isa;

  /// out[k] = base + k * log_ratio - log_factorial[k].  `log_ratio` may be
  /// -inf (zero offered load), in which case out[0] = base.
  void (*exact_run)(double base, double log_ratio, std::span<const double> log_factorial,
                    std::span<double> out);

  /// Log of prod_i f_i(s)^{n_i} / n_i! for the states (prefix, k), k < out.size().
  /// Requires terms.lambda_total > 0.
  void (*mobility_run)(const MobilityTerms& terms, std::span<const int> prefix,
                       std::span<const double> log_factorial, std::span<double> out);

  /// out[k] = exp(in[k] - shift); -inf maps to 0 and NaN propagates.
  void (*exp_shifted)(std::span<const double> in, double shift, std::span<double> out);

  /// Largest element (-inf for an empty span).  NaN entries are ignored.
  double (*max_value)(std::span<const double> in);
};

const KernelTable& kernel_table(Isa isa);
const KernelTable& active_kernels();
Isa active_isa();
/// Overrides the runtime choice; throws std::invalid_argument if `isa` is
/// not available on this machine.
void set_active_isa(Isa isa);

/// Scalar f_i(s) for one 0-based zone index, exposed for tests and per-state
/// queries.  `n` holds all M counts.
double mobility_factor(const MobilityTerms& terms, std::span<const int> n, int zone);

namespace scalar {
void exact_run(double, double, std::span<const double>, std::span<double>);
void mobility_run(const MobilityTerms&, std::span<const int>, std::span<const double>,
                  std::span<double>);
void exp_shifted(std::span<const double>, double, std::span<double>);
double max_value(std::span<const double>);
}  // namespace scalar

#if defined(IPTVQ_WITH_AVX2)
namespace avx2 {
void exact_run(double, double, std::span<const double>, std::span<double>);
void mobility_run(const MobilityTerms&, std::span<const int>, std::span<const double>,
                  std::span<double>);
void exp_shifted(std::span<const double>, double, std::span<double>);
double max_value(std::span<const double>);
}  // namespace avx2
#endif

}  // namespace iptvq::kernels
