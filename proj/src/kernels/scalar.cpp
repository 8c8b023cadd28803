#include <algorithm>
#include <cmath>
#include <limits>

#include "iptvq/kernels/kernels.hpp"

namespace iptvq::kernels {

std::vector<double> log_factorials(int max_count) {
  std::vector<double> table(static_cast<std::size_t>(std::max(max_count, 0)) + 1, 0.0);
  for (int k = 1; k <= max_count; ++k) table[k] = table[k - 1] + std::log(static_cast<double>(k));
  return table;
}

double mobility_factor(const MobilityTerms& t, std::span<const int> n, int i) {
  double total_departure = t.lambda_total;
  for (int k = 0; k < t.zones; ++k) total_departure += n[k] * t.departure[k];
  const double without_i = total_departure - t.departure[i];

  double inflow = 0;  // sum_j (n_j + 1) v_ji lambda_j
  double back = 0;    // sum_j v_ij (n_j + 1) v_ji
  double cross = 0;   // sum_j n_j v_ij
  for (int j = 0; j < t.zones; ++j) {
    if (j == i) continue;
    const double v_ij = t.rate(i, j);
    const double v_ji = t.rate(j, i);
    inflow += (n[j] + 1) * v_ji * t.lambda[j];
    back += v_ij * (n[j] + 1) * v_ji;
    cross += n[j] * v_ij;
  }
  const double arriving = t.lambda[i] + (inflow != 0 ? inflow / without_i : 0.0);
  const double first = arriving / (t.mu + t.outflow[i] - back / total_departure);
  const double second = t.lambda[i] / (t.mu * (1 + cross / total_departure));
  return t.alpha * first + (1 - t.alpha) * second;
}

namespace scalar {

void exact_run(double base, double log_ratio, std::span<const double> log_factorial,
               std::span<double> out) {
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = k == 0 ? base : base + static_cast<double>(k) * log_ratio - log_factorial[k];
  }
}

void mobility_run(const MobilityTerms& terms, std::span<const int> prefix,
                  std::span<const double> log_factorial, std::span<double> out) {
  const int zones = terms.zones;
  std::vector<int> n(prefix.begin(), prefix.end());
  n.push_back(0);
  double prefix_log_factorial = 0;
  for (int p : prefix) prefix_log_factorial += log_factorial[p];

  for (std::size_t k = 0; k < out.size(); ++k) {
    n[zones - 1] = static_cast<int>(k);
    double lw = -prefix_log_factorial - log_factorial[k];
    for (int i = 0; i < zones; ++i) {
      if (n[i] == 0) continue;
      lw += n[i] * std::log(mobility_factor(terms, n, i));
    }
    out[k] = lw;
  }
}

void exp_shifted(std::span<const double> in, double shift, std::span<double> out) {
  for (std::size_t k = 0; k < in.size(); ++k) out[k] = std::exp(in[k] - shift);
}

double max_value(std::span<const double> in) {
  double best = -std::numeric_limits<double>::infinity();
  for (double x : in) {
    if (x > best) best = x;
  }
  return best;
}

}  // namespace scalar
}  // namespace iptvq::kernels
