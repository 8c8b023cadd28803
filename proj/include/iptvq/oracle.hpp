#pragma once

// Brute-force references for validating the closed forms: the full CTMC
// generator over S solved directly, and Erlang-B.

#include <Eigen/SparseCore>
#include <cstddef>
#include <vector>

#include "iptvq/model.hpp"

namespace iptvq {

inline constexpr std::size_t kOracleStateCap = 200000;

/// Generator of the unapproximated chain, states in enumeration order.
/// A blocked outward MCS change removes the connection (a drop); the zone-1
/// handover removes it as well.
struct GeneratorMatrix {
  std::vector<std::vector<int>> states;
  std::vector<int> loads;
  Eigen::SparseMatrix<double, Eigen::RowMajor> q;
};

/// Throws std::length_error when |S| exceeds `cap`.
GeneratorMatrix build_generator(const CellScenario& scenario, std::size_t cap = kOracleStateCap);

/// pi Q = 0, sum pi = 1, via sparse LU with one balance equation replaced by
/// the normalization.  Throws std::runtime_error if the system is singular.
std::vector<double> stationary_solve(const GeneratorMatrix& generator);

/// max_j |(pi Q)_j|
double balance_residual(const GeneratorMatrix& generator, const std::vector<double>& pi);

/// B(a, 0) = 1, B(a, k) = a B(a, k-1) / (k + a B(a, k-1)).
double erlang_b(double offered_load, int servers);

/// True metrics of the chain.  The dropping rate is drops per MCS-change
/// event of connections in zones 2..M, the same ratio the simulator reports;
/// per_mcs_drop holds the per-zone version.
struct OracleReport {
  double blocking_rate = 0;
  std::vector<double> per_zone_rejection;
  double mean_bandwidth = 0;
  double mean_bandwidth_slots = 0;
  double dropping_rate = 0;
  std::vector<double> per_mcs_drop;
  std::size_t state_count = 0;
  double residual = 0;
};

OracleReport oracle_report(const CellScenario& scenario, std::size_t cap = kOracleStateCap);
OracleReport oracle_report(const CellScenario& scenario, const GeneratorMatrix& generator,
                           const std::vector<double>& pi);

}  // namespace iptvq
