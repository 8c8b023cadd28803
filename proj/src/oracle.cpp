#include "iptvq/oracle.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace iptvq {

namespace {

class StateIndex {
 public:
  explicit StateIndex(const CellScenario& scenario) {
    std::uint64_t stride = 1;
    for (int m = 1; m <= scenario.zones(); ++m) {
      strides_.push_back(stride);
      stride *= static_cast<std::uint64_t>(scenario.capacity_slots() / scenario.slots(m) + 1);
    }
  }

  std::uint64_t code(std::span<const int> n) const {
    std::uint64_t c = 0;
    for (std::size_t i = 0; i < n.size(); ++i) c += strides_[i] * static_cast<std::uint64_t>(n[i]);
    return c;
  }

  void add(std::span<const int> n, int index) { index_.emplace(code(n), index); }
  int find(std::span<const int> n) const { return index_.at(code(n)); }

 private:
  std::vector<std::uint64_t> strides_;
  std::unordered_map<std::uint64_t, int> index_;
};

}  // namespace

GeneratorMatrix build_generator(const CellScenario& scenario, std::size_t cap) {
  const std::uint64_t size = count_states(scenario, scenario.capacity_slots());
  if (size > cap) {
    throw std::length_error("oracle state space has " + std::to_string(size) +
                            " states, above the cap of " + std::to_string(cap));
  }
  const int zones = scenario.zones();
  const int capacity = scenario.capacity_slots();
  const auto& rates = scenario.rates();

  GeneratorMatrix g;
  StateIndex index(scenario);
  enumerate_states(scenario, [&](const SystemState& s) {
    index.add(s.n, static_cast<int>(g.states.size()));
    g.states.push_back(s.n);
    g.loads.push_back(s.load_slots);
  });

  std::vector<Eigen::Triplet<double>> entries;
  std::vector<int> next;
  for (std::size_t row = 0; row < g.states.size(); ++row) {
    const auto& n = g.states[row];
    const int y = g.loads[row];
    double out = 0;
    auto to = [&](double rate) {
      entries.emplace_back(static_cast<int>(row), index.find(next), rate);
      out += rate;
    };
    for (int i = 1; i <= zones; ++i) {
      next = n;
      if (y + scenario.slots(i) <= capacity && scenario.lambda(i) > 0) {
        ++next[i - 1];
        to(scenario.lambda(i));
        next = n;
      }
      if (n[i - 1] == 0) continue;
      const int ni = n[i - 1];
      double leave = ni * scenario.mu();
      for (int j = 1; j <= zones; ++j) {
        if (j == i) continue;
        const double v = rates.at(i, j);
        if (v == 0) continue;
        if (y - scenario.slots(i) + scenario.slots(j) <= capacity) {
          next = n;
          --next[i - 1];
          ++next[j - 1];
          to(ni * v);
        } else {
          leave += ni * v;  // dropped
        }
      }
      if (i == 1) leave += ni * rates.at(1, kOutsideCell);
      next = n;
      --next[i - 1];
      to(leave);
    }
    if (out > 0) entries.emplace_back(static_cast<int>(row), static_cast<int>(row), -out);
  }
  const auto dim = static_cast<Eigen::Index>(g.states.size());
  g.q.resize(dim, dim);
  g.q.setFromTriplets(entries.begin(), entries.end());
  return g;
}

std::vector<double> stationary_solve(const GeneratorMatrix& generator) {
  const Eigen::Index dim = generator.q.rows();
  // Q^T pi = 0 with the balance equation of state 0 replaced by sum pi = 1.
  Eigen::SparseMatrix<double> a = generator.q.transpose();
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(a.nonZeros() + dim);
  for (Eigen::Index col = 0; col < a.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(a, col); it; ++it) {
      if (it.row() != 0) entries.emplace_back(it.row(), it.col(), it.value());
    }
  }
  for (Eigen::Index col = 0; col < dim; ++col) entries.emplace_back(0, col, 1.0);
  a.setFromTriplets(entries.begin(), entries.end());
  a.makeCompressed();

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw std::runtime_error("generator system is singular");
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
  rhs(0) = 1;
  const Eigen::VectorXd x = lu.solve(rhs);
  if (lu.info() != Eigen::Success) throw std::runtime_error("stationary solve failed");

  std::vector<double> pi(x.data(), x.data() + dim);
  double sum = 0;
  for (double& p : pi) {
    p = std::max(p, 0.0);
    sum += p;
  }
  for (double& p : pi) p /= sum;
  return pi;
}

double balance_residual(const GeneratorMatrix& generator, const std::vector<double>& pi) {
  const Eigen::Map<const Eigen::VectorXd> p(pi.data(), static_cast<Eigen::Index>(pi.size()));
  const Eigen::VectorXd flow = generator.q.transpose() * p;
  return flow.size() == 0 ? 0.0 : flow.cwiseAbs().maxCoeff();
}

double erlang_b(double offered_load, int servers) {
  if (offered_load < 0 || servers < 0) throw ValidationError("erlang_b needs a >= 0 and n >= 0");
  double b = 1;
  for (int k = 1; k <= servers; ++k) b = offered_load * b / (k + offered_load * b);
  return b;
}

OracleReport oracle_report(const CellScenario& scenario, std::size_t cap) {
  const auto generator = build_generator(scenario, cap);
  const auto pi = stationary_solve(generator);
  return oracle_report(scenario, generator, pi);
}

OracleReport oracle_report(const CellScenario& scenario, const GeneratorMatrix& generator,
                           const std::vector<double>& pi) {
  const int zones = scenario.zones();
  const int capacity = scenario.capacity_slots();
  const auto& rates = scenario.rates();

  OracleReport r;
  r.state_count = generator.states.size();
  r.residual = balance_residual(generator, pi);
  r.per_zone_rejection.assign(zones, 0.0);
  r.per_mcs_drop.assign(zones, 0.0);
  std::vector<double> triggers(zones, 0.0);
  std::vector<double> drops(zones, 0.0);

  for (std::size_t s = 0; s < pi.size(); ++s) {
    const auto& n = generator.states[s];
    const int y = generator.loads[s];
    r.mean_bandwidth_slots += pi[s] * y;
    for (int m = 1; m <= zones; ++m) {
      if (y > capacity - scenario.slots(m)) r.per_zone_rejection[m - 1] += pi[s];
      if (m == 1 || n[m - 1] == 0) continue;
      triggers[m - 1] += pi[s] * n[m - 1] * rates.outflow(m);
      for (int j = 1; j < m; ++j) {
        if (y - scenario.slots(m) + scenario.slots(j) > capacity) {
          drops[m - 1] += pi[s] * n[m - 1] * rates.at(m, j);
        }
      }
    }
  }
  double all_triggers = 0;
  double all_drops = 0;
  for (int m = 1; m <= zones; ++m) {
    r.blocking_rate += scenario.area_fraction(m) * r.per_zone_rejection[m - 1];
    if (triggers[m - 1] > 0) r.per_mcs_drop[m - 1] = drops[m - 1] / triggers[m - 1];
    all_triggers += triggers[m - 1];
    all_drops += drops[m - 1];
  }
  r.dropping_rate = all_triggers > 0 ? all_drops / all_triggers : 0.0;
  r.mean_bandwidth = r.mean_bandwidth_slots / scenario.slots(1);
  return r;
}

}  // namespace iptvq
