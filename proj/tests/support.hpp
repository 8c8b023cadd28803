#pragma once

// Shared fixtures and independent reference implementations for the tests.
// Nothing here calls into the solvers under test.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "iptvq/model.hpp"

namespace iptvq::test {

inline std::vector<McsClass> classes(std::vector<int> slots, std::vector<double> fractions) {
  std::vector<McsClass> mcs;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    mcs.push_back({"mcs" + std::to_string(i + 1), slots[i], fractions[i]});
  }
  return mcs;
}

/// M = 1, one slot per connection: an M/M/K/K queue.
inline CellScenario unit_cell(int servers, double lambda, double mu) {
  return CellScenario(classes({1}, {1.0}), servers, lambda, mu);
}

/// M = 2, slots (14, 7), K_slots = 28.
inline CellScenario tiny_pair(double lambda = 1.0, double mu = 0.5, MobilitySpec mobility = NoMobility{}) {
  return CellScenario(classes({14, 7}, {0.45, 0.55}), 28, lambda, mu, std::move(mobility));
}

/// Independent lattice-point count by recursion over zones.
inline std::uint64_t recursive_count(const std::vector<int>& slots, std::size_t zone, int room) {
  if (zone == slots.size()) return 1;
  std::uint64_t total = 0;
  for (int used = 0; used <= room; used += slots[zone]) {
    total += recursive_count(slots, zone + 1, room - used);
  }
  return total;
}

/// Every state with load <= capacity, nested loops in lexicographic order.
inline std::vector<std::vector<int>> brute_states(const std::vector<int>& slots, int capacity) {
  std::vector<std::vector<int>> out;
  std::vector<int> n(slots.size(), 0);
  std::function<void(std::size_t, int)> walk = [&](std::size_t zone, int room) {
    if (zone == slots.size()) {
      out.push_back(n);
      return;
    }
    for (int k = 0; k * slots[zone] <= room; ++k) {
      n[zone] = k;
      walk(zone + 1, room - k * slots[zone]);
    }
    n[zone] = 0;
  };
  walk(0, capacity);
  return out;
}

/// Random scenario with M zones, strictly decreasing slots and |S| <= max_states.
inline CellScenario random_scenario(std::mt19937_64& gen, int zones, std::uint64_t max_states,
                                    MobilitySpec mobility = NoMobility{}) {
  std::uniform_int_distribution<int> first(zones + 1, 16);
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  for (;;) {
    std::vector<int> slots{first(gen)};
    for (int m = 1; m < zones; ++m) {
      std::uniform_int_distribution<int> next(zones - m, slots.back() - 1);
      slots.push_back(next(gen));
    }
    std::vector<double> raw(zones);
    double sum = 0;
    for (auto& r : raw) sum += (r = unit(gen));
    std::vector<double> fractions(zones);
    double partial = 0;
    for (int m = 0; m + 1 < zones; ++m) partial += (fractions[m] = raw[m] / sum);
    fractions[zones - 1] = 1.0 - partial;

    std::uniform_int_distribution<int> cap(slots.front(), slots.front() * 12);
    const int capacity = cap(gen);
    if (recursive_count(slots, 0, capacity) > max_states) continue;
    std::uniform_real_distribution<double> lambda(0.2, 3.0);
    std::uniform_real_distribution<double> mu(0.1, 1.5);
    return CellScenario(classes(slots, fractions), capacity, lambda(gen), mu(gen), std::move(mobility));
  }
}

/// f_i(s) written out term by term from the definition, 1-based zone i.
/// R(s) = lambda + sum_k n_k (mu + sum_{l != k} v_kl), handover included.
inline double reference_factor(const CellScenario& s, const std::vector<int>& n, int i, double alpha) {
  const int M = s.zones();
  const auto& v = s.rates();
  auto leave = [&](int k) {
    double total = v.at(k, 0);
    for (int l = 1; l <= M; ++l) {
      if (l != k) total += v.at(k, l);
    }
    return total;
  };
  double R = s.lambda();
  for (int k = 1; k <= M; ++k) R += n[k - 1] * (s.mu() + leave(k));

  double second_sum = 0;
  for (int j = 1; j <= M; ++j) {
    if (j != i) second_sum += n[j - 1] * v.at(i, j);
  }
  const double second = s.lambda(i) / (s.mu() * (1.0 + second_sum / R));
  if (alpha == 0) return second;

  const double R_minus = R - (s.mu() + leave(i));
  double inflow = 0;
  double feedback = 0;
  for (int j = 1; j <= M; ++j) {
    if (j == i) continue;
    inflow += (n[j - 1] + 1) * v.at(j, i) * s.lambda(j) / R_minus;
    feedback += v.at(i, j) * (n[j - 1] + 1) * v.at(j, i) / R;
  }
  const double first = (s.lambda(i) + inflow) / (s.mu() + leave(i) - feedback);
  return alpha * first + (1 - alpha) * second;
}

}  // namespace iptvq::test
