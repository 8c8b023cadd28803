#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "iptvq/exact_solver.hpp"
#include "iptvq/oracle.hpp"
#include "iptvq/presets.hpp"
#include "support.hpp"

using namespace iptvq;
using iptvq::test::classes;

TEST_CASE("three-state birth-death chain") {
  const auto s = test::unit_cell(2, 1.0, 1.0);
  const auto w = exact_weights(s);
  CHECK(w.log_normalizer() == doctest::Approx(std::log(2.5)).epsilon(1e-14));
  CHECK(w.probability({{0}, 0}) == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(w.probability({{1}, 1}) == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(w.probability({{2}, 2}) == doctest::Approx(0.2).epsilon(1e-14));
  CHECK_THROWS_AS((void)w.probability({{3}, 3}), ValidationError);

  CHECK(blocking_rate(s).blocking_rate == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(mean_bandwidth(s) == doctest::Approx(0.8).epsilon(1e-14));
}

TEST_CASE("no arrivals puts all mass on the empty state") {
  const CellScenario s(six_mcs_classes(), 70, 0.0, 0.05);
  const auto w = exact_weights(s);
  CHECK(w.probability({{0, 0, 0, 0, 0, 0}, 0}) == doctest::Approx(1.0));
  CHECK(w.probability({{1, 0, 0, 0, 0, 0}, 14}) == 0.0);
  CHECK(blocking_rate(s).blocking_rate == 0.0);
  CHECK(mean_bandwidth(s) == 0.0);
  CHECK(kaufman_roberts_blocking(s).blocking_rate == 0.0);
}

TEST_CASE("capacity below the cheapest connection blocks everything") {
  const CellScenario s(classes({14, 7}, {0.5, 0.5}), 6, 1.0, 1.0);
  CHECK(blocking_rate(s).blocking_rate == 1.0);
  CHECK(kaufman_roberts_blocking(s).blocking_rate == 1.0);
  CHECK(mean_bandwidth(s) == 0.0);
}

TEST_CASE("product form satisfies every global balance equation") {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 8; ++trial) {
    const auto s = test::random_scenario(gen, 1 + trial % 3, 3000);
    const auto w = exact_weights(s);
    std::map<std::vector<int>, double> p;
    double total = 0;
    enumerate_states(s, [&](const SystemState& st) { total += p[st.n] = w.probability(st); });
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

    double worst = 0;
    for (const auto& [n, pn] : p) {
      const int y = load_of(n, s);
      double out = 0, in = 0;
      for (int m = 1; m <= s.zones(); ++m) {
        if (y + s.slots(m) <= s.capacity_slots()) {
          out += s.lambda(m);
          auto up = n;
          ++up[m - 1];
          in += p.at(up) * up[m - 1] * s.mu();
        }
        if (n[m - 1] > 0) {
          out += n[m - 1] * s.mu();
          auto down = n;
          --down[m - 1];
          in += p.at(down) * s.lambda(m);
        }
      }
      if (out > 0) worst = std::max(worst, std::abs(in - pn * out) / (pn * out));
    }
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("Kaufman-Roberts equals enumeration on random scenarios") {
  std::mt19937_64 gen(17);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = test::random_scenario(gen, 1 + trial % 3, 10000);
    const auto a = exact_report(s);
    const auto b = kaufman_roberts_report(s);
    CHECK(std::abs(a.blocking_rate - b.blocking_rate) < 1e-10);
    CHECK(std::abs(a.mean_bandwidth - b.mean_bandwidth) < 1e-10);
    for (int m = 0; m < s.zones(); ++m) {
      CHECK(std::abs(a.per_zone_rejection[m] - b.per_zone_rejection[m]) < 1e-10);
    }
  }
}

TEST_CASE("single unit-cost zone reduces to Erlang-B") {
  for (double a : {0.5, 1.0, 2.0, 5.0}) {
    for (int k = 1; k <= 20; ++k) {
      const auto s = test::unit_cell(k, a, 1.0);
      CHECK(std::abs(blocking_rate(s).blocking_rate - erlang_b(a, k)) < 1e-12);
    }
  }
}

TEST_CASE("blocking grows with lambda and shrinks with capacity") {
  const CellScenario base(three_mcs_classes(), 14 * 6, 1.0, 0.1);
  double previous = -1;
  for (double lambda = 0.1; lambda <= 3.0; lambda += 0.1) {
    const double pb = blocking_rate(base.with_lambda(lambda)).blocking_rate;
    CHECK(pb >= previous);
    previous = pb;
  }
  // Whole MCS-1 connection steps; single-slot steps are not monotone for a
  // multirate loss system (see the next case).
  previous = 2;
  for (int k = 0; k <= 20; ++k) {
    const double pb = blocking_rate(base.with_capacity_slots(14 * k)).blocking_rate;
    CHECK(pb <= previous);
    previous = pb;
  }
}

TEST_CASE("one extra slot can raise blocking at extreme load") {
  const CellScenario s(three_mcs_classes(), 14, 3.0, 0.1);
  bool rises = false;
  for (int k = 14; k < 14 * 4; ++k) {
    const double a = blocking_rate(s.with_capacity_slots(k)).blocking_rate;
    const double b = blocking_rate(s.with_capacity_slots(k + 1)).blocking_rate;
    CHECK(b == doctest::Approx(kaufman_roberts_blocking(s.with_capacity_slots(k + 1)).blocking_rate).epsilon(1e-10));
    rises = rises || b > a;
  }
  CHECK(rises);
}

TEST_CASE("zone 1 has the highest rejection and rejection falls with the zone index") {
  std::mt19937_64 gen(23);
  for (int trial = 0; trial < 15; ++trial) {
    const auto s = test::random_scenario(gen, 2 + trial % 2, 5000);
    const auto r = blocking_rate(s);
    if (r.blocking_rate <= 0) continue;
    for (int m = 1; m < s.zones(); ++m) CHECK(r.per_zone_rejection[m] <= r.per_zone_rejection[m - 1]);
    CHECK(r.per_zone_rejection[0] > r.per_zone_rejection[s.zones() - 1]);
  }
}

TEST_CASE("one capacity sweep equals separate solves") {
  const CellScenario s(six_mcs_classes(), 14 * 8, 1.2, 0.05);
  const auto sweep = exact_capacity_sweep(s, 14 * 8);
  REQUIRE(sweep.size() == 14 * 8 + 1);
  for (int k : {0, 3, 14, 50, 97, 112}) {
    const auto single = exact_report(s.with_capacity_slots(k));
    CHECK(sweep[k].blocking_rate == doctest::Approx(single.blocking_rate).epsilon(1e-12));
    CHECK(sweep[k].mean_bandwidth == doctest::Approx(single.mean_bandwidth).epsilon(1e-12));
    CHECK(sweep[k].state_count == single.state_count);
  }
}

TEST_CASE("load profile does not depend on the thread count") {
  const CellScenario s(six_mcs_classes(), 14 * 10, 2.0, 0.05);
  const auto one = build_load_profile(s, 140, std::nullopt, kernels::active_kernels(), 1);
  const auto many = build_load_profile(s, 140, std::nullopt, kernels::active_kernels(), 4);
  CHECK(one.states() == many.states());
  const auto a = report_from_profile(s, one, 140);
  const auto b = report_from_profile(s, many, 140);
  CHECK(std::abs(a.blocking_rate - b.blocking_rate) < 1e-12);
  CHECK(std::abs(a.mean_bandwidth - b.mean_bandwidth) < 1e-12);
}

TEST_CASE("exact solver rejects mobility") {
  CHECK_THROWS_AS(exact_weights(test::tiny_pair(1, 1, MarkovSojourn{10})), ValidationError);
}
