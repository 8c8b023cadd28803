#include <doctest.h>

#include <cmath>

#include "iptvq/exact_solver.hpp"
#include "iptvq/mobility_solver.hpp"
#include "iptvq/oracle.hpp"
#include "iptvq/presets.hpp"
#include "support.hpp"

using namespace iptvq;

TEST_CASE("Erlang-B recursion") {
  CHECK(erlang_b(1, 2) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(erlang_b(0, 3) == 0.0);
  CHECK(erlang_b(4, 0) == 1.0);
  // B(a, n) = (a^n / n!) / sum_k a^k / k!
  for (double a : {0.5, 2.0, 7.5}) {
    for (int n : {1, 4, 10}) {
      double term = 1, sum = 1;
      for (int k = 1; k <= n; ++k) sum += (term *= a / k);
      CHECK(erlang_b(a, n) == doctest::Approx(term / sum).epsilon(1e-13));
    }
  }
  CHECK_THROWS_AS(erlang_b(-1, 2), ValidationError);
}

TEST_CASE("birth-death generator") {
  const auto g = build_generator(test::unit_cell(2, 1.0, 1.0));
  REQUIRE(g.states.size() == 3);
  CHECK(g.q.coeff(0, 1) == 1.0);
  CHECK(g.q.coeff(1, 0) == 1.0);
  CHECK(g.q.coeff(1, 2) == 1.0);
  CHECK(g.q.coeff(2, 1) == 2.0);
  CHECK(g.q.coeff(0, 0) == -1.0);
  CHECK(g.q.coeff(2, 2) == -2.0);
  const auto pi = stationary_solve(g);
  CHECK(pi[0] == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(pi[1] == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(pi[2] == doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("oracle equals the product form without mobility") {
  const auto s = test::tiny_pair(1.3, 0.7);
  const auto g = build_generator(s);
  REQUIRE(g.states.size() == 9);
  const auto pi = stationary_solve(g);
  const auto w = exact_weights(s);
  for (std::size_t k = 0; k < pi.size(); ++k) {
    CHECK(std::abs(pi[k] - w.probability({g.states[k], g.loads[k]})) < 1e-10);
  }
  const auto report = oracle_report(s, g, pi);
  CHECK(report.blocking_rate == doctest::Approx(blocking_rate(s).blocking_rate).epsilon(1e-10));
  CHECK(report.mean_bandwidth == doctest::Approx(mean_bandwidth(s)).epsilon(1e-10));
}

TEST_CASE("oracle with mobility balances every state") {
  const auto s = test::tiny_pair(1.0, 0.2, MarkovSojourn{3});
  const auto g = build_generator(s);
  const auto pi = stationary_solve(g);
  CHECK(balance_residual(g, pi) < 1e-10);
  double total = 0;
  for (double p : pi) total += p;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

  // State (1, 2) has load 28; a zone 2 -> 1 move needs 7 more slots, so it
  // removes the connection, adding to the watch-time departures.
  std::size_t from = 0, to = 0;
  for (std::size_t k = 0; k < g.states.size(); ++k) {
    if (g.states[k] == std::vector<int>{1, 2}) from = k;
    if (g.states[k] == std::vector<int>{1, 1}) to = k;
  }
  const double v = s.rates().at(2, 1);
  CHECK(g.q.coeff(from, to) == doctest::Approx(2 * (s.mu() + v)).epsilon(1e-14));

  const auto report = oracle_report(s, g, pi);
  CHECK(report.dropping_rate > 0);
  CHECK(report.dropping_rate < 1);
  CHECK(report.residual < 1e-10);
}

TEST_CASE("oracle without arrivals is a point mass at the empty state") {
  const auto s = test::tiny_pair(0.0, 0.5, MarkovSojourn{5});
  const auto pi = stationary_solve(build_generator(s));
  CHECK(pi[0] == doctest::Approx(1.0));
  for (std::size_t k = 1; k < pi.size(); ++k) CHECK(std::abs(pi[k]) < 1e-14);
}

TEST_CASE("oracle refuses large state spaces") {
  const CellScenario s(six_mcs_classes(), 280, 1.0, 0.05);
  CHECK_THROWS_AS(build_generator(s), std::length_error);
  CHECK_THROWS_AS(build_generator(test::tiny_pair(), 5), std::length_error);
}
