#include <doctest.h>

#include <cmath>

#include "iptvq/exact_solver.hpp"
#include "iptvq/presets.hpp"
#include "iptvq/simulator.hpp"
#include "support.hpp"

using namespace iptvq;
using iptvq::test::classes;

TEST_CASE("frozen walkers never change zone") {
  const CellScenario s(classes({14, 7}, {0.5, 0.5}), 56, 1.0, 0.1);
  SimConfig config{s};
  config.engine = RandomWalkEngine{0.08, 1e-12};
  config.horizon_minutes = 5000;
  config.replications = 10;
  const auto result = simulate(config);
  CHECK(result.totals.zone_changes == 0);
  CHECK(result.totals.handovers == 0);
  CHECK(result.totals.drops == 0);
  const auto truth = exact_report(s);
  CHECK(std::abs(result.blocking_rate.mean - truth.blocking_rate) <= result.blocking_rate.ci99);
  CHECK(std::abs(result.mean_bandwidth.mean - truth.mean_bandwidth) <= result.mean_bandwidth.ci99);

  const auto measured = measure_transition_rates(config, 1);
  CHECK(measured.rates.all_zero());
  CHECK_FALSE(measured.sufficient);
  CHECK_FALSE(measured.warnings.empty());
}

TEST_CASE("crossings balance the inner zone population") {
  // Zone 2 has no handover: arrivals + inward crossings = watch-time ends +
  // outward crossings, and watch-time ends average mu * (time spent in zone 2).
  const CellScenario s(classes({14, 7}, {0.5, 0.5}), 56, 2.0, 0.05);
  SimConfig config{s};
  config.engine = RandomWalkEngine{0.08, 1.1e-3};
  config.horizon_minutes = 20000;
  config.replications = 4;
  config.unlimited_capacity = true;
  const auto result = simulate(config);
  double inflow = 0, outflow = 0, ends = 0;
  for (const auto& r : result.replications) {
    inflow += static_cast<double>(r.arrivals_by_zone[1] + r.crossing_count(1, 2));
    outflow += static_cast<double>(r.crossing_count(2, 1));
    ends += s.mu() * r.zone_time[1];
  }
  CHECK(outflow > 10000);
  CHECK(std::abs(inflow - outflow - ends) <= 3 * std::sqrt(ends) + 4 * 40);

  const auto m = measure_transition_rates(config);
  CHECK(m.sufficient);
  CHECK(m.rates.at(1, 2) == doctest::Approx(m.crossings[0 * 3 + 2] / m.zone_time[0]));
  CHECK(m.rates.at(2, 1) == doctest::Approx(m.crossings[1 * 3 + 1] / m.zone_time[1]));
  CHECK(m.rates.at(1, 0) > 0);
  CHECK(m.mean_sojourn_minutes > 0);
}

TEST_CASE("long legs mostly leave the cell") {
  const CellScenario s(walk_mcs_classes(), 14 * 20, 1.0, 0.05);
  SimConfig config{s};
  config.horizon_minutes = 3000;
  config.replications = 3;
  config.engine = RandomWalkEngine{50.0, 0.1};
  const auto long_legs = simulate(config);
  CHECK(long_legs.totals.handovers > 2 * long_legs.totals.departures);
  CHECK(long_legs.dropping_rate.mean < 0.01);
}

TEST_CASE("random walk replications are reproducible") {
  const CellScenario s(walk_mcs_classes(), 14 * 6, 1.0, 0.05);
  SimConfig config{s};
  config.engine = RandomWalkEngine{};
  config.horizon_minutes = 2000;
  config.replications = 3;
  const auto a = simulate(config);
  config.threads = 3;
  const auto b = simulate(config);
  for (std::size_t r = 0; r < 3; ++r) {
    CHECK(a.replications[r].counts == b.replications[r].counts);
    CHECK(a.replications[r].crossings == b.replications[r].crossings);
    CHECK(a.replications[r].max_load <= 14 * 6);
  }
}
