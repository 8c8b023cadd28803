#include "iptvq/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace iptvq {

namespace {

void require(bool condition, const std::string& message) {
  if (!condition) throw ValidationError(message);
}

}  // namespace

TransitionRates::TransitionRates(int zones)
    : zones_(zones), v_(static_cast<std::size_t>(zones) * (zones + 1), 0.0) {
  require(zones >= 1, "transition rates need at least one zone");
}

double TransitionRates::at(int from, int to) const {
  if (from < 1 || from > zones_ || to < 0 || to > zones_) {
    throw std::out_of_range("transition rate index out of range");
  }
  return v_[static_cast<std::size_t>(from - 1) * (zones_ + 1) + to];
}

void TransitionRates::set(int from, int to, double rate) {
  if (from < 1 || from > zones_ || to < 0 || to > zones_) {
    throw std::out_of_range("transition rate index out of range");
  }
  require(rate >= 0 && std::isfinite(rate), "transition rates must be finite and nonnegative");
  require(rate == 0 || std::abs(from - to) == 1,
          "zone " + std::to_string(from) + " can only move to an adjacent zone (to " +
              std::to_string(to) + ")");
  v_[static_cast<std::size_t>(from - 1) * (zones_ + 1) + to] = rate;
}

double TransitionRates::outflow(int from) const {
  double total = 0;
  for (int to = 0; to <= zones_; ++to) {
    if (to != from) total += at(from, to);
  }
  return total;
}

bool TransitionRates::all_zero() const {
  for (double r : v_) {
    if (r != 0) return false;
  }
  return true;
}

double mobility_rate_from_sojourn(double w_minutes, double mu) {
  require(w_minutes > 0, "mean sojourn time must be positive");
  require(mu > 0, "session-end rate mu must be positive");
  const double leave = 1.0 / w_minutes;
  return 0.5 * (leave / (mu + leave)) * leave;
}

TransitionRates homogeneous_rates(int zones, double v) {
  TransitionRates rates(zones);
  for (int m = 1; m <= zones; ++m) {
    rates.set(m, m - 1, v);  // m == 1: handover
    if (m < zones) rates.set(m, m + 1, v);
  }
  return rates;
}

CellScenario::CellScenario(std::vector<McsClass> mcs, int capacity_slots, double lambda,
                           double mu, MobilitySpec mobility)
    : mcs_(std::move(mcs)),
      capacity_slots_(capacity_slots),
      lambda_(lambda),
      mu_(mu),
      mobility_(std::move(mobility)) {
  require(!mcs_.empty(), "at least one MCS class is required");
  double area = 0;
  for (std::size_t i = 0; i < mcs_.size(); ++i) {
    const auto& c = mcs_[i];
    const std::string where = "mcs[" + std::to_string(i) + "]";
    require(c.slots > 0, where + ".slots must be positive");
    require(c.area_fraction > 0 && c.area_fraction <= 1,
            where + ".area_fraction must lie in (0, 1]");
    if (i > 0) {
      require(c.slots < mcs_[i - 1].slots,
              where + ".slots must be strictly smaller than the previous zone's");
    }
    area += c.area_fraction;
  }
  require(std::abs(area - 1.0) <= 1e-9, "area fractions must sum to 1");
  require(capacity_slots_ >= 0, "capacity must be nonnegative");
  require(lambda_ >= 0 && std::isfinite(lambda_), "lambda must be finite and nonnegative");
  require(mu_ > 0 && std::isfinite(mu_), "mu must be positive");

  const int zones = static_cast<int>(mcs_.size());
  if (const auto* sojourn = std::get_if<MarkovSojourn>(&mobility_)) {
    rates_ = homogeneous_rates(zones, mobility_rate_from_sojourn(sojourn->mean_sojourn_minutes, mu_));
  } else if (const auto* explicit_rates = std::get_if<ExplicitRates>(&mobility_)) {
    require(explicit_rates->rates.zones() == zones,
            "explicit rate matrix must have one row per zone");
    rates_ = explicit_rates->rates;
  } else {
    rates_ = TransitionRates(zones);
  }
}

CellScenario CellScenario::with_lambda(double lambda) const {
  return CellScenario(mcs_, capacity_slots_, lambda, mu_, mobility_);
}

CellScenario CellScenario::with_capacity_slots(int capacity_slots) const {
  return CellScenario(mcs_, capacity_slots, lambda_, mu_, mobility_);
}

CellScenario CellScenario::with_mobility(MobilitySpec mobility) const {
  return CellScenario(mcs_, capacity_slots_, lambda_, mu_, std::move(mobility));
}

int load_of(std::span<const int> n, const CellScenario& scenario) {
  int y = 0;
  for (std::size_t i = 0; i < n.size(); ++i) y += n[i] * scenario.mcs()[i].slots;
  return y;
}

std::uint64_t for_each_run(const CellScenario& scenario, int capacity_slots,
                           const std::function<void(const StateRun&)>& visitor, int leading) {
  const int zones = scenario.zones();
  const int last_cost = scenario.slots(zones);
  if (capacity_slots < 0) return 0;
  if (zones == 1) {
    if (leading >= 0) throw std::invalid_argument("partitioned enumeration needs M >= 2");
    StateRun run{{}, 0, capacity_slots / last_cost + 1};
    visitor(run);
    return static_cast<std::uint64_t>(run.length);
  }

  // Odometer over n_1..n_{M-1}; the rightmost prefix digit moves fastest.
  const int width = zones - 1;
  std::vector<int> prefix(width, 0);
  int load = 0;
  std::uint64_t count = 0;
  if (leading >= 0) {
    load = leading * scenario.slots(1);
    if (load > capacity_slots) return 0;
    prefix[0] = leading;
  }
  const int lowest_free = leading >= 0 ? 1 : 0;
  for (;;) {
    StateRun run{prefix, load, (capacity_slots - load) / last_cost + 1};
    visitor(run);
    count += static_cast<std::uint64_t>(run.length);

    int d = width - 1;
    for (; d >= lowest_free; --d) {
      const int cost = scenario.slots(d + 1);
      if (load + cost <= capacity_slots) {
        ++prefix[d];
        load += cost;
        break;
      }
      load -= prefix[d] * cost;
      prefix[d] = 0;
    }
    if (d < lowest_free) break;
  }
  return count;
}

std::uint64_t enumerate_states(const CellScenario& scenario,
                               const std::function<void(const SystemState&)>& visitor) {
  const int zones = scenario.zones();
  const int last_cost = scenario.slots(zones);
  SystemState state{std::vector<int>(zones, 0), 0};
  return for_each_run(scenario, scenario.capacity_slots(), [&](const StateRun& run) {
    std::copy(run.prefix.begin(), run.prefix.end(), state.n.begin());
    for (int k = 0; k < run.length; ++k) {
      state.n[zones - 1] = k;
      state.load_slots = run.prefix_load + k * last_cost;
      visitor(state);
    }
  });
}

std::uint64_t count_states(const CellScenario& scenario, int capacity_slots) {
  if (capacity_slots < 0) return 0;
  std::vector<std::uint64_t> ways(static_cast<std::size_t>(capacity_slots) + 1, 0);
  ways[0] = 1;
  for (const auto& c : scenario.mcs()) {
    for (int y = c.slots; y <= capacity_slots; ++y) ways[y] += ways[y - c.slots];
  }
  std::uint64_t total = 0;
  for (auto w : ways) total += w;
  return total;
}

bool in_blocking_set(const SystemState& state, int m, const CellScenario& scenario) {
  if (m < 1 || m > scenario.zones()) throw ValidationError("zone index out of range");
  return state.load_slots > scenario.capacity_slots() - scenario.slots(m);
}

bool in_dropping_set(const SystemState& state, int m, int j, const CellScenario& scenario) {
  if (m < 1 || m > scenario.zones() || j < 1 || j > scenario.zones()) {
    throw ValidationError("zone index out of range");
  }
  if (j >= m) throw ValidationError("dropping is only defined for moves to a lower MCS (j < m)");
  return state.load_slots > scenario.capacity_slots() - scenario.slots(j) + scenario.slots(m) &&
         state.count(m) > 0;
}

ZoneGeometry::ZoneGeometry(std::span<const double> area_fractions) {
  const int zones = static_cast<int>(area_fractions.size());
  require(zones >= 1, "geometry needs at least one zone");
  radii_.assign(zones + 1, 0.0);
  // radii_[k] is the outer radius of zone M-k+1; accumulate from the centre.
  double cumulative = 0;
  for (int k = 1; k <= zones; ++k) {
    cumulative += area_fractions[zones - k];
    radii_[k] = std::sqrt(cumulative);
  }
  radii_[zones] = 1.0;
}

ZoneGeometry ZoneGeometry::of(const CellScenario& scenario) {
  std::vector<double> fractions;
  for (const auto& c : scenario.mcs()) fractions.push_back(c.area_fraction);
  return ZoneGeometry(fractions);
}

int ZoneGeometry::zone_of_radius(double radius) const {
  if (radius > 1.0) return kOutsideCell;
  for (int m = zones(); m >= 1; --m) {
    if (radius <= outer_radius(m)) return m;
  }
  return kOutsideCell;
}

int ZoneGeometry::zone_of_position(double x, double y) const {
  return zone_of_radius(std::hypot(x, y));
}

}  // namespace iptvq
