#pragma once

// Cell model: MCS zones, integer slot capacity, mobility rates, and the
// occupancy state space.  Zones are numbered 1..M from the outermost ring
// (costliest MCS) to the innermost disk; zone 0 stands for "outside the cell"
// and is only used as the destination of a handover.

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace iptvq {

/// Raised for malformed inputs (scenario, document, arguments).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr int kOutsideCell = 0;

struct McsClass {
  std::string label;
  int slots = 0;             // slots per connection, c_m in integer units
  double area_fraction = 0;  // sigma_m

  bool operator==(const McsClass&) const = default;
};

/// Transition rates v_ij between adjacent zones, per minute.  Row `from` is a
/// zone 1..M, column `to` is 0..M where 0 is the handover destination.
class TransitionRates {
 public:
  TransitionRates() = default;
  explicit TransitionRates(int zones);

  int zones() const { return zones_; }
  double at(int from, int to) const;
  void set(int from, int to, double rate);

  /// Sum of v_ij over all j != i, handover included for zone 1.
  double outflow(int from) const;
  bool all_zero() const;

  bool operator==(const TransitionRates&) const = default;

 private:
  int zones_ = 0;
  std::vector<double> v_;  // zones x (zones + 1)
};

struct NoMobility {
  bool operator==(const NoMobility&) const = default;
};
struct MarkovSojourn {
  double mean_sojourn_minutes = 0;
  bool operator==(const MarkovSojourn&) const = default;
};
struct ExplicitRates {
  TransitionRates rates;
  bool operator==(const ExplicitRates&) const = default;
};

using MobilitySpec = std::variant<NoMobility, MarkovSojourn, ExplicitRates>;

/// Homogeneous nearest-zone rate for an exponential sojourn of mean w minutes
/// racing an exponential session of rate mu: v = (1/2) * (1/w)/(mu + 1/w) * (1/w).
double mobility_rate_from_sojourn(double w_minutes, double mu);

/// Homogeneous rate matrix: v between every adjacent pair and v for the
/// zone-1 handover.
TransitionRates homogeneous_rates(int zones, double v);

class CellScenario {
 public:
  CellScenario(std::vector<McsClass> mcs, int capacity_slots, double lambda,
               double mu, MobilitySpec mobility = NoMobility{});

  int zones() const { return static_cast<int>(mcs_.size()); }
  const std::vector<McsClass>& mcs() const { return mcs_; }
  const McsClass& mcs(int m) const { return mcs_.at(m - 1); }
  int slots(int m) const { return mcs_[m - 1].slots; }
  double area_fraction(int m) const { return mcs_[m - 1].area_fraction; }

  int capacity_slots() const { return capacity_slots_; }
  /// Capacity in connection units of MCS 1.
  double capacity_connections() const {
    return static_cast<double>(capacity_slots_) / mcs_.front().slots;
  }

  double lambda() const { return lambda_; }
  double lambda(int m) const { return lambda_ * mcs_[m - 1].area_fraction; }
  double mu() const { return mu_; }

  const MobilitySpec& mobility() const { return mobility_; }
  /// Resolved v_ij (all zero without mobility).
  const TransitionRates& rates() const { return rates_; }
  bool has_mobility() const { return !rates_.all_zero(); }

  /// True when not even the cheapest connection fits.
  bool blocks_everything() const { return capacity_slots_ < mcs_.back().slots; }

  CellScenario with_lambda(double lambda) const;
  CellScenario with_capacity_slots(int capacity_slots) const;
  CellScenario with_mobility(MobilitySpec mobility) const;

  bool operator==(const CellScenario& other) const {
    return mcs_ == other.mcs_ && capacity_slots_ == other.capacity_slots_ &&
           lambda_ == other.lambda_ && mu_ == other.mu_ &&
           mobility_ == other.mobility_;
  }

 private:
  std::vector<McsClass> mcs_;
  int capacity_slots_;
  double lambda_;
  double mu_;
  MobilitySpec mobility_;
  TransitionRates rates_;
};

struct SystemState {
  std::vector<int> n;  // n[m-1] connections on MCS m
  int load_slots = 0;  // Y

  int count(int m) const { return n[m - 1]; }
  bool operator==(const SystemState&) const = default;
};

int load_of(std::span<const int> n, const CellScenario& scenario);

/// Visits every state of S in lexicographic order of (n_1..n_M) and returns
/// |S|.  States are streamed, never stored.
std::uint64_t enumerate_states(const CellScenario& scenario,
                               const std::function<void(const SystemState&)>& visitor);

/// A maximal block of consecutive states sharing n_1..n_{M-1}; the last
/// coordinate runs over 0..length-1.
struct StateRun {
  std::span<const int> prefix;  // n_1..n_{M-1}
  int prefix_load = 0;
  int length = 0;
};

/// Run-level enumeration up to `capacity_slots`, in the same lexicographic
/// order as enumerate_states.  When `leading` is non-negative only prefixes
/// with n_1 == leading are visited (M >= 2).
std::uint64_t for_each_run(const CellScenario& scenario, int capacity_slots,
                           const std::function<void(const StateRun&)>& visitor,
                           int leading = -1);

/// Number of states with load <= capacity_slots, by a knapsack count.
std::uint64_t count_states(const CellScenario& scenario, int capacity_slots);

/// s in B_m: Y > K - c_m.
bool in_blocking_set(const SystemState& state, int m, const CellScenario& scenario);

/// s in D_mj: Y > K - c_j + c_m and n_m > 0, for j < m.
bool in_dropping_set(const SystemState& state, int m, int j,
                     const CellScenario& scenario);

/// Concentric zone layout on the unit disk.
class ZoneGeometry {
 public:
  explicit ZoneGeometry(std::span<const double> area_fractions);
  static ZoneGeometry of(const CellScenario& scenario);

  int zones() const { return static_cast<int>(radii_.size()) - 1; }
  double inner_radius(int m) const { return radii_[zones() - m]; }
  double outer_radius(int m) const { return radii_[zones() - m + 1]; }
  /// Ascending boundary radii, 0 first and 1 last.
  const std::vector<double>& boundary_radii() const { return radii_; }

  /// Zone containing a point at distance `radius` from the centre, or
  /// kOutsideCell beyond the unit circle.  Ties go to the inner zone.
  int zone_of_radius(double radius) const;
  int zone_of_position(double x, double y) const;

 private:
  std::vector<double> radii_;
};

}  // namespace iptvq
