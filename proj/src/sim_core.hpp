#pragma once

// Pieces shared by the two simulation engines: the event calendar and the
// cell bookkeeping that enforces admission control and collects statistics.

#include <cstdint>
#include <queue>
#include <stdexcept>
#include <vector>

#include "iptvq/simulator.hpp"

namespace iptvq::detail {

enum class EventKind : std::uint8_t { kWarmup, kSnapshot, kArrival, kConnection, kSessionEnd, kHorizon };

struct Event {
  double time;
  std::uint64_t seq;
  EventKind kind;
  int conn;
  std::uint32_t generation;
};

struct Later {
  bool operator()(const Event& a, const Event& b) const {
    if (a.time != b.time) return a.time > b.time;
    return a.seq > b.seq;
  }
};

/// Priority queue by time with FIFO order among equal times.
class Calendar {
 public:
  void push(double time, EventKind kind, int conn = -1, std::uint32_t generation = 0) {
    queue_.push(Event{time, seq_++, kind, conn, generation});
  }
  Event pop() {
    Event e = queue_.top();
    queue_.pop();
    return e;
  }
  bool empty() const { return queue_.empty(); }

 private:
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::uint64_t seq_ = 0;
};

/// Occupancy and window statistics.  Engines call advance() before handling
/// each event, then the matching admit/leave/change hook.
class CellLedger {
 public:
  CellLedger(const SimConfig& config, double warmup)
      : scenario_(config.scenario), unlimited_(config.unlimited_capacity), warmup_(warmup),
        n_(scenario_.zones(), 0) {
    const auto zones = static_cast<std::size_t>(scenario_.zones());
    stats_.arrivals_by_zone.assign(zones, 0);
    stats_.blocks_by_zone.assign(zones, 0);
    stats_.crossings.assign(zones * (zones + 1), 0);
    stats_.zone_time.assign(zones, 0.0);
  }

  void advance(double t) {
    if (t > warmup_) {
      const double from = now_ > warmup_ ? now_ : warmup_;
      const double dt = t - from;
      stats_.load_time += load_ * dt;
      for (std::size_t i = 0; i < n_.size(); ++i) stats_.zone_time[i] += n_[i] * dt;
    }
    now_ = t;
  }

  void open_window() {
    open_ = true;
    stats_.counts.in_system_start = connections();
  }
  bool window_open() const { return open_; }

  void close(double horizon) {
    advance(horizon);
    stats_.window = horizon - warmup_;
    stats_.counts.in_system_end = connections();
  }

  void snapshot() {
    if (open_) ++stats_.snapshots[n_];
  }

  /// Arrival in zone m; returns true when admitted.
  bool arrive(int m) {
    const bool fits = unlimited_ || load_ + scenario_.slots(m) <= scenario_.capacity_slots();
    if (open_) {
      ++stats_.counts.arrivals;
      ++stats_.arrivals_by_zone[m - 1];
      if (fits) {
        ++stats_.counts.admits;
      } else {
        ++stats_.counts.blocks;
        ++stats_.blocks_by_zone[m - 1];
      }
    }
    if (fits) add(m);
    return fits;
  }

  void depart(int m) {
    remove(m);
    if (open_) ++stats_.counts.departures;
  }

  void handover() {
    remove(1);
    if (open_) {
      ++stats_.counts.handovers;
      ++crossing(1, kOutsideCell);
    }
  }

  /// Zone change m -> j; returns false when the connection is dropped.
  bool change(int m, int j) {
    if (open_ && m >= 2) ++stats_.counts.move_attempts;
    const int next = load_ - scenario_.slots(m) + scenario_.slots(j);
    if (!unlimited_ && next > scenario_.capacity_slots()) {
      remove(m);
      if (open_) ++stats_.counts.drops;
      return false;
    }
    --n_[m - 1];
    ++n_[j - 1];
    load_ = next;
    check_load();
    if (open_) {
      ++stats_.counts.zone_changes;
      ++crossing(m, j);
    }
    return true;
  }

  int load() const { return load_; }
  ReplicationStats take() { return std::move(stats_); }

 private:
  std::uint64_t connections() const {
    std::uint64_t c = 0;
    for (int x : n_) c += static_cast<std::uint64_t>(x);
    return c;
  }
  std::uint64_t& crossing(int from, int to) {
    return stats_.crossings[static_cast<std::size_t>(from - 1) * (n_.size() + 1) + to];
  }
  void add(int m) {
    ++n_[m - 1];
    load_ += scenario_.slots(m);
    check_load();
  }
  void remove(int m) {
    --n_[m - 1];
    load_ -= scenario_.slots(m);
  }
  void check_load() {
    if (!unlimited_ && load_ > scenario_.capacity_slots()) {
      throw std::logic_error("simulated load exceeds the capacity");
    }
    if (load_ > stats_.max_load) stats_.max_load = load_;
  }

  const CellScenario& scenario_;
  bool unlimited_;
  double warmup_;
  double now_ = 0;
  bool open_ = false;
  int load_ = 0;
  std::vector<int> n_;
  ReplicationStats stats_;
};

/// Window-opening, snapshot and horizon events common to both engines.
inline void schedule_bookkeeping(Calendar& calendar, const SimConfig& config, double warmup) {
  calendar.push(warmup, EventKind::kWarmup);
  if (config.snapshot_interval > 0) {
    calendar.push(warmup + config.snapshot_interval, EventKind::kSnapshot);
  }
  calendar.push(config.horizon_minutes, EventKind::kHorizon);
}

/// Handles bookkeeping events; returns true when the replication is over.
inline bool handle_bookkeeping(const Event& e, Calendar& calendar, CellLedger& ledger,
                               const SimConfig& config) {
  switch (e.kind) {
    case EventKind::kWarmup:
      ledger.open_window();
      return false;
    case EventKind::kSnapshot:
      ledger.snapshot();
      if (e.time + config.snapshot_interval < config.horizon_minutes) {
        calendar.push(e.time + config.snapshot_interval, EventKind::kSnapshot);
      }
      return false;
    case EventKind::kHorizon:
      return true;
    default:
      return false;
  }
}

ReplicationStats run_random_walk_replication(const SimConfig& config, int index);

}  // namespace iptvq::detail
