#pragma once

#include <map>
#include <optional>
#include <stdexcept>

#include "bwa/types.hpp"

namespace bwa {

class ClockError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

struct SyncPolicy {
  /// Seconds between resyncs; nullopt means never.
  std::optional<double> resync_interval;
  /// Offset magnitude left after a resync.
  double post_resync_residual = 0.0;

  void validate() const;
};

struct NodeClock {
  double offset = 0.0;  // seconds
  double drift = 0.0;   // seconds per second
  /// Sim time (seconds) of the last resync; drift accumulates from here.
  double epoch = 0.0;
  SyncPolicy policy;
};

/// Simulated per-node clocks over a shared global time base.
///
/// node_now(n) = t + offset(n) + drift(n) * (t - epoch(n)), where epoch is the
/// time of the last resync (0 until the first one).
class ClockState {
 public:
  void add_node(const NodeId& n, double offset = 0.0, double drift = 0.0, SyncPolicy policy = {});
  bool has_node(const NodeId& n) const { return nodes_.contains(n); }

  void set_time(SimTime t) { sim_time_ = t; }
  SimTime sim_time() const { return sim_time_; }
  double sim_seconds() const { return static_cast<double>(sim_time_) / kMillisPerSecond; }

  /// Exact node-local reading in seconds.
  double node_seconds(const NodeId& n) const;
  /// Node-local reading floored to whole seconds.
  Timestamp node_now(const NodeId& n) const;

  /// Clamps the accumulated error of `n` to the policy residual, keeping its
  /// sign. Drift is unchanged.
  void resync(const NodeId& n);

  const NodeClock& node(const NodeId& n) const;
  NodeClock& node(const NodeId& n);
  const std::map<NodeId, NodeClock>& nodes() const { return nodes_; }

 private:
  SimTime sim_time_ = 0;
  std::map<NodeId, NodeClock> nodes_;
};

/// Value-returning forms.
Timestamp node_now(const ClockState& c, const NodeId& n);
ClockState resync(ClockState c, const NodeId& n);

double skew(const ClockState& c, const NodeId& a, const NodeId& b);

}  // namespace bwa
