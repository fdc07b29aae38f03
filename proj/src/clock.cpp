#include "bwa/clock.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bwa {

void SyncPolicy::validate() const {
  if (post_resync_residual < 0.0) throw std::invalid_argument("resync residual must be >= 0");
  if (resync_interval && *resync_interval <= 0.0)
    throw std::invalid_argument("resync interval must be > 0");
}

void ClockState::add_node(const NodeId& n, double offset, double drift, SyncPolicy policy) {
  policy.validate();
  if (drift <= -1.0) throw std::invalid_argument("clock drift must be > -1");
  nodes_[n] = NodeClock{offset, drift, 0.0, policy};
}

const NodeClock& ClockState::node(const NodeId& n) const {
  auto it = nodes_.find(n);
  if (it == nodes_.end()) throw ClockError("unknown clock node: " + n.name);
  return it->second;
}

NodeClock& ClockState::node(const NodeId& n) {
  auto it = nodes_.find(n);
  if (it == nodes_.end()) throw ClockError("unknown clock node: " + n.name);
  return it->second;
}

double ClockState::node_seconds(const NodeId& n) const {
  const auto& c = node(n);
  const double t = sim_seconds();
  return t + c.offset + c.drift * (t - c.epoch);
}

Timestamp ClockState::node_now(const NodeId& n) const {
  // Absorb representation error so 1000 + 0.001*1000 reads 1001, not 1000.
  return static_cast<Timestamp>(std::floor(node_seconds(n) + 1e-9));
}

void ClockState::resync(const NodeId& n) {
  auto& c = node(n);
  const double t = sim_seconds();
  const double error = c.offset + c.drift * (t - c.epoch);
  const double r = c.policy.post_resync_residual;
  c.offset = std::clamp(error, -r, r);
  c.epoch = t;
}

Timestamp node_now(const ClockState& c, const NodeId& n) { return c.node_now(n); }

ClockState resync(ClockState c, const NodeId& n) {
  c.resync(n);
  return c;
}

double skew(const ClockState& c, const NodeId& a, const NodeId& b) {
  return std::abs(c.node_seconds(a) - c.node_seconds(b));
}

}  // namespace bwa
