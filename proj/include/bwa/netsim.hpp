#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <unordered_set>
#include <variant>
#include <vector>

#include "bwa/clock.hpp"
#include "bwa/knowledge.hpp"
#include "bwa/protocol.hpp"
#include "bwa/term.hpp"

namespace bwa {

enum class OverloadPolicy { Drop, Queue };

struct WorldConfig {
  ProtocolId protocol = ProtocolId::PKMv1;
  SimTime latency = 1000;
  /// Time a BS spends on each step of an authentication cycle.
  SimTime processing = 1000;
  /// Concurrent authentication cycles a BS will run.
  std::size_t budget = 4;
  SimTime cycle_timeout = 120'000;
  OverloadPolicy overload = OverloadPolicy::Drop;
  SizeModel sizes;
  Timestamp freshness_tolerance = 10;
  Timestamp window = 10;
  int retention_days = 15;
  int timestamp_width = 4;
  std::uint64_t seed = 1;
  /// Test hook: disable every freshness check.
  bool weaken_freshness = false;
  /// The adversary hears every transmission (wireless medium).
  bool eavesdrop = true;
  bool record_trace = true;
};

struct ClockSpec {
  double offset = 0.0;
  double drift = 0.0;
  SyncPolicy policy;
};

using FrameId = std::uint64_t;

enum class FrameStatus { InFlight, Delivered, Dropped };

struct Frame {
  FrameId id = 0;
  NodeId from;
  NodeId to;
  Term body = Term::tuple({});
  SimTime sent_at = 0;
  SimTime deliver_at = 0;
  /// Put on the air by the adversary rather than by the claimed sender.
  bool injected = false;
  FrameStatus status = FrameStatus::InFlight;
  std::size_t bytes = 0;
  std::uint32_t version = 0;
};

/// Adversary actions on the channel.
struct Capture {
  FrameId frame;
};
struct Drop {
  FrameId frame;
};
struct Delay {
  FrameId frame;
  SimTime by;
};
struct Inject {
  Term term;
  NodeId from;  // claimed sender
  NodeId to;
  SimTime after = 0;
};
using Interposition = std::variant<Capture, Drop, Delay, Inject>;

/// What happened when a frame reached its recipient.
struct DeliveryReport {
  Role receiver_role = Role::SS;
  bool trigger = false;
  /// Cheap freshness gate rejected a trigger before any cycle started.
  bool gated = false;
  bool cycle_started = false;
  bool budget_dropped = false;
  bool no_session = false;
  int phase_before = 0;
  int phase_after = 0;
  Outcome outcome;
};

class SimWorld;

/// Active adversary strategy. Called from inside the event loop.
class Adversary {
 public:
  virtual ~Adversary() = default;
  /// An honest frame was just put on the air.
  virtual void on_transmit(SimWorld&, const Frame&) {}
  virtual void on_timer(SimWorld&, int /*tag*/) {}
  virtual void on_delivered(SimWorld&, const Frame&, const DeliveryReport&) {}
};

struct Cycle {
  std::uint64_t id = 0;
  SessionState state;
  SimTime started = 0;
  bool injected_trigger = false;
  bool release_scheduled = false;
  bool released = false;
  bool timed_out = false;
  std::optional<SimTime> authorized_at;
};

struct Node {
  NodeId id;
  Role role = Role::SS;
  bool adversarial = false;
  bool legit = true;
  NodeId base_station;
  std::uint64_t mac = 0;
  std::uint16_t bcid = 0;
  std::optional<TimestampTable> table;
  std::optional<ValidationWindow> window;
  /// BS only.
  std::vector<Cycle> cycles;
  /// SS only: the current handshake.
  std::optional<SessionState> session;
};

struct JoinRecord {
  NodeId ss;
  SimTime start = 0;
  bool legit = true;
  std::optional<SimTime> ss_authorized_at;
  std::optional<std::string> ak;
  Outcome ss_outcome;
};

struct Metrics {
  std::uint64_t frames_sent = 0;
  std::uint64_t frames_delivered = 0;
  std::uint64_t frames_dropped = 0;
  std::uint64_t frames_in_flight = 0;
  std::uint64_t frames_injected = 0;
  std::uint64_t honest_bytes = 0;
  std::uint64_t cycles_started = 0;
  /// Cycles started by adversary-injected triggers.
  std::uint64_t triggered_cycles = 0;
  std::uint64_t dropped_cycles = 0;
  std::uint64_t rejected_requests = 0;
  std::uint64_t timed_out_cycles = 0;
  std::uint64_t completed_auths = 0;
  std::uint64_t legit_joins = 0;
  std::uint64_t legit_completed = 0;
  double legit_success_rate = 0.0;
  double mean_auth_latency = 0.0;
  std::size_t peak_cycles = 0;

  std::map<std::string, double> as_map() const;
};

class TraceLog {
 public:
  void add(SimTime t, std::string_view kind, std::string_view from, std::string_view to,
           std::string_view summary, std::string_view result);
  const std::vector<std::string>& lines() const { return lines_; }
  std::string str() const;

 private:
  std::vector<std::string> lines_;
};

/// Deterministic discrete-event world: one BS (or more), its subscribers, an
/// optional adversary, per-node clocks and a BS resource budget.
class SimWorld {
 public:
  explicit SimWorld(WorldConfig cfg);
  ~SimWorld();
  SimWorld(SimWorld&&) noexcept;
  SimWorld& operator=(SimWorld&&) noexcept;

  void add_base_station(const NodeId& id, ClockSpec clock = {});
  void add_subscriber(const NodeId& id, const NodeId& bs, std::uint64_t mac, std::uint16_t bcid,
                      ClockSpec clock = {}, bool legit = true);
  /// Adversary-controlled node; its key pair and certificate seed Knowledge.
  void add_adversary_node(const NodeId& id, ClockSpec clock = {});
  /// Adversary-controlled SS that joins with a chosen (possibly stolen) MAC.
  void add_adversary_subscriber(const NodeId& id, const NodeId& bs, std::uint64_t mac,
                                std::uint16_t bcid, ClockSpec clock = {});

  void set_adversary(std::unique_ptr<Adversary> a);
  Adversary* adversary() { return adversary_.get(); }

  void schedule_join(const NodeId& ss, SimTime at);
  void schedule_timer(SimTime at, int tag);

  /// Processes every event with time <= t_end.
  void run_until(SimTime t_end);

  /// Returns the new frame for Inject.
  std::optional<FrameId> interpose(const Interposition& action);

  SimTime now() const { return now_; }
  const WorldConfig& config() const { return cfg_; }
  ProtocolId protocol() const { return cfg_.protocol; }
  Knowledge& knowledge() { return knowledge_; }
  const Knowledge& knowledge() const { return knowledge_; }
  ClockState& clock() { return clock_; }
  const ClockState& clock() const { return clock_; }
  const Node& node(const NodeId& id) const;
  const std::map<NodeId, Node>& nodes() const { return nodes_; }
  const std::map<FrameId, Frame>& frames() const { return frames_; }
  const std::vector<JoinRecord>& joins() const { return joins_; }
  const TraceLog& trace() const { return trace_; }
  std::size_t cycles_in_flight() const { return in_flight_; }
  /// Every term the adversary generated itself (nonces, AKs).
  const std::set<Term>& adversary_generated() const { return generated_; }
  /// Records a term the adversary made up and adds it to its knowledge.
  void note_generated(const Term& t);

  std::uint64_t fresh_nonce();
  Metrics metrics() const;

 private:
  enum class EventType { Release, Timeout, Resync, Timer, Join, Send, Deliver };

  struct Event {
    SimTime time = 0;
    int priority = 0;
    std::uint64_t seq = 0;
    EventType type = EventType::Timer;
    FrameId frame = 0;
    std::uint32_t version = 0;
    NodeId node;
    NodeId to;
    std::uint64_t cycle = 0;
    int tag = 0;
    std::vector<Term> payload;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const;
  };

  Node& node_mut(const NodeId& id);
  void add_node(Node n, const ClockSpec& clock);
  void push(Event e);
  void dispatch(const Event& e);

  FrameId send(const NodeId& from, const NodeId& to, const Term& body, bool injected,
               SimTime delay);
  void deliver(Frame& f);
  DeliveryReport deliver_to_bs(Node& bs, const Frame& f);
  DeliveryReport deliver_to_ss(Node& ss, const Frame& f);
  bool try_start_cycle(Node& bs, const Frame& f, DeliveryReport& rep, bool from_queue);
  void apply_bs_step(Node& bs, Cycle& c, StepResult r);
  void release(Node& bs, std::uint64_t cycle_id, bool timeout);
  void start_join(const NodeId& ss);
  void send_from(const Node& n, const NodeId& to, const std::vector<Term>& terms);
  SessionConfig session_config(const Node& n);
  Cycle* find_cycle(Node& bs, std::uint64_t id);

  WorldConfig cfg_;
  SimTime now_ = 0;
  std::uint64_t seq_ = 0;
  std::priority_queue<Event, std::vector<Event>, Later> events_;
  std::map<NodeId, Node> nodes_;
  std::map<FrameId, Frame> frames_;
  FrameId next_frame_ = 1;
  std::uint64_t next_cycle_ = 1;
  std::uint64_t next_ak_ = 1;
  std::size_t in_flight_ = 0;
  std::vector<FrameId> overload_queue_;
  ClockState clock_;
  Knowledge knowledge_;
  std::set<Term> generated_;
  std::unique_ptr<Adversary> adversary_;
  std::mt19937_64 rng_;
  std::unordered_set<std::uint64_t> used_nonces_;
  std::vector<JoinRecord> joins_;
  TraceLog trace_;
  Metrics counters_;
};

}  // namespace bwa
