#include "bwa/netsim.hpp"

#include <algorithm>
#include <stdexcept>

#include <fmt/format.h>

namespace bwa {

namespace {

std::string format_time(SimTime t) {
  const char* sign = t < 0 ? "-" : "";
  const SimTime a = t < 0 ? -t : t;
  return fmt::format("{}{}.{:03}", sign, a / kMillisPerSecond, a % kMillisPerSecond);
}

}  // namespace

// ---- TraceLog ----

void TraceLog::add(SimTime t, std::string_view kind, std::string_view from, std::string_view to,
                   std::string_view summary, std::string_view result) {
  lines_.push_back(fmt::format("{} | {} | {} | {} | {} | {}", format_time(t), kind,
                               from.empty() ? "-" : from, to.empty() ? "-" : to,
                               summary.empty() ? "-" : summary, result.empty() ? "-" : result));
}

std::string TraceLog::str() const {
  std::string out;
  for (const auto& l : lines_) {
    out += l;
    out += '\n';
  }
  return out;
}

std::map<std::string, double> Metrics::as_map() const {
  return {
      {"frames_sent", static_cast<double>(frames_sent)},
      {"frames_delivered", static_cast<double>(frames_delivered)},
      {"frames_dropped", static_cast<double>(frames_dropped)},
      {"frames_in_flight", static_cast<double>(frames_in_flight)},
      {"frames_injected", static_cast<double>(frames_injected)},
      {"honest_bytes", static_cast<double>(honest_bytes)},
      {"cycles_started", static_cast<double>(cycles_started)},
      {"triggered_cycles", static_cast<double>(triggered_cycles)},
      {"dropped_cycles", static_cast<double>(dropped_cycles)},
      {"rejected_requests", static_cast<double>(rejected_requests)},
      {"timed_out_cycles", static_cast<double>(timed_out_cycles)},
      {"completed_auths", static_cast<double>(completed_auths)},
      {"legit_joins", static_cast<double>(legit_joins)},
      {"legit_completed", static_cast<double>(legit_completed)},
      {"legit_success_rate", legit_success_rate},
      {"mean_auth_latency", mean_auth_latency},
      {"peak_cycles", static_cast<double>(peak_cycles)},
  };
}

// ---- SimWorld ----

bool SimWorld::Later::operator()(const Event& a, const Event& b) const {
  if (a.time != b.time) return a.time > b.time;
  if (a.priority != b.priority) return a.priority > b.priority;
  return a.seq > b.seq;
}

SimWorld::SimWorld(WorldConfig cfg) : cfg_(std::move(cfg)), rng_(cfg_.seed) {}
SimWorld::~SimWorld() = default;
SimWorld::SimWorld(SimWorld&&) noexcept = default;
SimWorld& SimWorld::operator=(SimWorld&&) noexcept = default;

void SimWorld::add_node(Node n, const ClockSpec& clock) {
  if (nodes_.contains(n.id)) throw std::invalid_argument("duplicate node: " + n.id.name);
  clock_.add_node(n.id, clock.offset, clock.drift, clock.policy);
  if (uses_table(cfg_.protocol)) n.table = TimestampTable(cfg_.retention_days, cfg_.timestamp_width);
  if (uses_window(cfg_.protocol)) n.window = ValidationWindow{cfg_.window, {}};
  if (clock.policy.resync_interval) {
    Event e;
    e.time = now_ + from_seconds(*clock.policy.resync_interval);
    e.type = EventType::Resync;
    e.node = n.id;
    push(std::move(e));
  }
  nodes_.emplace(n.id, std::move(n));
}

void SimWorld::add_base_station(const NodeId& id, ClockSpec clock) {
  Node n;
  n.id = id;
  n.role = Role::BS;
  add_node(std::move(n), clock);
}

void SimWorld::add_subscriber(const NodeId& id, const NodeId& bs, std::uint64_t mac,
                              std::uint16_t bcid, ClockSpec clock, bool legit) {
  Node n;
  n.id = id;
  n.role = Role::SS;
  n.base_station = bs;
  n.mac = mac;
  n.bcid = bcid;
  n.legit = legit;
  add_node(std::move(n), clock);
}

void SimWorld::add_adversary_node(const NodeId& id, ClockSpec clock) {
  Node n;
  n.id = id;
  n.role = Role::BS;
  n.adversarial = true;
  n.legit = false;
  add_node(std::move(n), clock);
  const Knowledge own = initial_knowledge(id);
  for (const auto& t : own.terms()) knowledge_.add(t);
}

void SimWorld::add_adversary_subscriber(const NodeId& id, const NodeId& bs, std::uint64_t mac,
                                        std::uint16_t bcid, ClockSpec clock) {
  Node n;
  n.id = id;
  n.role = Role::SS;
  n.adversarial = true;
  n.legit = false;
  n.base_station = bs;
  n.mac = mac;
  n.bcid = bcid;
  add_node(std::move(n), clock);
  const Knowledge own = initial_knowledge(id);
  for (const auto& t : own.terms()) knowledge_.add(t);
}

void SimWorld::set_adversary(std::unique_ptr<Adversary> a) { adversary_ = std::move(a); }

Node& SimWorld::node_mut(const NodeId& id) {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw std::out_of_range("unknown node: " + id.name);
  return it->second;
}

const Node& SimWorld::node(const NodeId& id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw std::out_of_range("unknown node: " + id.name);
  return it->second;
}

void SimWorld::push(Event e) {
  switch (e.type) {
    case EventType::Release:
    case EventType::Timeout: e.priority = 0; break;
    case EventType::Resync: e.priority = 1; break;
    case EventType::Timer: e.priority = 2; break;
    case EventType::Join: e.priority = 3; break;
    case EventType::Send: e.priority = 4; break;
    case EventType::Deliver: e.priority = 5; break;
  }
  e.seq = seq_++;
  events_.push(std::move(e));
}

void SimWorld::schedule_join(const NodeId& ss, SimTime at) {
  const Node& n = node(ss);
  if (n.role != Role::SS) throw std::invalid_argument("join scheduled for non-SS " + ss.name);
  Event e;
  e.time = at;
  e.type = EventType::Join;
  e.node = ss;
  push(std::move(e));
}

void SimWorld::schedule_timer(SimTime at, int tag) {
  Event e;
  e.time = at;
  e.type = EventType::Timer;
  e.tag = tag;
  push(std::move(e));
}

void SimWorld::note_generated(const Term& t) {
  generated_.insert(t);
  knowledge_.add(t);
}

std::uint64_t SimWorld::fresh_nonce() {
  for (;;) {
    const std::uint64_t n = rng_();
    if (used_nonces_.insert(n).second) return n;
  }
}

void SimWorld::run_until(SimTime t_end) {
  if (t_end < now_) throw std::invalid_argument("run_until: t_end is in the past");
  while (!events_.empty() && events_.top().time <= t_end) {
    Event e = events_.top();
    events_.pop();
    now_ = e.time;
    clock_.set_time(now_);
    dispatch(e);
  }
  now_ = t_end;
  clock_.set_time(now_);
}

void SimWorld::dispatch(const Event& e) {
  switch (e.type) {
    case EventType::Release:
      release(node_mut(e.node), e.cycle, false);
      break;
    case EventType::Timeout: {
      Node& bs = node_mut(e.node);
      Cycle* c = find_cycle(bs, e.cycle);
      if (c && c->state.outcome.in_progress() && !c->release_scheduled && !c->released) {
        c->timed_out = true;
        ++counters_.timed_out_cycles;
        release(bs, e.cycle, true);
      }
      break;
    }
    case EventType::Resync: {
      clock_.resync(e.node);
      const auto& nc = clock_.node(e.node);
      if (cfg_.record_trace)
        trace_.add(now_, "resync", e.node.name, "", "", fmt::format("offset={:.3f}", nc.offset));
      Event next;
      next.time = now_ + from_seconds(*nc.policy.resync_interval);
      next.type = EventType::Resync;
      next.node = e.node;
      push(std::move(next));
      break;
    }
    case EventType::Timer:
      if (adversary_) adversary_->on_timer(*this, e.tag);
      break;
    case EventType::Join:
      start_join(e.node);
      break;
    case EventType::Send:
      send_from(node(e.node), e.to, e.payload);
      break;
    case EventType::Deliver: {
      auto it = frames_.find(e.frame);
      if (it != frames_.end() && it->second.version == e.version &&
          it->second.status == FrameStatus::InFlight)
        deliver(it->second);
      break;
    }
  }
}

FrameId SimWorld::send(const NodeId& from, const NodeId& to, const Term& body, bool injected,
                       SimTime delay) {
  Frame f;
  f.id = next_frame_++;
  f.from = from;
  f.to = to;
  f.body = body;
  f.sent_at = now_;
  f.deliver_at = now_ + cfg_.latency + delay;
  f.injected = injected;
  f.bytes = encode_size(body, cfg_.sizes);
  ++counters_.frames_sent;
  if (injected)
    ++counters_.frames_injected;
  else
    counters_.honest_bytes += f.bytes;
  if (cfg_.record_trace)
    trace_.add(now_, injected ? "inject" : "send", from.name, to.name, to_string(body),
               fmt::format("frame={} bytes={}", f.id, f.bytes));

  Event e;
  e.time = f.deliver_at;
  e.type = EventType::Deliver;
  e.frame = f.id;
  e.version = f.version;
  push(std::move(e));

  const FrameId id = f.id;
  auto [it, _] = frames_.emplace(id, std::move(f));
  if (cfg_.eavesdrop) knowledge_.add(it->second.body);
  if (!injected && adversary_) {
    const Frame copy = it->second;
    adversary_->on_transmit(*this, copy);
  }
  return id;
}

void SimWorld::send_from(const Node& n, const NodeId& to, const std::vector<Term>& terms) {
  for (const auto& t : terms) {
    if (n.adversarial) knowledge_.require_derivable(t);
    send(n.id, to, t, n.adversarial, 0);
  }
}

std::optional<FrameId> SimWorld::interpose(const Interposition& action) {
  return std::visit(
      [&](const auto& a) -> std::optional<FrameId> {
        using A = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<A, Inject>) {
          knowledge_.require_derivable(a.term);
          return send(a.from, a.to, a.term, true, a.after);
        } else {
          auto it = frames_.find(a.frame);
          if (it == frames_.end()) throw std::out_of_range("interpose: unknown frame");
          Frame& f = it->second;
          if constexpr (std::is_same_v<A, Capture>) {
            knowledge_.add(f.body);
            if (cfg_.record_trace)
              trace_.add(now_, "capture", f.from.name, f.to.name, "", fmt::format("frame={}", f.id));
          } else if constexpr (std::is_same_v<A, Drop>) {
            if (f.status != FrameStatus::InFlight) return std::nullopt;
            f.status = FrameStatus::Dropped;
            if (cfg_.record_trace)
              trace_.add(now_, "drop", f.from.name, f.to.name, "", fmt::format("frame={}", f.id));
          } else if constexpr (std::is_same_v<A, Delay>) {
            if (f.status != FrameStatus::InFlight || a.by == 0) return std::nullopt;
            f.deliver_at += a.by;
            ++f.version;
            Event e;
            e.time = f.deliver_at;
            e.type = EventType::Deliver;
            e.frame = f.id;
            e.version = f.version;
            push(std::move(e));
            if (cfg_.record_trace)
              trace_.add(now_, "delay", f.from.name, f.to.name, "",
                         fmt::format("frame={} until={}", f.id, format_time(f.deliver_at)));
          }
          return std::nullopt;
        }
      },
      action);
}

SessionConfig SimWorld::session_config(const Node& n) {
  SessionConfig cfg;
  cfg.freshness_tolerance = cfg_.freshness_tolerance;
  cfg.skip_freshness = cfg_.weaken_freshness;
  cfg.table = n.table;
  cfg.window = n.window;
  cfg.nonce = fresh_nonce();
  if (n.adversarial) {
    const Term t = Term::nonce(*cfg.nonce);
    generated_.insert(t);
    knowledge_.add(t);
  }
  if (n.role == Role::SS) {
    cfg.peer = n.base_station;
    cfg.mac = n.mac;
    cfg.bcid = n.bcid;
  } else {
    cfg.ak_id = fmt::format("{}-{}", n.id.name, next_ak_++);
  }
  return cfg;
}

void SimWorld::start_join(const NodeId& ss_id) {
  Node& ss = node_mut(ss_id);
  const Timestamp ts = clock_.node_now(ss.id);
  SessionState s = init_session(cfg_.protocol, Role::SS, ss.id, session_config(ss), ts);
  std::vector<Term> out = std::move(s.outbox);
  s.outbox.clear();
  ss.session = std::move(s);

  JoinRecord j;
  j.ss = ss.id;
  j.start = now_;
  j.legit = ss.legit && !ss.adversarial;
  joins_.push_back(j);
  if (cfg_.record_trace) trace_.add(now_, "join", ss.id.name, ss.base_station.name, "", "");
  send_from(ss, ss.base_station, out);
}

void SimWorld::deliver(Frame& f) {
  f.status = FrameStatus::Delivered;
  ++counters_.frames_delivered;
  auto it = nodes_.find(f.to);
  DeliveryReport rep;
  if (it == nodes_.end() || (it->second.adversarial && it->second.role == Role::BS)) {
    if (cfg_.record_trace)
      trace_.add(now_, "deliver", f.from.name, f.to.name, "", fmt::format("frame={} absorbed", f.id));
    return;
  }
  Node& n = it->second;
  rep = n.role == Role::BS ? deliver_to_bs(n, f) : deliver_to_ss(n, f);
  if (adversary_) {
    const Frame copy = f;
    adversary_->on_delivered(*this, copy, rep);
  }
}

DeliveryReport SimWorld::deliver_to_ss(Node& ss, const Frame& f) {
  DeliveryReport rep;
  rep.receiver_role = Role::SS;
  if (!ss.session || !ss.session->outcome.in_progress()) {
    rep.no_session = true;
    if (ss.session) rep.outcome = ss.session->outcome;
    if (cfg_.record_trace)
      trace_.add(now_, "deliver", f.from.name, f.to.name, "", fmt::format("frame={} no-session", f.id));
    return rep;
  }
  const Timestamp ts = clock_.node_now(ss.id);
  SessionState& s = *ss.session;
  s.table = ss.table;
  s.window = ss.window;
  rep.phase_before = s.phase;
  StepResult r = step(s, f.body, ts);
  ss.table = r.state.table;
  ss.window = r.state.window;
  s = std::move(r.state);
  rep.phase_after = s.phase;
  rep.outcome = s.outcome;
  if (cfg_.record_trace)
    trace_.add(now_, "deliver", f.from.name, f.to.name, "",
               fmt::format("frame={} SS:{}", f.id, to_string(s.outcome)));

  for (auto j = joins_.rbegin(); j != joins_.rend(); ++j) {
    if (j->ss != ss.id) continue;
    j->ss_outcome = s.outcome;
    if (s.outcome.authorized()) {
      j->ss_authorized_at = now_;
      j->ak = s.ak;
    }
    break;
  }
  if (!r.outgoing.empty()) send_from(ss, ss.base_station, r.outgoing);
  return rep;
}

Cycle* SimWorld::find_cycle(Node& bs, std::uint64_t id) {
  for (auto& c : bs.cycles)
    if (c.id == id) return &c;
  return nullptr;
}

DeliveryReport SimWorld::deliver_to_bs(Node& bs, const Frame& f) {
  DeliveryReport rep;
  rep.receiver_role = Role::BS;
  if (is_trigger(cfg_.protocol, f.body)) {
    rep.trigger = true;
    try_start_cycle(bs, f, rep, false);
    return rep;
  }

  Cycle* c = nullptr;
  for (auto it = bs.cycles.rbegin(); it != bs.cycles.rend(); ++it) {
    if (it->state.peer == f.from && it->state.outcome.in_progress() && !it->released) {
      c = &*it;
      break;
    }
  }
  if (!c) {
    rep.no_session = true;
    ++counters_.rejected_requests;
    if (cfg_.record_trace)
      trace_.add(now_, "deliver", f.from.name, f.to.name, "", fmt::format("frame={} no-session", f.id));
    return rep;
  }
  const Timestamp ts = clock_.node_now(bs.id);
  c->state.table = bs.table;
  c->state.window = bs.window;
  rep.phase_before = c->state.phase;
  StepResult r = step(c->state, f.body, ts);
  rep.phase_after = r.state.phase;
  rep.outcome = r.state.outcome;
  if (cfg_.record_trace)
    trace_.add(now_, "deliver", f.from.name, f.to.name, "",
               fmt::format("frame={} BS#{}:{}", f.id, c->id, to_string(r.state.outcome)));
  apply_bs_step(bs, *c, std::move(r));
  return rep;
}

bool SimWorld::try_start_cycle(Node& bs, const Frame& f, DeliveryReport& rep, bool from_queue) {
  const Timestamp ts = clock_.node_now(bs.id);
  SessionState st = init_session(cfg_.protocol, Role::BS, bs.id, session_config(bs), ts);
  StepResult r = step(st, f.body, ts);
  rep.outcome = r.state.outcome;

  const bool gate_reject =
      uses_window(cfg_.protocol) && r.state.outcome.rejected() &&
      (r.state.outcome.reason == RejectReason::StaleTimestamp ||
       r.state.outcome.reason == RejectReason::DuplicateInWindow);
  if (gate_reject) {
    rep.gated = true;
    ++counters_.rejected_requests;
    if (cfg_.record_trace)
      trace_.add(now_, "deliver", f.from.name, f.to.name, "",
                 fmt::format("frame={} gate:{}", f.id, to_string(r.state.outcome)));
    return false;
  }

  if (!from_queue) {
    ++counters_.cycles_started;
    if (f.injected) ++counters_.triggered_cycles;
  }

  if (in_flight_ >= cfg_.budget) {
    if (cfg_.overload == OverloadPolicy::Queue) {
      overload_queue_.push_back(f.id);
      if (cfg_.record_trace)
        trace_.add(now_, "deliver", f.from.name, f.to.name, "", fmt::format("frame={} queued", f.id));
    } else {
      rep.budget_dropped = true;
      ++counters_.dropped_cycles;
      ++counters_.rejected_requests;
      if (cfg_.record_trace)
        trace_.add(now_, "deliver", f.from.name, f.to.name, "",
                   fmt::format("frame={} budget-drop", f.id));
    }
    return false;
  }

  Cycle c;
  c.id = next_cycle_++;
  c.state = std::move(st);
  c.started = now_;
  c.injected_trigger = f.injected;
  ++in_flight_;
  counters_.peak_cycles = std::max(counters_.peak_cycles, in_flight_);

  Event timeout;
  timeout.time = now_ + cfg_.cycle_timeout;
  timeout.type = EventType::Timeout;
  timeout.node = bs.id;
  timeout.cycle = c.id;
  push(std::move(timeout));

  bs.cycles.push_back(std::move(c));
  rep.cycle_started = true;
  rep.phase_before = phase::kAwaitTrigger;
  rep.phase_after = r.state.phase;
  if (cfg_.record_trace)
    trace_.add(now_, "deliver", f.from.name, f.to.name, "",
               fmt::format("frame={} BS#{}:{}", f.id, bs.cycles.back().id,
                           to_string(r.state.outcome)));
  apply_bs_step(bs, bs.cycles.back(), std::move(r));
  return true;
}

void SimWorld::apply_bs_step(Node& bs, Cycle& c, StepResult r) {
  bs.table = r.state.table;
  bs.window = r.state.window;
  c.state = std::move(r.state);
  if (!r.outgoing.empty()) {
    Event e;
    e.time = now_ + cfg_.processing;
    e.type = EventType::Send;
    e.node = bs.id;
    e.to = c.state.peer;
    e.payload = std::move(r.outgoing);
    push(std::move(e));
  }
  if (!c.state.outcome.in_progress()) {
    if (c.state.outcome.authorized())
      c.authorized_at = now_;
    else
      ++counters_.rejected_requests;
    c.release_scheduled = true;
    Event e;
    e.time = now_ + cfg_.processing;
    e.type = EventType::Release;
    e.node = bs.id;
    e.cycle = c.id;
    push(std::move(e));
  }
}

void SimWorld::release(Node& bs, std::uint64_t cycle_id, bool timeout) {
  Cycle* c = find_cycle(bs, cycle_id);
  if (!c || c->released) return;
  c->released = true;
  --in_flight_;
  if (cfg_.record_trace)
    trace_.add(now_, timeout ? "timeout" : "release", bs.id.name, c->state.peer.name, "",
               fmt::format("BS#{} in_flight={}", cycle_id, in_flight_));
  while (in_flight_ < cfg_.budget && !overload_queue_.empty()) {
    const FrameId id = overload_queue_.front();
    overload_queue_.erase(overload_queue_.begin());
    DeliveryReport rep;
    try_start_cycle(bs, frames_.at(id), rep, true);
  }
}

Metrics SimWorld::metrics() const {
  Metrics m = counters_;
  m.frames_delivered = m.frames_dropped = m.frames_in_flight = 0;
  for (const auto& [_, f] : frames_) {
    switch (f.status) {
      case FrameStatus::Delivered: ++m.frames_delivered; break;
      case FrameStatus::Dropped: ++m.frames_dropped; break;
      case FrameStatus::InFlight: ++m.frames_in_flight; break;
    }
  }

  double latency_sum = 0.0;
  for (const auto& j : joins_) {
    if (j.legit) ++m.legit_joins;
    if (!j.ss_authorized_at || !j.ak) continue;
    std::optional<SimTime> bs_at;
    for (const auto& [_, n] : nodes_) {
      if (n.role != Role::BS || n.adversarial) continue;
      for (const auto& c : n.cycles) {
        if (c.state.peer == j.ss && c.authorized_at && c.state.ak == j.ak) bs_at = c.authorized_at;
      }
    }
    if (!bs_at) continue;
    ++m.completed_auths;
    if (j.legit) ++m.legit_completed;
    latency_sum += static_cast<double>(std::max(*bs_at, *j.ss_authorized_at) - j.start) /
                   kMillisPerSecond;
  }
  m.legit_success_rate =
      m.legit_joins ? static_cast<double>(m.legit_completed) / static_cast<double>(m.legit_joins)
                    : 0.0;
  m.mean_auth_latency =
      m.completed_auths ? latency_sum / static_cast<double>(m.completed_auths) : 0.0;
  return m;
}

}  // namespace bwa
