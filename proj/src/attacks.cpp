#include "bwa/attacks.hpp"

#include <algorithm>
#include <stdexcept>

#include <fmt/format.h>

namespace bwa {

namespace {

const NodeId kBs{"bs1"};
const NodeId kSs{"ss1"};
const NodeId kAdv{"adv"};
constexpr std::uint64_t kVictimMac = 0x00163e000001;
constexpr std::uint16_t kBcid = 7;

constexpr std::array<std::string_view, 5> kVerdictNames = {"Success", "PartialSuccess", "Failed",
                                                           "NotApplicable", "Error"};

ClockSpec clock_for(ProtocolId p, const ScenarioConfig& cfg, double offset = 0.0) {
  ClockSpec c;
  c.offset = offset;
  if (uses_window(p) && cfg.isnap_resync_interval_s > 0) {
    c.policy.resync_interval = cfg.isnap_resync_interval_s;
    c.policy.post_resync_residual = cfg.resync_residual_s;
  }
  return c;
}

bool carries_timestamp(const Term& t) {
  if (!t.is(TermKind::Tuple)) return false;
  return std::any_of(t.parts().begin(), t.parts().end(),
                     [](const Term& p) { return p.is(TermKind::Timestamp); });
}

/// Base strategy: injections scheduled on the simulation clock.
class Scripted : public Adversary {
 public:
  void inject_at(SimWorld& w, SimTime at, Term term, NodeId from, NodeId to) {
    const int tag = static_cast<int>(pending_.size());
    pending_.push_back(Inject{std::move(term), std::move(from), std::move(to), 0});
    w.schedule_timer(at, tag);
  }

  void on_timer(SimWorld& w, int tag) override {
    const Inject& in = pending_.at(static_cast<std::size_t>(tag));
    if (auto id = w.interpose(in)) injected_.push_back(*id);
  }

  bool ours(FrameId id) const {
    return std::find(injected_.begin(), injected_.end(), id) != injected_.end();
  }

 private:
  std::vector<Inject> pending_;
  std::vector<FrameId> injected_;
};

struct Run {
  SimWorld world;
  std::vector<NodeId> adversaries;
};

AttackOutcome finish(AttackOutcome o, const Run& r) {
  const Metrics m = r.world.metrics();
  o.metrics = m.as_map();
  o.trace = r.world.trace().str();
  o.evidence = collect_evidence(r.world, r.adversaries);
  o.leaks = find_secrecy_leaks(r.world);
  return o;
}

AttackOutcome not_applicable(AttackOutcome o, std::string why) {
  o.verdict = Verdict::NotApplicable;
  o.reason = std::move(why);
  return o;
}

// ---- water torture ----

/// Replays the first trigger it hears, `volume` times.
class TriggerReplayer : public Scripted {
 public:
  TriggerReplayer(NodeId victim, SimTime start, SimTime interval, int volume)
      : victim_(std::move(victim)), start_(start), interval_(interval), volume_(volume) {}

  void on_transmit(SimWorld& w, const Frame& f) override {
    if (captured_ || f.from != victim_ || !is_trigger(w.protocol(), f.body)) return;
    captured_ = true;
    w.interpose(Capture{f.id});
    for (int i = 0; i < volume_; ++i)
      inject_at(w, std::max(start_, w.now()) + interval_ * i, f.body, f.from, f.to);
  }

 private:
  NodeId victim_;
  SimTime start_;
  SimTime interval_;
  int volume_;
  bool captured_ = false;
};

AttackOutcome water_torture(AttackOutcome o, const ScenarioConfig& cfg) {
  const ProtocolId p = o.protocol;
  Run r{SimWorld(cfg.world(p)), {}};
  r.world.add_base_station(kBs, clock_for(p, cfg));
  r.world.add_subscriber(kSs, kBs, kVictimMac, kBcid, clock_for(p, cfg));
  r.world.set_adversary(std::make_unique<TriggerReplayer>(kSs, 5000, cfg.flood_interval_ms,
                                                           cfg.flood_volume));
  r.world.schedule_join(kSs, 0);
  r.world.run_until(5000 + cfg.flood_interval_ms * cfg.flood_volume + r.world.config().cycle_timeout +
                    10'000);

  const Metrics m = r.world.metrics();
  const double triggered = static_cast<double>(m.triggered_cycles);
  o.metric_name = "triggered_cycles";
  o.metric_value = triggered;
  if (triggered > cfg.water_torture_threshold * cfg.flood_volume) {
    o.verdict = Verdict::Success;
    o.reason = fmt::format("{} of {} replayed triggers started a cycle", m.triggered_cycles,
                           cfg.flood_volume);
  } else {
    o.verdict = Verdict::Failed;
    o.reason = fmt::format("only {} of {} replayed triggers started a cycle", m.triggered_cycles,
                           cfg.flood_volume);
  }
  return finish(std::move(o), r);
}

// ---- denial of service ----

double legit_rate(ProtocolId p, const ScenarioConfig& cfg, bool flood, Run* keep) {
  Run r{SimWorld(cfg.world(p)), {}};
  r.world.add_base_station(kBs, clock_for(p, cfg));
  for (int i = 0; i < cfg.legit_joins; ++i) {
    const NodeId id{fmt::format("ss{}", i + 1)};
    r.world.add_subscriber(id, kBs, kVictimMac + static_cast<std::uint64_t>(i),
                           static_cast<std::uint16_t>(kBcid + i), clock_for(p, cfg));
    r.world.schedule_join(id, cfg.join_interval_ms * i);
  }
  // Off the join grid so flood arrivals never tie with legitimate ones.
  if (flood)
    r.world.set_adversary(std::make_unique<TriggerReplayer>(
        NodeId{"ss1"}, 50, cfg.flood_interval_ms, cfg.dos_flood_volume));
  const SimTime end = std::max(cfg.join_interval_ms * cfg.legit_joins,
                               50 + cfg.flood_interval_ms * cfg.dos_flood_volume);
  r.world.run_until(end + r.world.config().cycle_timeout + 10'000);
  const double rate = r.world.metrics().legit_success_rate;
  if (keep) *keep = std::move(r);
  return rate;
}

AttackOutcome dos(AttackOutcome o, const ScenarioConfig& cfg) {
  const ProtocolId p = o.protocol;
  const double baseline = legit_rate(p, cfg, false, nullptr);
  Run r{SimWorld(cfg.world(p)), {}};
  const double rate = legit_rate(p, cfg, true, &r);
  o.metric_name = "legit_success_rate";
  o.metric_value = rate;
  AttackOutcome out = finish(std::move(o), r);
  out.metrics["baseline_success_rate"] = baseline;
  out.metrics["legit_success_loss"] = baseline - rate;
  if (rate < cfg.dos_threshold * baseline) {
    out.verdict = Verdict::Success;
    out.reason = fmt::format("legitimate success fell from {:.2f} to {:.2f}", baseline, rate);
  } else {
    out.verdict = Verdict::Failed;
    out.reason = fmt::format("legitimate success {:.2f} against baseline {:.2f}", rate, baseline);
  }
  return out;
}

// ---- message replay ----

/// Records one honest handshake, then replays it `gap` later while cutting
/// the subscriber's fresh attempt off the air.
class SessionReplayer : public Scripted {
 public:
  explicit SessionReplayer(SimTime gap) : gap_(gap) {}

  void on_transmit(SimWorld& w, const Frame& f) override {
    const bool ours_link = (f.from == kSs && f.to == kBs) || (f.from == kBs && f.to == kSs);
    if (!ours_link) return;
    if (w.now() < gap_) {
      w.interpose(Capture{f.id});
      recorded_.push_back({f.sent_at, f.body, f.from, f.to});
      if (!armed_) {
        armed_ = true;
        first_ = f.sent_at;
      }
      return;
    }
    w.interpose(Drop{f.id});
  }

  void on_timer(SimWorld& w, int tag) override {
    if (tag >= 0) return Scripted::on_timer(w, tag);
    // Replay in the original order and spacing; triggers are excluded from
    // scoring but still needed to open a cycle.
    for (const auto& r : recorded_) inject_at(w, gap_ + (r.at - first_), r.body, r.from, r.to);
  }

  void on_delivered(SimWorld& w, const Frame& f, const DeliveryReport& rep) override {
    if (!ours(f.id)) return;
    if (rep.outcome.authorized() && !rep.no_session && !rep.budget_dropped) {
      ++authorized_;
    } else if (!is_trigger(w.protocol(), f.body) && !rep.no_session &&
               !rep.outcome.rejected() && rep.phase_after > rep.phase_before) {
      ++advanced_;
    }
  }

  int authorized_ = 0;
  int advanced_ = 0;

 private:
  struct Rec {
    SimTime at;
    Term body;
    NodeId from;
    NodeId to;
  };
  SimTime gap_;
  bool armed_ = false;
  SimTime first_ = 0;
  std::vector<Rec> recorded_;
};

AttackOutcome message_replay(AttackOutcome o, const ScenarioConfig& cfg) {
  const ProtocolId p = o.protocol;
  const SimTime gap = from_seconds(cfg.replay_gap_s);
  Run r{SimWorld(cfg.world(p)), {}};
  r.world.add_base_station(kBs, clock_for(p, cfg));
  r.world.add_subscriber(kSs, kBs, kVictimMac, kBcid, clock_for(p, cfg));
  r.world.set_adversary(std::make_unique<SessionReplayer>(gap));
  r.world.schedule_join(kSs, 0);
  r.world.schedule_join(kSs, gap);
  r.world.schedule_timer(gap, -1);
  r.world.run_until(gap + 60'000);

  const auto* adv = static_cast<const SessionReplayer*>(r.world.adversary());
  o.metric_name = "replays_authorized";
  o.metric_value = adv->authorized_;
  AttackOutcome out = finish(std::move(o), r);
  out.metrics["replays_authorized"] = adv->authorized_;
  out.metrics["replays_advanced"] = adv->advanced_;
  if (adv->authorized_ > 0) {
    out.verdict = Verdict::Success;
    out.reason = "a replayed message led to authorization";
  } else if (adv->advanced_ > 0) {
    out.verdict = Verdict::PartialSuccess;
    out.reason = "replayed messages were processed but authorization failed";
  } else {
    out.verdict = Verdict::Failed;
    out.reason = "every replayed message was rejected";
  }
  return out;
}

// ---- identity theft ----

AttackOutcome identity_theft(AttackOutcome o, const ScenarioConfig& cfg) {
  const ProtocolId p = o.protocol;
  if (!mobile_network(p))
    return not_applicable(std::move(o), "MAC identities are provisioned, not registered per join");

  Run r{SimWorld(cfg.world(p)), {kAdv}};
  r.world.add_base_station(kBs, clock_for(p, cfg));
  r.world.add_subscriber(kSs, kBs, kVictimMac, kBcid, clock_for(p, cfg));
  r.world.schedule_join(kSs, 0);
  r.world.run_until(30'000);

  o.metric_name = "extracted_mac";
  const bool mac_known = r.world.knowledge().derivable(Term::mac(kVictimMac));
  o.metric_value = mac_known ? 1 : 0;
  r.world.add_adversary_subscriber(kAdv, kBs, kVictimMac, kBcid + 1, clock_for(p, cfg));
  if (mac_known) {
    r.world.schedule_join(kAdv, 30'000);
    r.world.run_until(90'000);
  }

  bool stolen = false;
  for (const auto& c : r.world.node(kBs).cycles)
    if (c.state.peer == kAdv && c.state.outcome.authorized() && c.state.peer_mac == kVictimMac)
      stolen = true;

  AttackOutcome out = finish(std::move(o), r);
  out.metrics["extracted_mac"] = mac_known ? 1 : 0;
  out.metrics["sessions_hijacked"] = stolen ? 1 : 0;
  if (stolen) {
    out.verdict = Verdict::Success;
    out.reason = "BS authorized the adversary under the victim's MAC";
  } else {
    out.verdict = Verdict::Failed;
    out.reason = mac_known ? "BS refused the adversary" : "victim MAC never appeared in the clear";
  }
  return out;
}

// ---- BS impersonation ----

/// Runs a BS session of its own and answers in the real BS's name.
class RogueBs : public Scripted {
 public:
  explicit RogueBs(const ScenarioConfig& cfg) : cfg_(cfg) {}

  void on_transmit(SimWorld& w, const Frame& f) override {
    if (f.from != kSs || f.to != kBs) return;
    w.interpose(Drop{f.id});
    const ProtocolId p = w.protocol();
    const Timestamp now = w.clock().node_now(kAdv);
    if (!session_) {
      SessionConfig sc;
      sc.nonce = w.fresh_nonce();
      sc.ak_id = "adv-1";
      sc.freshness_tolerance = cfg_.tolerance_s;
      if (uses_table(p)) sc.table = TimestampTable(cfg_.retention_days, cfg_.timestamp_width);
      if (uses_window(p)) sc.window = ValidationWindow{cfg_.window_s, {}};
      w.note_generated(Term::nonce(*sc.nonce));
      w.note_generated(Term::auth_key(*sc.ak_id));
      ak_ = *sc.ak_id;
      session_ = init_session(p, Role::BS, kAdv, sc, now);
    }
    StepResult res = step(*session_, f.body, now);
    session_ = std::move(res.state);
    for (auto& t : res.outgoing) inject_at(w, w.now() + w.config().processing, t, kBs, kSs);
  }

  std::string ak_;

 private:
  ScenarioConfig cfg_;
  std::optional<SessionState> session_;
};

AttackOutcome impersonation(AttackOutcome o, const ScenarioConfig& cfg) {
  const ProtocolId p = o.protocol;
  Run r{SimWorld(cfg.world(p)), {kAdv}};
  r.world.add_base_station(kBs, clock_for(p, cfg));
  r.world.add_subscriber(kSs, kBs, kVictimMac, kBcid, clock_for(p, cfg));
  r.world.add_adversary_node(kAdv, clock_for(p, cfg));
  r.world.set_adversary(std::make_unique<RogueBs>(cfg));
  r.world.schedule_join(kSs, 0);
  r.world.run_until(60'000);

  const auto* adv = static_cast<const RogueBs*>(r.world.adversary());
  const auto& ss = *r.world.node(kSs).session;
  const bool fooled = ss.outcome.authorized() && ss.ak == adv->ak_;
  o.metric_name = "ss_accepted_rogue_ak";
  o.metric_value = fooled ? 1 : 0;
  AttackOutcome out = finish(std::move(o), r);
  out.metrics["ss_accepted_rogue_ak"] = fooled ? 1 : 0;
  if (fooled) {
    out.verdict = Verdict::Success;
    out.reason = "SS accepted an AK issued by the rogue BS";
  } else {
    out.verdict = Verdict::Failed;
    out.reason = "SS rejected the rogue BS: " + to_string(ss.outcome);
  }
  return out;
}

// ---- interleaving ----

/// Man in the middle: holds every frame between the two parties before
/// passing it on.
class Relay : public Scripted {
 public:
  explicit Relay(SimTime hold) : hold_(hold) {}

  void on_transmit(SimWorld& w, const Frame& f) override {
    w.interpose(Capture{f.id});
    w.interpose(Drop{f.id});
    inject_at(w, w.now() + hold_, f.body, f.from, f.to);
  }

 private:
  SimTime hold_;
};

AttackOutcome interleaving(AttackOutcome o, const ScenarioConfig& cfg) {
  const ProtocolId p = o.protocol;
  if (!mutual_auth(p)) return not_applicable(std::move(o), "no BS authentication to interleave");
  const SimTime hold = from_seconds(cfg.interleave_delay_s);
  Run r{SimWorld(cfg.world(p)), {}};
  r.world.add_base_station(kBs, clock_for(p, cfg));
  r.world.add_subscriber(kSs, kBs, kVictimMac, kBcid, clock_for(p, cfg));
  r.world.set_adversary(std::make_unique<Relay>(hold));
  r.world.schedule_join(kSs, 0);
  r.world.run_until(4 * (hold + 3000) + 10'000);

  const Metrics m = r.world.metrics();
  const auto& ss = *r.world.node(kSs).session;
  o.metric_name = "sessions_hijacked";
  o.metric_value = static_cast<double>(m.completed_auths);
  AttackOutcome out = finish(std::move(o), r);
  out.metrics["sessions_hijacked"] = static_cast<double>(m.completed_auths);
  if (m.completed_auths > 0) {
    out.verdict = Verdict::Success;
    out.reason = "both ends authorized over the relayed, delayed session";
  } else {
    out.verdict = Verdict::Failed;
    std::string bs_side = "no cycle";
    for (const auto& c : r.world.node(kBs).cycles)
      if (c.state.peer == kSs) bs_side = to_string(c.state.outcome);
    out.reason = fmt::format("relayed session did not complete: SS {}, BS {}",
                             to_string(ss.outcome), bs_side);
  }
  return out;
}

// ---- suppress replay ----

class Suppressor : public Scripted {
 public:
  explicit Suppressor(SimTime d) : d_(d) {}

  void on_transmit(SimWorld& w, const Frame& f) override {
    if (f.from != kSs) return;
    w.interpose(Capture{f.id});
    w.interpose(Drop{f.id});
    // The message is d old when it arrives; the hold includes link latency.
    inject_at(w, w.now() + std::max<SimTime>(0, d_ - w.config().latency), f.body, f.from, f.to);
  }

  void on_delivered(SimWorld&, const Frame& f, const DeliveryReport& rep) override {
    if (!ours(f.id) || !carries_timestamp(f.body)) return;
    if (rep.gated || rep.budget_dropped || rep.no_session || rep.outcome.rejected()) return;
    if (rep.cycle_started || rep.phase_after > rep.phase_before) ++accepted_;
  }

  int accepted_ = 0;

 private:
  SimTime d_;
};

AttackOutcome suppress_replay(AttackOutcome o, const ScenarioConfig& cfg) {
  const ProtocolId p = o.protocol;
  if (!uses_timestamps(p)) return not_applicable(std::move(o), "protocol carries no timestamps");
  const SimTime d = from_seconds(cfg.adversary_delay_s);
  Run r{SimWorld(cfg.world(p)), {}};
  r.world.add_base_station(kBs, clock_for(p, cfg, -cfg.receiver_lag_s));
  r.world.add_subscriber(kSs, kBs, kVictimMac, kBcid, clock_for(p, cfg));
  r.world.set_adversary(std::make_unique<Suppressor>(d));
  r.world.schedule_join(kSs, 0);
  r.world.run_until(d + 60'000);

  const auto* adv = static_cast<const Suppressor*>(r.world.adversary());
  o.metric_name = "delayed_messages_accepted";
  o.metric_value = adv->accepted_;
  AttackOutcome out = finish(std::move(o), r);
  out.metrics["delayed_messages_accepted"] = adv->accepted_;
  if (adv->accepted_ > 0) {
    out.verdict = Verdict::Success;
    out.reason = fmt::format("BS accepted {} message(s) held back {} s", adv->accepted_,
                             cfg.adversary_delay_s);
  } else {
    out.verdict = Verdict::Failed;
    out.reason = "every held-back timestamp was rejected";
  }
  return out;
}

}  // namespace

std::string_view to_string(Verdict v) { return kVerdictNames[static_cast<std::size_t>(v)]; }

std::optional<Verdict> parse_verdict(std::string_view s) {
  for (std::size_t i = 0; i < kVerdictNames.size(); ++i)
    if (kVerdictNames[i] == s) return static_cast<Verdict>(i);
  return std::nullopt;
}

AttackOutcome run_attack(AttackKind a, ProtocolId p, const ScenarioConfig& cfg) {
  AttackOutcome o;
  o.attack = a;
  o.protocol = p;
  try {
    cfg.validate();
    switch (a) {
      case AttackKind::WaterTorture: return water_torture(std::move(o), cfg);
      case AttackKind::DoS: return dos(std::move(o), cfg);
      case AttackKind::MessageReplay: return message_replay(std::move(o), cfg);
      case AttackKind::IdentityTheft: return identity_theft(std::move(o), cfg);
      case AttackKind::Impersonation: return impersonation(std::move(o), cfg);
      case AttackKind::Interleaving: return interleaving(std::move(o), cfg);
      case AttackKind::SuppressReplay: return suppress_replay(std::move(o), cfg);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    o.verdict = Verdict::Error;
    o.reason = e.what();
  }
  return o;
}

Evidence collect_evidence(const SimWorld& w, const std::vector<NodeId>& adversary_nodes) {
  Evidence e;
  for (const auto& [id, f] : w.frames()) e.frames.push_back({id, f.injected, f.body});
  e.adversary_nodes = adversary_nodes;
  e.generated.assign(w.adversary_generated().begin(), w.adversary_generated().end());
  e.knowledge.assign(w.knowledge().terms().begin(), w.knowledge().terms().end());
  return e;
}

std::vector<std::string> find_secrecy_leaks(const SimWorld& w) {
  std::vector<std::string> leaks;
  const Knowledge& k = w.knowledge();
  for (const auto& [id, n] : w.nodes()) {
    if (n.adversarial) continue;
    if (k.contains(Term::key(private_key(id)))) leaks.push_back("private key of " + id.name);
    for (const auto& c : n.cycles) {
      if (!c.state.ak || !c.state.outcome.authorized()) continue;
      auto peer = w.nodes().find(c.state.peer);
      if (peer != w.nodes().end() && peer->second.adversarial) continue;
      if (k.contains(Term::auth_key(*c.state.ak)))
        leaks.push_back(fmt::format("AK {} issued to {}", *c.state.ak, c.state.peer.name));
    }
  }
  return leaks;
}

}  // namespace bwa
