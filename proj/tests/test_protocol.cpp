#include <doctest.h>

#include <functional>

#include "bwa/protocol.hpp"

using namespace bwa;

namespace {

const NodeId kSs{"ss1"};
const NodeId kBs{"bs1"};

SessionConfig ss_config(ProtocolId p, std::uint64_t nonce = 11) {
  SessionConfig c;
  c.peer = kBs;
  c.mac = 0xabcdef;
  c.bcid = 3;
  c.nonce = nonce;
  if (uses_table(p)) c.table = TimestampTable{};
  if (uses_window(p)) c.window = ValidationWindow{};
  return c;
}

SessionConfig bs_config(ProtocolId p, std::uint64_t nonce = 22) {
  SessionConfig c;
  c.ak_id = "ak-1";
  c.nonce = nonce;
  if (uses_table(p)) c.table = TimestampTable{};
  if (uses_window(p)) c.window = ValidationWindow{};
  return c;
}

struct Handshake {
  SessionState ss;
  SessionState bs;
  std::vector<Term> ss_sent;
  std::vector<Term> bs_sent;
};

/// Drives both machines with one second per message. `tamper` may rewrite a
/// message before it is delivered.
Handshake run(ProtocolId p, std::function<Term(Term, Role from)> tamper = {}) {
  Handshake h;
  Timestamp now = 1000;
  h.ss = init_session(p, Role::SS, kSs, ss_config(p), now);
  h.bs = init_session(p, Role::BS, kBs, bs_config(p), now);
  std::vector<Term> to_bs = h.ss.outbox, to_ss;
  while (!to_bs.empty() || !to_ss.empty()) {
    for (auto t : to_bs) {
      h.ss_sent.push_back(t);
      if (tamper) t = tamper(t, Role::SS);
      auto r = step(h.bs, t, ++now);
      h.bs = r.state;
      to_ss.insert(to_ss.end(), r.outgoing.begin(), r.outgoing.end());
    }
    to_bs.clear();
    for (auto t : to_ss) {
      h.bs_sent.push_back(t);
      if (tamper) t = tamper(t, Role::BS);
      auto r = step(h.ss, t, ++now);
      h.ss = r.state;
      to_bs.insert(to_bs.end(), r.outgoing.begin(), r.outgoing.end());
    }
    to_ss.clear();
  }
  return h;
}

bool mac_in_clear(const Term& t) {
  if (t.is(TermKind::MacId)) return true;
  if (t.is(TermKind::Enc)) return false;
  if (t.is(TermKind::Sig)) return mac_in_clear(t.body());
  for (const auto& p : t.parts())
    if (mac_in_clear(p)) return true;
  return false;
}

Term replace_part(const Term& t, std::size_t i, Term v) {
  std::vector<Term> parts = t.parts();
  parts[i] = std::move(v);
  return Term::tuple(std::move(parts));
}

}  // namespace

TEST_CASE("init_session examples") {
  const SessionState ss = init_session(ProtocolId::PKMv1, Role::SS, kSs, ss_config(ProtocolId::PKMv1));
  REQUIRE(ss.outbox.size() == 2);
  CHECK(ss.outbox[0] == Term::cert(kSs));
  CHECK(ss.outcome.in_progress());

  const SessionState tsa = init_session(ProtocolId::TSA, Role::BS, kBs, bs_config(ProtocolId::TSA));
  REQUIRE(tsa.table);
  CHECK(tsa.table->size() == 0);
  CHECK_FALSE(tsa.window);

  const SessionState isnap =
      init_session(ProtocolId::ISNAP, Role::BS, kBs, bs_config(ProtocolId::ISNAP));
  CHECK(isnap.window);
  CHECK_FALSE(isnap.table);
  CHECK(isnap.phase == phase::kAwaitTrigger);
}

TEST_CASE("missing configuration is an error") {
  SessionConfig c = ss_config(ProtocolId::PKMv2);
  c.mac.reset();
  CHECK_THROWS_AS(init_session(ProtocolId::PKMv2, Role::SS, kSs, c), ConfigError);
  CHECK_NOTHROW(init_session(ProtocolId::PKMv1, Role::SS, kSs, c));
  SessionConfig t = bs_config(ProtocolId::TSA);
  t.table.reset();
  CHECK_THROWS_AS(init_session(ProtocolId::TSA, Role::BS, kBs, t), ConfigError);
  SessionConfig w = bs_config(ProtocolId::ISNAP);
  w.window.reset();
  CHECK_THROWS_AS(init_session(ProtocolId::ISNAP, Role::BS, kBs, w), ConfigError);
  SessionConfig b = bs_config(ProtocolId::PKMv1);
  b.ak_id.reset();
  CHECK_THROWS_AS(init_session(ProtocolId::PKMv1, Role::BS, kBs, b), ConfigError);
}

TEST_CASE("silence is a no-op") {
  const SessionState s = init_session(ProtocolId::HA, Role::BS, kBs, bs_config(ProtocolId::HA));
  const StepResult r = step(s, std::nullopt, 5);
  CHECK(r.outgoing.empty());
  CHECK(r.state.phase == s.phase);
  CHECK(r.state.outcome.in_progress());
}

TEST_CASE("PKMv1 BS authorizes on the request") {
  SessionState bs = init_session(ProtocolId::PKMv1, Role::BS, kBs, bs_config(ProtocolId::PKMv1));
  bs = step(bs, Term::cert(kSs), 0).state;
  CHECK(bs.phase == phase::kAwaitRequest);
  const Term req = Term::tuple({Term::cert(kSs), Term::capabilities(1), Term::bcid(3), Term::nonce(9)});
  const StepResult r = step(bs, req, 0);
  CHECK(r.state.outcome.authorized());
  REQUIRE(r.outgoing.size() == 1);
  CHECK(sym_decrypt(r.outgoing[0].parts()[0], private_key(kSs)) == Term::auth_key("ak-1"));
}

TEST_CASE("TSA table catches a recorded stamp") {
  SessionState bs = init_session(ProtocolId::TSA, Role::BS, kBs, bs_config(ProtocolId::TSA));
  const Term trig = Term::tuple({Term::cert(kSs), Term::timestamp(100)});
  bs = step(bs, trig, 100).state;
  CHECK(bs.outcome.in_progress());
  SessionState again = init_session(ProtocolId::TSA, Role::BS, kBs, bs_config(ProtocolId::TSA));
  again.table = bs.table;
  const StepResult r = step(again, trig, 101);
  CHECK(r.state.outcome.rejected());
  CHECK(r.state.outcome.reason == RejectReason::ReplayDetectedTable);
}

TEST_CASE("honest completion, one-way vs mutual, nonce linking") {
  for (auto p : kAllProtocols) {
    CAPTURE(to_string(p));
    const Handshake h = run(p);
    CHECK(h.ss.outcome.authorized());
    CHECK(h.bs.outcome.authorized());
    CHECK(h.ss.ak == h.bs.ak);
    CHECK(static_cast<int>(h.ss_sent.size() + h.bs_sent.size()) == handshake_length(p));
    CHECK(h.ss.peer_signature_verified == mutual_auth(p));
    if (p == ProtocolId::PKMv2 || p == ProtocolId::HA) {
      // BS nonce comes back in the ack, SS nonce comes back in the reply.
      CHECK(h.ss_sent.back().parts()[0] == Term::nonce(*h.bs.my_nonce));
      CHECK(h.bs_sent.back().parts()[5] == Term::nonce(*h.ss.my_nonce));
    }
  }
}

TEST_CASE("plaintext MAC exposure") {
  for (auto p : {ProtocolId::PKMv2, ProtocolId::HA}) CHECK(mac_in_clear(run(p).ss_sent.back()));
  const Handshake isnap = run(ProtocolId::ISNAP);
  CHECK_FALSE(mac_in_clear(isnap.ss_sent.back()));
  CHECK(isnap.bs.peer_mac == 0xabcdef);
}

TEST_CASE("phase only advances; rejection is terminal") {
  for (auto p : kAllProtocols) {
    SessionState bs = init_session(p, Role::BS, kBs, bs_config(p));
    const StepResult r = step(bs, Term::nonce(1), 0);
    CHECK(r.state.outcome.reason == RejectReason::WrongPhase);
    const StepResult again = step(r.state, Term::cert(kSs), 0);
    CHECK(again.state.outcome.rejected());
    CHECK(again.outgoing.empty());
  }
}

TEST_CASE("forged BS signature is caught by mutual protocols") {
  for (auto p : {ProtocolId::PKMv2, ProtocolId::HA, ProtocolId::ISNAP}) {
    CAPTURE(to_string(p));
    const Handshake h = run(p, [&](Term t, Role from) {
      if (from != Role::BS) return t;
      const std::size_t last = t.parts().size() - 1;
      return replace_part(t, last, Term::sig(private_key("adv"), t.parts()[last].body()));
    });
    CHECK(h.ss.outcome.reason == RejectReason::BadSignature);
  }
  // One-way protocols never look.
  for (auto p : {ProtocolId::PKMv1, ProtocolId::TSA}) CHECK(run(p).ss.outcome.authorized());
}

TEST_CASE("nonce mismatch") {
  const Handshake h = run(ProtocolId::PKMv2, [](Term t, Role from) {
    if (from == Role::SS && t.is(TermKind::Tuple) && t.parts().size() == 4 &&
        t.parts()[0].is(TermKind::Nonce)) {
      // re-sign the ack over a wrong BS nonce
      std::vector<Term> body{Term::nonce(999), t.parts()[1], t.parts()[2]};
      return Term::tuple({body[0], body[1], body[2],
                          Term::sig(private_key(kSs), Term::tuple(body))});
    }
    return t;
  });
  CHECK(h.ss.outcome.authorized());
  CHECK(h.bs.outcome.reason == RejectReason::NonceMismatch);
}

TEST_CASE("stale and duplicate stamps") {
  SessionState bs = init_session(ProtocolId::HA, Role::BS, kBs, bs_config(ProtocolId::HA));
  bs = step(bs, Term::cert(kSs), 100).state;
  const Term req = Term::tuple({Term::cert(kSs), Term::capabilities(1), Term::bcid(3),
                                Term::nonce(9), Term::timestamp(50)});
  CHECK(step(bs, req, 100).state.outcome.reason == RejectReason::StaleTimestamp);

  SessionState w = init_session(ProtocolId::ISNAP, Role::BS, kBs, bs_config(ProtocolId::ISNAP));
  const Term trig = Term::tuple({Term::cert(kSs), Term::timestamp(100), Term::bcid(3)});
  const StepResult first = step(w, trig, 100);
  CHECK(first.outgoing.size() == 1);
  SessionState second = init_session(ProtocolId::ISNAP, Role::BS, kBs, bs_config(ProtocolId::ISNAP));
  second.window = first.state.window;
  CHECK(step(second, trig, 104).state.outcome.reason == RejectReason::DuplicateInWindow);
}

TEST_CASE("request must come from the triggering subscriber") {
  SessionState bs = init_session(ProtocolId::PKMv1, Role::BS, kBs, bs_config(ProtocolId::PKMv1));
  bs = step(bs, Term::cert(kSs), 0).state;
  const Term req =
      Term::tuple({Term::cert("other"), Term::capabilities(1), Term::bcid(3), Term::nonce(9)});
  CHECK(step(bs, req, 0).state.outcome.reason == RejectReason::Malformed);
}

TEST_CASE("ISNAP freshness storage does not grow with retention") {
  // 1000 honest triggers one second apart: the cache stays within the window.
  SessionConfig c = bs_config(ProtocolId::ISNAP);
  ValidationWindow w = *c.window;
  for (Timestamp t = 0; t < 1000; ++t) {
    c.window = w;
    SessionState s = init_session(ProtocolId::ISNAP, Role::BS, kBs, c);
    const StepResult r =
        step(s, Term::tuple({Term::cert(kSs), Term::timestamp(t), Term::bcid(3)}), t);
    REQUIRE(r.state.outcome.in_progress());
    w = *r.state.window;
    CHECK(w.cache.size() <= static_cast<std::size_t>(w.width + 1));
  }
}
