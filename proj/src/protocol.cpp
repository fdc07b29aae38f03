#include "bwa/protocol.hpp"

#include <cstdlib>
#include <initializer_list>

#include <fmt/format.h>

namespace bwa {

std::string_view to_string(ProtocolId p) {
  switch (p) {
    case ProtocolId::PKMv1: return "PKMv1";
    case ProtocolId::PKMv2: return "PKMv2";
    case ProtocolId::TSA: return "TSA";
    case ProtocolId::HA: return "HA";
    case ProtocolId::ISNAP: return "ISNAP";
  }
  return "?";
}

std::optional<ProtocolId> parse_protocol(std::string_view s) {
  for (auto p : kAllProtocols)
    if (to_string(p) == s) return p;
  return std::nullopt;
}

bool uses_timestamps(ProtocolId p) { return p == ProtocolId::TSA || uses_table(p) || uses_window(p); }
bool uses_table(ProtocolId p) { return p == ProtocolId::TSA || p == ProtocolId::HA; }
bool uses_window(ProtocolId p) { return p == ProtocolId::ISNAP; }
bool mutual_auth(ProtocolId p) {
  return p == ProtocolId::PKMv2 || p == ProtocolId::HA || p == ProtocolId::ISNAP;
}
bool mobile_network(ProtocolId p) { return mutual_auth(p); }

int handshake_length(ProtocolId p) {
  switch (p) {
    case ProtocolId::PKMv1:
    case ProtocolId::TSA:
    case ProtocolId::ISNAP:
      return 3;
    case ProtocolId::PKMv2:
    case ProtocolId::HA:
      return 4;
  }
  return 0;
}

const char* to_string(Role r) { return r == Role::SS ? "SS" : "BS"; }

const char* to_string(RejectReason r) {
  switch (r) {
    case RejectReason::BadSignature: return "BadSignature";
    case RejectReason::NonceMismatch: return "NonceMismatch";
    case RejectReason::ReplayDetectedTable: return "ReplayDetectedTable";
    case RejectReason::StaleTimestamp: return "StaleTimestamp";
    case RejectReason::DuplicateInWindow: return "DuplicateInWindow";
    case RejectReason::Malformed: return "Malformed";
    case RejectReason::WrongPhase: return "WrongPhase";
  }
  return "?";
}

std::string to_string(const Outcome& o) {
  switch (o.status) {
    case Status::InProgress: return "InProgress";
    case Status::Authorized: return "Authorized";
    case Status::Rejected:
      return fmt::format("Rejected({})", o.reason ? to_string(*o.reason) : "?");
  }
  return "?";
}

namespace {

// Table step indices: trigger, request, reply, ack.
constexpr int kStepTrigger = 1;
constexpr int kStepRequest = 2;
constexpr int kStepReply = 3;
constexpr int kStepAck = 4;

bool has_shape(const Term& t, std::initializer_list<TermKind> kinds) {
  if (!t.is(TermKind::Tuple) || t.parts().size() != kinds.size()) return false;
  std::size_t i = 0;
  for (auto k : kinds)
    if (!t.parts()[i++].is(k)) return false;
  return true;
}

Term prefix_tuple(const Term& t, std::size_t n) {
  return Term::tuple(std::vector<Term>(t.parts().begin(), t.parts().begin() + n));
}

Term signed_tuple(std::vector<Term> parts, const NodeId& signer) {
  Term body = Term::tuple(parts);
  parts.push_back(Term::sig(private_key(signer), std::move(body)));
  return Term::tuple(std::move(parts));
}

bool signature_covers(const Term& msg, const NodeId& signer) {
  const auto& parts = msg.parts();
  const Term& sig = parts.back();
  return verify_sig(sig, signer) && sig.body() == prefix_tuple(msg, parts.size() - 1);
}

StepResult reject(SessionState s, RejectReason r) {
  s.outcome = {Status::Rejected, r};
  return {std::move(s), {}};
}

/// Freshness of `ts` from `sender` at the given step; records it on success.
std::optional<RejectReason> check_fresh(SessionState& s, const NodeId& sender, int step_index,
                                        Timestamp ts, Timestamp now) {
  if (s.skip_freshness) return std::nullopt;
  if (s.window) {
    switch (validate_window(sender, ts, now, *s.window)) {
      case WindowVerdict::Accept: return std::nullopt;
      case WindowVerdict::StaleTimestamp: return RejectReason::StaleTimestamp;
      case WindowVerdict::DuplicateInWindow: return RejectReason::DuplicateInWindow;
    }
  }
  if (s.table) {
    s.table->prune(now);
    if (s.table->contains(sender, step_index, ts)) return RejectReason::ReplayDetectedTable;
    if (std::llabs(now - ts) > s.freshness_tolerance) return RejectReason::StaleTimestamp;
    s.table->record(sender, step_index, ts);
  }
  return std::nullopt;
}

// ---- message builders ----

Term make_trigger(const SessionState& s, Timestamp now) {
  const Term cert = Term::cert(s.identity);
  switch (s.protocol) {
    case ProtocolId::TSA:
      return Term::tuple({cert, Term::timestamp(now)});
    case ProtocolId::ISNAP:
      return Term::tuple({cert, Term::timestamp(now), Term::bcid(*s.bcid)});
    default:
      return cert;
  }
}

Term make_request(const SessionState& s, Timestamp now) {
  std::vector<Term> parts{Term::cert(s.identity), Term::capabilities(s.capabilities),
                          Term::bcid(*s.bcid), Term::nonce(*s.my_nonce)};
  if (uses_table(s.protocol)) parts.push_back(Term::timestamp(now));
  return Term::tuple(std::move(parts));
}

Term make_reply(const SessionState& s, Timestamp now) {
  std::vector<Term> parts{Term::enc(public_key(s.peer), Term::auth_key(*s.ak)),
                          Term::lifetime(s.lifetime), Term::seq_no(s.seq_no),
                          Term::said_list(s.saids)};
  switch (s.protocol) {
    case ProtocolId::PKMv1:
      return Term::tuple(std::move(parts));
    case ProtocolId::TSA:
      parts.push_back(Term::timestamp(now));
      return Term::tuple(std::move(parts));
    case ProtocolId::PKMv2:
    case ProtocolId::HA:
      parts.push_back(Term::cert(s.identity));
      parts.push_back(Term::nonce(*s.peer_nonce));
      parts.push_back(Term::nonce(*s.my_nonce));
      if (s.protocol == ProtocolId::HA) parts.push_back(Term::timestamp(now));
      return signed_tuple(std::move(parts), s.identity);
    case ProtocolId::ISNAP:
      parts.push_back(Term::cert(s.identity));
      parts.push_back(Term::timestamp(now));
      return signed_tuple(std::move(parts), s.identity);
  }
  return Term::tuple({});
}

Term make_ack(const SessionState& s, Timestamp now) {
  const Term sealed_mac = Term::enc(public_key(s.peer), Term::mac(*s.mac));
  switch (s.protocol) {
    case ProtocolId::PKMv2:
      return signed_tuple({Term::nonce(*s.peer_nonce), Term::mac(*s.mac), sealed_mac},
                          s.identity);
    case ProtocolId::HA:
      return signed_tuple({Term::nonce(*s.peer_nonce), Term::mac(*s.mac), sealed_mac,
                           Term::timestamp(now)},
                          s.identity);
    case ProtocolId::ISNAP:
      return signed_tuple({sealed_mac, Term::timestamp(now)}, s.identity);
    default:
      return Term::tuple({});
  }
}

// ---- BS transitions ----

StepResult bs_on_trigger(SessionState s, const Term& in, Timestamp now) {
  if (!is_trigger(s.protocol, in)) return reject(std::move(s), RejectReason::WrongPhase);
  const Term& cert = in.is(TermKind::Cert) ? in : in.parts()[0];
  s.peer = cert.subject();
  if (s.protocol == ProtocolId::TSA || s.protocol == ProtocolId::ISNAP) {
    if (auto r = check_fresh(s, s.peer, kStepTrigger, in.parts()[1].time(), now))
      return reject(std::move(s), *r);
  }
  if (s.protocol != ProtocolId::ISNAP) {
    s.phase = phase::kAwaitRequest;
    return {std::move(s), {}};
  }
  s.bcid = static_cast<std::uint16_t>(in.parts()[2].value());
  s.phase = phase::kAwaitAck;
  Term reply = make_reply(s, now);
  return {std::move(s), {std::move(reply)}};
}

StepResult bs_on_request(SessionState s, const Term& in, Timestamp now) {
  const bool stamped = uses_table(s.protocol);
  const bool ok = stamped ? has_shape(in, {TermKind::Cert, TermKind::Capabilities, TermKind::Bcid,
                                           TermKind::Nonce, TermKind::Timestamp})
                          : has_shape(in, {TermKind::Cert, TermKind::Capabilities, TermKind::Bcid,
                                           TermKind::Nonce});
  if (!ok) return reject(std::move(s), RejectReason::WrongPhase);
  if (in.parts()[0].subject() != s.peer) return reject(std::move(s), RejectReason::Malformed);
  if (stamped) {
    if (auto r = check_fresh(s, s.peer, kStepRequest, in.parts()[4].time(), now))
      return reject(std::move(s), *r);
  }
  s.capabilities = static_cast<std::uint32_t>(in.parts()[1].value());
  s.bcid = static_cast<std::uint16_t>(in.parts()[2].value());
  s.peer_nonce = in.parts()[3].value();
  Term reply = make_reply(s, now);
  if (mutual_auth(s.protocol)) {
    s.phase = phase::kAwaitAck;
  } else {
    s.phase = phase::kDone;
    s.outcome = {Status::Authorized, std::nullopt};
  }
  return {std::move(s), {std::move(reply)}};
}

StepResult bs_on_ack(SessionState s, const Term& in, Timestamp now) {
  const Term* sealed = nullptr;
  const Term* plain_mac = nullptr;
  switch (s.protocol) {
    case ProtocolId::PKMv2:
      if (!has_shape(in, {TermKind::Nonce, TermKind::MacId, TermKind::Enc, TermKind::Sig}))
        return reject(std::move(s), RejectReason::WrongPhase);
      break;
    case ProtocolId::HA:
      if (!has_shape(in, {TermKind::Nonce, TermKind::MacId, TermKind::Enc, TermKind::Timestamp,
                          TermKind::Sig}))
        return reject(std::move(s), RejectReason::WrongPhase);
      if (auto r = check_fresh(s, s.peer, kStepAck, in.parts()[3].time(), now))
        return reject(std::move(s), *r);
      break;
    case ProtocolId::ISNAP:
      if (!has_shape(in, {TermKind::Enc, TermKind::Timestamp, TermKind::Sig}))
        return reject(std::move(s), RejectReason::WrongPhase);
      if (auto r = check_fresh(s, s.peer, kStepAck, in.parts()[1].time(), now))
        return reject(std::move(s), *r);
      break;
    default:
      return reject(std::move(s), RejectReason::WrongPhase);
  }
  if (!signature_covers(in, s.peer)) return reject(std::move(s), RejectReason::BadSignature);
  if (s.protocol == ProtocolId::ISNAP) {
    sealed = &in.parts()[0];
  } else {
    if (in.parts()[0].value() != *s.my_nonce)
      return reject(std::move(s), RejectReason::NonceMismatch);
    plain_mac = &in.parts()[1];
    sealed = &in.parts()[2];
  }
  auto mac = sym_decrypt(*sealed, private_key(s.identity));
  if (!mac || !mac->is(TermKind::MacId)) return reject(std::move(s), RejectReason::Malformed);
  if (plain_mac && *plain_mac != *mac) return reject(std::move(s), RejectReason::Malformed);
  s.peer_mac = mac->value();
  s.phase = phase::kDone;
  s.outcome = {Status::Authorized, std::nullopt};
  return {std::move(s), {}};
}

// ---- SS transitions ----

StepResult ss_on_reply(SessionState s, const Term& in, Timestamp now) {
  std::optional<Timestamp> ts;
  std::optional<std::uint64_t> echoed_nonce;
  std::optional<std::uint64_t> bs_nonce;
  switch (s.protocol) {
    case ProtocolId::PKMv1:
      if (!has_shape(in, {TermKind::Enc, TermKind::Lifetime, TermKind::SeqNo, TermKind::SaidList}))
        return reject(std::move(s), RejectReason::Malformed);
      break;
    case ProtocolId::TSA:
      if (!has_shape(in, {TermKind::Enc, TermKind::Lifetime, TermKind::SeqNo, TermKind::SaidList,
                          TermKind::Timestamp}))
        return reject(std::move(s), RejectReason::Malformed);
      ts = in.parts()[4].time();
      break;
    case ProtocolId::PKMv2:
      if (!has_shape(in, {TermKind::Enc, TermKind::Lifetime, TermKind::SeqNo, TermKind::SaidList,
                          TermKind::Cert, TermKind::Nonce, TermKind::Nonce, TermKind::Sig}))
        return reject(std::move(s), RejectReason::Malformed);
      echoed_nonce = in.parts()[5].value();
      bs_nonce = in.parts()[6].value();
      break;
    case ProtocolId::HA:
      if (!has_shape(in, {TermKind::Enc, TermKind::Lifetime, TermKind::SeqNo, TermKind::SaidList,
                          TermKind::Cert, TermKind::Nonce, TermKind::Nonce, TermKind::Timestamp,
                          TermKind::Sig}))
        return reject(std::move(s), RejectReason::Malformed);
      echoed_nonce = in.parts()[5].value();
      bs_nonce = in.parts()[6].value();
      ts = in.parts()[7].time();
      break;
    case ProtocolId::ISNAP:
      if (!has_shape(in, {TermKind::Enc, TermKind::Lifetime, TermKind::SeqNo, TermKind::SaidList,
                          TermKind::Cert, TermKind::Timestamp, TermKind::Sig}))
        return reject(std::move(s), RejectReason::Malformed);
      ts = in.parts()[5].time();
      break;
  }
  if (ts) {
    if (auto r = check_fresh(s, s.peer, kStepReply, *ts, now)) return reject(std::move(s), *r);
  }
  if (mutual_auth(s.protocol)) {
    if (in.parts()[4].subject() != s.peer || !signature_covers(in, s.peer))
      return reject(std::move(s), RejectReason::BadSignature);
    s.peer_signature_verified = true;
  }
  if (echoed_nonce && *echoed_nonce != *s.my_nonce)
    return reject(std::move(s), RejectReason::NonceMismatch);
  auto ak = sym_decrypt(in.parts()[0], private_key(s.identity));
  if (!ak || !ak->is(TermKind::AuthKey)) return reject(std::move(s), RejectReason::Malformed);

  s.ak = ak->label();
  s.lifetime = static_cast<std::uint32_t>(in.parts()[1].value());
  s.seq_no = static_cast<std::uint8_t>(in.parts()[2].value());
  s.saids.assign(in.parts()[3].saids().begin(), in.parts()[3].saids().end());
  s.peer_nonce = bs_nonce;
  s.phase = phase::kDone;
  s.outcome = {Status::Authorized, std::nullopt};

  std::vector<Term> out;
  if (mutual_auth(s.protocol)) out.push_back(make_ack(s, now));
  return {std::move(s), std::move(out)};
}

}  // namespace

bool is_trigger(ProtocolId p, const Term& t) {
  switch (p) {
    case ProtocolId::TSA:
      return has_shape(t, {TermKind::Cert, TermKind::Timestamp});
    case ProtocolId::ISNAP:
      return has_shape(t, {TermKind::Cert, TermKind::Timestamp, TermKind::Bcid});
    default:
      return t.is(TermKind::Cert);
  }
}

SessionState init_session(ProtocolId p, Role role, const NodeId& identity,
                          const SessionConfig& cfg, Timestamp now) {
  auto require = [&](bool present, const char* field) {
    if (!present)
      throw ConfigError(fmt::format("{} {} session for {} requires '{}'", to_string(p),
                                    to_string(role), identity.name, field));
  };

  SessionState s;
  s.protocol = p;
  s.role = role;
  s.identity = identity;
  s.capabilities = cfg.capabilities;
  s.lifetime = cfg.ak_lifetime;
  s.seq_no = cfg.seq_no;
  s.saids = cfg.saids;
  s.freshness_tolerance = cfg.freshness_tolerance;
  s.skip_freshness = cfg.skip_freshness;

  if (uses_table(p)) {
    require(cfg.table.has_value(), "table");
    s.table = cfg.table;
  }
  if (uses_window(p)) {
    require(cfg.window.has_value(), "window");
    s.window = cfg.window;
  }

  if (role == Role::SS) {
    require(!cfg.peer.name.empty(), "peer");
    require(cfg.bcid.has_value(), "bcid");
    if (mobile_network(p)) require(cfg.mac.has_value(), "mac");
    if (p != ProtocolId::ISNAP) require(cfg.nonce.has_value(), "nonce");
    s.peer = cfg.peer;
    s.mac = cfg.mac;
    s.bcid = cfg.bcid;
    s.my_nonce = cfg.nonce;
    s.outbox.push_back(make_trigger(s, now));
    if (p != ProtocolId::ISNAP) s.outbox.push_back(make_request(s, now));
    s.phase = phase::kAwaitReply;
  } else {
    require(cfg.ak_id.has_value(), "ak_id");
    if (p == ProtocolId::PKMv2 || p == ProtocolId::HA) require(cfg.nonce.has_value(), "nonce");
    s.ak = cfg.ak_id;
    s.my_nonce = cfg.nonce;
    s.phase = phase::kAwaitTrigger;
  }
  return s;
}

StepResult step(const SessionState& s, const std::optional<Term>& incoming, Timestamp now) {
  if (!incoming || !s.outcome.in_progress()) return {s, {}};
  const Term& in = *incoming;
  if (!well_formed(in)) return reject(s, RejectReason::Malformed);

  if (s.role == Role::SS) {
    if (s.phase != phase::kAwaitReply) return reject(s, RejectReason::WrongPhase);
    return ss_on_reply(s, in, now);
  }
  switch (s.phase) {
    case phase::kAwaitTrigger: return bs_on_trigger(s, in, now);
    case phase::kAwaitRequest: return bs_on_request(s, in, now);
    case phase::kAwaitAck: return bs_on_ack(s, in, now);
    default: return reject(s, RejectReason::WrongPhase);
  }
}

}  // namespace bwa
