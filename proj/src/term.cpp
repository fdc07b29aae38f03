#include "bwa/term.hpp"

#include <algorithm>
#include <fmt/format.h>

namespace bwa {

KeyRef inverse(const KeyRef& k) {
  switch (k.kind) {
    case KeyKind::Public:
      return {KeyKind::Private, k.owner};
    case KeyKind::Private:
      return {KeyKind::Public, k.owner};
    case KeyKind::Symmetric:
      return k;
  }
  return k;
}

const char* to_string(TermKind k) {
  switch (k) {
    case TermKind::Atom: return "atom";
    case TermKind::Nonce: return "nonce";
    case TermKind::Timestamp: return "ts";
    case TermKind::Cert: return "cert";
    case TermKind::Key: return "key";
    case TermKind::AuthKey: return "ak";
    case TermKind::MacId: return "mac";
    case TermKind::Bcid: return "bcid";
    case TermKind::Capabilities: return "caps";
    case TermKind::SaidList: return "saids";
    case TermKind::Lifetime: return "life";
    case TermKind::SeqNo: return "seq";
    case TermKind::Enc: return "enc";
    case TermKind::Sig: return "sig";
    case TermKind::Tuple: return "tuple";
  }
  return "?";
}

Term Term::atom(std::string label) {
  Term t(TermKind::Atom);
  t.label_ = std::move(label);
  return t;
}

Term Term::nonce(std::uint64_t id) {
  Term t(TermKind::Nonce);
  t.value_ = id;
  return t;
}

Term Term::timestamp(Timestamp ts) {
  Term t(TermKind::Timestamp);
  t.value_ = static_cast<std::uint64_t>(ts);
  return t;
}

Term Term::cert(NodeId subject) {
  Term t(TermKind::Cert);
  t.key_ = public_key(std::move(subject));
  return t;
}

Term Term::key(KeyRef k) {
  Term t(TermKind::Key);
  t.key_ = std::move(k);
  return t;
}

Term Term::auth_key(std::string id) {
  Term t(TermKind::AuthKey);
  t.label_ = std::move(id);
  return t;
}

Term Term::mac(std::uint64_t addr) {
  Term t(TermKind::MacId);
  t.value_ = addr & 0xFFFF'FFFF'FFFFull;
  return t;
}

Term Term::bcid(std::uint16_t code) {
  Term t(TermKind::Bcid);
  t.value_ = code;
  return t;
}

Term Term::capabilities(std::uint32_t bits) {
  Term t(TermKind::Capabilities);
  t.value_ = bits;
  return t;
}

Term Term::said_list(std::vector<std::uint16_t> saids) {
  Term t(TermKind::SaidList);
  t.saids_ = std::move(saids);
  return t;
}

Term Term::lifetime(std::uint32_t seconds) {
  Term t(TermKind::Lifetime);
  t.value_ = seconds;
  return t;
}

Term Term::seq_no(std::uint8_t n) {
  Term t(TermKind::SeqNo);
  t.value_ = n;
  return t;
}

Term Term::enc(KeyRef k, Term body) {
  Term t(TermKind::Enc);
  t.key_ = std::move(k);
  t.children_.push_back(std::move(body));
  return t;
}

Term Term::sig(KeyRef k, Term body) {
  Term t(TermKind::Sig);
  t.key_ = std::move(k);
  t.children_.push_back(std::move(body));
  return t;
}

Term Term::tuple(std::vector<Term> parts) {
  Term t(TermKind::Tuple);
  t.children_ = std::move(parts);
  return t;
}

const Term& Term::body() const {
  if (kind_ != TermKind::Enc && kind_ != TermKind::Sig)
    throw TermError(fmt::format("{} term has no body", to_string(kind_)));
  return children_.front();
}

bool operator==(const Term& a, const Term& b) {
  return a.kind_ == b.kind_ && a.value_ == b.value_ && a.label_ == b.label_ &&
         a.key_ == b.key_ && a.saids_ == b.saids_ && a.children_ == b.children_;
}

std::strong_ordering operator<=>(const Term& a, const Term& b) {
  if (auto c = a.kind_ <=> b.kind_; c != 0) return c;
  if (auto c = a.value_ <=> b.value_; c != 0) return c;
  if (auto c = a.label_ <=> b.label_; c != 0) return c;
  if (auto c = a.key_ <=> b.key_; c != 0) return c;
  if (auto c = a.saids_ <=> b.saids_; c != 0) return c;
  return std::lexicographical_compare_three_way(a.children_.begin(), a.children_.end(),
                                                b.children_.begin(), b.children_.end());
}

SizeModel SizeModel::uniform(std::size_t bytes) {
  SizeModel m;
  for (auto* f : {&m.atom, &m.nonce, &m.timestamp, &m.cert, &m.asymmetric_key, &m.symmetric_key,
                  &m.auth_key, &m.mac, &m.bcid, &m.capabilities, &m.said_entry, &m.lifetime,
                  &m.seq_no, &m.signature, &m.public_key_block, &m.symmetric_block})
    *f = bytes;
  return m;
}

void validate(const Term& t) {
  switch (t.kind()) {
    case TermKind::Sig:
      if (t.key_ref().kind != KeyKind::Private)
        throw TermError("signature key must be private: " + to_string(t));
      validate(t.body());
      break;
    case TermKind::Enc:
      if (t.key_ref().kind == KeyKind::Private)
        throw TermError("encryption key must be public or symmetric: " + to_string(t));
      validate(t.body());
      break;
    case TermKind::Tuple:
      for (const auto& p : t.parts()) validate(p);
      break;
    default:
      break;
  }
}

bool well_formed(const Term& t) noexcept {
  try {
    validate(t);
    return true;
  } catch (const TermError&) {
    return false;
  }
}

namespace {

std::size_t round_up(std::size_t n, std::size_t block) {
  if (block == 0) return n;
  const std::size_t blocks = std::max<std::size_t>(1, (n + block - 1) / block);
  return blocks * block;
}

}  // namespace

std::size_t encode_size(const Term& t, const SizeModel& m) {
  switch (t.kind()) {
    case TermKind::Atom: return m.atom;
    case TermKind::Nonce: return m.nonce;
    case TermKind::Timestamp: return m.timestamp;
    case TermKind::Cert: return m.cert;
    case TermKind::Key:
      return t.key_ref().kind == KeyKind::Symmetric ? m.symmetric_key : m.asymmetric_key;
    case TermKind::AuthKey: return m.auth_key;
    case TermKind::MacId: return m.mac;
    case TermKind::Bcid: return m.bcid;
    case TermKind::Capabilities: return m.capabilities;
    case TermKind::SaidList: return m.said_entry * t.saids().size();
    case TermKind::Lifetime: return m.lifetime;
    case TermKind::SeqNo: return m.seq_no;
    case TermKind::Sig:
      if (t.key_ref().kind != KeyKind::Private)
        throw TermError("signature key must be private: " + to_string(t));
      validate(t.body());
      return m.signature;
    case TermKind::Enc: {
      if (t.key_ref().kind == KeyKind::Private)
        throw TermError("encryption key must be public or symmetric: " + to_string(t));
      const std::size_t inner = encode_size(t.body(), m);
      return round_up(inner, t.key_ref().kind == KeyKind::Symmetric ? m.symmetric_block
                                                                    : m.public_key_block);
    }
    case TermKind::Tuple: {
      std::size_t total = 0;
      for (const auto& p : t.parts()) total += encode_size(p, m);
      return total;
    }
  }
  return 0;
}

std::optional<Term> sym_decrypt(const Term& t, const KeyRef& k) {
  if (!t.is(TermKind::Enc)) return std::nullopt;
  if (inverse(t.key_ref()) != k) return std::nullopt;
  return t.body();
}

bool verify_sig(const Term& t, const NodeId& signer) {
  return t.is(TermKind::Sig) && t.key_ref() == private_key(signer);
}

namespace {

const char* key_prefix(KeyKind k) {
  switch (k) {
    case KeyKind::Public: return "pub";
    case KeyKind::Private: return "priv";
    case KeyKind::Symmetric: return "sym";
  }
  return "?";
}

void write(const Term& t, std::string& out) {
  switch (t.kind()) {
    case TermKind::Atom: out += fmt::format("atom({})", t.label()); break;
    case TermKind::Nonce: out += fmt::format("nonce({:016x})", t.value()); break;
    case TermKind::Timestamp: out += fmt::format("ts({})", t.time()); break;
    case TermKind::Cert: out += fmt::format("cert({})", t.subject().name); break;
    case TermKind::Key:
      out += fmt::format("key({}:{})", key_prefix(t.key_ref().kind), t.key_ref().owner.name);
      break;
    case TermKind::AuthKey: out += fmt::format("ak({})", t.label()); break;
    case TermKind::MacId: out += fmt::format("mac({:012x})", t.value()); break;
    case TermKind::Bcid: out += fmt::format("bcid({})", t.value()); break;
    case TermKind::Capabilities: out += fmt::format("caps({:08x})", t.value()); break;
    case TermKind::SaidList: {
      out += "saids(";
      for (std::size_t i = 0; i < t.saids().size(); ++i) {
        if (i) out += ',';
        out += std::to_string(t.saids()[i]);
      }
      out += ')';
      break;
    }
    case TermKind::Lifetime: out += fmt::format("life({})", t.value()); break;
    case TermKind::SeqNo: out += fmt::format("seq({})", t.value()); break;
    case TermKind::Enc:
    case TermKind::Sig:
      out += fmt::format("{}({}:{},", to_string(t.kind()), key_prefix(t.key_ref().kind),
                         t.key_ref().owner.name);
      write(t.body(), out);
      out += ')';
      break;
    case TermKind::Tuple:
      out += '{';
      for (std::size_t i = 0; i < t.parts().size(); ++i) {
        if (i) out += ',';
        write(t.parts()[i], out);
      }
      out += '}';
      break;
  }
}

}  // namespace

std::string to_string(const Term& t) {
  std::string out;
  write(t, out);
  return out;
}

void collect_subterms(const Term& t, std::vector<const Term*>& out) {
  out.push_back(&t);
  for (const auto& c : t.parts()) collect_subterms(c, out);
}

}  // namespace bwa
