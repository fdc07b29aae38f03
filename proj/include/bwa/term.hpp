#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bwa/types.hpp"

namespace bwa {

enum class KeyKind : std::uint8_t { Public, Private, Symmetric };

struct KeyRef {
  KeyKind kind = KeyKind::Public;
  NodeId owner;

  friend auto operator<=>(const KeyRef&, const KeyRef&) = default;
  friend bool operator==(const KeyRef&, const KeyRef&) = default;
};

inline KeyRef public_key(NodeId owner) { return {KeyKind::Public, std::move(owner)}; }
inline KeyRef private_key(NodeId owner) { return {KeyKind::Private, std::move(owner)}; }
inline KeyRef symmetric_key(NodeId owner) { return {KeyKind::Symmetric, std::move(owner)}; }

/// Private <-> Public of the same owner; a symmetric key is its own inverse.
KeyRef inverse(const KeyRef& k);

enum class TermKind : std::uint8_t {
  Atom,
  Nonce,
  Timestamp,
  Cert,
  Key,
  AuthKey,
  MacId,
  Bcid,
  Capabilities,
  SaidList,
  Lifetime,
  SeqNo,
  Enc,
  Sig,
  Tuple,
};

const char* to_string(TermKind k);

/// Thrown when a term violates the key-kind constraints of Enc/Sig.
class TermError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Symbolic message term. Values are immutable once built; equality and
/// ordering are structural.
class Term {
 public:
  static Term atom(std::string label);
  static Term nonce(std::uint64_t id);
  static Term timestamp(Timestamp t);
  /// Certificate binding `subject` to its public key.
  static Term cert(NodeId subject);
  static Term key(KeyRef k);
  static Term auth_key(std::string id);
  static Term mac(std::uint64_t addr);
  static Term bcid(std::uint16_t code);
  static Term capabilities(std::uint32_t bits);
  static Term said_list(std::vector<std::uint16_t> saids);
  static Term lifetime(std::uint32_t seconds);
  static Term seq_no(std::uint8_t n);
  static Term enc(KeyRef k, Term body);
  static Term sig(KeyRef k, Term body);
  static Term tuple(std::vector<Term> parts);

  TermKind kind() const { return kind_; }
  bool is(TermKind k) const { return kind_ == k; }

  /// Numeric payload (nonce id, timestamp, MAC, BCID, ...).
  std::uint64_t value() const { return value_; }
  Timestamp time() const { return static_cast<Timestamp>(value_); }
  const std::string& label() const { return label_; }
  /// Key of Key/Enc/Sig; the certified public key of Cert.
  const KeyRef& key_ref() const { return key_; }
  const NodeId& subject() const { return key_.owner; }
  /// Body of Enc/Sig.
  const Term& body() const;
  const std::vector<Term>& parts() const { return children_; }
  std::span<const std::uint16_t> saids() const { return saids_; }

  friend bool operator==(const Term& a, const Term& b);
  friend std::strong_ordering operator<=>(const Term& a, const Term& b);

 private:
  explicit Term(TermKind k) : kind_(k) {}

  TermKind kind_;
  std::uint64_t value_ = 0;
  std::string label_;
  KeyRef key_;
  std::vector<Term> children_;
  std::vector<std::uint16_t> saids_;
};

/// Wire byte widths per term kind.
struct SizeModel {
  std::size_t atom = 4;
  std::size_t nonce = 8;
  std::size_t timestamp = 4;
  std::size_t cert = 512;
  std::size_t asymmetric_key = 128;
  std::size_t symmetric_key = 16;
  std::size_t auth_key = 20;
  std::size_t mac = 6;
  std::size_t bcid = 2;
  std::size_t capabilities = 4;
  std::size_t said_entry = 2;
  std::size_t lifetime = 4;
  std::size_t seq_no = 1;
  std::size_t signature = 128;
  std::size_t public_key_block = 128;
  std::size_t symmetric_block = 16;

  /// Every field set to `bytes`.
  static SizeModel uniform(std::size_t bytes);
};

/// Throws TermError unless every Sig key is Private and every Enc key is
/// Public or Symmetric.
void validate(const Term& t);
bool well_formed(const Term& t) noexcept;

std::size_t encode_size(const Term& t, const SizeModel& m = {});

std::optional<Term> sym_decrypt(const Term& t, const KeyRef& k);

/// True iff `t` is a signature made with `signer`'s private key.
bool verify_sig(const Term& t, const NodeId& signer);

/// Canonical one-line text form.
std::string to_string(const Term& t);

/// Collects every subterm (including `t`) in pre-order.
void collect_subterms(const Term& t, std::vector<const Term*>& out);

}  // namespace bwa
