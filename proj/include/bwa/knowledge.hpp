#pragma once

#include <set>
#include <stdexcept>
#include <vector>

#include "bwa/term.hpp"

namespace bwa {

/// Raised when the adversary tries to send a term it cannot build.
class DolevYaoViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Symbolic intruder knowledge.
///
/// `terms()` is the analysis closure of everything observed: tuples are split,
/// signatures reveal their body, certificates reveal the public key, and
/// ciphertexts open once the inverse key is known. Synthesis (tupling,
/// encrypting, signing, and guessable constants) is answered lazily by
/// `derivable()` rather than materialized.
class Knowledge {
 public:
  /// Adds a term and recomputes the closure.
  void add(const Term& t);
  void add_all(const std::vector<Term>& ts);

  bool contains(const Term& t) const { return known_.contains(t); }
  bool derivable(const Term& t) const;
  /// Throws DolevYaoViolation unless derivable.
  void require_derivable(const Term& t) const;

  const std::set<Term>& terms() const { return known_; }
  std::size_t size() const { return known_.size(); }
  /// Ciphertexts seen whose inverse key is not known.
  const std::set<Term>& sealed() const { return sealed_; }

  bool knows_key(const KeyRef& k) const { return known_.contains(Term::key(k)); }

 private:
  void analyse(std::vector<Term> work);

  std::set<Term> known_;
  std::set<Term> sealed_;
};

Knowledge observe(Knowledge k, const Term& msg);

/// Knowledge of adversary `self`: its own key pair and certificate.
Knowledge initial_knowledge(const NodeId& self);

/// Values an intruder can produce without observing them.
bool is_public_constant(const Term& t);

}  // namespace bwa
