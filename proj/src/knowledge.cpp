#include "bwa/knowledge.hpp"

#include <algorithm>

namespace bwa {

bool is_public_constant(const Term& t) {
  switch (t.kind()) {
    case TermKind::Atom:
    case TermKind::Timestamp:
    case TermKind::Bcid:
    case TermKind::Capabilities:
    case TermKind::SaidList:
    case TermKind::Lifetime:
    case TermKind::SeqNo:
      return true;
    default:
      return false;
  }
}

void Knowledge::add(const Term& t) { analyse({t}); }

void Knowledge::add_all(const std::vector<Term>& ts) { analyse(ts); }

void Knowledge::analyse(std::vector<Term> work) {
  while (!work.empty()) {
    Term t = std::move(work.back());
    work.pop_back();
    if (!known_.insert(t).second) continue;

    switch (t.kind()) {
      case TermKind::Tuple:
        for (const auto& p : t.parts()) work.push_back(p);
        break;
      case TermKind::Sig:
        work.push_back(t.body());
        break;
      case TermKind::Cert:
        work.push_back(Term::key(t.key_ref()));
        break;
      case TermKind::Enc:
        if (knows_key(inverse(t.key_ref())))
          work.push_back(t.body());
        else
          sealed_.insert(t);
        break;
      case TermKind::Key: {
        // A new key may open ciphertexts parked earlier.
        const KeyRef opens = inverse(t.key_ref());
        for (auto it = sealed_.begin(); it != sealed_.end();) {
          if (it->key_ref() == opens) {
            work.push_back(it->body());
            it = sealed_.erase(it);
          } else {
            ++it;
          }
        }
        break;
      }
      default:
        break;
    }
  }
}

bool Knowledge::derivable(const Term& t) const {
  if (known_.contains(t) || is_public_constant(t)) return true;
  switch (t.kind()) {
    case TermKind::Tuple:
      return std::all_of(t.parts().begin(), t.parts().end(),
                         [&](const Term& p) { return derivable(p); });
    case TermKind::Enc:
    case TermKind::Sig:
      return well_formed(t) && knows_key(t.key_ref()) && derivable(t.body());
    default:
      return false;
  }
}

void Knowledge::require_derivable(const Term& t) const {
  if (!derivable(t)) throw DolevYaoViolation("adversary cannot derive " + to_string(t));
}

Knowledge observe(Knowledge k, const Term& msg) {
  k.add(msg);
  return k;
}

Knowledge initial_knowledge(const NodeId& self) {
  Knowledge k;
  k.add_all({Term::key(private_key(self)), Term::key(public_key(self)), Term::cert(self)});
  return k;
}

}  // namespace bwa
