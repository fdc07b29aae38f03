#pragma once

#include <map>
#include <string>
#include <vector>

#include "bwa/netsim.hpp"
#include "bwa/scenario.hpp"

namespace bwa {

enum class Verdict { Success, PartialSuccess, Failed, NotApplicable, Error };

std::string_view to_string(Verdict v);
std::optional<Verdict> parse_verdict(std::string_view s);

/// Raw material for auditing what the adversary did.
struct Evidence {
  struct Sent {
    FrameId id;
    bool injected;
    Term body;
  };
  /// Every frame put on the air, in transmission order.
  std::vector<Sent> frames;
  std::vector<NodeId> adversary_nodes;
  std::vector<Term> generated;
  /// Final intruder knowledge (analysis closure).
  std::vector<Term> knowledge;
};

struct AttackOutcome {
  AttackKind attack = AttackKind::WaterTorture;
  ProtocolId protocol = ProtocolId::PKMv1;
  Verdict verdict = Verdict::Error;
  std::string reason;
  /// Headline number for the report row.
  std::string metric_name;
  double metric_value = 0.0;
  std::map<std::string, double> metrics;
  std::string trace;
  Evidence evidence;
  /// Honest secrets that ended up in intruder knowledge.
  std::vector<std::string> leaks;
};

AttackOutcome run_attack(AttackKind a, ProtocolId p, const ScenarioConfig& cfg);

/// Private keys of honest nodes and AKs issued to honest subscribers that the
/// adversary knows at the end of the run.
std::vector<std::string> find_secrecy_leaks(const SimWorld& w);

/// Evidence snapshot of a finished world.
Evidence collect_evidence(const SimWorld& w, const std::vector<NodeId>& adversary_nodes);

}  // namespace bwa
