#pragma once

#include <array>
#include <string>
#include <vector>

#include <json.hpp>

#include "bwa/attacks.hpp"
#include "bwa/overhead.hpp"
#include "bwa/scenario.hpp"

namespace bwa {

struct ExpectedCell {
  AttackKind attack;
  ProtocolId protocol;
  Verdict verdict;
};

/// Reference verdict for every attack/protocol pair under the default scenario.
extern const std::array<ExpectedCell, 35> kExpectedMatrix;

Verdict expected_verdict(AttackKind a, ProtocolId p);

struct AttackMatrix {
  /// Attack-major, in config order.
  std::vector<AttackOutcome> cells;

  const AttackOutcome& at(AttackKind a, ProtocolId p) const;
};

AttackMatrix run_matrix(const ScenarioConfig& cfg);

/// Cells whose verdict differs from kExpectedMatrix, one line each.
std::vector<std::string> mismatches(const AttackMatrix& m);

nlohmann::json to_json(const AttackMatrix& m);
std::string to_csv(const AttackMatrix& m);
/// Every cell's trace under a header line.
std::string combined_trace(const AttackMatrix& m);

OverheadReport overheads_for(const ScenarioConfig& cfg, const SizeModel& sizes = {});

/// Writes matrix.json, matrix.csv, overheads.json, overheads.csv and
/// trace.log into `dir`, creating it if needed.
void emit_reports(const AttackMatrix& m, const OverheadReport& o, const std::string& dir);

void write_file(const std::string& path, const std::string& content);

}  // namespace bwa
