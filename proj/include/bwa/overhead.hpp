#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bwa/protocol.hpp"
#include "bwa/term.hpp"

namespace bwa {

struct StorageParams {
  double psi = 100;  // validated messages per day
  std::uint64_t delta = 4;  // bytes per timestamp
  std::uint64_t rho = 15;   // retention days
  std::uint64_t fleet = 64;
};

struct StorageOverhead {
  double chi_bytes = 0;
  double fleet_bytes = 0;
};

/// chi = psi * delta * rho per node, and chi * fleet for a BS.
StorageOverhead storage_overhead(const StorageParams& p);

struct ComputeParams {
  double sigma = 1e9;  // cycles per second
  double flops_per_compare = 2;
  /// Stored timestamps to scan; psi * rho when unset.
  std::optional<double> entries;
  /// Exponent for the literal 2^lambda reading.
  std::optional<double> literal_lambda;
};

struct ValidationCost {
  double flops_linear = 0;
  double seconds_linear = 0;
  std::optional<double> flops_literal;
  std::optional<double> seconds_literal;
  /// 2^lambda did not fit in a double.
  bool literal_saturated = false;
};

ValidationCost validation_cost(const ComputeParams& c, const StorageParams& s = {});

struct ProtocolOverhead {
  ProtocolId protocol;
  std::size_t handshake_bytes = 0;
  /// Per-message sizes in handshake order.
  std::vector<std::size_t> message_bytes;
  double chi_bytes = 0;
  double fleet_bytes = 0;
  double flops_linear = 0;
  double seconds_linear = 0;
};

struct OrderingCheck {
  std::string claim;
  bool holds = false;
};

struct OverheadReport {
  std::vector<ProtocolOverhead> rows;
  std::vector<OrderingCheck> orderings;
  ValidationCost validation;
  StorageOverhead storage;

  const ProtocolOverhead& row(ProtocolId p) const;
  bool all_orderings_hold() const;
};

/// Bytes of every message in one honest handshake, obtained by running the
/// two state machines against each other.
std::vector<std::size_t> handshake_message_bytes(ProtocolId p, const SizeModel& m);

/// Timestamp-table storage and scan cost apply to table-keeping protocols;
/// the others report zero.
OverheadReport transmission_report(const SizeModel& m, const StorageParams& s = {},
                                   const ComputeParams& c = {});

nlohmann::json to_json(const OverheadReport& r);
std::string to_csv(const OverheadReport& r);

}  // namespace bwa
