#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <string>
#include <vector>

#include <json.hpp>

#include "bwa/netsim.hpp"
#include "bwa/protocol.hpp"

namespace bwa {

enum class AttackKind {
  WaterTorture,
  DoS,
  MessageReplay,
  IdentityTheft,
  Impersonation,
  Interleaving,
  SuppressReplay,
};

inline constexpr std::array<AttackKind, 7> kAllAttacks = {
    AttackKind::WaterTorture,  AttackKind::DoS,           AttackKind::MessageReplay,
    AttackKind::IdentityTheft, AttackKind::Impersonation, AttackKind::Interleaving,
    AttackKind::SuppressReplay};

std::string_view to_string(AttackKind a);
std::optional<AttackKind> parse_attack(std::string_view s);

/// Everything a matrix run depends on. Defaults reproduce the reference matrix.
struct ScenarioConfig {
  std::vector<ProtocolId> protocols{kAllProtocols.begin(), kAllProtocols.end()};
  std::vector<AttackKind> attacks{kAllAttacks.begin(), kAllAttacks.end()};
  std::uint64_t seed = 1;
  int trials = 1;

  // network
  SimTime latency_ms = 1000;
  SimTime processing_ms = 1000;
  std::size_t budget = 4;
  double cycle_timeout_s = 120;
  OverloadPolicy overload = OverloadPolicy::Drop;

  // freshness
  Timestamp window_s = 10;
  Timestamp tolerance_s = 10;
  int timestamp_width = 4;
  int retention_days = 15;
  /// ISNAP clock resync period; 0 disables resync.
  double isnap_resync_interval_s = 5;
  double resync_residual_s = 0;

  // attack knobs
  int flood_volume = 100;
  SimTime flood_interval_ms = 100;
  int dos_flood_volume = 300;
  int legit_joins = 20;
  SimTime join_interval_ms = 1500;
  double adversary_delay_s = 30;
  double receiver_lag_s = 30;
  double interleave_delay_s = 30;
  double replay_gap_s = 60;
  double water_torture_threshold = 0.5;
  double dos_threshold = 0.5;
  /// Protocols whose freshness checks are switched off (negative controls).
  std::vector<ProtocolId> weaken;

  // overhead model
  double psi = 100;
  double sigma = 1e9;
  std::uint64_t fleet = 64;

  std::string out_dir = "out";

  /// Throws ConfigError on out-of-range values.
  void validate() const;
  bool weakened(ProtocolId p) const;
  /// World settings shared by every attack run for protocol `p`.
  WorldConfig world(ProtocolId p) const;
};

/// Parses a JSON object; unknown keys and wrong types are ConfigErrors.
ScenarioConfig scenario_from_json(const nlohmann::json& j);
ScenarioConfig load_scenario(const std::string& path);
nlohmann::json to_json(const ScenarioConfig& c);

}  // namespace bwa
