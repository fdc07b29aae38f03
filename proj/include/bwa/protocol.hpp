#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bwa/freshness.hpp"
#include "bwa/term.hpp"

namespace bwa {

enum class ProtocolId { PKMv1, PKMv2, TSA, HA, ISNAP };

inline constexpr std::array<ProtocolId, 5> kAllProtocols = {
    ProtocolId::PKMv1, ProtocolId::PKMv2, ProtocolId::TSA, ProtocolId::HA, ProtocolId::ISNAP};

std::string_view to_string(ProtocolId p);
std::optional<ProtocolId> parse_protocol(std::string_view s);

/// Messages carry timestamps (at least on some steps).
bool uses_timestamps(ProtocolId p);
/// Freshness is tracked in a per-node timestamp table.
bool uses_table(ProtocolId p);
/// Freshness is checked against a validation window.
bool uses_window(ProtocolId p);
/// The SS verifies a BS signature before accepting the AK.
bool mutual_auth(ProtocolId p);
/// MAC identities are registered per join (mobile network) rather than
/// provisioned permanently (fixed network).
bool mobile_network(ProtocolId p);
/// Number of messages in one complete handshake.
int handshake_length(ProtocolId p);

enum class Role { SS, BS };

const char* to_string(Role r);

enum class RejectReason {
  BadSignature,
  NonceMismatch,
  ReplayDetectedTable,
  StaleTimestamp,
  DuplicateInWindow,
  Malformed,
  WrongPhase,
};

const char* to_string(RejectReason r);

enum class Status { InProgress, Authorized, Rejected };

struct Outcome {
  Status status = Status::InProgress;
  std::optional<RejectReason> reason;

  bool in_progress() const { return status == Status::InProgress; }
  bool authorized() const { return status == Status::Authorized; }
  bool rejected() const { return status == Status::Rejected; }
};

std::string to_string(const Outcome& o);

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Material and parameters a session needs to start.
struct SessionConfig {
  /// SS: the BS it expects to authenticate. Unused by a BS.
  NodeId peer;
  std::optional<std::uint64_t> mac;
  std::optional<std::uint16_t> bcid;
  std::uint32_t capabilities = 0x0000'0001;
  /// This session's own fresh nonce (N_SS or N_BS).
  std::optional<std::uint64_t> nonce;
  /// BS: the AK handed out by this cycle.
  std::optional<std::string> ak_id;
  std::uint32_t ak_lifetime = 86400;
  std::uint8_t seq_no = 0;
  std::vector<std::uint16_t> saids = {0x0101, 0x0102};
  /// TSA/HA: accepted |now - ts| in seconds.
  Timestamp freshness_tolerance = 10;
  std::optional<TimestampTable> table;
  std::optional<ValidationWindow> window;
  /// Test hook: disables every freshness check (tables, windows, tolerance).
  bool skip_freshness = false;
};

/// One party's view of one handshake.
struct SessionState {
  ProtocolId protocol = ProtocolId::PKMv1;
  Role role = Role::SS;
  int phase = 0;
  NodeId identity;
  NodeId peer;
  std::optional<std::uint64_t> mac;
  std::optional<std::uint16_t> bcid;
  std::uint32_t capabilities = 0;
  std::optional<std::uint64_t> my_nonce;
  std::optional<std::uint64_t> peer_nonce;
  std::optional<std::string> ak;
  std::uint32_t lifetime = 0;
  std::uint8_t seq_no = 0;
  std::vector<std::uint16_t> saids;
  Timestamp freshness_tolerance = 10;
  std::optional<TimestampTable> table;
  std::optional<ValidationWindow> window;
  bool skip_freshness = false;
  /// Set once the SS has checked a BS signature.
  bool peer_signature_verified = false;
  /// BS: MAC the peer registered with (mobile protocols).
  std::optional<std::uint64_t> peer_mac;
  Outcome outcome;
  /// Messages produced at initialization, not yet sent.
  std::vector<Term> outbox;
};

SessionState init_session(ProtocolId p, Role role, const NodeId& identity,
                          const SessionConfig& cfg, Timestamp now = 0);

struct StepResult {
  SessionState state;
  std::vector<Term> outgoing;
};

/// Pure transition. Silence, or a call on a finished session, is a no-op.
StepResult step(const SessionState& s, const std::optional<Term>& incoming, Timestamp now);

/// True if `t` has the shape of this protocol's handshake trigger.
bool is_trigger(ProtocolId p, const Term& t);

/// BS-side cycle phases, exposed for routing and tests.
namespace phase {
inline constexpr int kAwaitTrigger = 0;
inline constexpr int kAwaitRequest = 1;
inline constexpr int kAwaitAck = 2;
inline constexpr int kDone = 3;
/// SS after sending its opening messages.
inline constexpr int kAwaitReply = 1;
}  // namespace phase

}  // namespace bwa
