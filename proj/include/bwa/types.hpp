#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <ostream>
#include <string>

namespace bwa {

/// Identity of a network principal (SS, BS or adversary).
struct NodeId {
  std::string name;

  NodeId() = default;
  NodeId(std::string n) : name(std::move(n)) {}
  NodeId(const char* n) : name(n) {}

  friend auto operator<=>(const NodeId&, const NodeId&) = default;
  friend bool operator==(const NodeId&, const NodeId&) = default;
};

inline std::ostream& operator<<(std::ostream& os, const NodeId& n) { return os << n.name; }

/// Node-local wall clock reading, whole epoch seconds.
using Timestamp = std::int64_t;

/// Global simulation time in milliseconds.
using SimTime = std::int64_t;

constexpr SimTime kMillisPerSecond = 1000;
constexpr std::int64_t kSecondsPerDay = 86400;

inline SimTime from_seconds(double s) { return std::llround(s * kMillisPerSecond); }

}  // namespace bwa
