#pragma once

#include <cstddef>
#include <set>
#include <tuple>

#include "bwa/types.hpp"

namespace bwa {

/// Per-node record of every timestamp received, as kept by the TSA and HA
/// models. Records younger than the retention period are live.
class TimestampTable {
 public:
  struct Record {
    NodeId sender;
    int step = 0;
    Timestamp ts = 0;

    friend auto operator<=>(const Record&, const Record&) = default;
    friend bool operator==(const Record&, const Record&) = default;
  };

  TimestampTable(int retention_days = 15, int width_bytes = 4);

  bool contains(const NodeId& sender, int step, Timestamp ts) const;
  void record(const NodeId& sender, int step, Timestamp ts);
  /// Drops records with now - ts >= retention.
  void prune(Timestamp now);

  std::size_t size() const { return records_.size(); }
  std::size_t memory_bytes() const { return records_.size() * static_cast<std::size_t>(width_); }
  int retention_days() const { return retention_days_; }
  int width_bytes() const { return width_; }
  Timestamp retention_seconds() const { return Timestamp{retention_days_} * kSecondsPerDay; }

 private:
  int retention_days_;
  int width_;
  std::set<Record> records_;
};

/// delta x live record count, after pruning at `now`.
std::size_t table_memory_bytes(TimestampTable t, Timestamp now);

enum class WindowVerdict { Accept, StaleTimestamp, DuplicateInWindow };

const char* to_string(WindowVerdict v);

/// Window-based freshness: a timestamp is valid iff |now - ts| <= width. A
/// short-lived cache of accepted (sender, ts) pairs catches duplicates that
/// are still inside the window.
struct ValidationWindow {
  Timestamp width = 10;
  std::set<std::pair<NodeId, Timestamp>> cache;

  /// Removes entries whose age exceeds the width.
  void expire(Timestamp now);
};

WindowVerdict validate_window(const NodeId& sender, Timestamp ts, Timestamp now,
                              ValidationWindow& w);

}  // namespace bwa
