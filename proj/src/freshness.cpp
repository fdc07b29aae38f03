#include "bwa/freshness.hpp"

#include <cstdlib>
#include <stdexcept>

namespace bwa {

TimestampTable::TimestampTable(int retention_days, int width_bytes)
    : retention_days_(retention_days), width_(width_bytes) {
  if (retention_days < 0 || width_bytes < 0)
    throw std::invalid_argument("timestamp table parameters must be >= 0");
}

bool TimestampTable::contains(const NodeId& sender, int step, Timestamp ts) const {
  return records_.contains(Record{sender, step, ts});
}

void TimestampTable::record(const NodeId& sender, int step, Timestamp ts) {
  records_.insert(Record{sender, step, ts});
}

void TimestampTable::prune(Timestamp now) {
  const Timestamp keep = retention_seconds();
  std::erase_if(records_, [&](const Record& r) { return now - r.ts >= keep; });
}

std::size_t table_memory_bytes(TimestampTable t, Timestamp now) {
  t.prune(now);
  return t.memory_bytes();
}

const char* to_string(WindowVerdict v) {
  switch (v) {
    case WindowVerdict::Accept: return "Accept";
    case WindowVerdict::StaleTimestamp: return "StaleTimestamp";
    case WindowVerdict::DuplicateInWindow: return "DuplicateInWindow";
  }
  return "?";
}

void ValidationWindow::expire(Timestamp now) {
  std::erase_if(cache, [&](const auto& e) { return now - e.second > width; });
}

WindowVerdict validate_window(const NodeId& sender, Timestamp ts, Timestamp now,
                              ValidationWindow& w) {
  w.expire(now);
  if (std::llabs(now - ts) > w.width) return WindowVerdict::StaleTimestamp;
  if (!w.cache.emplace(sender, ts).second) return WindowVerdict::DuplicateInWindow;
  return WindowVerdict::Accept;
}

}  // namespace bwa
