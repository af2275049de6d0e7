#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace skipsim {

// Record kinds in their canonical intra-slot order.
enum class EventKind : uint8_t { ChurnJoin = 0, ChurnLeave = 1, Query = 2, TxbCreate = 3 };

struct EventRecord {
  uint32_t slot = 0;
  EventKind kind = EventKind::ChurnJoin;
  uint32_t node = 0;     // joining/leaving node, query initiator, or object owner
  uint64_t payload = 0;  // query target or object numerical id; 0 for churn

  bool operator==(const EventRecord&) const = default;
};

// Append-only schedule of everything that happens during a run, ordered by
// (slot, kind, node, payload). The same log replayed under different
// protocol-level settings must yield the same byte serialization.
class EventLog {
 public:
  explicit EventLog(uint32_t lifetime = 0) : lifetime_(lifetime) {}

  uint32_t lifetime() const { return lifetime_; }
  size_t size() const { return records_.size(); }
  const std::vector<EventRecord>& records() const { return records_; }

  // Records must arrive in canonical order; out-of-order appends throw.
  void append(const EventRecord& r);

  // Call once after the final append to enable records_for().
  void finalize();
  std::span<const EventRecord> records_for(uint32_t slot) const;

  std::string serialize() const;
  static EventLog parse(const std::string& text, uint32_t lifetime);

  // Hash over only the churn and query records, and over everything.
  uint64_t churn_query_hash() const;
  uint64_t full_hash() const;

  size_t footprint_bytes() const;

 private:
  uint32_t lifetime_;
  std::vector<EventRecord> records_;
  std::vector<size_t> slot_offsets_;  // lifetime + 1 entries once finalized
};

}  // namespace skipsim
