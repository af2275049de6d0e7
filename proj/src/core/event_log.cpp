#include "core/event_log.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <tuple>

#include "core/errors.hpp"
#include "core/hash.hpp"

namespace skipsim {

namespace {

const char* kind_name(EventKind k) {
  switch (k) {
    case EventKind::ChurnJoin: return "CHURN_JOIN";
    case EventKind::ChurnLeave: return "CHURN_LEAVE";
    case EventKind::Query: return "QUERY";
    case EventKind::TxbCreate: return "TXB_CREATE";
  }
  throw StructuralError("unknown event kind");
}

EventKind kind_from_name(const std::string& s, size_t line_no) {
  if (s == "CHURN_JOIN") return EventKind::ChurnJoin;
  if (s == "CHURN_LEAVE") return EventKind::ChurnLeave;
  if (s == "QUERY") return EventKind::Query;
  if (s == "TXB_CREATE") return EventKind::TxbCreate;
  throw CacheError("events line " + std::to_string(line_no) + ": unknown kind '" + s + "'");
}

auto order_key(const EventRecord& r) {
  return std::tuple(r.slot, static_cast<uint8_t>(r.kind), r.node, r.payload);
}

}  // namespace

void EventLog::append(const EventRecord& r) {
  if (r.slot >= lifetime_)
    throw StructuralError("event slot " + std::to_string(r.slot) + " outside lifetime");
  if (!records_.empty() && order_key(r) < order_key(records_.back()))
    throw StructuralError("event appended out of canonical order");
  slot_offsets_.clear();
  records_.push_back(r);
}

void EventLog::finalize() {
  slot_offsets_.assign(static_cast<size_t>(lifetime_) + 1, 0);
  size_t i = 0;
  for (uint32_t s = 0; s < lifetime_; ++s) {
    slot_offsets_[s] = i;
    while (i < records_.size() && records_[i].slot == s) ++i;
  }
  slot_offsets_[lifetime_] = records_.size();
}

std::span<const EventRecord> EventLog::records_for(uint32_t slot) const {
  if (slot_offsets_.size() != static_cast<size_t>(lifetime_) + 1)
    throw StructuralError("records_for called before finalize");
  if (slot >= lifetime_) throw std::out_of_range("slot outside lifetime");
  return {records_.data() + slot_offsets_[slot], slot_offsets_[slot + 1] - slot_offsets_[slot]};
}

std::string EventLog::serialize() const {
  std::string out = "slot\tkind\tnode\tpayload\n";
  char buf[96];
  for (const EventRecord& r : records_) {
    if (r.kind == EventKind::Query) {
      snprintf(buf, sizeof buf, "%u\t%s\t%u\tNUM_ID:%" PRIu64 "\n", r.slot, kind_name(r.kind),
               r.node, r.payload);
    } else if (r.kind == EventKind::TxbCreate) {
      snprintf(buf, sizeof buf, "%u\t%s\t%u\t%" PRIu64 "\n", r.slot, kind_name(r.kind), r.node,
               r.payload);
    } else {
      snprintf(buf, sizeof buf, "%u\t%s\t%u\t-\n", r.slot, kind_name(r.kind), r.node);
    }
    out += buf;
  }
  return out;
}

EventLog EventLog::parse(const std::string& text, uint32_t lifetime) {
  EventLog log(lifetime);
  size_t pos = 0, line_no = 0;
  bool saw_header = false;
  while (pos <= text.size()) {
    size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    std::string line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line.empty()) {
      if (pos > text.size()) break;
      throw CacheError("events line " + std::to_string(line_no) + ": unexpected blank line");
    }
    if (!saw_header) {
      if (line != "slot\tkind\tnode\tpayload")
        throw CacheError("events line 1: bad header '" + line + "'");
      saw_header = true;
      continue;
    }
    std::string fields[4];
    size_t f = 0, start = 0;
    for (size_t i = 0; i <= line.size(); ++i) {
      if (i == line.size() || line[i] == '\t') {
        if (f >= 4) throw CacheError("events line " + std::to_string(line_no) + ": too many fields");
        fields[f++] = line.substr(start, i - start);
        start = i + 1;
      }
    }
    if (f != 4) throw CacheError("events line " + std::to_string(line_no) + ": expected 4 fields");

    EventRecord r;
    try {
      r.slot = static_cast<uint32_t>(std::stoul(fields[0]));
      r.kind = kind_from_name(fields[1], line_no);
      r.node = static_cast<uint32_t>(std::stoul(fields[2]));
      if (r.kind == EventKind::Query) {
        if (fields[3].rfind("NUM_ID:", 0) != 0)
          throw CacheError("events line " + std::to_string(line_no) + ": query payload must be NUM_ID:<id>");
        r.payload = std::stoull(fields[3].substr(7));
      } else if (r.kind == EventKind::TxbCreate) {
        r.payload = std::stoull(fields[3]);
      } else if (fields[3] != "-") {
        throw CacheError("events line " + std::to_string(line_no) + ": churn payload must be '-'");
      }
    } catch (const CacheError&) {
      throw;
    } catch (const std::exception&) {
      throw CacheError("events line " + std::to_string(line_no) + ": malformed number");
    }
    log.append(r);  // enforces canonical order and slot bounds
    if (pos > text.size()) break;
  }
  if (!saw_header) throw CacheError("events file is empty");
  log.finalize();
  return log;
}

uint64_t EventLog::churn_query_hash() const {
  uint64_t h = kFnvOffset;
  for (const EventRecord& r : records_) {
    if (r.kind == EventKind::TxbCreate) continue;
    uint64_t row[3] = {r.slot, static_cast<uint64_t>(r.kind), r.node};
    h = fnv1a64(row, sizeof row, h);
    if (r.kind == EventKind::Query) h = fnv1a64(&r.payload, sizeof r.payload, h);
  }
  return h;
}

uint64_t EventLog::full_hash() const {
  std::string bytes = serialize();
  return fnv1a64(bytes.data(), bytes.size());
}

size_t EventLog::footprint_bytes() const {
  return records_.capacity() * sizeof(EventRecord) + slot_offsets_.capacity() * sizeof(size_t);
}

}  // namespace skipsim
