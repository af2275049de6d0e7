#include "core/churn.hpp"

#include <stdexcept>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace skipsim {

ChurnPresetParams churn_preset_params(ChurnModel model) {
  switch (model) {
    case ChurnModel::FastDebian: return {12.0, 12.0, 0.5};
    case ChurnModel::SlowDebian: return {48.0, 24.0, 0.67};
    case ChurnModel::Flatout: return {160.0, 8.0, 0.95};
    case ChurnModel::None: return {0.0, 0.0, 1.0};
  }
  throw StructuralError("unknown churn model");
}

const char* churn_model_name(ChurnModel model) {
  switch (model) {
    case ChurnModel::FastDebian: return "FAST_DEBIAN";
    case ChurnModel::SlowDebian: return "SLOW_DEBIAN";
    case ChurnModel::Flatout: return "FLATOUT";
    case ChurnModel::None: return "NONE";
  }
  throw StructuralError("unknown churn model");
}

bool churn_model_from_name(std::string_view name, ChurnModel& out) {
  if (name == "FAST_DEBIAN") out = ChurnModel::FastDebian;
  else if (name == "SLOW_DEBIAN") out = ChurnModel::SlowDebian;
  else if (name == "FLATOUT") out = ChurnModel::Flatout;
  else if (name == "NONE") out = ChurnModel::None;
  else return false;
  return true;
}

ChurnTrace ChurnTrace::generate(ChurnModel model, uint32_t lifetime, uint32_t node_count,
                                Rng& rng) {
  ChurnTrace trace;
  trace.lifetime_ = lifetime;
  trace.node_count_ = node_count;

  std::vector<std::vector<std::pair<uint32_t, ChurnEventKind>>> per_node(node_count);
  const ChurnPresetParams p = churn_preset_params(model);
  for (uint32_t node = 0; node < node_count; ++node) {
    auto& events = per_node[node];
    if (model == ChurnModel::None) {
      events.emplace_back(0, ChurnEventKind::Join);
      continue;
    }
    bool online = rng.next_double() < p.initial_online_prob;
    if (online) events.emplace_back(0, ChurnEventKind::Join);
    uint64_t pos = 0;
    while (pos < lifetime) {
      pos += rng.next_geometric(online ? p.session_mean : p.downtime_mean);
      if (pos >= lifetime) break;
      online = !online;
      events.emplace_back(static_cast<uint32_t>(pos),
                          online ? ChurnEventKind::Join : ChurnEventKind::Leave);
    }
  }
  trace.index_slots(per_node);
  return trace;
}

void ChurnTrace::index_slots(
    const std::vector<std::vector<std::pair<uint32_t, ChurnEventKind>>>& per_node) {
  // Bucket counts first, then fill; node order inside a slot stays ascending
  // because nodes are visited in index order.
  std::vector<size_t> join_counts(lifetime_, 0), leave_counts(lifetime_, 0);
  for (const auto& events : per_node) {
    for (const auto& [slot, kind] : events) {
      (kind == ChurnEventKind::Join ? join_counts : leave_counts)[slot]++;
    }
  }
  join_offsets_.assign(lifetime_ + 1, 0);
  leave_offsets_.assign(lifetime_ + 1, 0);
  for (uint32_t s = 0; s < lifetime_; ++s) {
    join_offsets_[s + 1] = join_offsets_[s] + join_counts[s];
    leave_offsets_[s + 1] = leave_offsets_[s] + leave_counts[s];
  }
  join_nodes_.assign(join_offsets_[lifetime_], 0);
  leave_nodes_.assign(leave_offsets_[lifetime_], 0);
  std::vector<size_t> join_fill(join_offsets_.begin(), join_offsets_.end() - 1);
  std::vector<size_t> leave_fill(leave_offsets_.begin(), leave_offsets_.end() - 1);
  for (uint32_t node = 0; node < node_count_; ++node) {
    for (const auto& [slot, kind] : per_node[node]) {
      if (kind == ChurnEventKind::Join) {
        join_nodes_[join_fill[slot]++] = node;
      } else {
        leave_nodes_[leave_fill[slot]++] = node;
      }
    }
  }
}

std::span<const uint32_t> ChurnTrace::joins_at(uint32_t slot) const {
  if (slot >= lifetime_) throw std::out_of_range("joins_at: slot beyond lifetime");
  return {join_nodes_.data() + join_offsets_[slot], join_offsets_[slot + 1] - join_offsets_[slot]};
}

std::span<const uint32_t> ChurnTrace::leaves_at(uint32_t slot) const {
  if (slot >= lifetime_) throw std::out_of_range("leaves_at: slot beyond lifetime");
  return {leave_nodes_.data() + leave_offsets_[slot],
          leave_offsets_[slot + 1] - leave_offsets_[slot]};
}

std::string ChurnTrace::serialize() const {
  // Rows ordered by slot, then node index, with JOIN before LEAVE.
  std::string out;
  for (uint32_t slot = 0; slot < lifetime_; ++slot) {
    const auto joins = joins_at(slot);
    const auto leaves = leaves_at(slot);
    size_t ji = 0, li = 0;
    while (ji < joins.size() || li < leaves.size()) {
      bool take_join;
      if (ji == joins.size()) take_join = false;
      else if (li == leaves.size()) take_join = true;
      else take_join = joins[ji] <= leaves[li];
      const uint32_t node = take_join ? joins[ji++] : leaves[li++];
      out += std::to_string(node);
      out += '\t';
      out += std::to_string(slot);
      out += '\t';
      out += take_join ? "JOIN" : "LEAVE";
      out += '\n';
    }
  }
  return out;
}

ChurnTrace ChurnTrace::parse(const std::string& text, uint32_t lifetime, uint32_t node_count) {
  std::vector<std::vector<std::pair<uint32_t, ChurnEventKind>>> per_node(node_count);
  size_t pos = 0;
  size_t line_no = 0;
  while (pos < text.size()) {
    size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    const std::string_view line(text.data() + pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line.empty()) continue;
    const size_t t1 = line.find('\t');
    const size_t t2 = t1 == std::string_view::npos ? std::string_view::npos
                                                   : line.find('\t', t1 + 1);
    if (t2 == std::string_view::npos)
      throw CacheError("churn file line " + std::to_string(line_no) + ": expected 3 fields");
    const auto parse_u32 = [&](std::string_view s) -> uint32_t {
      uint64_t v = 0;
      if (s.empty()) throw CacheError("churn file line " + std::to_string(line_no) + ": bad number");
      for (char c : s) {
        if (c < '0' || c > '9')
          throw CacheError("churn file line " + std::to_string(line_no) + ": bad number");
        v = v * 10 + static_cast<uint64_t>(c - '0');
      }
      return static_cast<uint32_t>(v);
    };
    const uint32_t node = parse_u32(line.substr(0, t1));
    const uint32_t slot = parse_u32(line.substr(t1 + 1, t2 - t1 - 1));
    const std::string_view kind_text = line.substr(t2 + 1);
    if (node >= node_count || slot >= lifetime)
      throw CacheError("churn file line " + std::to_string(line_no) + ": out of range");
    ChurnEventKind kind;
    if (kind_text == "JOIN") kind = ChurnEventKind::Join;
    else if (kind_text == "LEAVE") kind = ChurnEventKind::Leave;
    else throw CacheError("churn file line " + std::to_string(line_no) + ": bad event kind");
    per_node[node].emplace_back(slot, kind);
  }
  ChurnTrace trace;
  trace.lifetime_ = lifetime;
  trace.node_count_ = node_count;
  trace.index_slots(per_node);
  return trace;
}

}  // namespace skipsim
