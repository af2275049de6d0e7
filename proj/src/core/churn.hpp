#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace skipsim {

class Rng;

enum class ChurnModel : uint8_t { FastDebian = 0, SlowDebian = 1, Flatout = 2, None = 3 };

enum class ChurnEventKind : uint8_t { Join = 0, Leave = 1 };

// Session/downtime means are in timeslots; initial_online_prob is the
// stationary online fraction the process starts in.
struct ChurnPresetParams {
  double session_mean = 0.0;
  double downtime_mean = 0.0;
  double initial_online_prob = 0.0;
};

ChurnPresetParams churn_preset_params(ChurnModel model);

const char* churn_model_name(ChurnModel model);
bool churn_model_from_name(std::string_view name, ChurnModel& out);

// Per-node alternating join/leave schedule over a bounded lifetime.
// Sessions and downtimes are geometric with the preset means; slots of events
// are strictly increasing per node and always below the lifetime.
class ChurnTrace {
 public:
  ChurnTrace() = default;

  static ChurnTrace generate(ChurnModel model, uint32_t lifetime, uint32_t node_count, Rng& rng);

  uint32_t lifetime() const { return lifetime_; }
  uint32_t node_count() const { return node_count_; }

  // Nodes joining / leaving at the given slot, each ascending by node index.
  // Throws std::out_of_range when slot >= lifetime.
  std::span<const uint32_t> joins_at(uint32_t slot) const;
  std::span<const uint32_t> leaves_at(uint32_t slot) const;

  std::string serialize() const;
  static ChurnTrace parse(const std::string& text, uint32_t lifetime, uint32_t node_count);

 private:
  void index_slots(const std::vector<std::vector<std::pair<uint32_t, ChurnEventKind>>>& per_node);

  uint32_t lifetime_ = 0;
  uint32_t node_count_ = 0;
  // Flattened per-slot buckets.
  std::vector<uint32_t> join_nodes_, leave_nodes_;
  std::vector<size_t> join_offsets_, leave_offsets_;  // lifetime + 1 entries each
};

}  // namespace skipsim
