#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>

#include "core/config.hpp"
#include "core/evaluators.hpp"
#include "core/scenario.hpp"
#include "core/snapshot_store.hpp"

namespace skipsim {

using LogSink = std::function<void(const std::string&)>;

struct RunOptions {
  std::filesystem::path store_dir = "store";
  std::filesystem::path out_dir;  // empty: do not write report files
  uint32_t threads = 0;           // 0: one worker per hardware thread
  uint32_t committee_k = 3;
  bool allow_generate = true;  // false: a missing snapshot is an error (replay)
  bool check_tables = true;    // validate lookup-table invariants after each topology
  LogSink log;                 // may be empty
};

struct RunStats {
  double wall_seconds = 0.0;
  size_t max_topology_state_bytes = 0;
  uint32_t cache_hits = 0;
  uint32_t generated = 0;
};

struct RunOutput {
  Report report;
  RunStats stats;
};

// Deterministically generates one topology's snapshot (placement, identity,
// churn schedule and event schedule) from the key alone. The schedule is
// one query and one creation record per online peer per slot, so it does not
// depend on any setting outside the key.
Snapshot generate_snapshot(const CacheKey& key, uint32_t topology_index);

// Plays a snapshot's schedule against a fresh overlay under cfg's protocol
// settings, driving `scenario` for every creation record. Exposed separately
// so tests can substitute their own scenario. With check_tables set the
// lookup tables are validated after the final slot; this only makes sense
// for histories that leave no stale links (no churn, or cooperative exits).
TopologyMetrics play_snapshot(const SimulationConfig& cfg, const Snapshot& snap,
                              Scenario& scenario, uint32_t committee_k, const LogSink& log,
                              size_t* state_bytes = nullptr, bool check_tables = false);

// Full run: per topology, load the snapshot from the store or generate it
// (persisting when cfg.log_snapshots), play it, then merge the per-topology
// metrics in index order. Results are identical for any thread count.
RunOutput run_simulation(const SimulationConfig& cfg, const RunOptions& opt);

// Replay: like run_simulation but every snapshot must already be stored;
// nothing is generated or written to the store.
RunOutput replay_simulation(const SimulationConfig& cfg, const RunOptions& opt);

}  // namespace skipsim
