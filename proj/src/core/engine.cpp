#include "core/engine.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <thread>
#include <unordered_set>

#include "core/errors.hpp"
#include "core/hash.hpp"
#include "core/rng.hpp"
#include "core/topology.hpp"

namespace skipsim {

namespace {

std::string tprefix(uint32_t topology_index) {
  return "[t" + std::to_string(topology_index) + "] ";
}

struct ObjectRecord {
  NodeIndex node = kNilNode;
  NodeIndex owner = kNilNode;
  uint64_t num_id = 0;
};

// Everything one topology needs while its schedule is played.
struct PlayState {
  PlayState(const SimulationConfig& cfg_in, const Snapshot& snap, uint32_t committee_k_in,
            const LogSink& log_in)
      : cfg(cfg_in),
        committee_k(committee_k_in),
        log(log_in),
        topology_index(snap.topology.topology_index),
        pop(snap.topology.memvec_len),
        collector(snap.topology.topology_index) {
    const size_t n = snap.topology.node_count();
    placements = snap.topology.placements;
    malicious.assign(n, 0);
    taken_ids.reserve(n * 2);
    for (size_t i = 0; i < n; ++i) {
      pop.add_node(snap.topology.num_ids[i],
                   MembershipVector(snap.topology.memvec_bits[i], snap.topology.memvec_len),
                   NodeKind::Peer);
      taken_ids.insert(snap.topology.num_ids[i]);
    }
    assign_malicious(n);
  }

  void assign_malicious(size_t n) {
    const auto count = static_cast<size_t>(std::floor(cfg.malicious * static_cast<double>(n)));
    if (count == 0) return;
    Rng rng = derive_stream(cfg.seed, topology_index, "malicious-assignment");
    std::vector<uint32_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = static_cast<uint32_t>(i);
    for (size_t i = 0; i < count; ++i) {
      size_t j = i + static_cast<size_t>(rng.next_below(static_cast<uint64_t>(n - i)));
      std::swap(order[i], order[j]);
      malicious[order[i]] = 1;
    }
  }

  NodeView view_of(NodeIndex i) const {
    return NodeView{i, pop.num_id(i), pop.mem_vec(i), pop.kind(i), malicious[static_cast<size_t>(i)] != 0};
  }

  SearchView view_of(const SearchResult& res) const {
    SearchView v;
    v.status = res.status;
    v.exact = res.exact;
    v.hops = res.hops();
    v.has_terminal = res.terminal != kNilNode;
    if (v.has_terminal) v.terminal = view_of(res.terminal);
    return v;
  }

  double path_latency_ms(const SearchResult& res) const {
    double total = 0.0;
    for (size_t i = 1; i < res.path.size(); ++i)
      total += link_latency_ms(placements[static_cast<size_t>(res.path[i - 1])],
                               placements[static_cast<size_t>(res.path[i])]);
    return total;
  }

  bool register_object(NodeIndex owner, uint64_t object_id) {
    if (taken_ids.contains(object_id)) return false;
    MembershipVector mv(mix64(object_id), pop.memvec_len());
    NodeIndex node = pop.add_node(object_id, mv, NodeKind::DataObject);
    placements.push_back(placements[static_cast<size_t>(owner)]);
    malicious.push_back(0);
    pop.insert(node);
    taken_ids.insert(object_id);
    objects.push_back(ObjectRecord{node, owner, object_id});
    return true;
  }

  size_t footprint_bytes() const {
    return pop.footprint_bytes() + placements.capacity() * sizeof(Placement) +
           malicious.capacity() + objects.capacity() * sizeof(ObjectRecord) +
           taken_ids.size() * (sizeof(uint64_t) * 2);
  }

  const SimulationConfig& cfg;
  uint32_t committee_k;
  const LogSink& log;
  uint32_t topology_index;
  Population pop;
  MetricsCollector collector;
  std::vector<Placement> placements;
  std::vector<uint8_t> malicious;
  std::vector<ObjectRecord> objects;
  std::unordered_set<uint64_t> taken_ids;
};

// The acting node's window on the overlay; see ActionContext.
class EngineActionContext final : public ActionContext {
 public:
  EngineActionContext(PlayState& state, NodeIndex actor, uint32_t slot)
      : state_(state), actor_(actor), slot_(slot) {}

  NodeView self() const override { return state_.view_of(actor_); }
  uint32_t slot() const override { return slot_; }
  uint32_t txb_rate() const override { return state_.cfg.txb_rate; }
  uint32_t committee_k() const override { return state_.committee_k; }
  uint8_t memvec_len() const override { return state_.pop.memvec_len(); }

  SearchView search_num_id(uint64_t target) override {
    SearchResult res;
    state_.pop.search_num_id(actor_, target, res);
    state_.collector.on_search_outcome(res.status);
    return state_.view_of(res);
  }

  SearchView search_name_id(const MembershipVector& target, bool peers_only) override {
    SearchResult res;
    state_.pop.search_name_id(actor_, target, res, peers_only);
    state_.collector.on_search_outcome(res.status);
    return state_.view_of(res);
  }

  bool register_object(uint64_t object_num_id) override {
    return state_.register_object(actor_, object_num_id);
  }

  void report_txb_minted(uint64_t count) override { state_.collector.on_txb_minted(count); }

  void report_committee(bool validated, bool malicious_majority, bool undersized) override {
    state_.collector.on_committee(validated, malicious_majority, undersized);
  }

 private:
  PlayState& state_;
  NodeIndex actor_;
  uint32_t slot_;
};

}  // namespace

Snapshot generate_snapshot(const CacheKey& key, uint32_t topology_index) {
  Snapshot snap;
  snap.topology = generate_topology(key.seed, topology_index, key.system_capacity);

  Rng churn_rng = derive_stream(key.seed, topology_index, "churn");
  snap.churn =
      ChurnTrace::generate(key.churn_model, key.lifetime, key.system_capacity, churn_rng);

  Rng query_rng = derive_stream(key.seed, topology_index, "query");
  Rng txb_rng = derive_stream(key.seed, topology_index, "txb");

  std::unordered_set<uint64_t> taken(snap.topology.num_ids.begin(), snap.topology.num_ids.end());
  std::vector<uint8_t> online(key.system_capacity, 0);

  EventLog log(key.lifetime);
  for (uint32_t slot = 0; slot < key.lifetime; ++slot) {
    for (uint32_t n : snap.churn.joins_at(slot)) {
      online[n] = 1;
      log.append(EventRecord{slot, EventKind::ChurnJoin, n, 0});
    }
    for (uint32_t n : snap.churn.leaves_at(slot)) {
      online[n] = 0;
      log.append(EventRecord{slot, EventKind::ChurnLeave, n, 0});
    }
    for (uint32_t n = 0; n < key.system_capacity; ++n)
      if (online[n]) log.append(EventRecord{slot, EventKind::Query, n, query_rng.next_u64()});
    for (uint32_t n = 0; n < key.system_capacity; ++n) {
      if (!online[n]) continue;
      uint64_t id = txb_rng.next_u64();
      while (taken.contains(id)) id = txb_rng.next_u64();
      taken.insert(id);
      log.append(EventRecord{slot, EventKind::TxbCreate, n, id});
    }
  }
  log.finalize();
  snap.events = std::move(log);
  return snap;
}

TopologyMetrics play_snapshot(const SimulationConfig& cfg, const Snapshot& snap,
                              Scenario& scenario, uint32_t committee_k, const LogSink& log,
                              size_t* state_bytes, bool check_tables) {
  PlayState state(cfg, snap, committee_k, log);
  const bool cooperative = cfg.churn_type == ChurnType::Cooperative;
  Rng probe_rng = derive_stream(cfg.seed, state.topology_index, "probe");

  for (uint32_t slot = 0; slot < cfg.lifetime; ++slot) {
    scenario.on_slot_begin(slot);
    for (const EventRecord& r : snap.events.records_for(slot)) {
      switch (r.kind) {
        case EventKind::ChurnJoin:
          state.pop.insert(static_cast<NodeIndex>(r.node));
          break;
        case EventKind::ChurnLeave:
          if (cooperative)
            state.pop.leave_cooperative(static_cast<NodeIndex>(r.node));
          else
            state.pop.leave_adversarial(static_cast<NodeIndex>(r.node));
          break;
        case EventKind::Query: {
          if (!state.pop.online(static_cast<NodeIndex>(r.node))) {
            if (log)
              log(tprefix(state.topology_index) + "slot " + std::to_string(slot) +
                  ": query initiator " + std::to_string(r.node) + " is offline; skipped");
            break;
          }
          SearchResult res;
          state.pop.search_num_id(static_cast<NodeIndex>(r.node), r.payload, res);
          state.collector.on_search_outcome(res.status);
          if (res.success())
            state.collector.on_query_completed(res.hops(), state.path_latency_ms(res));
          scenario.on_query_complete(state.view_of(res));
          break;
        }
        case EventKind::TxbCreate: {
          if (!state.pop.online(static_cast<NodeIndex>(r.node))) {
            if (log)
              log(tprefix(state.topology_index) + "slot " + std::to_string(slot) + ": creator " +
                  std::to_string(r.node) + " is offline; skipped");
            break;
          }
          EngineActionContext ctx(state, static_cast<NodeIndex>(r.node), slot);
          scenario.on_node_act(ctx, r.payload);
          break;
        }
      }
    }

    if (!state.objects.empty()) {
      const auto peer_count = static_cast<NodeIndex>(snap.topology.node_count());
      for (NodeIndex p = 0; p < peer_count; ++p) {
        if (!state.pop.online(p)) continue;
        const ObjectRecord& obj =
            state.objects[static_cast<size_t>(probe_rng.next_below(state.objects.size()))];
        SearchResult res;
        state.pop.search_num_id(p, obj.num_id, res);
        state.collector.on_search_outcome(res.status);
        const bool routed = res.success() && res.exact && res.terminal == obj.node;
        state.collector.on_probe(routed, state.pop.online(obj.owner));
      }
    }
    scenario.on_slot_end(slot);
  }

  if (check_tables) {
    std::vector<std::string> problems = state.pop.check_invariants();
    if (!problems.empty())
      throw StructuralError(tprefix(state.topology_index) + "lookup tables damaged: " +
                            problems.front() + " (+" + std::to_string(problems.size() - 1) +
                            " more)");
  }

  state.collector.set_event_hashes(snap.events.churn_query_hash(), snap.events.full_hash());
  if (state_bytes) *state_bytes = state.footprint_bytes() + snap.events.footprint_bytes();
  return state.collector.finish();
}

namespace {

RunOutput run_impl(const SimulationConfig& cfg, const RunOptions& opt, bool allow_generate,
                   bool allow_save) {
  const auto t0 = std::chrono::steady_clock::now();
  SnapshotStore store(opt.store_dir);
  const CacheKey key = cfg.cache_key();
  const uint32_t count = cfg.topologies;

  std::vector<TopologyMetrics> results(count);
  std::atomic<uint32_t> next{0};
  std::atomic<uint32_t> cache_hits{0}, generated{0};
  std::atomic<size_t> max_bytes{0};
  std::mutex log_mu;
  std::mutex error_mu;
  std::exception_ptr first_error;

  LogSink log;
  if (opt.log)
    log = [&](const std::string& line) {
      std::lock_guard<std::mutex> hold(log_mu);
      opt.log(line);
    };

  auto worker = [&]() {
    for (;;) {
      const uint32_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        std::string miss_reason;
        std::optional<Snapshot> snap = store.load(key, i, &miss_reason);
        if (snap) {
          cache_hits.fetch_add(1);
          if (log) log(tprefix(i) + "cache hit (" + store.entry_dir(key, i).string() + ")");
        } else {
          if (!allow_generate)
            throw IoError("replay needs a stored snapshot: " + miss_reason +
                          "; produce it with a run first");
          if (log) log(tprefix(i) + "generating snapshot");
          snap = generate_snapshot(key, i);
          if (allow_save && cfg.log_snapshots) store.save(key, i, *snap);
          generated.fetch_add(1);
        }

        std::unique_ptr<Scenario> scenario = cfg.simulation_type == SimulationType::Blockchain
                                                 ? make_blockchain_scenario()
                                                 : make_storage_scenario();
        const bool stale_free = cfg.churn_type == ChurnType::Cooperative ||
                                cfg.churn_model == ChurnModel::None;
        size_t bytes = 0;
        results[i] = play_snapshot(cfg, *snap, *scenario, opt.committee_k, log, &bytes,
                                   opt.check_tables && stale_free);

        size_t seen = max_bytes.load();
        while (seen < bytes && !max_bytes.compare_exchange_weak(seen, bytes)) {
        }
      } catch (...) {
        std::lock_guard<std::mutex> hold(error_mu);
        if (!first_error) first_error = std::current_exception();
        next.store(count);  // stop handing out work
        return;
      }
    }
  };

  uint32_t workers = opt.threads != 0 ? opt.threads : std::thread::hardware_concurrency();
  if (workers == 0) workers = 1;
  workers = std::min(workers, count);

  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (uint32_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  RunOutput out;
  out.report.config = cfg;
  out.report.topologies = std::move(results);
  out.stats.cache_hits = cache_hits.load();
  out.stats.generated = generated.load();
  out.stats.max_topology_state_bytes = max_bytes.load();
  out.stats.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (!opt.out_dir.empty()) write_report_files(out.report, opt.out_dir);
  return out;
}

}  // namespace

RunOutput run_simulation(const SimulationConfig& cfg, const RunOptions& opt) {
  return run_impl(cfg, opt, opt.allow_generate, /*allow_save=*/true);
}

RunOutput replay_simulation(const SimulationConfig& cfg, const RunOptions& opt) {
  return run_impl(cfg, opt, /*allow_generate=*/false, /*allow_save=*/false);
}

}  // namespace skipsim
