#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <set>
#include <string>
#include <type_traits>
#include <vector>

#include "core/config.hpp"
#include "core/engine.hpp"
#include "core/errors.hpp"
#include "core/snapshot_store.hpp"

using namespace skipsim;
namespace fs = std::filesystem;

namespace {

struct ScratchDir {
  fs::path path;
  explicit ScratchDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("skipsim_engine_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~ScratchDir() { fs::remove_all(path); }
};

SimulationConfig small_config(const std::string& churn_type = "ADVERSARIAL",
                              const std::string& churn_model = "FAST_DEBIAN",
                              uint32_t txb_rate = 1, double malicious = 0.25) {
  char text[512];
  snprintf(text, sizeof text,
           "SimulationType = BLOCKCHAIN\nProtocol = SkipGraph\nTopologies = 2\n"
           "SystemCapacity = 48\nLifeTime = 16\nTXB_RATE = %u\nChurnModel = %s\n"
           "ChurnType = %s\nMalicious = %f\nSeed = 11\n",
           txb_rate, churn_model.c_str(), churn_type.c_str(), malicious);
  return SimulationConfig::parse(text);
}

std::string snapshot_bytes(const Snapshot& s) {
  return serialize_topology(s.topology) + "\x1e" + s.churn.serialize() + "\x1e" +
         s.events.serialize();
}

}  // namespace

// ---------------------------------------------------------------------------
// Snapshot generation.
// ---------------------------------------------------------------------------

TEST_CASE("snapshot generation is a pure function of key and index") {
  CacheKey key = small_config().cache_key();
  CHECK(snapshot_bytes(generate_snapshot(key, 0)) == snapshot_bytes(generate_snapshot(key, 0)));
  CHECK(snapshot_bytes(generate_snapshot(key, 0)) != snapshot_bytes(generate_snapshot(key, 1)));

  CacheKey reseeded = key;
  reseeded.seed = 12;
  CHECK(snapshot_bytes(generate_snapshot(key, 0)) !=
        snapshot_bytes(generate_snapshot(reseeded, 0)));
}

TEST_CASE("the schedule covers every online peer every slot") {
  CacheKey key = small_config().cache_key();
  Snapshot snap = generate_snapshot(key, 0);
  const uint32_t n = static_cast<uint32_t>(snap.topology.node_count());

  std::set<uint32_t> online;
  for (uint32_t slot = 0; slot < key.lifetime; ++slot) {
    std::set<uint32_t> queried, minted;
    for (const EventRecord& r : snap.events.records_for(slot)) {
      switch (r.kind) {
        case EventKind::ChurnJoin: online.insert(r.node); break;
        case EventKind::ChurnLeave: online.erase(r.node); break;
        case EventKind::Query:
          CHECK(queried.insert(r.node).second);  // one query per peer per slot
          break;
        case EventKind::TxbCreate:
          CHECK(minted.insert(r.node).second);  // one creation per peer per slot
          break;
      }
      CHECK(r.node < n);
    }
    CHECK(queried == online);
    CHECK(minted == online);
  }
}

TEST_CASE("scheduled object ids collide with nothing") {
  CacheKey key = small_config().cache_key();
  Snapshot snap = generate_snapshot(key, 0);
  std::set<uint64_t> ids(snap.topology.num_ids.begin(), snap.topology.num_ids.end());
  const size_t node_ids = ids.size();
  CHECK(node_ids == snap.topology.node_count());
  size_t creations = 0;
  for (const EventRecord& r : snap.events.records()) {
    if (r.kind != EventKind::TxbCreate) continue;
    ++creations;
    CHECK(ids.insert(r.payload).second);
  }
  CHECK(ids.size() == node_ids + creations);
}

// ---------------------------------------------------------------------------
// Runs, the store, and replays.
// ---------------------------------------------------------------------------

TEST_CASE("a rerun is served from the store and reproduces the reports byte for byte") {
  ScratchDir scratch("rerun");
  SimulationConfig cfg = small_config();
  RunOptions opt;
  opt.store_dir = scratch.path / "store";
  opt.out_dir = scratch.path / "out1";
  opt.threads = 1;
  std::vector<std::string> log_lines;
  opt.log = [&](const std::string& line) { log_lines.push_back(line); };

  RunOutput first = run_simulation(cfg, opt);
  CHECK(first.stats.generated == 2);
  CHECK(first.stats.cache_hits == 0);
  CHECK(first.stats.max_topology_state_bytes > 0);
  bool saw_generate = false;
  for (const std::string& line : log_lines) saw_generate |= line.find("generating snapshot") != std::string::npos;
  CHECK(saw_generate);

  log_lines.clear();
  opt.out_dir = scratch.path / "out2";
  RunOutput second = run_simulation(cfg, opt);
  CHECK(second.stats.generated == 0);
  CHECK(second.stats.cache_hits == 2);
  bool saw_hit = false;
  for (const std::string& line : log_lines) saw_hit |= line.find("cache hit") != std::string::npos;
  CHECK(saw_hit);

  CHECK(read_text_file(scratch.path / "out1/report.csv") ==
        read_text_file(scratch.path / "out2/report.csv"));
  CHECK(read_text_file(scratch.path / "out1/report.json") ==
        read_text_file(scratch.path / "out2/report.json"));
}

TEST_CASE("disabling persistence leaves the store empty") {
  ScratchDir scratch("nolog");
  SimulationConfig cfg = small_config();
  cfg.log_snapshots = false;
  RunOptions opt;
  opt.store_dir = scratch.path / "store";
  opt.threads = 1;
  RunOutput out = run_simulation(cfg, opt);
  CHECK(out.report.topologies.size() == 2);
  CHECK(SnapshotStore(opt.store_dir).list().empty());
  CHECK_FALSE(fs::exists(scratch.path / "out"));  // empty out_dir writes nothing
}

TEST_CASE("replay refuses to run without a stored snapshot") {
  ScratchDir scratch("replaymiss");
  RunOptions opt;
  opt.store_dir = scratch.path / "store";
  opt.threads = 1;
  CHECK_THROWS_AS(replay_simulation(small_config(), opt), IoError);
}

TEST_CASE("protocol settings replay against the identical schedule") {
  ScratchDir scratch("overrides");
  SimulationConfig cfg = small_config("ADVERSARIAL", "FAST_DEBIAN", 2, 0.25);
  RunOptions opt;
  opt.store_dir = scratch.path / "store";
  opt.threads = 1;
  RunOutput base = run_simulation(cfg, opt);

  SimulationConfig replayed = cfg;
  replayed.apply_override("TXB_RATE", "0");
  replayed.apply_override("Malicious", "0.0");
  replayed.apply_override("ChurnType", "COOPERATIVE");
  RunOutput alt = replay_simulation(replayed, opt);

  REQUIRE(alt.report.topologies.size() == base.report.topologies.size());
  for (size_t i = 0; i < alt.report.topologies.size(); ++i) {
    const TopologyMetrics& b = base.report.topologies[i];
    const TopologyMetrics& a = alt.report.topologies[i];
    // The schedule is pinned by the key, so the churn-and-query digest never
    // moves; the full digest covers creation records, which are scheduled
    // (not played), so it is pinned too.
    CHECK(a.events_churn_query_hash == b.events_churn_query_hash);
    CHECK(a.events_full_hash == b.events_full_hash);
    // Rate zero spends every creation on nothing.
    CHECK(a.txb_total.samples == 0);
    CHECK(a.adversarial_success.samples == 0);
    // A cooperative replay leaves no stale links, so every search routes.
    CHECK(a.query_success_ratio.value == 1.0);
    CHECK(a.rejected_searches == 0);
  }
  CHECK(base.report.topologies[0].txb_total.samples > 0);
}

TEST_CASE("an override replay equals a fresh run configured the same way") {
  ScratchDir scratch("equiv");
  SimulationConfig adversarial = small_config("ADVERSARIAL");
  SimulationConfig cooperative = small_config("COOPERATIVE");

  RunOptions opt;
  opt.store_dir = scratch.path / "store";
  opt.out_dir = scratch.path / "fresh";
  opt.threads = 1;
  run_simulation(cooperative, opt);  // fresh run, generates the snapshots

  SimulationConfig replayed = adversarial;
  replayed.apply_override("ChurnType", "COOPERATIVE");
  opt.out_dir = scratch.path / "replayed";
  replay_simulation(replayed, opt);  // replays the same key's snapshots

  CHECK(read_text_file(scratch.path / "fresh/report.csv") ==
        read_text_file(scratch.path / "replayed/report.csv"));
  CHECK(read_text_file(scratch.path / "fresh/report.json") ==
        read_text_file(scratch.path / "replayed/report.json"));
}

TEST_CASE("worker count never shows in the results") {
  ScratchDir scratch("threads");
  SimulationConfig cfg = small_config();
  cfg.topologies = 4;

  RunOptions one;
  one.store_dir = scratch.path / "store1";
  one.out_dir = scratch.path / "out1";
  one.threads = 1;
  run_simulation(cfg, one);

  RunOptions eight;
  eight.store_dir = scratch.path / "store8";
  eight.out_dir = scratch.path / "out8";
  eight.threads = 8;
  run_simulation(cfg, eight);

  CHECK(read_text_file(scratch.path / "out1/report.csv") ==
        read_text_file(scratch.path / "out8/report.csv"));
  CHECK(read_text_file(scratch.path / "out1/report.json") ==
        read_text_file(scratch.path / "out8/report.json"));
}

TEST_CASE("a damaged store fails a rerun loudly") {
  ScratchDir scratch("damage");
  SimulationConfig cfg = small_config();
  RunOptions opt;
  opt.store_dir = scratch.path / "store";
  opt.threads = 1;
  run_simulation(cfg, opt);

  SnapshotStore store(opt.store_dir);
  fs::path victim = store.entry_dir(cfg.cache_key(), 1) / "churn.tsv";
  std::string text = read_text_file(victim);
  text[text.size() / 2] ^= 1;
  write_text_file(victim, text);

  CHECK_THROWS_AS(run_simulation(cfg, opt), CacheError);
  CHECK_THROWS_AS(replay_simulation(cfg, opt), CacheError);
}

// ---------------------------------------------------------------------------
// Direct playback semantics.
// ---------------------------------------------------------------------------

TEST_CASE("a churn-free cooperative world loses nothing") {
  SimulationConfig cfg = small_config("COOPERATIVE", "NONE", 1, 0.0);
  Snapshot snap = generate_snapshot(cfg.cache_key(), 0);
  auto scenario = make_blockchain_scenario();
  size_t state_bytes = 0;
  TopologyMetrics m =
      play_snapshot(cfg, snap, *scenario, 3, LogSink{}, &state_bytes, /*check_tables=*/true);

  CHECK(m.query_success_ratio.value == 1.0);
  CHECK(m.rejected_searches == 0);
  CHECK(m.data_availability.value == 1.0);
  CHECK(m.data_availability_omniscient.value == 1.0);
  CHECK(m.adversarial_success.samples > 0);
  CHECK(m.adversarial_success.value == 0.0);  // nobody is malicious
  CHECK(m.txb_malicious_majority.value == 0.0);
  CHECK(m.query_hops.samples > 0);
  CHECK(m.query_latency_ms.value > 0.0);
  CHECK(state_bytes > 0);
}

TEST_CASE("omniscient availability dominates routed availability under churn") {
  SimulationConfig cfg = small_config("ADVERSARIAL", "FLATOUT", 1, 0.0);
  Snapshot snap = generate_snapshot(cfg.cache_key(), 0);
  auto scenario = make_blockchain_scenario();
  TopologyMetrics m = play_snapshot(cfg, snap, *scenario, 3, LogSink{});
  REQUIRE(m.data_availability.samples > 0);
  CHECK(m.data_availability.value <= m.data_availability_omniscient.value);
  CHECK(m.query_success_ratio.value <= 1.0);
}

TEST_CASE("the malicious fraction drives committee subversion monotonically") {
  SimulationConfig clean = small_config("COOPERATIVE", "FAST_DEBIAN", 1, 0.0);
  SimulationConfig dirty = small_config("COOPERATIVE", "FAST_DEBIAN", 1, 0.45);
  Snapshot snap = generate_snapshot(clean.cache_key(), 0);
  REQUIRE(clean.cache_key().canonical_string() == dirty.cache_key().canonical_string());

  auto s1 = make_blockchain_scenario();
  auto s2 = make_blockchain_scenario();
  TopologyMetrics clean_m = play_snapshot(clean, snap, *s1, 3, LogSink{});
  TopologyMetrics dirty_m = play_snapshot(dirty, snap, *s2, 3, LogSink{});

  REQUIRE(clean_m.adversarial_success.samples > 0);
  CHECK(clean_m.adversarial_success.value == 0.0);
  CHECK(dirty_m.adversarial_success.value > 0.0);
  // Same schedule, so the digests agree even though the verdicts differ.
  CHECK(clean_m.events_full_hash == dirty_m.events_full_hash);
}

// ---------------------------------------------------------------------------
// Scenarios cannot reach around the routed interface.
// ---------------------------------------------------------------------------

namespace {

template <typename T, typename = void>
struct has_population : std::false_type {};
template <typename T>
struct has_population<T, std::void_t<decltype(std::declval<T&>().population())>>
    : std::true_type {};

template <typename T, typename = void>
struct has_nodes : std::false_type {};
template <typename T>
struct has_nodes<T, std::void_t<decltype(std::declval<T&>().nodes())>> : std::true_type {};

template <typename T, typename = void>
struct has_node_count : std::false_type {};
template <typename T>
struct has_node_count<T, std::void_t<decltype(std::declval<T&>().node_count())>>
    : std::true_type {};

static_assert(!has_population<ActionContext>::value,
              "scenarios must not see the whole population");
static_assert(!has_nodes<ActionContext>::value, "scenarios must not enumerate nodes");
static_assert(!has_node_count<ActionContext>::value, "scenarios must not count nodes");

// A scenario that hoards everything it can observe.
class NosyScenario final : public Scenario {
 public:
  std::set<NodeIndex> seen;
  size_t searches = 0;
  size_t acts = 0;

  void on_node_act(ActionContext& ctx, uint64_t logged_object_id) override {
    ++acts;
    seen.insert(ctx.self().index);
    SearchView v = ctx.search_num_id(logged_object_id);
    ++searches;
    if (v.has_terminal) seen.insert(v.terminal.index);
    SearchView w = ctx.search_name_id(MembershipVector(logged_object_id, ctx.memvec_len()),
                                      /*peers_only=*/false);
    ++searches;
    if (w.has_terminal) seen.insert(w.terminal.index);
  }
};

}  // namespace

TEST_CASE("a scenario learns nodes only through routed searches") {
  SimulationConfig cfg = small_config("COOPERATIVE", "FAST_DEBIAN", 1, 0.0);
  Snapshot snap = generate_snapshot(cfg.cache_key(), 0);
  NosyScenario nosy;
  TopologyMetrics m = play_snapshot(cfg, snap, nosy, 3, LogSink{});
  CHECK(nosy.acts > 0);
  // Everything it saw is bounded by its own identity plus one terminal per
  // routed search; there is no bulk channel.
  CHECK(nosy.seen.size() <= nosy.searches + nosy.acts);
  // Its searches joined the pool feeding the success ratio.
  CHECK(m.query_success_ratio.samples > nosy.searches);
}
