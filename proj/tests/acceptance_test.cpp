// Acceptance gate: exercises the simulator end to end against its contract.
// Prints exactly one PASS/FAIL line per criterion and exits nonzero if any
// criterion fails. Supporting measurements appear as indented detail lines.

#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/config.hpp"
#include "core/engine.hpp"
#include "core/overlay.hpp"
#include "core/rng.hpp"
#include "core/topology.hpp"

#ifndef SKIPSIM_CLI_PATH
#error "SKIPSIM_CLI_PATH must point at the built command-line binary"
#endif

using namespace skipsim;
namespace fs = std::filesystem;

namespace {

fs::path g_scratch;

double now_seconds() {
  using clock = std::chrono::steady_clock;
  static const clock::time_point start = clock::now();
  return std::chrono::duration<double>(clock::now() - start).count();
}

double peak_rss_gb() {
  rusage usage{};
  getrusage(RUSAGE_SELF, &usage);
  return static_cast<double>(usage.ru_maxrss) / (1024.0 * 1024.0);  // KiB on Linux
}

void detail(const char* fmt, ...) {
  va_list args;
  va_start(args, fmt);
  fputs("    . ", stdout);
  vprintf(fmt, args);
  fputc('\n', stdout);
  va_end(args);
}

bool verdict(int number, const char* name, bool pass, const std::string& why = "") {
  if (pass)
    printf("ACCEPTANCE %d %s: PASS\n", number, name);
  else
    printf("ACCEPTANCE %d %s: FAIL%s%s\n", number, name, why.empty() ? "" : " - ",
           why.c_str());
  fflush(stdout);
  return pass;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct CommandResult {
  int exit_code = -1;
  std::string err;
};

CommandResult cli(const std::string& args) {
  fs::path err_file = g_scratch / "stderr.txt";
  std::string command =
      std::string(SKIPSIM_CLI_PATH) + " " + args + " 2>" + err_file.string();
  int raw = std::system(command.c_str());
  CommandResult r;
  r.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.err = slurp(err_file);
  return r;
}

SimulationConfig make_config(const std::string& sim_type, uint32_t topologies,
                             uint32_t capacity, uint32_t lifetime, uint32_t txb_rate,
                             const std::string& churn_model, const std::string& churn_type,
                             double malicious, uint64_t seed) {
  char text[512];
  snprintf(text, sizeof text,
           "SimulationType = %s\nProtocol = SkipGraph\nTopologies = %u\n"
           "SystemCapacity = %u\nLifeTime = %u\nTXB_RATE = %u\nChurnModel = %s\n"
           "ChurnType = %s\nMalicious = %f\nLOG = false\nSeed = %llu\n",
           sim_type.c_str(), topologies, capacity, lifetime, txb_rate, churn_model.c_str(),
           churn_type.c_str(), malicious, static_cast<unsigned long long>(seed));
  return SimulationConfig::parse(text);
}

// ---------------------------------------------------------------------------
// 1. Scale: big single topologies finish in bounded time and memory, and the
//    per-topology state footprint grows like n log n.
// ---------------------------------------------------------------------------

bool criterion_1() {
  RunOptions opt;
  opt.store_dir = g_scratch / "c1-store";  // never written: LOG = false
  opt.threads = 1;

  // Storage world, 4096 peers, one day of hourly slots.
  SimulationConfig storage =
      make_config("STORAGE", 1, 4096, 24, 1, "FAST_DEBIAN", "ADVERSARIAL", 0.0, 1);
  double t0 = now_seconds();
  RunOutput big = run_simulation(storage, opt);
  double storage_seconds = now_seconds() - t0;
  size_t bytes_4096 = big.stats.max_topology_state_bytes;
  detail("4096-peer storage topology: %.1f s, peak RSS %.2f GB", storage_seconds,
         peak_rss_gb());

  // Blockchain world, 10240 peers, a short day.
  SimulationConfig chain =
      make_config("BLOCKCHAIN", 1, 10240, 8, 1, "FAST_DEBIAN", "ADVERSARIAL", 0.16, 1);
  t0 = now_seconds();
  run_simulation(chain, opt);
  double chain_seconds = now_seconds() - t0;
  detail("10240-peer blockchain topology: %.1f s, peak RSS %.2f GB", chain_seconds,
         peak_rss_gb());

  // Footprint growth across n in {1024, 2048, 4096}: least-squares slope of
  // log(bytes) against log(n log2 n) must not exceed 1.2.
  std::vector<double> xs, ys;
  for (uint32_t n : {1024u, 2048u}) {
    SimulationConfig cfg =
        make_config("STORAGE", 1, n, 24, 1, "FAST_DEBIAN", "ADVERSARIAL", 0.0, 1);
    RunOutput out = run_simulation(cfg, opt);
    xs.push_back(std::log(static_cast<double>(n) * std::log2(static_cast<double>(n))));
    ys.push_back(std::log(static_cast<double>(out.stats.max_topology_state_bytes)));
    detail("n=%u state footprint: %zu bytes", n, out.stats.max_topology_state_bytes);
  }
  xs.push_back(std::log(4096.0 * std::log2(4096.0)));
  ys.push_back(std::log(static_cast<double>(bytes_4096)));
  detail("n=4096 state footprint: %zu bytes", bytes_4096);

  double mx = 0, my = 0;
  for (size_t i = 0; i < xs.size(); ++i) mx += xs[i], my += ys[i];
  mx /= static_cast<double>(xs.size());
  my /= static_cast<double>(ys.size());
  double num = 0, den = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    num += (xs[i] - mx) * (ys[i] - my);
    den += (xs[i] - mx) * (xs[i] - mx);
  }
  double slope = num / den;
  detail("log-log footprint slope vs n log n: %.3f (limit 1.2)", slope);

  std::string why;
  if (storage_seconds >= 600) why = "storage topology exceeded 10 minutes";
  else if (chain_seconds >= 900) why = "blockchain topology exceeded 15 minutes";
  else if (peak_rss_gb() >= 8.0) why = "peak memory reached 8 GB";
  else if (slope > 1.2) why = "footprint grows faster than n log n";
  return verdict(1, "scale within time and memory budget", why.empty(), why);
}

// ---------------------------------------------------------------------------
// 2. Flagship demo: ten adversarial-churn topologies, full report.
// ---------------------------------------------------------------------------

const char* kDemoConfigText =
    "SimulationType = BLOCKCHAIN\n"
    "Protocol = SkipGraph\n"
    "Topologies = 10\n"
    "SystemCapacity = 1024\n"
    "LifeTime = 168\n"
    "TXB_RATE = 1\n"
    "ChurnModel = FAST_DEBIAN\n"
    "ChurnType = ADVERSARIAL\n"
    "Malicious = 0.16\n"
    "LOG = true\n"
    "Seed = 42\n";

bool criterion_2() {
  fs::path config = g_scratch / "demo.conf";
  std::ofstream(config) << kDemoConfigText;
  std::string store = (g_scratch / "demo-store").string();

  double t0 = now_seconds();
  CommandResult r = cli("run " + config.string() + " --store " + store + " --out " +
                        (g_scratch / "demo-out").string());
  double seconds = now_seconds() - t0;
  detail("ten 1024-peer topologies, 168 slots: %.1f s, exit code %d", seconds, r.exit_code);

  if (r.exit_code != 0) return verdict(2, "flagship demo completes", false, "nonzero exit");
  if (seconds >= 1200)
    return verdict(2, "flagship demo completes", false, "exceeded 20 minutes");

  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(slurp(g_scratch / "demo-out/report.json"));
  } catch (const std::exception& e) {
    return verdict(2, "flagship demo completes", false, e.what());
  }
  for (const char* metric : {"query_latency_ms", "query_success_ratio", "data_availability",
                             "adversarial_success"}) {
    uint64_t contributing = doc["aggregate"][metric]["topologies"].get<uint64_t>();
    detail("%s measured in %llu/10 topologies (mean %s)", metric,
           static_cast<unsigned long long>(contributing),
           doc["aggregate"][metric]["mean"].dump().c_str());
    if (contributing != 10)
      return verdict(2, "flagship demo completes", false,
                     std::string(metric) + " missing samples");
    for (const auto& topo : doc["topologies"])
      if (topo["metrics"][metric]["samples"].get<uint64_t>() == 0)
        return verdict(2, "flagship demo completes", false,
                       std::string(metric) + " empty in one topology");
  }
  return verdict(2, "flagship demo completes", true);
}

// ---------------------------------------------------------------------------
// 3. Replay law: an override replays from the store against the identical
//    schedule, and a clean population never subverts a committee.
// ---------------------------------------------------------------------------

bool criterion_3() {
  fs::path config = g_scratch / "demo.conf";
  std::string store = (g_scratch / "demo-store").string();
  CommandResult r = cli("replay " + config.string() + " --store " + store + " --out " +
                        (g_scratch / "replay-out").string() + " --override Malicious=0.0");
  if (r.exit_code != 0) return verdict(3, "override replay law", false, "replay failed");

  bool cache_hit_logged = r.err.find("cache hit") != std::string::npos &&
                          r.err.find("(10 cached, 0 generated)") != std::string::npos;
  detail("replay log reports 10 cache hits: %s", cache_hit_logged ? "yes" : "no");

  nlohmann::json before, after;
  try {
    before = nlohmann::json::parse(slurp(g_scratch / "demo-out/report.json"));
    after = nlohmann::json::parse(slurp(g_scratch / "replay-out/report.json"));
  } catch (const std::exception& e) {
    return verdict(3, "override replay law", false, e.what());
  }

  size_t hash_matches = 0;
  bool adversarial_zero = true;
  for (size_t i = 0; i < 10; ++i) {
    if (before["topologies"][i]["events_churn_query_hash"] ==
        after["topologies"][i]["events_churn_query_hash"])
      ++hash_matches;
    double adv = after["topologies"][i]["metrics"]["adversarial_success"]["value"].get<double>();
    adversarial_zero = adversarial_zero && adv == 0.0;
  }
  detail("churn+query digests identical: %zu/10", hash_matches);
  detail("adversarial success exactly zero in every topology: %s",
         adversarial_zero ? "yes" : "no");
  std::string csv = slurp(g_scratch / "replay-out/report.csv");
  bool csv_zero = csv.find("adversarial_success.mean,AGG,0.000000,10") != std::string::npos;

  std::string why;
  if (!cache_hit_logged) why = "replay did not hit the cache";
  else if (hash_matches != 10) why = "event digests moved";
  else if (!adversarial_zero || !csv_zero) why = "adversarial success not exactly zero";
  return verdict(3, "override replay law", why.empty(), why);
}

// ---------------------------------------------------------------------------
// 4. Overlay correctness: random histories keep every invariant, and both
//    search modes agree with brute-force oracles on every pair.
// ---------------------------------------------------------------------------

NodeIndex numeric_oracle(const Population& pop, uint64_t target) {
  NodeIndex best = kNilNode, smallest = kNilNode;
  for (NodeIndex i = 0; i < static_cast<NodeIndex>(pop.size()); ++i) {
    if (!pop.online(i)) continue;
    if (smallest == kNilNode || pop.num_id(i) < pop.num_id(smallest)) smallest = i;
    if (pop.num_id(i) <= target && (best == kNilNode || pop.num_id(i) > pop.num_id(best)))
      best = i;
  }
  return best == kNilNode ? smallest : best;
}

NodeIndex name_oracle(const Population& pop, const MembershipVector& target) {
  NodeIndex best = kNilNode;
  int best_cpl = -1;
  for (NodeIndex i = 0; i < static_cast<NodeIndex>(pop.size()); ++i) {
    if (!pop.online(i)) continue;
    int cpl = common_prefix_len(pop.mem_vec(i), target);
    if (cpl > best_cpl ||
        (cpl == best_cpl && best != kNilNode && pop.num_id(i) < pop.num_id(best))) {
      best = i;
      best_cpl = cpl;
    }
  }
  return best;
}

bool criterion_4() {
  Rng rng(20260822);
  const uint8_t len = memvec_len_for_capacity(256);

  size_t histories = 0, operations = 0;
  for (int seq = 0; seq < 1000; ++seq) {
    const uint32_t n = 8 + static_cast<uint32_t>(rng.next_below(249));  // up to 256 nodes
    Population pop(len);
    std::set<uint64_t> ids;
    for (uint32_t i = 0; i < n; ++i) {
      uint64_t id = rng.next_u64();
      while (!ids.insert(id).second) id = rng.next_u64();
      pop.add_node(id, MembershipVector::random(rng, len), NodeKind::Peer);
    }
    const uint32_t ops = n * 2;
    for (uint32_t step = 0; step < ops; ++step) {
      NodeIndex victim = static_cast<NodeIndex>(rng.next_below(n));
      if (pop.online(victim))
        pop.leave_cooperative(victim);
      else
        pop.insert(victim);
      ++operations;
      std::vector<std::string> violations = pop.check_invariants();
      if (!violations.empty()) {
        detail("history %d step %u: %s", seq, step, violations.front().c_str());
        return verdict(4, "overlay operations and search oracles", false,
                       "invariant violated");
      }
    }
    ++histories;
  }
  detail("%zu random histories, %zu operations, zero invariant violations", histories,
         operations);

  size_t searches = 0;
  for (int overlay = 0; overlay < 50; ++overlay) {
    const uint32_t n = 64;
    Population pop(len);
    std::set<uint64_t> ids;
    for (uint32_t i = 0; i < n; ++i) {
      uint64_t id = rng.next_u64();
      while (!ids.insert(id).second) id = rng.next_u64();
      pop.add_node(id, MembershipVector::random(rng, len), NodeKind::Peer);
    }
    for (uint32_t i = 0; i < n; ++i) pop.insert(static_cast<NodeIndex>(i));

    for (NodeIndex from = 0; from < static_cast<NodeIndex>(n); ++from) {
      for (NodeIndex to = 0; to < static_cast<NodeIndex>(n); ++to) {
        SearchResult res;
        pop.search_num_id(from, pop.num_id(to), res);
        ++searches;
        if (res.status != SearchStatus::Success || res.terminal != to || !res.exact) {
          detail("numeric mismatch: overlay %d, %u -> %u", overlay, from, to);
          return verdict(4, "overlay operations and search oracles", false,
                         "numeric search oracle mismatch");
        }
        SearchResult byname;
        pop.search_name_id(from, pop.mem_vec(to), byname);
        ++searches;
        if (byname.status != SearchStatus::Success ||
            byname.terminal != name_oracle(pop, pop.mem_vec(to))) {
          detail("name mismatch: overlay %d, %u -> %u", overlay, from, to);
          return verdict(4, "overlay operations and search oracles", false,
                         "name search oracle mismatch");
        }
      }
      // Off-key targets exercise the no-overshoot rule away from exact hits.
      for (int probe = 0; probe < 8; ++probe) {
        uint64_t target = rng.next_u64();
        SearchResult res;
        pop.search_num_id(from, target, res);
        ++searches;
        if (res.terminal != numeric_oracle(pop, target)) {
          detail("numeric mismatch at random target: overlay %d", overlay);
          return verdict(4, "overlay operations and search oracles", false,
                         "numeric search oracle mismatch");
        }
      }
    }
  }
  detail("50 overlays, %zu oracle-checked searches, zero mismatches", searches);
  return verdict(4, "overlay operations and search oracles", true);
}

// ---------------------------------------------------------------------------
// 5. Hop counts: a churn-free 1024-peer world routes in O(log n) hops.
// ---------------------------------------------------------------------------

bool criterion_5() {
  SimulationConfig cfg = make_config("BLOCKCHAIN", 1, 1024, 10, 0, "NONE", "COOPERATIVE", 0.0, 7);
  RunOptions opt;
  opt.store_dir = g_scratch / "c5-store";
  opt.threads = 1;
  RunOutput out = run_simulation(cfg, opt);
  const MetricValue& hops = out.report.topologies.at(0).query_hops;
  detail("%llu searches, mean %.3f hops (accepted range [5, 25])",
         static_cast<unsigned long long>(hops.samples), hops.value);
  std::string why;
  if (hops.samples < 10000) why = "fewer than 10^4 searches";
  else if (hops.value < 5.0 || hops.value > 25.0) why = "mean hops outside [5, 25]";
  return verdict(5, "hop counts stay logarithmic", why.empty(), why);
}

// ---------------------------------------------------------------------------
// 6. Churn semantics: cooperative departures lose nothing, abrupt departures
//    never do better, on every one of 20 paired seeds.
// ---------------------------------------------------------------------------

bool criterion_6() {
  int coop_perfect = 0, adversarial_bounded = 0;
  double worst_adversarial = 1.0;
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    SimulationConfig coop =
        make_config("BLOCKCHAIN", 1, 128, 24, 1, "FAST_DEBIAN", "COOPERATIVE", 0.1, seed);
    SimulationConfig abrupt =
        make_config("BLOCKCHAIN", 1, 128, 24, 1, "FAST_DEBIAN", "ADVERSARIAL", 0.1, seed);
    Snapshot snap = generate_snapshot(coop.cache_key(), 0);

    auto s1 = make_blockchain_scenario();
    auto s2 = make_blockchain_scenario();
    double coop_ratio =
        play_snapshot(coop, snap, *s1, 3, LogSink{}).query_success_ratio.value;
    double abrupt_ratio =
        play_snapshot(abrupt, snap, *s2, 3, LogSink{}).query_success_ratio.value;

    if (coop_ratio == 1.0) ++coop_perfect;
    if (abrupt_ratio <= coop_ratio) ++adversarial_bounded;
    worst_adversarial = std::min(worst_adversarial, abrupt_ratio);
  }
  detail("cooperative ratio exactly 1.0: %d/20 seeds", coop_perfect);
  detail("adversarial <= cooperative: %d/20 seeds (worst adversarial %.4f)",
         adversarial_bounded, worst_adversarial);
  std::string why;
  if (coop_perfect != 20) why = "a cooperative run lost a search";
  else if (adversarial_bounded != 20) why = "an adversarial run beat its cooperative twin";
  return verdict(6, "churn repair semantics", why.empty(), why);
}

// ---------------------------------------------------------------------------
// 7. Evaluator oracle: with everyone online the malicious-majority rate
//    matches sampling without replacement from the population.
// ---------------------------------------------------------------------------

bool criterion_7() {
  // Exact reference: 1024 peers, floor(0.16 * 1024) = 163 malicious,
  // committees of 3 -> P(majority malicious) by direct enumeration.
  auto comb = [](uint64_t n, uint64_t r) -> unsigned __int128 {
    if (r > n) return 0;
    unsigned __int128 out = 1;
    for (uint64_t i = 0; i < r; ++i) {
      out *= (n - i);
      out /= (i + 1);
    }
    return out;
  };
  const uint64_t N = 1024, K = 163;
  double expected =
      static_cast<double>(static_cast<uint64_t>(comb(K, 2) * comb(N - K, 1) + comb(K, 3))) /
      static_cast<double>(static_cast<uint64_t>(comb(N, 3)));

  SimulationConfig cfg = make_config("BLOCKCHAIN", 1, 1024, 10, 1, "NONE", "COOPERATIVE", 0.16, 3);
  RunOptions opt;
  opt.store_dir = g_scratch / "c7-store";
  opt.threads = 1;
  RunOutput out = run_simulation(cfg, opt);
  const MetricValue& adv = out.report.topologies.at(0).adversarial_success;
  detail("expected %.6f, simulated %.6f over %llu committees (tolerance 0.02)", expected,
         adv.value, static_cast<unsigned long long>(adv.samples));
  const MetricValue& undersized = out.report.topologies.at(0).committee_undersized;
  detail("undersized committees: %.0f", undersized.value);

  std::string why;
  if (adv.samples < 10000) why = "too few committees";
  else if (std::abs(adv.value - expected) > 0.02) why = "rate off the oracle by over 0.02";
  else if (undersized.value != 0.0) why = "committees went undersized with everyone online";
  return verdict(7, "committee subversion rate matches the oracle", why.empty(), why);
}

// ---------------------------------------------------------------------------
// 8. Determinism: the flagship demo yields bit-identical reports for any
//    worker count.
// ---------------------------------------------------------------------------

bool criterion_8() {
  fs::path config = g_scratch / "demo.conf";
  std::string store = (g_scratch / "demo-store").string();
  CommandResult one = cli("run " + config.string() + " --store " + store + " --out " +
                          (g_scratch / "t1-out").string() + " --threads 1");
  CommandResult eight = cli("run " + config.string() + " --store " + store + " --out " +
                            (g_scratch / "t8-out").string() + " --threads 8");
  if (one.exit_code != 0 || eight.exit_code != 0)
    return verdict(8, "reports independent of worker count", false, "a rerun failed");

  bool csv_equal = slurp(g_scratch / "t1-out/report.csv") == slurp(g_scratch / "t8-out/report.csv");
  bool json_equal =
      slurp(g_scratch / "t1-out/report.json") == slurp(g_scratch / "t8-out/report.json");
  bool matches_original =
      slurp(g_scratch / "t1-out/report.csv") == slurp(g_scratch / "demo-out/report.csv");
  detail("1-thread vs 8-thread report.csv identical: %s", csv_equal ? "yes" : "no");
  detail("1-thread vs 8-thread report.json identical: %s", json_equal ? "yes" : "no");
  detail("rerun matches the original demo report: %s", matches_original ? "yes" : "no");

  std::string why;
  if (!csv_equal || !json_equal) why = "reports differ across worker counts";
  else if (!matches_original) why = "rerun differs from the original run";
  return verdict(8, "reports independent of worker count", why.empty(), why);
}

}  // namespace

int main() {
  g_scratch = fs::temp_directory_path() /
              ("skipsim_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(g_scratch);
  fs::create_directories(g_scratch);

  int failures = 0;
  failures += !criterion_1();
  failures += !criterion_2();
  failures += !criterion_3();
  failures += !criterion_4();
  failures += !criterion_5();
  failures += !criterion_6();
  failures += !criterion_7();
  failures += !criterion_8();

  fs::remove_all(g_scratch);
  if (failures == 0) {
    printf("all 8 acceptance criteria hold\n");
    return 0;
  }
  printf("%d acceptance criteria failed\n", failures);
  return 1;
}
