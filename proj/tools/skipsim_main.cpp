#include <CLI11.hpp>

#include <cstdio>
#include <string>
#include <vector>

#include "skipsim/skipsim.h"

namespace {

// 0 success, 1 ordinary failure, 2 damaged snapshot store.
int exit_code_for(skipsim_status status) {
  if (status == SKIPSIM_OK) return 0;
  return status == SKIPSIM_ERR_CACHE ? 2 : 1;
}

void log_to_stderr(const char* line, void*) { fprintf(stderr, "%s\n", line); }

struct RunArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::string store_dir = "store";
  uint32_t threads = 0;
  uint32_t committee_k = 0;
  std::vector<std::string> overrides;
};

void add_run_options(CLI::App* cmd, RunArgs& args) {
  cmd->add_option("config", args.config_path, "configuration file")->required();
  cmd->add_option("--out", args.out_dir, "directory for report.csv and report.json")
      ->capture_default_str();
  cmd->add_option("--store", args.store_dir, "snapshot store directory")->capture_default_str();
  cmd->add_option("--threads", args.threads, "worker threads (0 = one per hardware thread)")
      ->capture_default_str();
  cmd->add_option("--committee", args.committee_k, "validation committee size (0 = default)")
      ->capture_default_str();
  cmd->add_option("--override", args.overrides, "KEY=VALUE configuration override (repeatable)")
      ->type_name("KEY=VALUE");
}

int fail(skipsim_status status) {
  fprintf(stderr, "error: %s\n", skipsim_last_error());
  return exit_code_for(status);
}

int run_or_replay(const RunArgs& args, bool replay) {
  skipsim_config* cfg = nullptr;
  skipsim_status status = skipsim_config_parse_file(args.config_path.c_str(), &cfg);
  if (status != SKIPSIM_OK) return fail(status);

  for (const std::string& kv : args.overrides) {
    size_t eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      fprintf(stderr, "error: override '%s' is not KEY=VALUE\n", kv.c_str());
      skipsim_config_free(cfg);
      return 1;
    }
    status = skipsim_config_override(cfg, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str());
    if (status != SKIPSIM_OK) {
      skipsim_config_free(cfg);
      return fail(status);
    }
  }

  skipsim_run_options opt = {};
  opt.store_dir = args.store_dir.c_str();
  opt.out_dir = args.out_dir.empty() ? nullptr : args.out_dir.c_str();
  opt.threads = args.threads;
  opt.committee_k = args.committee_k;

  skipsim_report* report = nullptr;
  status = replay ? skipsim_replay(cfg, &opt, log_to_stderr, nullptr, &report)
                  : skipsim_run(cfg, &opt, log_to_stderr, nullptr, &report);
  skipsim_config_free(cfg);
  if (status != SKIPSIM_OK) return fail(status);

  fprintf(stderr, "%s finished: %u topologies (%u cached, %u generated) in %.2fs\n",
          replay ? "replay" : "run", skipsim_report_topology_count(report),
          skipsim_report_cache_hits(report), skipsim_report_generated(report),
          skipsim_report_wall_seconds(report));
  if (!args.out_dir.empty())
    fprintf(stderr, "reports written to %s/report.csv and %s/report.json\n",
            args.out_dir.c_str(), args.out_dir.c_str());
  skipsim_report_free(report);
  return 0;
}

int cache_list(const std::string& store_dir) {
  char* text = nullptr;
  skipsim_status status = skipsim_store_list(store_dir.c_str(), &text);
  if (status != SKIPSIM_OK) return fail(status);
  fputs(text, stdout);
  skipsim_string_free(text);
  return 0;
}

int cache_verify(const std::string& store_dir) {
  char* text = nullptr;
  uint64_t problems = 0;
  skipsim_status status = skipsim_store_verify(store_dir.c_str(), &text, &problems);
  if (status != SKIPSIM_OK) return fail(status);
  if (problems == 0) {
    fprintf(stderr, "store %s: all content hashes verified\n", store_dir.c_str());
    skipsim_string_free(text);
    return 0;
  }
  fputs(text, stderr);
  fprintf(stderr, "store %s: %llu problem(s) found\n", store_dir.c_str(),
          static_cast<unsigned long long>(problems));
  skipsim_string_free(text);
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic overlay-network simulator"};
  app.require_subcommand(1);

  RunArgs run_args;
  CLI::App* run_cmd = app.add_subcommand("run", "simulate, generating snapshots as needed");
  add_run_options(run_cmd, run_args);

  RunArgs replay_args;
  CLI::App* replay_cmd =
      app.add_subcommand("replay", "re-run on stored snapshots only, never generating");
  add_run_options(replay_cmd, replay_args);

  std::string list_store = "store";
  CLI::App* list_cmd = app.add_subcommand("cache-list", "list stored snapshot sets");
  list_cmd->add_option("--store", list_store, "snapshot store directory")->capture_default_str();

  std::string verify_store = "store";
  CLI::App* verify_cmd =
      app.add_subcommand("cache-verify", "recompute every content hash in the store");
  verify_cmd->add_option("--store", verify_store, "snapshot store directory")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  if (run_cmd->parsed()) return run_or_replay(run_args, /*replay=*/false);
  if (replay_cmd->parsed()) return run_or_replay(replay_args, /*replay=*/true);
  if (list_cmd->parsed()) return cache_list(list_store);
  if (verify_cmd->parsed()) return cache_verify(verify_store);
  return 1;
}
