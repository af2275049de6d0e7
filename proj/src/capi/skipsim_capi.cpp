#include "skipsim/skipsim.h"

#include <cstring>
#include <map>
#include <sstream>
#include <string>

#include "core/engine.hpp"
#include "core/errors.hpp"
#include "core/hash.hpp"
#include "core/snapshot_store.hpp"

struct skipsim_config {
  skipsim::SimulationConfig cfg;
};

struct skipsim_report {
  skipsim::Report report;
  skipsim::RunStats stats;
};

namespace {

thread_local std::string g_last_error = "no error";

void set_error(const std::string& message) { g_last_error = message; }

char* copy_out(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

template <typename Fn>
skipsim_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const skipsim::ConfigError& e) {
    set_error(e.what());
    return SKIPSIM_ERR_CONFIG;
  } catch (const skipsim::CacheError& e) {
    set_error(e.what());
    return SKIPSIM_ERR_CACHE;
  } catch (const skipsim::IoError& e) {
    set_error(e.what());
    return SKIPSIM_ERR_IO;
  } catch (const std::exception& e) {
    set_error(e.what());
    return SKIPSIM_ERR_INTERNAL;
  }
}

skipsim_status bad_argument(const char* message) {
  set_error(message);
  return SKIPSIM_ERR_ARGUMENT;
}

skipsim::RunOptions to_run_options(const skipsim_run_options* opt, skipsim_log_fn log,
                                   void* log_user) {
  skipsim::RunOptions out;
  if (opt) {
    if (opt->store_dir) out.store_dir = opt->store_dir;
    if (opt->out_dir) out.out_dir = opt->out_dir;
    out.threads = opt->threads;
    if (opt->committee_k != 0) out.committee_k = opt->committee_k;
  }
  if (log) out.log = [log, log_user](const std::string& line) { log(line.c_str(), log_user); };
  return out;
}

const skipsim::MetricValue* find_metric(const skipsim::TopologyMetrics& t, const char* name) {
  for (const auto& [field_name, field] : skipsim::metric_fields())
    if (field_name == name) return &(t.*field);
  return nullptr;
}

}  // namespace

extern "C" {

const char* skipsim_last_error(void) { return g_last_error.c_str(); }

skipsim_status skipsim_config_parse_text(const char* text, skipsim_config** out) {
  if (!text || !out) return bad_argument("null argument to skipsim_config_parse_text");
  return guarded([&] {
    auto* handle = new skipsim_config{skipsim::SimulationConfig::parse(text)};
    *out = handle;
    return SKIPSIM_OK;
  });
}

skipsim_status skipsim_config_parse_file(const char* path, skipsim_config** out) {
  if (!path || !out) return bad_argument("null argument to skipsim_config_parse_file");
  return guarded([&] {
    std::string text = skipsim::read_text_file(path);
    auto* handle = new skipsim_config{skipsim::SimulationConfig::parse(text)};
    *out = handle;
    return SKIPSIM_OK;
  });
}

skipsim_status skipsim_config_override(skipsim_config* cfg, const char* key, const char* value) {
  if (!cfg || !key || !value) return bad_argument("null argument to skipsim_config_override");
  return guarded([&] {
    cfg->cfg.apply_override(key, value);
    return SKIPSIM_OK;
  });
}

skipsim_status skipsim_config_serialize(const skipsim_config* cfg, char** out_text) {
  if (!cfg || !out_text) return bad_argument("null argument to skipsim_config_serialize");
  return guarded([&] {
    *out_text = copy_out(cfg->cfg.serialize());
    return SKIPSIM_OK;
  });
}

void skipsim_config_free(skipsim_config* cfg) { delete cfg; }

skipsim_status skipsim_run(const skipsim_config* cfg, const skipsim_run_options* opt,
                           skipsim_log_fn log, void* log_user, skipsim_report** out) {
  if (!cfg || !out) return bad_argument("null argument to skipsim_run");
  return guarded([&] {
    skipsim::RunOutput result = skipsim::run_simulation(cfg->cfg, to_run_options(opt, log, log_user));
    *out = new skipsim_report{std::move(result.report), result.stats};
    return SKIPSIM_OK;
  });
}

skipsim_status skipsim_replay(const skipsim_config* cfg, const skipsim_run_options* opt,
                              skipsim_log_fn log, void* log_user, skipsim_report** out) {
  if (!cfg || !out) return bad_argument("null argument to skipsim_replay");
  return guarded([&] {
    skipsim::RunOutput result =
        skipsim::replay_simulation(cfg->cfg, to_run_options(opt, log, log_user));
    *out = new skipsim_report{std::move(result.report), result.stats};
    return SKIPSIM_OK;
  });
}

uint32_t skipsim_report_topology_count(const skipsim_report* rep) {
  return rep ? static_cast<uint32_t>(rep->report.topologies.size()) : 0;
}

uint32_t skipsim_report_cache_hits(const skipsim_report* rep) {
  return rep ? rep->stats.cache_hits : 0;
}

uint32_t skipsim_report_generated(const skipsim_report* rep) {
  return rep ? rep->stats.generated : 0;
}

double skipsim_report_wall_seconds(const skipsim_report* rep) {
  return rep ? rep->stats.wall_seconds : 0.0;
}

skipsim_status skipsim_report_metric(const skipsim_report* rep, uint32_t topology_index,
                                     const char* metric, double* out_value,
                                     uint64_t* out_samples) {
  if (!rep || !metric || !out_value || !out_samples)
    return bad_argument("null argument to skipsim_report_metric");
  if (topology_index >= rep->report.topologies.size())
    return bad_argument("topology_index out of range");
  const skipsim::MetricValue* mv = find_metric(rep->report.topologies[topology_index], metric);
  if (!mv) {
    set_error(std::string("unknown metric '") + metric + "'");
    return SKIPSIM_ERR_ARGUMENT;
  }
  *out_value = mv->samples == 0 ? 0.0 : mv->value;
  *out_samples = mv->samples;
  return SKIPSIM_OK;
}

skipsim_status skipsim_report_aggregate(const skipsim_report* rep, const char* metric,
                                        const char* stat, double* out_value,
                                        uint64_t* out_topologies) {
  if (!rep || !metric || !stat || !out_value || !out_topologies)
    return bad_argument("null argument to skipsim_report_aggregate");
  return guarded([&] {
    auto aggregates = skipsim::aggregate_metrics(rep->report.topologies);
    auto it = aggregates.find(metric);
    if (it == aggregates.end()) {
      set_error(std::string("unknown metric '") + metric + "'");
      return SKIPSIM_ERR_ARGUMENT;
    }
    const skipsim::AggregateStat& a = it->second;
    const std::string which = stat;
    double value = 0.0;
    if (which == "mean")
      value = a.mean;
    else if (which == "std")
      value = a.std;
    else if (which == "min")
      value = a.min;
    else if (which == "max")
      value = a.max;
    else {
      set_error("unknown stat '" + which + "' (want mean, std, min or max)");
      return SKIPSIM_ERR_ARGUMENT;
    }
    *out_value = a.topologies == 0 ? 0.0 : value;
    *out_topologies = a.topologies;
    return SKIPSIM_OK;
  });
}

skipsim_status skipsim_report_event_hashes(const skipsim_report* rep, uint32_t topology_index,
                                           char** out_churn_query_hash, char** out_full_hash) {
  if (!rep || !out_churn_query_hash || !out_full_hash)
    return bad_argument("null argument to skipsim_report_event_hashes");
  if (topology_index >= rep->report.topologies.size())
    return bad_argument("topology_index out of range");
  const skipsim::TopologyMetrics& t = rep->report.topologies[topology_index];
  *out_churn_query_hash = copy_out(skipsim::hex16(t.events_churn_query_hash));
  *out_full_hash = copy_out(skipsim::hex16(t.events_full_hash));
  return SKIPSIM_OK;
}

skipsim_status skipsim_report_csv(const skipsim_report* rep, char** out_text) {
  if (!rep || !out_text) return bad_argument("null argument to skipsim_report_csv");
  return guarded([&] {
    *out_text = copy_out(skipsim::report_to_csv(rep->report));
    return SKIPSIM_OK;
  });
}

skipsim_status skipsim_report_json(const skipsim_report* rep, char** out_text) {
  if (!rep || !out_text) return bad_argument("null argument to skipsim_report_json");
  return guarded([&] {
    *out_text = copy_out(skipsim::report_to_json(rep->report));
    return SKIPSIM_OK;
  });
}

void skipsim_report_free(skipsim_report* rep) { delete rep; }

skipsim_status skipsim_store_list(const char* store_dir, char** out_text) {
  if (!store_dir || !out_text) return bad_argument("null argument to skipsim_store_list");
  return guarded([&] {
    skipsim::SnapshotStore store(store_dir);
    std::ostringstream out;
    for (const skipsim::StoreListing& entry : store.list()) {
      out << entry.key_hash << "  [" << entry.key.canonical_string() << "]  topologies:";
      for (uint32_t idx : entry.topology_indices) out << " t" << idx;
      out << "\n";
    }
    *out_text = copy_out(out.str());
    return SKIPSIM_OK;
  });
}

skipsim_status skipsim_store_verify(const char* store_dir, char** out_text,
                                    uint64_t* out_problem_count) {
  if (!store_dir || !out_text || !out_problem_count)
    return bad_argument("null argument to skipsim_store_verify");
  return guarded([&] {
    skipsim::SnapshotStore store(store_dir);
    std::vector<std::string> problems = store.verify();
    std::string joined;
    for (const std::string& p : problems) joined += p + "\n";
    *out_text = copy_out(joined);
    *out_problem_count = problems.size();
    return SKIPSIM_OK;
  });
}

void skipsim_string_free(char* s) { delete[] s; }

}  // extern "C"
