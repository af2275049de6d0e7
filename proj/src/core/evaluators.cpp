#include "core/evaluators.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <limits>

#include "core/errors.hpp"
#include "core/hash.hpp"
#include "core/snapshot_store.hpp"

namespace skipsim {

namespace {

double round6(double v) { return std::round(v * 1e6) / 1e6; }

std::string fmt6(double v) {
  char buf[48];
  snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

void MetricsCollector::on_search_outcome(SearchStatus status) {
  switch (status) {
    case SearchStatus::Success: ++searches_ok_; break;
    case SearchStatus::Failed: ++searches_failed_; break;
    case SearchStatus::Rejected: ++metrics_.rejected_searches; break;
  }
}

void MetricsCollector::on_query_completed(uint64_t hops, double latency_ms) {
  ++queries_done_;
  hops_sum_ += static_cast<double>(hops);
  latency_sum_ += latency_ms;
}

void MetricsCollector::on_probe(bool routed_to_object, bool owner_online) {
  ++probes_;
  if (routed_to_object && owner_online) ++probes_hit_;
  if (owner_online) ++probes_owner_online_;
}

void MetricsCollector::on_committee(bool validated, bool malicious_majority, bool undersized) {
  ++committees_;
  if (validated) ++committees_valid_;
  if (malicious_majority) ++committees_malicious_;
  if (undersized) ++committees_undersized_;
}

void MetricsCollector::set_event_hashes(uint64_t churn_query, uint64_t full) {
  metrics_.events_churn_query_hash = churn_query;
  metrics_.events_full_hash = full;
}

TopologyMetrics MetricsCollector::finish() const {
  TopologyMetrics m = metrics_;
  if (queries_done_ > 0) {
    m.query_hops = {hops_sum_ / static_cast<double>(queries_done_), queries_done_};
    m.query_latency_ms = {latency_sum_ / static_cast<double>(queries_done_), queries_done_};
  }
  const uint64_t routed = searches_ok_ + searches_failed_;
  if (routed > 0)
    m.query_success_ratio = {static_cast<double>(searches_ok_) / static_cast<double>(routed),
                             routed};
  if (probes_ > 0) {
    m.data_availability = {static_cast<double>(probes_hit_) / static_cast<double>(probes_),
                           probes_};
    m.data_availability_omniscient = {
        static_cast<double>(probes_owner_online_) / static_cast<double>(probes_), probes_};
  }
  if (committees_ > 0)
    m.adversarial_success = {
        static_cast<double>(committees_malicious_) / static_cast<double>(committees_),
        committees_};
  m.txb_total = {static_cast<double>(minted_), minted_};
  m.txb_validated = {static_cast<double>(committees_valid_), committees_valid_};
  m.txb_malicious_majority = {static_cast<double>(committees_malicious_), committees_malicious_};
  m.committee_undersized = {static_cast<double>(committees_undersized_), committees_undersized_};
  return m;
}

const std::vector<std::pair<std::string, MetricValue TopologyMetrics::*>>& metric_fields() {
  static const std::vector<std::pair<std::string, MetricValue TopologyMetrics::*>> kFields = {
      {"query_hops", &TopologyMetrics::query_hops},
      {"query_latency_ms", &TopologyMetrics::query_latency_ms},
      {"query_success_ratio", &TopologyMetrics::query_success_ratio},
      {"data_availability", &TopologyMetrics::data_availability},
      {"data_availability_omniscient", &TopologyMetrics::data_availability_omniscient},
      {"adversarial_success", &TopologyMetrics::adversarial_success},
      {"txb_total", &TopologyMetrics::txb_total},
      {"txb_validated", &TopologyMetrics::txb_validated},
      {"txb_malicious_majority", &TopologyMetrics::txb_malicious_majority},
      {"committee_undersized", &TopologyMetrics::committee_undersized},
  };
  return kFields;
}

std::map<std::string, AggregateStat> aggregate_metrics(
    const std::vector<TopologyMetrics>& per_topology) {
  std::map<std::string, AggregateStat> out;
  for (const auto& [name, field] : metric_fields()) {
    AggregateStat agg;
    double sum = 0.0;
    agg.min = std::numeric_limits<double>::infinity();
    agg.max = -std::numeric_limits<double>::infinity();
    for (const TopologyMetrics& t : per_topology) {
      const MetricValue& mv = t.*field;
      if (mv.samples == 0) continue;
      ++agg.topologies;
      sum += mv.value;
      agg.min = std::min(agg.min, mv.value);
      agg.max = std::max(agg.max, mv.value);
    }
    if (agg.topologies > 0) {
      agg.mean = sum / static_cast<double>(agg.topologies);
      if (agg.topologies > 1) {
        double sq = 0.0;
        for (const TopologyMetrics& t : per_topology) {
          const MetricValue& mv = t.*field;
          if (mv.samples == 0) continue;
          sq += (mv.value - agg.mean) * (mv.value - agg.mean);
        }
        agg.std = std::sqrt(sq / static_cast<double>(agg.topologies - 1));
      }
    } else {
      agg.min = agg.max = 0.0;
    }
    out.emplace(name, agg);
  }
  return out;
}

std::string report_to_csv(const Report& report) {
  std::string out = "metric,topology_index,value,samples\n";
  for (const TopologyMetrics& t : report.topologies) {
    for (const auto& [name, field] : metric_fields()) {
      const MetricValue& mv = t.*field;
      out += name + "," + std::to_string(t.topology_index) + ",";
      out += mv.samples == 0 ? "NA" : fmt6(mv.value);
      out += "," + std::to_string(mv.samples) + "\n";
    }
  }
  auto aggregates = aggregate_metrics(report.topologies);
  for (const auto& [name, field] : metric_fields()) {
    const AggregateStat& a = aggregates.at(name);
    const std::pair<const char*, double> stats[4] = {
        {".mean", a.mean}, {".std", a.std}, {".min", a.min}, {".max", a.max}};
    for (const auto& [suffix, value] : stats) {
      out += name + suffix + ",AGG,";
      out += a.topologies == 0 ? "NA" : fmt6(value);
      out += "," + std::to_string(a.topologies) + "\n";
    }
  }
  return out;
}

std::string report_to_json(const Report& report) {
  using json = nlohmann::ordered_json;
  const SimulationConfig& c = report.config;

  json cfg;
  cfg["SimulationType"] = simulation_type_name(c.simulation_type);
  cfg["Protocol"] = c.protocol;
  cfg["Topologies"] = c.topologies;
  cfg["SystemCapacity"] = c.system_capacity;
  cfg["LifeTime"] = c.lifetime;
  cfg["TXB_RATE"] = c.txb_rate;
  cfg["ChurnModel"] = churn_model_name(c.churn_model);
  cfg["ChurnType"] = churn_type_name(c.churn_type);
  cfg["Malicious"] = round6(c.malicious);
  cfg["LOG"] = c.log_snapshots;
  cfg["Seed"] = c.seed;

  json topo_array = json::array();
  for (const TopologyMetrics& t : report.topologies) {
    json entry;
    entry["topology_index"] = t.topology_index;
    json metrics;
    for (const auto& [name, field] : metric_fields()) {
      const MetricValue& mv = t.*field;
      json one;
      if (mv.samples == 0)
        one["value"] = nullptr;
      else
        one["value"] = round6(mv.value);
      one["samples"] = mv.samples;
      metrics[name] = one;
    }
    entry["metrics"] = metrics;
    entry["rejected_searches"] = t.rejected_searches;
    entry["events_churn_query_hash"] = hex16(t.events_churn_query_hash);
    entry["events_full_hash"] = hex16(t.events_full_hash);
    topo_array.push_back(entry);
  }

  json agg;
  auto aggregates = aggregate_metrics(report.topologies);
  for (const auto& [name, field] : metric_fields()) {
    const AggregateStat& a = aggregates.at(name);
    json one;
    if (a.topologies == 0) {
      one["mean"] = nullptr;
      one["std"] = nullptr;
      one["min"] = nullptr;
      one["max"] = nullptr;
    } else {
      one["mean"] = round6(a.mean);
      one["std"] = round6(a.std);
      one["min"] = round6(a.min);
      one["max"] = round6(a.max);
    }
    one["topologies"] = a.topologies;
    agg[name] = one;
  }

  json root;
  root["config"] = cfg;
  root["topologies"] = topo_array;
  root["aggregate"] = agg;
  return root.dump(2) + "\n";
}

void write_report_files(const Report& report, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  write_text_file(out_dir / "report.csv", report_to_csv(report));
  write_text_file(out_dir / "report.json", report_to_json(report));
}

}  // namespace skipsim
