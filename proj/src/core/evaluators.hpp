#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/overlay.hpp"

namespace skipsim {

// A measured quantity; samples == 0 means "no data" and prints as NA.
struct MetricValue {
  double value = 0.0;
  uint64_t samples = 0;
};

struct TopologyMetrics {
  uint32_t topology_index = 0;
  MetricValue query_hops;                    // mean hops per completed query
  MetricValue query_latency_ms;              // mean simulated latency per completed query
  MetricValue query_success_ratio;           // over every routed search, probes included
  MetricValue data_availability;             // probe routed to the object and owner online
  MetricValue data_availability_omniscient;  // owner online, routing ignored
  MetricValue adversarial_success;           // committees with a malicious majority
  MetricValue txb_total;
  MetricValue txb_validated;
  MetricValue txb_malicious_majority;
  MetricValue committee_undersized;
  uint64_t rejected_searches = 0;  // excluded from ratios, reported separately
  uint64_t events_churn_query_hash = 0;
  uint64_t events_full_hash = 0;
};

// Accumulates one topology's observations while a schedule is played.
class MetricsCollector {
 public:
  explicit MetricsCollector(uint32_t topology_index) { metrics_.topology_index = topology_index; }

  // Every routed search lands here exactly once, probes and committee
  // lookups included. Rejected searches are counted but excluded.
  void on_search_outcome(SearchStatus status);
  // Completed queries additionally contribute hops and latency.
  void on_query_completed(uint64_t hops, double latency_ms);
  void on_probe(bool routed_to_object, bool owner_online);
  void on_txb_minted(uint64_t count) { minted_ += count; }
  void on_committee(bool validated, bool malicious_majority, bool undersized);
  void set_event_hashes(uint64_t churn_query, uint64_t full);

  TopologyMetrics finish() const;

 private:
  TopologyMetrics metrics_;
  uint64_t searches_ok_ = 0, searches_failed_ = 0;
  uint64_t queries_done_ = 0;
  double hops_sum_ = 0.0, latency_sum_ = 0.0;
  uint64_t probes_ = 0, probes_hit_ = 0, probes_owner_online_ = 0;
  uint64_t minted_ = 0, committees_ = 0, committees_valid_ = 0, committees_malicious_ = 0,
           committees_undersized_ = 0;
};

struct AggregateStat {
  double mean = 0.0, std = 0.0, min = 0.0, max = 0.0;
  uint64_t topologies = 0;  // contributing topologies; 0 means NA
};

struct Report {
  SimulationConfig config;
  std::vector<TopologyMetrics> topologies;  // ascending topology_index
};

// Names and order of the metric columns, shared by CSV and JSON output.
const std::vector<std::pair<std::string, MetricValue TopologyMetrics::*>>& metric_fields();

std::map<std::string, AggregateStat> aggregate_metrics(const std::vector<TopologyMetrics>& per_topology);

std::string report_to_csv(const Report& report);
std::string report_to_json(const Report& report);

// Writes report.csv and report.json into out_dir (created if needed).
void write_report_files(const Report& report, const std::filesystem::path& out_dir);

}  // namespace skipsim
