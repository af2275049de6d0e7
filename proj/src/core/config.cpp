#include "core/config.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

#include "core/errors.hpp"
#include "core/hash.hpp"
#include "core/topology.hpp"

namespace skipsim {

namespace {

constexpr const char* kKeys[] = {
    "SimulationType", "Protocol", "Topologies", "SystemCapacity", "LifeTime",
    "TXB_RATE",       "ChurnModel", "ChurnType", "Malicious",     "LOG",
    "Seed",
};

bool known_key(std::string_view key) {
  return std::find(std::begin(kKeys), std::end(kKeys), key) != std::end(kKeys);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

uint64_t parse_u64_value(std::string_view value, const std::string& what) {
  if (value.empty()) throw ConfigError(what + ": empty value");
  uint64_t v = 0;
  for (char c : value) {
    if (c < '0' || c > '9') throw ConfigError(what + ": expected a non-negative integer");
    const uint64_t next = v * 10 + static_cast<uint64_t>(c - '0');
    if (next < v) throw ConfigError(what + ": value out of range");
    v = next;
  }
  return v;
}

double parse_fraction_value(std::string_view value, const std::string& what) {
  const std::string tmp(value);
  char* end = nullptr;
  const double v = std::strtod(tmp.c_str(), &end);
  if (end != tmp.c_str() + tmp.size()) throw ConfigError(what + ": expected a number");
  return v;
}

}  // namespace

const char* simulation_type_name(SimulationType t) {
  return t == SimulationType::Blockchain ? "BLOCKCHAIN" : "STORAGE";
}

const char* churn_type_name(ChurnType t) {
  return t == ChurnType::Adversarial ? "ADVERSARIAL" : "COOPERATIVE";
}

std::string CacheKey::canonical_string() const {
  std::string s;
  s += "SystemCapacity=" + std::to_string(system_capacity);
  s += ";Topologies=" + std::to_string(topologies);
  s += ";ChurnModel=";
  s += churn_model_name(churn_model);
  s += ";LifeTime=" + std::to_string(lifetime);
  s += ";Seed=" + std::to_string(seed);
  return s;
}

uint64_t CacheKey::hash() const { return fnv1a64(canonical_string()); }

CacheKey SimulationConfig::cache_key() const {
  return {system_capacity, topologies, churn_model, lifetime, seed};
}

uint8_t SimulationConfig::memvec_len() const { return memvec_len_for_capacity(system_capacity); }

std::string SimulationConfig::serialize() const {
  std::string out;
  out += "SimulationType = ";
  out += simulation_type_name(simulation_type);
  out += "\nProtocol = " + protocol;
  out += "\nTopologies = " + std::to_string(topologies);
  out += "\nSystemCapacity = " + std::to_string(system_capacity);
  out += "\nLifeTime = " + std::to_string(lifetime);
  out += "\nTXB_RATE = " + std::to_string(txb_rate);
  out += "\nChurnModel = ";
  out += churn_model_name(churn_model);
  out += "\nChurnType = ";
  out += churn_type_name(churn_type);
  char frac[32];
  std::snprintf(frac, sizeof frac, "%.6f", malicious);
  out += "\nMalicious = ";
  out += frac;
  out += "\nLOG = ";
  out += log_snapshots ? "true" : "false";
  out += "\nSeed = " + std::to_string(seed);
  out += '\n';
  return out;
}

SimulationConfig SimulationConfig::parse(std::string_view text) {
  std::map<std::string, std::pair<std::string, size_t>> values;  // key -> (value, line)
  size_t line_no = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    const size_t comment = line.find('#');
    if (comment != std::string_view::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) {
      if (pos > text.size()) break;
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected Key = Value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (!known_key(key))
      throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    if (values.count(key))
      throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" + key +
                        "' (first set on line " + std::to_string(values[key].second) + ")");
    values[key] = {value, line_no};
    if (pos > text.size()) break;
  }

  std::vector<std::string> missing;
  for (const char* key : kKeys) {
    if (std::string_view(key) == "Seed" || std::string_view(key) == "LOG") continue;
    if (!values.count(key)) missing.emplace_back(key);
  }
  if (!missing.empty()) {
    std::string msg = "config: missing mandatory key(s):";
    for (const auto& k : missing) msg += " " + k;
    throw ConfigError(msg);
  }

  SimulationConfig cfg;
  const auto line_of = [&](const char* key) {
    return "config line " + std::to_string(values[key].second) + " (" + key + ")";
  };

  const std::string& sim_type = values["SimulationType"].first;
  if (sim_type == "BLOCKCHAIN") cfg.simulation_type = SimulationType::Blockchain;
  else if (sim_type == "STORAGE") cfg.simulation_type = SimulationType::Storage;
  else throw ConfigError(line_of("SimulationType") + ": expected BLOCKCHAIN or STORAGE");

  cfg.protocol = values["Protocol"].first;
  if (cfg.protocol.empty()) throw ConfigError(line_of("Protocol") + ": empty value");

  const uint64_t topologies = parse_u64_value(values["Topologies"].first, line_of("Topologies"));
  if (topologies < 1 || topologies > 1000000)
    throw ConfigError(line_of("Topologies") + ": must be in [1, 1000000]");
  cfg.topologies = static_cast<uint32_t>(topologies);

  const uint64_t capacity =
      parse_u64_value(values["SystemCapacity"].first, line_of("SystemCapacity"));
  if (capacity < 1 || capacity > (1ull << 31))
    throw ConfigError(line_of("SystemCapacity") + ": must be in [1, 2^31]");
  cfg.system_capacity = static_cast<uint32_t>(capacity);

  const uint64_t lifetime = parse_u64_value(values["LifeTime"].first, line_of("LifeTime"));
  if (lifetime < 1 || lifetime > 10000000)
    throw ConfigError(line_of("LifeTime") + ": must be in [1, 10000000]");
  cfg.lifetime = static_cast<uint32_t>(lifetime);

  const uint64_t rate = parse_u64_value(values["TXB_RATE"].first, line_of("TXB_RATE"));
  if (rate > 1024) throw ConfigError(line_of("TXB_RATE") + ": must be in [0, 1024]");
  cfg.txb_rate = static_cast<uint32_t>(rate);

  if (!churn_model_from_name(values["ChurnModel"].first, cfg.churn_model))
    throw ConfigError(line_of("ChurnModel") +
                      ": expected FAST_DEBIAN, SLOW_DEBIAN, FLATOUT or NONE");

  const std::string& churn_type = values["ChurnType"].first;
  if (churn_type == "ADVERSARIAL") cfg.churn_type = ChurnType::Adversarial;
  else if (churn_type == "COOPERATIVE") cfg.churn_type = ChurnType::Cooperative;
  else throw ConfigError(line_of("ChurnType") + ": expected ADVERSARIAL or COOPERATIVE");

  cfg.malicious = parse_fraction_value(values["Malicious"].first, line_of("Malicious"));
  if (!(cfg.malicious >= 0.0 && cfg.malicious < 1.0))
    throw ConfigError(line_of("Malicious") + ": must be in [0, 1)");

  if (values.count("LOG")) {
    const std::string& log = values["LOG"].first;
    if (log == "true") cfg.log_snapshots = true;
    else if (log == "false") cfg.log_snapshots = false;
    else throw ConfigError(line_of("LOG") + ": expected true or false");
  }

  if (values.count("Seed")) {
    cfg.seed = parse_u64_value(values["Seed"].first, line_of("Seed"));
  }

  return cfg;
}

bool SimulationConfig::is_replayable_key(std::string_view key) {
  return key == "Malicious" || key == "ChurnType" || key == "Protocol" ||
         key == "SimulationType" || key == "TXB_RATE";
}

void SimulationConfig::apply_override(std::string_view key, std::string_view value) {
  if (!known_key(std::string(key)))
    throw ConfigError("override: unknown key '" + std::string(key) + "'");
  if (!is_replayable_key(key))
    throw ConfigError("override: '" + std::string(key) +
                      "' identifies the snapshot and would require regeneration; only "
                      "Malicious, ChurnType, Protocol, SimulationType and TXB_RATE may change "
                      "on replay");
  // Rebuild through the parser so overrides obey the same validation.
  SimulationConfig base = *this;
  std::string text;
  const std::string key_s(key);
  const std::string value_s(value);
  const auto emit = [&](const char* k, const std::string& v) {
    if (key_s == k) text += std::string(k) + " = " + value_s + "\n";
    else text += std::string(k) + " = " + v + "\n";
  };
  emit("SimulationType", simulation_type_name(base.simulation_type));
  emit("Protocol", base.protocol);
  emit("Topologies", std::to_string(base.topologies));
  emit("SystemCapacity", std::to_string(base.system_capacity));
  emit("LifeTime", std::to_string(base.lifetime));
  emit("TXB_RATE", std::to_string(base.txb_rate));
  emit("ChurnModel", churn_model_name(base.churn_model));
  emit("ChurnType", churn_type_name(base.churn_type));
  {
    char frac[32];
    std::snprintf(frac, sizeof frac, "%.6f", base.malicious);
    emit("Malicious", frac);
  }
  emit("LOG", base.log_snapshots ? "true" : "false");
  emit("Seed", std::to_string(base.seed));
  *this = parse(text);
}

}  // namespace skipsim
