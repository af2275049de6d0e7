#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "core/churn.hpp"

namespace skipsim {

enum class SimulationType : uint8_t { Blockchain = 0, Storage = 1 };
enum class ChurnType : uint8_t { Adversarial = 0, Cooperative = 1 };

// The snapshot identity: configurations equal on these fields share generated
// topologies, churn traces and event schedules.
struct CacheKey {
  uint32_t system_capacity = 0;
  uint32_t topologies = 0;
  ChurnModel churn_model = ChurnModel::None;
  uint32_t lifetime = 0;
  uint64_t seed = 0;

  bool operator==(const CacheKey&) const = default;
  std::string canonical_string() const;
  uint64_t hash() const;
};

struct SimulationConfig {
  SimulationType simulation_type = SimulationType::Blockchain;
  std::string protocol;
  uint32_t topologies = 0;
  uint32_t system_capacity = 0;
  uint32_t lifetime = 0;
  uint32_t txb_rate = 0;
  ChurnModel churn_model = ChurnModel::None;
  ChurnType churn_type = ChurnType::Adversarial;
  double malicious = 0.0;   // fraction in [0, 1)
  bool log_snapshots = true;
  uint64_t seed = 42;

  CacheKey cache_key() const;
  uint8_t memvec_len() const;

  // Canonical key=value text; parse(serialize()) is the identity.
  std::string serialize() const;

  // Parses key=value lines ('#' starts a comment). Unknown keys, duplicate
  // keys, malformed values and missing mandatory keys all throw ConfigError
  // with the offending line, listing every missing key at once.
  static SimulationConfig parse(std::string_view text);

  // Keys that may be overridden on a replay without invalidating the
  // snapshot. Key fields are rejected with an explanation.
  static bool is_replayable_key(std::string_view key);

  // Applies one key=value override in the config-file syntax.
  void apply_override(std::string_view key, std::string_view value);
};

const char* simulation_type_name(SimulationType t);
const char* churn_type_name(ChurnType t);

}  // namespace skipsim
