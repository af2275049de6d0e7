#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/overlay.hpp"

namespace skipsim {

// Position on the unit square. Coordinates are always exact multiples of
// 1e-9 so that the text persistence format round-trips bit-exactly.
struct Placement {
  double x = 0.0;
  double y = 0.0;
};

struct NodeResources {
  uint32_t bandwidth = 0;         // abstract units, heavy-tailed across nodes
  uint32_t storage_capacity = 0;  // abstract object count
};

// Per-topology identity material for the peers: identifiers, membership
// vectors, placements and resources, all drawn from streams derived from
// (seed, topology index).
struct TopologyData {
  uint32_t topology_index = 0;
  uint8_t memvec_len = 0;
  std::vector<uint64_t> num_ids;
  std::vector<uint64_t> memvec_bits;
  std::vector<Placement> placements;
  std::vector<NodeResources> resources;

  size_t node_count() const { return num_ids.size(); }
};

// Link latency in milliseconds: Euclidean distance scaled by 100.
double link_latency_ms(const Placement& a, const Placement& b);

// Membership vector length used for a given system capacity.
uint8_t memvec_len_for_capacity(uint32_t system_capacity);

TopologyData generate_topology(uint64_t seed, uint32_t topology_index, uint32_t system_capacity);

std::string serialize_topology(const TopologyData& t);

// Throws CacheError on malformed input.
TopologyData parse_topology(const std::string& text);

}  // namespace skipsim
