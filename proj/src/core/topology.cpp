#include "core/topology.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <unordered_set>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace skipsim {

namespace {

constexpr uint64_t kCoordinateGrid = 1000000000ull;  // 1e9 steps across [0, 1)

double draw_coordinate(Rng& rng) {
  // Division by the exactly representable 1e9 rounds once, the same way
  // strtod rounds the printed form, so values survive text round-trips
  // bit-exactly.
  return static_cast<double>(rng.next_below(kCoordinateGrid)) /
         static_cast<double>(kCoordinateGrid);
}

void append_coordinate(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9f", v);
  out += buf;
}

}  // namespace

double link_latency_ms(const Placement& a, const Placement& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy) * 100.0;
}

uint8_t memvec_len_for_capacity(uint32_t system_capacity) {
  if (system_capacity == 0) throw ConfigError("SystemCapacity must be at least 1");
  const uint32_t ceil_log2 =
      system_capacity <= 1 ? 0 : static_cast<uint32_t>(std::bit_width(system_capacity - 1));
  return static_cast<uint8_t>(ceil_log2 + 4);
}

TopologyData generate_topology(uint64_t seed, uint32_t topology_index, uint32_t system_capacity) {
  TopologyData t;
  t.topology_index = topology_index;
  t.memvec_len = memvec_len_for_capacity(system_capacity);
  t.num_ids.reserve(system_capacity);
  t.memvec_bits.reserve(system_capacity);
  t.placements.reserve(system_capacity);
  t.resources.reserve(system_capacity);

  Rng placement_rng = derive_stream(seed, topology_index, "placement");
  Rng memvec_rng = derive_stream(seed, topology_index, "memvec");
  Rng numid_rng = derive_stream(seed, topology_index, "numid");
  Rng resource_rng = derive_stream(seed, topology_index, "resources");

  const ZipfSampler bandwidth_dist(1, 100, 1.0);
  const ZipfSampler storage_dist(8, 1024, 1.0);

  std::unordered_set<uint64_t> used_ids;
  used_ids.reserve(system_capacity * 2);
  for (uint32_t i = 0; i < system_capacity; ++i) {
    uint64_t id = numid_rng.next_u64();
    while (!used_ids.insert(id).second) id = numid_rng.next_u64();
    t.num_ids.push_back(id);
    t.memvec_bits.push_back(MembershipVector::random(memvec_rng, t.memvec_len).bits());
    const double x = draw_coordinate(placement_rng);
    const double y = draw_coordinate(placement_rng);
    t.placements.push_back({x, y});
    const uint32_t bw = bandwidth_dist.sample(resource_rng);
    const uint32_t st = storage_dist.sample(resource_rng);
    t.resources.push_back({bw, st});
  }
  return t;
}

std::string serialize_topology(const TopologyData& t) {
  std::string out;
  out.reserve(64 * t.node_count() + 64);
  out += "index\tnum_id\tmem_vec\tx\ty\tbandwidth\tstorage\n";
  for (size_t i = 0; i < t.node_count(); ++i) {
    out += std::to_string(i);
    out += '\t';
    out += std::to_string(t.num_ids[i]);
    out += '\t';
    out += MembershipVector(t.memvec_bits[i], t.memvec_len).to_string();
    out += '\t';
    append_coordinate(out, t.placements[i].x);
    out += '\t';
    append_coordinate(out, t.placements[i].y);
    out += '\t';
    out += std::to_string(t.resources[i].bandwidth);
    out += '\t';
    out += std::to_string(t.resources[i].storage_capacity);
    out += '\n';
  }
  return out;
}

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  size_t start = 0;
  for (size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == '\t') {
      fields.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return fields;
}

uint64_t parse_u64_field(std::string_view s, const char* what, size_t line_no) {
  uint64_t v = 0;
  if (s.empty()) throw CacheError("topology file line " + std::to_string(line_no) +
                                  ": empty " + std::string(what));
  for (char c : s) {
    if (c < '0' || c > '9')
      throw CacheError("topology file line " + std::to_string(line_no) + ": bad " +
                       std::string(what));
    v = v * 10 + static_cast<uint64_t>(c - '0');
  }
  return v;
}

double parse_coordinate_field(std::string_view s, size_t line_no) {
  const std::string tmp(s);
  char* end = nullptr;
  const double v = std::strtod(tmp.c_str(), &end);
  if (end != tmp.c_str() + tmp.size() || v < 0.0 || v >= 1.0)
    throw CacheError("topology file line " + std::to_string(line_no) + ": bad coordinate");
  return v;
}

}  // namespace

TopologyData parse_topology(const std::string& text) {
  TopologyData t;
  size_t line_no = 0;
  size_t pos = 0;
  int memvec_len = -1;
  while (pos < text.size()) {
    size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    const std::string_view line(text.data() + pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line_no == 1) {
      if (line != "index\tnum_id\tmem_vec\tx\ty\tbandwidth\tstorage")
        throw CacheError("topology file: unexpected header");
      continue;
    }
    if (line.empty()) continue;
    const auto f = split_tabs(line);
    if (f.size() != 7)
      throw CacheError("topology file line " + std::to_string(line_no) + ": expected 7 fields");
    const uint64_t index = parse_u64_field(f[0], "index", line_no);
    if (index != t.node_count())
      throw CacheError("topology file line " + std::to_string(line_no) + ": index out of order");
    t.num_ids.push_back(parse_u64_field(f[1], "num_id", line_no));
    MembershipVector mv;
    try {
      mv = MembershipVector::from_string(f[2]);
    } catch (const StructuralError& e) {
      throw CacheError("topology file line " + std::to_string(line_no) + ": " + e.what());
    }
    if (memvec_len < 0) memvec_len = mv.length();
    if (mv.length() != memvec_len)
      throw CacheError("topology file line " + std::to_string(line_no) +
                       ": membership vector length mismatch");
    t.memvec_bits.push_back(mv.bits());
    const double x = parse_coordinate_field(f[3], line_no);
    const double y = parse_coordinate_field(f[4], line_no);
    t.placements.push_back({x, y});
    const auto bw = parse_u64_field(f[5], "bandwidth", line_no);
    const auto st = parse_u64_field(f[6], "storage", line_no);
    t.resources.push_back({static_cast<uint32_t>(bw), static_cast<uint32_t>(st)});
  }
  if (t.node_count() == 0) throw CacheError("topology file: no nodes");
  t.memvec_len = static_cast<uint8_t>(memvec_len);
  return t;
}

}  // namespace skipsim
