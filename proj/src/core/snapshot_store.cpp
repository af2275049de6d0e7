#include "core/snapshot_store.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "core/errors.hpp"
#include "core/hash.hpp"

namespace fs = std::filesystem;

namespace skipsim {

namespace {

constexpr const char* kManifestFormat = "snapshot-1";
constexpr const char* kDataFiles[3] = {"topology.tsv", "churn.tsv", "events.tsv"};

struct Manifest {
  CacheKey key;
  uint32_t topology_index = 0;
  uint64_t file_hash[3] = {0, 0, 0};
};

std::string manifest_text(const CacheKey& key, uint32_t topology_index,
                          const uint64_t hashes[3]) {
  std::ostringstream out;
  out << "format = " << kManifestFormat << "\n";
  out << "SystemCapacity = " << key.system_capacity << "\n";
  out << "Topologies = " << key.topologies << "\n";
  out << "ChurnModel = " << churn_model_name(key.churn_model) << "\n";
  out << "LifeTime = " << key.lifetime << "\n";
  out << "Seed = " << key.seed << "\n";
  out << "TopologyIndex = " << topology_index << "\n";
  for (int i = 0; i < 3; ++i)
    out << "hash " << kDataFiles[i] << " = " << hex16(hashes[i]) << "\n";
  return out.str();
}

Manifest parse_manifest(const std::string& text, const std::string& where) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    size_t eq = line.find(" = ");
    if (eq == std::string::npos)
      throw CacheError(where + " line " + std::to_string(line_no) + ": expected 'key = value'");
    kv[line.substr(0, eq)] = line.substr(eq + 3);
  }
  auto need = [&](const std::string& k) -> const std::string& {
    auto it = kv.find(k);
    if (it == kv.end()) throw CacheError(where + ": missing field '" + k + "'");
    return it->second;
  };
  if (need("format") != kManifestFormat)
    throw CacheError(where + ": unsupported format '" + kv["format"] + "'");
  Manifest m;
  try {
    m.key.system_capacity = static_cast<uint32_t>(std::stoul(need("SystemCapacity")));
    m.key.topologies = static_cast<uint32_t>(std::stoul(need("Topologies")));
    if (!churn_model_from_name(need("ChurnModel"), m.key.churn_model))
      throw CacheError(where + ": unknown ChurnModel '" + kv["ChurnModel"] + "'");
    m.key.lifetime = static_cast<uint32_t>(std::stoul(need("LifeTime")));
    m.key.seed = std::stoull(need("Seed"));
    m.topology_index = static_cast<uint32_t>(std::stoul(need("TopologyIndex")));
    for (int i = 0; i < 3; ++i) {
      const std::string& h = need(std::string("hash ") + kDataFiles[i]);
      if (h.size() != 16) throw CacheError(where + ": bad hash for " + kDataFiles[i]);
      m.file_hash[i] = std::stoull(h, nullptr, 16);
    }
  } catch (const CacheError&) {
    throw;
  } catch (const std::exception& e) {
    throw CacheError(where + ": malformed value (" + e.what() + ")");
  }
  return m;
}

bool is_key_dir_name(const std::string& name) {
  if (name.size() != 16) return false;
  return std::all_of(name.begin(), name.end(),
                     [](char c) { return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'); });
}

std::optional<uint32_t> topology_dir_index(const std::string& name) {
  if (name.size() < 2 || name[0] != 't') return std::nullopt;
  uint32_t v = 0;
  for (size_t i = 1; i < name.size(); ++i) {
    if (name[i] < '0' || name[i] > '9') return std::nullopt;
    v = v * 10 + static_cast<uint32_t>(name[i] - '0');
  }
  return v;
}

}  // namespace

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("read failed on " + path.string());
  return buf.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create " + tmp.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.flush();
    if (!out) throw IoError("write failed on " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " into place: " + ec.message());
}

fs::path SnapshotStore::entry_dir(const CacheKey& key, uint32_t topology_index) const {
  return root_ / hex16(key.hash()) / ("t" + std::to_string(topology_index));
}

std::optional<Snapshot> SnapshotStore::load(const CacheKey& key, uint32_t topology_index,
                                            std::string* miss_reason) const {
  fs::path dir = entry_dir(key, topology_index);
  fs::path manifest_path = dir / "manifest.txt";
  if (!fs::exists(manifest_path)) {
    if (miss_reason)
      *miss_reason = "no snapshot at " + dir.string() + " for key [" + key.canonical_string() + "]";
    return std::nullopt;
  }

  Manifest m = parse_manifest(read_text_file(manifest_path), manifest_path.string());
  if (m.key.canonical_string() != key.canonical_string())
    throw CacheError(manifest_path.string() + ": snapshot key [" + m.key.canonical_string() +
                     "] does not match requested key [" + key.canonical_string() + "]");
  if (m.topology_index != topology_index)
    throw CacheError(manifest_path.string() + ": topology index " +
                     std::to_string(m.topology_index) + " does not match directory");

  std::string contents[3];
  for (int i = 0; i < 3; ++i) {
    fs::path p = dir / kDataFiles[i];
    if (!fs::exists(p)) throw CacheError(p.string() + ": listed in manifest but missing");
    contents[i] = read_text_file(p);
    uint64_t h = fnv1a64(contents[i].data(), contents[i].size());
    if (h != m.file_hash[i])
      throw CacheError(p.string() + ": content hash " + hex16(h) + " does not match manifest " +
                       hex16(m.file_hash[i]));
  }

  Snapshot snap;
  snap.topology = parse_topology(contents[0]);
  snap.topology.topology_index = topology_index;
  if (snap.topology.num_ids.size() != key.system_capacity)
    throw CacheError(dir.string() + ": topology has " +
                     std::to_string(snap.topology.num_ids.size()) + " nodes, key says " +
                     std::to_string(key.system_capacity));
  snap.churn = ChurnTrace::parse(contents[1], key.lifetime, key.system_capacity);
  snap.events = EventLog::parse(contents[2], key.lifetime);
  return snap;
}

void SnapshotStore::save(const CacheKey& key, uint32_t topology_index,
                         const Snapshot& snap) const {
  fs::path dir = entry_dir(key, topology_index);
  fs::create_directories(dir);
  std::string contents[3] = {serialize_topology(snap.topology), snap.churn.serialize(),
                             snap.events.serialize()};
  uint64_t hashes[3];
  for (int i = 0; i < 3; ++i) {
    hashes[i] = fnv1a64(contents[i].data(), contents[i].size());
    write_text_file(dir / kDataFiles[i], contents[i]);
  }
  // Manifest last: its presence marks the entry complete.
  write_text_file(dir / "manifest.txt", manifest_text(key, topology_index, hashes));
}

std::vector<StoreListing> SnapshotStore::list() const {
  std::vector<StoreListing> out;
  if (!fs::exists(root_)) return out;
  std::vector<fs::path> key_dirs;
  for (const auto& e : fs::directory_iterator(root_))
    if (e.is_directory() && is_key_dir_name(e.path().filename().string()))
      key_dirs.push_back(e.path());
  std::sort(key_dirs.begin(), key_dirs.end());

  for (const fs::path& kd : key_dirs) {
    StoreListing entry;
    entry.key_hash = kd.filename().string();
    bool have_key = false;
    for (const auto& e : fs::directory_iterator(kd)) {
      if (!e.is_directory()) continue;
      auto idx = topology_dir_index(e.path().filename().string());
      if (!idx) continue;
      fs::path mp = e.path() / "manifest.txt";
      if (!fs::exists(mp)) continue;  // incomplete entry; verify() reports damage
      try {
        Manifest m = parse_manifest(read_text_file(mp), mp.string());
        if (!have_key) {
          entry.key = m.key;
          have_key = true;
        }
        entry.topology_indices.push_back(*idx);
      } catch (const CacheError&) {
        continue;
      }
    }
    if (!have_key) continue;
    std::sort(entry.topology_indices.begin(), entry.topology_indices.end());
    out.push_back(std::move(entry));
  }
  return out;
}

std::vector<std::string> SnapshotStore::verify() const {
  std::vector<std::string> problems;
  if (!fs::exists(root_)) return problems;
  std::vector<fs::path> key_dirs;
  for (const auto& e : fs::directory_iterator(root_))
    if (e.is_directory() && is_key_dir_name(e.path().filename().string()))
      key_dirs.push_back(e.path());
  std::sort(key_dirs.begin(), key_dirs.end());

  for (const fs::path& kd : key_dirs) {
    std::vector<fs::path> t_dirs;
    for (const auto& e : fs::directory_iterator(kd))
      if (e.is_directory() && topology_dir_index(e.path().filename().string()))
        t_dirs.push_back(e.path());
    std::sort(t_dirs.begin(), t_dirs.end());

    for (const fs::path& td : t_dirs) {
      fs::path mp = td / "manifest.txt";
      if (!fs::exists(mp)) {
        problems.push_back(td.string() + ": incomplete entry (no manifest)");
        continue;
      }
      Manifest m;
      try {
        m = parse_manifest(read_text_file(mp), mp.string());
      } catch (const std::exception& e) {
        problems.push_back(e.what());
        continue;
      }
      if (hex16(m.key.hash()) != kd.filename().string())
        problems.push_back(mp.string() + ": key hashes to " + hex16(m.key.hash()) +
                           " but lives under " + kd.filename().string());
      for (int i = 0; i < 3; ++i) {
        fs::path p = td / kDataFiles[i];
        if (!fs::exists(p)) {
          problems.push_back(p.string() + ": listed in manifest but missing");
          continue;
        }
        std::string text = read_text_file(p);
        uint64_t h = fnv1a64(text.data(), text.size());
        if (h != m.file_hash[i])
          problems.push_back(p.string() + ": content hash " + hex16(h) +
                             " does not match manifest " + hex16(m.file_hash[i]));
      }
    }
  }
  return problems;
}

}  // namespace skipsim
