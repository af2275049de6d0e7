#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "core/churn.hpp"
#include "core/config.hpp"
#include "core/event_log.hpp"
#include "core/topology.hpp"

namespace skipsim {

// One fully generated topology: placement + identifiers, its churn schedule,
// and the event log played over it.
struct Snapshot {
  TopologyData topology;
  ChurnTrace churn;
  EventLog events;
};

struct StoreListing {
  std::string key_hash;  // directory name under the store root
  CacheKey key;
  std::vector<uint32_t> topology_indices;  // ascending
};

// On-disk cache of generated snapshots, laid out as
//   <root>/<key-hash>/t<index>/{topology.tsv, churn.tsv, events.tsv, manifest.txt}
// The manifest is written last and carries content hashes, so a directory with
// a valid manifest is complete; one without is treated as absent.
class SnapshotStore {
 public:
  explicit SnapshotStore(std::filesystem::path root) : root_(std::move(root)) {}

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path entry_dir(const CacheKey& key, uint32_t topology_index) const;

  // nullopt = absent (miss_reason says why). Present-but-damaged throws CacheError.
  std::optional<Snapshot> load(const CacheKey& key, uint32_t topology_index,
                               std::string* miss_reason = nullptr) const;
  void save(const CacheKey& key, uint32_t topology_index, const Snapshot& snap) const;

  std::vector<StoreListing> list() const;
  // Recomputes every content hash in the store; returns human-readable problems.
  std::vector<std::string> verify() const;

 private:
  std::filesystem::path root_;
};

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace skipsim
