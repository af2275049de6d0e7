#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace skipsim {

class Rng;

using NodeIndex = int32_t;
inline constexpr NodeIndex kNilNode = -1;

enum class NodeKind : uint8_t { Peer = 0, DataObject = 1 };

// Fixed-length random bit string that doubles as the node's name identifier.
// Bit 0 is the first bit of the string form.
class MembershipVector {
 public:
  MembershipVector() = default;
  MembershipVector(uint64_t bits, uint8_t length);

  static MembershipVector random(Rng& rng, uint8_t length);
  static MembershipVector from_string(std::string_view text);

  uint64_t bits() const { return bits_; }
  uint8_t length() const { return length_; }
  std::string to_string() const;

  bool operator==(const MembershipVector&) const = default;

 private:
  uint64_t bits_ = 0;
  uint8_t length_ = 0;
};

// Length of the longest shared prefix. Throws StructuralError when the two
// vectors have different lengths.
int common_prefix_len(const MembershipVector& a, const MembershipVector& b);

enum class SearchStatus : uint8_t {
  Success = 0,
  Failed = 1,    // routing dead end caused by links to offline nodes
  Rejected = 2,  // initiator was offline; nothing was routed
};

struct SearchResult {
  NodeIndex terminal = kNilNode;
  bool exact = false;
  SearchStatus status = SearchStatus::Success;
  // Visited nodes in order, initiator first. Every consecutive pair is a
  // lookup-table edge of the initiating overlay.
  std::vector<NodeIndex> path;

  size_t hops() const { return path.empty() ? 0 : path.size() - 1; }
  bool success() const { return status == SearchStatus::Success; }
};

// One topology's node population plus every node's lookup table.
//
// Lookup tables are flat arrays indexed by node * (levels) + level. Level-i
// neighbors share a membership-vector prefix of at least i bits; level 0 is
// the doubly linked list of all online nodes sorted by numerical identifier.
class Population {
 public:
  explicit Population(uint8_t memvec_len);

  // Registers a node; it starts offline. Numerical identifiers must be unique
  // per population (the caller enforces this across peers and data objects).
  NodeIndex add_node(uint64_t num_id, MembershipVector mem_vec, NodeKind kind);

  size_t size() const { return num_ids_.size(); }
  size_t online_count() const { return online_count_; }
  uint8_t memvec_len() const { return memvec_len_; }
  int levels() const { return memvec_len_ + 1; }

  uint64_t num_id(NodeIndex i) const { return num_ids_[static_cast<size_t>(i)]; }
  MembershipVector mem_vec(NodeIndex i) const {
    return MembershipVector(memvec_bits_[static_cast<size_t>(i)], memvec_len_);
  }
  NodeKind kind(NodeIndex i) const { return kinds_[static_cast<size_t>(i)]; }
  bool online(NodeIndex i) const { return online_[static_cast<size_t>(i)] != 0; }

  NodeIndex left(NodeIndex i, int level) const { return left_[slot(i, level)]; }
  NodeIndex right(NodeIndex i, int level) const { return right_[slot(i, level)]; }

  // Lowest-index online node, used as the introducer for joins.
  NodeIndex lowest_online() const;

  // Join via a routed position search from the introducer. Returns false
  // (no state change) when the node is already online.
  bool insert(NodeIndex joining);

  // Departure that relinks the node's neighbors around it at every level.
  // Returns false when the node was already offline.
  bool leave_cooperative(NodeIndex leaving);

  // Abrupt departure: the node goes offline and every table is left as is,
  // so other nodes keep stale links to it. Returns false when already offline.
  bool leave_adversarial(NodeIndex leaving);

  // Greedy no-overshoot search. Terminal is the online node with the greatest
  // numerical id <= target, or the smallest online node when none exists.
  // A link to an offline node makes the router retry one level lower; a stale
  // link at level 0 fails the query.
  void search_num_id(NodeIndex initiator, uint64_t target, SearchResult& out) const;

  // Prefix-climbing search. Terminal is an online node with maximal shared
  // prefix against `target`, ties broken by smallest numerical id. With
  // `peers_only` set, data objects still relay but only peers are candidates.
  // The result is Failed when a stale link cut the climb or the tie walk
  // short (the terminal is then the best node reached).
  void search_name_id(NodeIndex initiator, const MembershipVector& target, SearchResult& out,
                      bool peers_only = false) const;

  // One line per node: index, num_id, mem_vec, kind, online flag and the
  // (left,right) pair per level. Stable format for golden-file comparisons.
  std::string dump() const;

  // Structural violations for a healthy overlay (no stale links expected).
  // Empty result means every invariant holds.
  std::vector<std::string> check_invariants() const;

  size_t footprint_bytes() const;

 private:
  size_t slot(NodeIndex i, int level) const {
    return static_cast<size_t>(i) * static_cast<size_t>(levels()) + static_cast<size_t>(level);
  }
  int prefix_len(NodeIndex a, NodeIndex b) const;
  void clear_row(NodeIndex i);
  void splice_level0(NodeIndex pred, NodeIndex joining, NodeIndex succ);

  uint8_t memvec_len_;
  size_t online_count_ = 0;
  std::vector<uint64_t> num_ids_;
  std::vector<uint64_t> memvec_bits_;
  std::vector<NodeKind> kinds_;
  std::vector<uint8_t> online_;
  std::vector<NodeIndex> left_;
  std::vector<NodeIndex> right_;
  // Online nodes ordered by numerical id. Maintenance bookkeeping for joins:
  // used to place a node when the routed search cannot (damaged overlay) and
  // to keep joins O(log n) instead of rescanning.
  std::map<uint64_t, NodeIndex> online_by_id_;
};

}  // namespace skipsim
