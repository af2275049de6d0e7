#include "core/overlay.hpp"

#include <bit>
#include <sstream>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace skipsim {

namespace {

uint64_t bit_mask(uint8_t length) {
  return length >= 64 ? ~0ull : ((1ull << length) - 1);
}

}  // namespace

MembershipVector::MembershipVector(uint64_t bits, uint8_t length) {
  if (length > 64) throw StructuralError("membership vector length exceeds 64 bits");
  length_ = length;
  bits_ = bits & bit_mask(length);
}

MembershipVector MembershipVector::random(Rng& rng, uint8_t length) {
  return MembershipVector(rng.next_u64(), length);
}

MembershipVector MembershipVector::from_string(std::string_view text) {
  if (text.size() > 64) throw StructuralError("membership vector length exceeds 64 bits");
  uint64_t bits = 0;
  for (size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '1') {
      bits |= 1ull << i;
    } else if (text[i] != '0') {
      throw StructuralError("membership vector string must contain only 0 and 1");
    }
  }
  return MembershipVector(bits, static_cast<uint8_t>(text.size()));
}

std::string MembershipVector::to_string() const {
  std::string out(length_, '0');
  for (uint8_t i = 0; i < length_; ++i) {
    if ((bits_ >> i) & 1ull) out[i] = '1';
  }
  return out;
}

int common_prefix_len(const MembershipVector& a, const MembershipVector& b) {
  if (a.length() != b.length())
    throw StructuralError("common_prefix_len: membership vectors differ in length");
  const uint64_t diff = a.bits() ^ b.bits();
  if (diff == 0) return a.length();
  const int tz = std::countr_zero(diff);
  return tz < a.length() ? tz : a.length();
}

Population::Population(uint8_t memvec_len) : memvec_len_(memvec_len) {
  if (memvec_len > 60) throw StructuralError("membership vector length out of range");
}

NodeIndex Population::add_node(uint64_t num_id, MembershipVector mem_vec, NodeKind kind) {
  if (mem_vec.length() != memvec_len_)
    throw StructuralError("add_node: membership vector length mismatch");
  const NodeIndex index = static_cast<NodeIndex>(num_ids_.size());
  num_ids_.push_back(num_id);
  memvec_bits_.push_back(mem_vec.bits());
  kinds_.push_back(kind);
  online_.push_back(0);
  left_.insert(left_.end(), static_cast<size_t>(levels()), kNilNode);
  right_.insert(right_.end(), static_cast<size_t>(levels()), kNilNode);
  return index;
}

NodeIndex Population::lowest_online() const {
  for (size_t i = 0; i < online_.size(); ++i) {
    if (online_[i]) return static_cast<NodeIndex>(i);
  }
  return kNilNode;
}

int Population::prefix_len(NodeIndex a, NodeIndex b) const {
  const uint64_t diff = memvec_bits_[static_cast<size_t>(a)] ^ memvec_bits_[static_cast<size_t>(b)];
  if (diff == 0) return memvec_len_;
  const int tz = std::countr_zero(diff);
  return tz < memvec_len_ ? tz : memvec_len_;
}

void Population::clear_row(NodeIndex i) {
  for (int level = 0; level < levels(); ++level) {
    left_[slot(i, level)] = kNilNode;
    right_[slot(i, level)] = kNilNode;
  }
}

void Population::splice_level0(NodeIndex pred, NodeIndex joining, NodeIndex succ) {
  left_[slot(joining, 0)] = pred;
  right_[slot(joining, 0)] = succ;
  if (pred != kNilNode) right_[slot(pred, 0)] = joining;
  if (succ != kNilNode) left_[slot(succ, 0)] = joining;
}

bool Population::insert(NodeIndex joining) {
  if (online(joining)) return false;
  clear_row(joining);

  if (online_count_ == 0) {
    online_[static_cast<size_t>(joining)] = 1;
    online_count_ = 1;
    online_by_id_.emplace(num_id(joining), joining);
    return true;
  }

  const uint64_t id = num_id(joining);
  SearchResult res;
  search_num_id(lowest_online(), id, res);

  // Level-0 placement. The routed search gives the splice point; when churn
  // damage leaves that neighborhood incoherent (stale or misordered links),
  // fall back to the maintained online ordering.
  NodeIndex pred = kNilNode;
  NodeIndex succ = kNilNode;
  bool local_ok = false;
  if (res.success()) {
    NodeIndex p, s;
    if (num_id(res.terminal) < id) {
      p = res.terminal;
      s = right(res.terminal, 0);
    } else {
      s = res.terminal;
      p = left(res.terminal, 0);
    }
    const bool p_ok = p == kNilNode || (online(p) && num_id(p) < id);
    const bool s_ok = s == kNilNode || (online(s) && num_id(s) > id);
    if (p_ok && s_ok) {
      pred = p;
      succ = s;
      local_ok = true;
    }
  }
  if (!local_ok) {
    auto it = online_by_id_.lower_bound(id);
    succ = it == online_by_id_.end() ? kNilNode : it->second;
    pred = it == online_by_id_.begin() ? kNilNode : std::prev(it)->second;
  }
  splice_level0(pred, joining, succ);

  // Build the higher levels by walking one level below for the nearest nodes
  // that share one more prefix bit. A link to an offline node ends the walk.
  for (int level = 1; level < levels(); ++level) {
    NodeIndex left_nb = kNilNode;
    for (NodeIndex n = left(joining, level - 1); n != kNilNode && online(n);
         n = left(n, level - 1)) {
      if (prefix_len(n, joining) >= level) {
        left_nb = n;
        break;
      }
    }
    NodeIndex right_nb = kNilNode;
    for (NodeIndex n = right(joining, level - 1); n != kNilNode && online(n);
         n = right(n, level - 1)) {
      if (prefix_len(n, joining) >= level) {
        right_nb = n;
        break;
      }
    }
    if (left_nb == kNilNode && right_nb == kNilNode) break;
    if (left_nb != kNilNode) {
      left_[slot(joining, level)] = left_nb;
      right_[slot(left_nb, level)] = joining;
    }
    if (right_nb != kNilNode) {
      right_[slot(joining, level)] = right_nb;
      left_[slot(right_nb, level)] = joining;
    }
  }

  online_[static_cast<size_t>(joining)] = 1;
  ++online_count_;
  online_by_id_.emplace(id, joining);
  return true;
}

bool Population::leave_cooperative(NodeIndex leaving) {
  if (!online(leaving)) return false;
  for (int level = 0; level < levels(); ++level) {
    const NodeIndex l = left(leaving, level);
    const NodeIndex r = right(leaving, level);
    if (l != kNilNode) right_[slot(l, level)] = r;
    if (r != kNilNode) left_[slot(r, level)] = l;
  }
  clear_row(leaving);
  online_[static_cast<size_t>(leaving)] = 0;
  --online_count_;
  online_by_id_.erase(num_id(leaving));
  return true;
}

bool Population::leave_adversarial(NodeIndex leaving) {
  if (!online(leaving)) return false;
  online_[static_cast<size_t>(leaving)] = 0;
  --online_count_;
  online_by_id_.erase(num_id(leaving));
  return true;
}

void Population::search_num_id(NodeIndex initiator, uint64_t target, SearchResult& out) const {
  out.terminal = kNilNode;
  out.exact = false;
  out.status = SearchStatus::Success;
  out.path.clear();

  if (initiator == kNilNode || !online(initiator)) {
    out.status = SearchStatus::Rejected;
    return;
  }
  out.path.push_back(initiator);
  NodeIndex cur = initiator;
  if (num_id(cur) == target) {
    out.terminal = cur;
    out.exact = true;
    return;
  }

  const bool rightward = target > num_id(cur);
  for (int level = levels() - 1; level >= 0; --level) {
    for (;;) {
      const NodeIndex nb = rightward ? right(cur, level) : left(cur, level);
      if (nb == kNilNode) break;
      if (rightward ? num_id(nb) > target : num_id(nb) <= target) break;
      if (!online(nb)) {
        // Stale link. Retry one level lower; at level 0 there is no detour.
        if (level == 0) {
          out.status = SearchStatus::Failed;
          out.terminal = cur;
          return;
        }
        break;
      }
      cur = nb;
      out.path.push_back(cur);
      if (num_id(cur) == target) {
        out.terminal = cur;
        out.exact = true;
        return;
      }
    }
  }

  if (rightward) {
    out.terminal = cur;
    return;
  }
  // Leftward descent keeps ids above the target, so `cur` is now the smallest
  // online node greater than the target; its level-0 predecessor is the
  // answer when it exists.
  const NodeIndex pred = left(cur, 0);
  if (pred == kNilNode) {
    out.terminal = cur;  // no online node at or below the target
    return;
  }
  if (!online(pred)) {
    out.status = SearchStatus::Failed;
    out.terminal = cur;
    return;
  }
  out.path.push_back(pred);
  out.terminal = pred;
  out.exact = num_id(pred) == target;
}

void Population::search_name_id(NodeIndex initiator, const MembershipVector& target,
                                SearchResult& out, bool peers_only) const {
  out.terminal = kNilNode;
  out.exact = false;
  out.status = SearchStatus::Success;
  out.path.clear();

  if (target.length() != memvec_len_)
    throw StructuralError("search_name_id: target length mismatch");
  if (initiator == kNilNode || !online(initiator)) {
    out.status = SearchStatus::Rejected;
    return;
  }
  if (peers_only && kind(initiator) != NodeKind::Peer)
    throw StructuralError("search_name_id: peers_only search must start at a peer");

  const auto candidate = [&](NodeIndex n) {
    return !peers_only || kind(n) == NodeKind::Peer;
  };
  const auto cpl = [&](NodeIndex n) {
    return common_prefix_len(mem_vec(n), target);
  };

  out.path.push_back(initiator);
  NodeIndex cur = initiator;
  int level = cpl(cur);
  bool stale_hit = false;

  // Climb: scan the current level's list for any candidate with a longer
  // shared prefix; repeat from there. Every list member shares at least
  // `level` prefix bits with the target, so once no candidate improves, the
  // candidates in the list are exactly the ties and the leftmost one (the
  // smallest numerical id) wins. The leftward scan that proves "no
  // improvement" therefore doubles as the tie walk. The scan is a physical
  // walk: a fruitless rightward scan backtracks before exploring leftward.
  for (;;) {
    NodeIndex found = kNilNode;
    NodeIndex leftmost_tie = cur;
    if (level < memvec_len_) {
      size_t walked_right = 0;
      for (NodeIndex n = right(cur, level); n != kNilNode; n = right(n, level)) {
        if (!online(n)) {
          stale_hit = true;
          break;
        }
        out.path.push_back(n);
        ++walked_right;
        if (candidate(n) && cpl(n) > level) {
          found = n;
          break;
        }
      }
      if (found == kNilNode) {
        // Return to the scan origin before exploring leftward.
        for (size_t back = 1; back < walked_right; ++back)
          out.path.push_back(out.path[out.path.size() - 2 * back]);
        if (walked_right > 0) out.path.push_back(cur);
      }
    }
    if (found == kNilNode) {
      for (NodeIndex n = left(cur, level); n != kNilNode; n = left(n, level)) {
        if (!online(n)) {
          stale_hit = true;
          break;
        }
        out.path.push_back(n);
        if (!candidate(n)) continue;
        if (level < memvec_len_ && cpl(n) > level) {
          found = n;
          break;
        }
        leftmost_tie = n;
      }
    }
    if (found == kNilNode) {
      out.terminal = leftmost_tie;
      break;
    }
    cur = found;
    level = cpl(cur);
  }

  out.exact = mem_vec(out.terminal) == target;
  out.status = stale_hit ? SearchStatus::Failed : SearchStatus::Success;
}

std::string Population::dump() const {
  std::ostringstream os;
  for (size_t i = 0; i < num_ids_.size(); ++i) {
    const NodeIndex n = static_cast<NodeIndex>(i);
    os << i << '\t' << num_ids_[i] << '\t' << mem_vec(n).to_string() << '\t'
       << (kinds_[i] == NodeKind::Peer ? "peer" : "object") << '\t'
       << (online_[i] ? "on" : "off") << '\t';
    for (int level = 0; level < levels(); ++level) {
      const NodeIndex l = left(n, level);
      const NodeIndex r = right(n, level);
      os << '(';
      if (l == kNilNode) os << '-'; else os << l;
      os << ',';
      if (r == kNilNode) os << '-'; else os << r;
      os << ')';
    }
    os << '\n';
  }
  return os.str();
}

std::vector<std::string> Population::check_invariants() const {
  std::vector<std::string> violations;
  const auto complain = [&](std::string msg) { violations.push_back(std::move(msg)); };

  // Level 0 must be one doubly linked list over all online nodes, ascending
  // by numerical id.
  size_t heads = 0;
  NodeIndex head = kNilNode;
  for (size_t i = 0; i < num_ids_.size(); ++i) {
    const NodeIndex n = static_cast<NodeIndex>(i);
    if (online(n) && left(n, 0) == kNilNode) {
      ++heads;
      head = n;
    }
  }
  if (online_count_ > 0 && heads != 1) {
    complain("level 0: expected exactly one online head, found " + std::to_string(heads));
  } else if (online_count_ > 0) {
    size_t seen = 0;
    NodeIndex prev = kNilNode;
    for (NodeIndex n = head; n != kNilNode; n = right(n, 0)) {
      if (!online(n)) {
        complain("level 0: chain reaches offline node " + std::to_string(n));
        break;
      }
      if (prev != kNilNode && num_id(prev) >= num_id(n)) {
        complain("level 0: ids not strictly ascending at node " + std::to_string(n));
        break;
      }
      if (left(n, 0) != prev) {
        complain("level 0: broken back link at node " + std::to_string(n));
        break;
      }
      prev = n;
      if (++seen > online_count_) {
        complain("level 0: chain longer than online count (cycle?)");
        break;
      }
    }
    if (violations.empty() && seen != online_count_) {
      complain("level 0: chain covers " + std::to_string(seen) + " of " +
               std::to_string(online_count_) + " online nodes");
    }
  }

  // Per-node, per-level link laws for online nodes.
  for (size_t i = 0; i < num_ids_.size(); ++i) {
    const NodeIndex n = static_cast<NodeIndex>(i);
    if (!online(n)) continue;
    for (int level = 0; level < levels(); ++level) {
      const NodeIndex l = left(n, level);
      if (l != kNilNode) {
        if (!online(l))
          complain("node " + std::to_string(n) + " level " + std::to_string(level) +
                   ": left link to offline node");
        else {
          if (num_id(l) >= num_id(n))
            complain("node " + std::to_string(n) + " level " + std::to_string(level) +
                     ": left neighbor id not smaller");
          if (prefix_len(l, n) < level)
            complain("node " + std::to_string(n) + " level " + std::to_string(level) +
                     ": left neighbor shares too short a prefix");
          if (right(l, level) != n)
            complain("node " + std::to_string(n) + " level " + std::to_string(level) +
                     ": left neighbor does not link back");
        }
      }
      const NodeIndex r = right(n, level);
      if (r != kNilNode) {
        if (!online(r))
          complain("node " + std::to_string(n) + " level " + std::to_string(level) +
                   ": right link to offline node");
        else {
          if (num_id(r) <= num_id(n))
            complain("node " + std::to_string(n) + " level " + std::to_string(level) +
                     ": right neighbor id not larger");
          if (prefix_len(r, n) < level)
            complain("node " + std::to_string(n) + " level " + std::to_string(level) +
                     ": right neighbor shares too short a prefix");
          if (left(r, level) != n)
            complain("node " + std::to_string(n) + " level " + std::to_string(level) +
                     ": right neighbor does not link back");
        }
      }
    }
  }
  return violations;
}

size_t Population::footprint_bytes() const {
  size_t bytes = 0;
  bytes += num_ids_.capacity() * sizeof(uint64_t);
  bytes += memvec_bits_.capacity() * sizeof(uint64_t);
  bytes += kinds_.capacity() * sizeof(NodeKind);
  bytes += online_.capacity() * sizeof(uint8_t);
  bytes += left_.capacity() * sizeof(NodeIndex);
  bytes += right_.capacity() * sizeof(NodeIndex);
  bytes += online_by_id_.size() * 48;  // rough red-black node size
  return bytes;
}

}  // namespace skipsim
