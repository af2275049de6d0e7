#pragma once

#include <cstdint>
#include <memory>

#include "core/overlay.hpp"

namespace skipsim {

// What a node is allowed to learn about another node it reached.
struct NodeView {
  NodeIndex index = kNilNode;
  uint64_t num_id = 0;
  MembershipVector mem_vec;
  NodeKind kind = NodeKind::Peer;
  bool malicious = false;
};

// A routed search as seen by the node that issued it.
struct SearchView {
  SearchStatus status = SearchStatus::Rejected;
  bool exact = false;
  uint64_t hops = 0;
  bool has_terminal = false;
  NodeView terminal;
};

// The only window a scenario gets on the overlay while one node acts: that
// node's own identity, searches routed from it, and object registration.
// There is deliberately no way to enumerate or address other nodes directly;
// anything a scenario learns about the rest of the system must travel
// through a routed search.
class ActionContext {
 public:
  virtual ~ActionContext() = default;

  virtual NodeView self() const = 0;
  virtual uint32_t slot() const = 0;
  virtual uint32_t txb_rate() const = 0;
  virtual uint32_t committee_k() const = 0;
  virtual uint8_t memvec_len() const = 0;

  virtual SearchView search_num_id(uint64_t target) = 0;
  virtual SearchView search_name_id(const MembershipVector& target, bool peers_only) = 0;

  // Places a data object owned by the acting node into the overlay. Returns
  // false when the numerical id is already taken.
  virtual bool register_object(uint64_t object_num_id) = 0;

  // Accounting sinks feeding the run's evaluators.
  virtual void report_txb_minted(uint64_t count) = 0;
  virtual void report_committee(bool validated, bool malicious_majority, bool undersized) = 0;
};

// Protocol behavior played on top of a fixed event schedule. on_node_act is
// invoked once per scheduled creation record with the canonical object id
// from the schedule; whether and how the scenario spends it depends on the
// configured rate and protocol.
class Scenario {
 public:
  virtual ~Scenario() = default;

  virtual void on_slot_begin(uint32_t /*slot*/) {}
  virtual void on_node_act(ActionContext& ctx, uint64_t logged_object_id) = 0;
  virtual void on_query_complete(const SearchView& /*outcome*/) {}
  virtual void on_slot_end(uint32_t /*slot*/) {}
};

std::unique_ptr<Scenario> make_blockchain_scenario();
std::unique_ptr<Scenario> make_storage_scenario();

// Spends one scheduled creation record: nothing at rate 0, the canonical id
// at rate 1, and at higher rates the canonical id plus rate-1 ids derived
// from it by hashing. Ids that collide with an existing node are re-derived
// deterministically. Reports the minted count and returns the minted ids.
std::vector<uint64_t> mint_scheduled_objects(ActionContext& ctx, uint64_t logged_object_id);

}  // namespace skipsim
