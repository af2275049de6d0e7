#include <vector>

#include "core/hash.hpp"
#include "core/scenario.hpp"

namespace skipsim {

namespace {

// Blockchain protocol: every scheduled creation mints transaction blocks and
// hands each one to a validation committee. The committee is gathered by
// repeated name-id searches toward targets derived from the block id, so
// membership is decided by overlay routing, not by global selection.
class BlockchainScenario final : public Scenario {
 public:
  void on_node_act(ActionContext& ctx, uint64_t logged_object_id) override {
    const std::vector<uint64_t> minted = mint_scheduled_objects(ctx, logged_object_id);
    for (uint64_t txb_id : minted) run_committee(ctx, txb_id);
  }

 private:
  static void run_committee(ActionContext& ctx, uint64_t txb_id) {
    const uint32_t k = ctx.committee_k();
    const uint32_t max_attempts = 4 * k;
    const uint8_t len = ctx.memvec_len();

    std::vector<NodeIndex> members;
    uint32_t malicious = 0;
    for (uint32_t attempt = 0; attempt < max_attempts && members.size() < k; ++attempt) {
      uint64_t target_bits = mix64(txb_id ^ mix64(0x9e3779b97f4a7c15ULL + attempt));
      SearchView found = ctx.search_name_id(MembershipVector(target_bits, len),
                                            /*peers_only=*/true);
      if (found.status != SearchStatus::Success || !found.has_terminal) continue;
      if (found.terminal.kind != NodeKind::Peer) continue;
      bool duplicate = false;
      for (NodeIndex m : members) duplicate |= (m == found.terminal.index);
      if (duplicate) continue;
      members.push_back(found.terminal.index);
      if (found.terminal.malicious) ++malicious;
    }

    const uint32_t majority = (k + 1) / 2;
    const bool undersized = members.size() < k;
    const bool malicious_majority = !members.empty() && malicious >= majority;
    const bool validated = !members.empty() && malicious < majority;
    ctx.report_committee(validated, malicious_majority, undersized);
  }
};

}  // namespace

std::unique_ptr<Scenario> make_blockchain_scenario() {
  return std::make_unique<BlockchainScenario>();
}

}  // namespace skipsim
