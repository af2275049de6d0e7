#include "core/hash.hpp"
#include "core/scenario.hpp"

namespace skipsim {

std::vector<uint64_t> mint_scheduled_objects(ActionContext& ctx, uint64_t logged_object_id) {
  std::vector<uint64_t> minted;
  const uint32_t rate = ctx.txb_rate();
  if (rate == 0) {
    ctx.report_txb_minted(0);
    return minted;
  }
  minted.reserve(rate);
  for (uint32_t k = 0; k < rate; ++k) {
    uint64_t id = k == 0 ? logged_object_id : mix64(logged_object_id ^ mix64(k));
    // Re-derive on collision; the chain is a bijection, so it cannot cycle
    // back into the tiny set of taken ids for any practical attempt count.
    int attempts = 0;
    while (!ctx.register_object(id) && ++attempts < 64) id = mix64(id);
    if (attempts < 64) minted.push_back(id);
  }
  ctx.report_txb_minted(minted.size());
  return minted;
}

namespace {

// Storage protocol: every scheduled creation stores an object; nothing gets
// validated, so no committees run.
class StorageScenario final : public Scenario {
 public:
  void on_node_act(ActionContext& ctx, uint64_t logged_object_id) override {
    mint_scheduled_objects(ctx, logged_object_id);
  }
};

}  // namespace

std::unique_ptr<Scenario> make_storage_scenario() {
  return std::make_unique<StorageScenario>();
}

}  // namespace skipsim
