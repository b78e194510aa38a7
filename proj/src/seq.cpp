#include "hpim/seq.hpp"

#include <algorithm>

namespace hpim {

BootTime next_boot_time(SimTime now, BootTime previous) {
    BootTime candidate = static_cast<BootTime>(now) + 1;
    return std::max(candidate, previous + 1);
}

SnAllocation allocate_sn(InterfaceSeqState& state, SimTime now) {
    if (state.interface_sn >= state.max_sn) {
        state.boot_time = next_boot_time(now, state.boot_time);
        state.interface_sn = 1;
        state.checkpoint_sn_out = 0;
        return {1, true};
    }
    ++state.interface_sn;
    return {state.interface_sn, false};
}

SeqNum NeighborSeqState::effective_sn(const TreeRef& t) const {
    SeqNum f = floor();
    auto it = per_tree_sn.find(t);
    if (it != per_tree_sn.end() && it->second > f) return it->second;
    return f;
}

const char* to_string(Classification c) {
    switch (c) {
        case Classification::Accept: return "Accept";
        case Classification::Stale: return "Stale";
        case Classification::RequiresSync: return "RequiresSync";
    }
    return "?";
}

Classification classify_incoming(NeighborSeqState& state, const TreeRef& tree, const SeqStamp& stamp) {
    if (stamp.boot_time > state.neighbor_boot_time) return Classification::RequiresSync;
    if (stamp.boot_time < state.neighbor_boot_time) return Classification::Stale;
    if (stamp.sn <= state.effective_sn(tree)) return Classification::Stale;
    state.per_tree_sn[tree] = stamp.sn;
    return Classification::Accept;
}

void apply_checkpoint(NeighborSeqState& state, SeqNum checkpoint) {
    if (checkpoint <= state.checkpoint_sn_in) return;
    state.checkpoint_sn_in = checkpoint;
    std::erase_if(state.per_tree_sn, [&](const auto& kv) { return kv.second <= checkpoint; });
}

bool should_ack(const NeighborSeqState& state, const TreeRef& tree, const SeqStamp& stamp) {
    if (stamp.boot_time != state.neighbor_boot_time) return false;
    if (stamp.sn <= state.floor()) return false;
    auto it = state.per_tree_sn.find(tree);
    SeqNum stored = it == state.per_tree_sn.end() ? 0 : it->second;
    return stamp.sn >= stored;
}

}  // namespace hpim
