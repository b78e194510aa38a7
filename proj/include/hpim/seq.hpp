#pragma once

#include <map>

#include "hpim/types.hpp"

namespace hpim {

struct SeqStamp {
    BootTime boot_time = 0;
    SeqNum sn = 0;
    auto operator<=>(const SeqStamp&) const = default;
};

// True iff a is strictly fresher than b.
inline bool fresher(const SeqStamp& a, const SeqStamp& b) { return a > b; }

constexpr SeqNum kDefaultMaxSn = 0xFFFFFFFFu;

struct InterfaceSeqState {
    BootTime boot_time = 0;
    SeqNum interface_sn = 0;
    SeqNum checkpoint_sn_out = 0;
    SeqNum max_sn = kDefaultMaxSn;
};

struct SnAllocation {
    SeqNum sn = 0;
    bool overflow = false;
};

// BootTime a (re)started interface adopts at `now`; strictly above `previous`.
BootTime next_boot_time(SimTime now, BootTime previous);

SnAllocation allocate_sn(InterfaceSeqState& state, SimTime now);

struct NeighborSeqState {
    BootTime neighbor_boot_time = 0;
    SeqNum neighbor_snapshot_sn = 0;
    SeqNum my_snapshot_sn_for_neighbor = 0;
    SeqNum checkpoint_sn_in = 0;
    std::map<TreeRef, SeqNum> per_tree_sn;

    SeqNum floor() const {
        return neighbor_snapshot_sn > checkpoint_sn_in ? neighbor_snapshot_sn : checkpoint_sn_in;
    }
    SeqNum effective_sn(const TreeRef& t) const;
};

enum class Classification { Accept, Stale, RequiresSync };
const char* to_string(Classification c);

Classification classify_incoming(NeighborSeqState& state, const TreeRef& tree, const SeqStamp& stamp);

void apply_checkpoint(NeighborSeqState& state, SeqNum checkpoint);

// ACK rule: sn above the floor and not older than the stored per-tree SN.
bool should_ack(const NeighborSeqState& state, const TreeRef& tree, const SeqStamp& stamp);

}  // namespace hpim
