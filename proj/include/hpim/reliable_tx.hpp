#pragma once

#include <optional>
#include <set>
#include <vector>

#include "hpim/seq.hpp"
#include "hpim/types.hpp"
#include "hpim/wire.hpp"

namespace hpim {

struct PendingTransmission {
    TreeRef tree;
    SeqStamp stamp;
    Message message;
    std::set<Ipv4> awaiting;
    SimTime retransmit_deadline = kNever;
    std::optional<Ipv4> unicast_target;
};

// Pending ACK bookkeeping for one interface.
class ReliableTx {
   public:
    // Registers a freshly sent message and applies the suppression rules:
    // an upstream message supersedes every older entry of its tree, an interest
    // message supersedes older same-tree entries toward its target only.
    // Returns the SNs whose entries were dropped completely.
    std::vector<SeqNum> add(PendingTransmission p);

    // True if the ACK matched a live entry.
    bool ack(const TreeRef& tree, SeqNum sn, Ipv4 from);

    // A new sync toward `neighbor` supersedes everything older than its SnapshotSN.
    void cancel_below(Ipv4 neighbor, SeqNum snapshot_sn);

    void remove_neighbor(Ipv4 neighbor);
    void clear() { pending_.clear(); }

    struct Retransmission {
        Ipv4 target;
        Message message;
    };
    // Entries whose timer expired, one retransmission per missing receiver; timers rearmed.
    std::vector<Retransmission> due(SimTime now, SimTime timeout);

    SimTime next_deadline() const;
    // Largest SN such that it and every SN below it is settled.
    SeqNum checkpoint(SeqNum interface_sn) const;

    bool empty() const { return pending_.empty(); }
    const std::vector<PendingTransmission>& pending() const { return pending_; }

   private:
    void prune();
    std::vector<PendingTransmission> pending_;  // ordered by SN
};

}  // namespace hpim
