#pragma once

#include <map>
#include <optional>
#include <vector>

#include "hpim/seq.hpp"
#include "hpim/types.hpp"
#include "hpim/wire.hpp"

namespace hpim {

struct SyncSession {
    bool i_am_master = false;
    std::uint16_t sync_sn = 0;
    std::vector<SyncTreeRecord> snapshot;  // frozen at session start
    std::size_t fragment_size = 100;
    SimTime retransmit_deadline = kNever;  // Master only
    int attempts_left = 0;
    bool exchanged = false;  // Master: echo for sync_sn seen. Slave: replied to sync_sn.
    std::vector<SyncTreeRecord> received;
    std::optional<std::uint16_t> peer_hold_time;
    std::optional<SyncBody> last_sent;
};

struct NeighborRecord {
    Ipv4 ip = 0;
    SyncState state = SyncState::Unknown;
    NeighborSeqState seq;
    std::uint16_t hold_time = 0;  // seconds
    SimTime liveness_deadline = kNever;
    std::map<TreeRef, MetricPair> upstream;
    std::map<TreeRef, bool> interest;
    std::optional<SyncSession> session;
    std::optional<SyncBody> final_reply;  // Slave side, resent if the Master retransmits

    bool synced() const { return state == SyncState::Synced; }
};

std::size_t fragment_count(std::size_t records, std::size_t fragment_size);
std::vector<SyncTreeRecord> fragment_at(const std::vector<SyncTreeRecord>& snapshot,
                                        std::size_t fragment_size, std::size_t index);
// More flag for exchange k: set until every fragment has been acknowledged.
bool more_flag_at(std::size_t records, std::size_t fragment_size, std::uint16_t k);

// Sync body for exchange k of a session.
SyncBody build_sync_body(const NeighborRecord& n, const SyncSession& s, std::uint16_t k,
                         std::uint16_t hello_hold_time);

// True for a Master's opening Sync that a receiver without session state may answer.
bool is_opening_sync(const SyncBody& s, BootTime my_boot_time);

}  // namespace hpim
