#include <algorithm>

#include "hpim/router.hpp"

namespace hpim {

std::size_t fragment_count(std::size_t records, std::size_t fragment_size) {
    if (fragment_size == 0) fragment_size = 1;
    return (records + fragment_size - 1) / fragment_size;
}

std::vector<SyncTreeRecord> fragment_at(const std::vector<SyncTreeRecord>& snapshot,
                                        std::size_t fragment_size, std::size_t index) {
    if (fragment_size == 0) fragment_size = 1;
    std::size_t begin = index * fragment_size;
    if (begin >= snapshot.size()) return {};
    std::size_t end = std::min(snapshot.size(), begin + fragment_size);
    return {snapshot.begin() + static_cast<long>(begin), snapshot.begin() + static_cast<long>(end)};
}

bool more_flag_at(std::size_t records, std::size_t fragment_size, std::uint16_t k) {
    return k < fragment_count(records, fragment_size);
}

SyncBody build_sync_body(const NeighborRecord& n, const SyncSession& s, std::uint16_t k,
                         std::uint16_t hello_hold_time) {
    SyncBody b;
    b.my_snapshot_sn = n.seq.my_snapshot_sn_for_neighbor;
    b.neighbor_snapshot_sn = n.seq.neighbor_snapshot_sn;
    b.neighbor_boot_time = n.seq.neighbor_boot_time;
    b.master_flag = s.i_am_master;
    b.more_flag = more_flag_at(s.snapshot.size(), s.fragment_size, k);
    b.sync_sn = k;
    b.trees = fragment_at(s.snapshot, s.fragment_size, k);
    if (!b.more_flag) b.hello_hold_time = hello_hold_time;
    return b;
}

bool is_opening_sync(const SyncBody& s, BootTime my_boot_time) {
    return s.master_flag && s.sync_sn == 0 && s.neighbor_snapshot_sn == 0 &&
           (s.neighbor_boot_time == 0 || s.neighbor_boot_time == my_boot_time);
}

namespace {

std::uint16_t hold_seconds(const TimerConfig& t) {
    return static_cast<std::uint16_t>(std::min<SimTime>(t.hold_time / kSecond, 0xFFFF));
}

}  // namespace

std::vector<SyncTreeRecord> Router::build_snapshot(const InterfaceState& i) const {
    std::vector<SyncTreeRecord> out;
    for (auto& [t, e] : trees_) {
        if (e.state != TreeState::Active) continue;
        auto it = e.ifaces.find(i.cfg.id);
        if (it == e.ifaces.end()) continue;
        if (it->second.role != InterfaceRole::NonRoot || it->second.source_attached) continue;
        out.push_back({t.source, t.group, e.my_metric.preference, e.my_metric.rpc});
    }
    return out;
}

SeqNum Router::allocate(InterfaceState& i) {
    auto a = allocate_sn(i.seq, now_);
    if (a.overflow) {
        // Everything in flight belongs to the old epoch; neighbors resync on the new BootTime.
        i.rtx.clear();
        trace("sn_overflow", {{"iface", i.cfg.name}, {"bt", std::to_string(i.seq.boot_time)}});
    }
    return a.sn;
}

NeighborRecord& Router::new_neighbor(InterfaceState& i, Ipv4 src, BootTime bt, SyncState state) {
    NeighborRecord n;
    n.ip = src;
    n.state = state;
    n.seq.neighbor_boot_time = bt;
    n.hold_time = hold_seconds(cfg_.timers);
    n.liveness_deadline = now_ + cfg_.timers.hold_time;
    auto& ref = i.neighbors[src] = std::move(n);
    return ref;
}

void Router::remove_neighbor(InterfaceState& i, Ipv4 ip, const char* reason) {
    auto it = i.neighbors.find(ip);
    if (it == i.neighbors.end()) return;
    bool was_synced = it->second.synced();
    i.neighbors.erase(it);
    i.rtx.remove_neighbor(ip);
    trace("neighbor_removed", {{"iface", i.cfg.name}, {"neighbor", ip_to_string(ip)}, {"reason", reason}});
    if (was_synced) reevaluate_all({i.cfg.id, ip, false, false});
}

void Router::send_sync(InterfaceState& i, NeighborRecord& n) {
    auto& s = *n.session;
    s.last_sent = build_sync_body(n, s, s.sync_sn, hold_seconds(cfg_.timers));
    emit(i, n.ip, make_sync(i.seq.boot_time, *s.last_sent));
    if (s.i_am_master) {
        s.retransmit_deadline = now_ + cfg_.timers.sync_retransmit;
        s.attempts_left = cfg_.timers.sync_attempts;
    }
}

void Router::start_sync_as_master(InterfaceState& i, Ipv4 src, BootTime bt) {
    auto& n = new_neighbor(i, src, bt, SyncState::Slave);
    SeqNum ssn = allocate(i);
    n.seq.my_snapshot_sn_for_neighbor = ssn;
    i.rtx.cancel_below(src, ssn);
    SyncSession s;
    s.i_am_master = true;
    s.snapshot = build_snapshot(i);
    s.fragment_size = cfg_.fragment_size;
    n.session = std::move(s);
    trace("sync_start", {{"iface", i.cfg.name}, {"neighbor", ip_to_string(src)}, {"role", "master"},
                         {"ssn", std::to_string(ssn)}});
    send_sync(i, n);
}

void Router::become_slave(InterfaceState& i, Ipv4 src, BootTime bt, const SyncBody& first) {
    auto& n = new_neighbor(i, src, bt, SyncState::Master);
    n.seq.neighbor_snapshot_sn = first.my_snapshot_sn;
    SeqNum ssn = allocate(i);
    n.seq.my_snapshot_sn_for_neighbor = ssn;
    i.rtx.cancel_below(src, ssn);
    SyncSession s;
    s.i_am_master = false;
    s.snapshot = build_snapshot(i);
    s.fragment_size = cfg_.fragment_size;
    n.session = std::move(s);
    trace("sync_start", {{"iface", i.cfg.name}, {"neighbor", ip_to_string(src)}, {"role", "slave"},
                         {"ssn", std::to_string(ssn)}});
    slave_process(i, n, first);
}

void Router::slave_process(InterfaceState& i, NeighborRecord& n, const SyncBody& m) {
    auto& s = *n.session;
    if (s.exchanged && m.sync_sn == s.sync_sn) {
        emit(i, n.ip, make_sync(i.seq.boot_time, *s.last_sent), true);
        return;
    }
    std::uint16_t expected = s.exchanged ? static_cast<std::uint16_t>(s.sync_sn + 1) : 0;
    if (m.sync_sn != expected) return;
    s.sync_sn = m.sync_sn;
    s.exchanged = true;
    s.received.insert(s.received.end(), m.trees.begin(), m.trees.end());
    if (m.hello_hold_time) s.peer_hold_time = m.hello_hold_time;
    send_sync(i, n);
    if (!m.more_flag && !s.last_sent->more_flag && m.sync_sn > 0) {
        n.final_reply = s.last_sent;
        finish_sync(i, n);
    }
}

void Router::master_process_echo(InterfaceState& i, NeighborRecord& n, const SyncBody& m) {
    auto& s = *n.session;
    if (m.sync_sn != s.sync_sn || s.exchanged) return;
    s.exchanged = true;
    s.received.insert(s.received.end(), m.trees.begin(), m.trees.end());
    if (m.hello_hold_time) s.peer_hold_time = m.hello_hold_time;
    if (!s.last_sent->more_flag && !m.more_flag && m.sync_sn > 0) {
        finish_sync(i, n);
        return;
    }
    ++s.sync_sn;
    s.exchanged = false;
    send_sync(i, n);
}

void Router::finish_sync(InterfaceState& i, NeighborRecord& n) {
    auto s = std::move(*n.session);
    n.session.reset();
    n.state = SyncState::Synced;
    if (s.peer_hold_time) n.hold_time = *s.peer_hold_time;
    for (auto& r : s.received) {
        auto t = r.tree();
        auto it = n.seq.per_tree_sn.find(t);
        // Fresher per-tree information arrived during the sync; the snapshot is older.
        if (it != n.seq.per_tree_sn.end() && it->second > n.seq.neighbor_snapshot_sn) continue;
        n.upstream[t] = r.metric();
        n.interest.erase(t);
    }
    trace("sync_done", {{"iface", i.cfg.name},
                        {"neighbor", ip_to_string(n.ip)},
                        {"role", s.i_am_master ? "master" : "slave"},
                        {"trees", std::to_string(s.received.size())}});
    for (auto& [t, m] : n.upstream) ensure_entry(t);
    reevaluate_all({i.cfg.id, n.ip, false, true});
}

void Router::handle_hello(InterfaceState& i, Ipv4 src, BootTime bt, const HelloBody& h) {
    auto it = i.neighbors.find(src);
    if (h.hold_time == 0) {
        if (it != i.neighbors.end() && bt >= it->second.seq.neighbor_boot_time)
            remove_neighbor(i, src, "hold_time_zero");
        return;
    }
    if (it != i.neighbors.end() && bt < it->second.seq.neighbor_boot_time) return;
    if (it != i.neighbors.end() && bt > it->second.seq.neighbor_boot_time) {
        remove_neighbor(i, src, "boot_time_increased");
        it = i.neighbors.end();
    }
    if (it == i.neighbors.end()) {
        start_sync_as_master(i, src, bt);
        it = i.neighbors.find(src);
    }
    auto& n = it->second;
    n.hold_time = h.hold_time;
    n.liveness_deadline = now_ + static_cast<SimTime>(h.hold_time) * kSecond;
    if (h.checkpoint_sn && n.synced()) apply_checkpoint(n.seq, *h.checkpoint_sn);
}

void Router::handle_sync(InterfaceState& i, Ipv4 src, BootTime bt, const SyncBody& s) {
    const bool opening = is_opening_sync(s, i.seq.boot_time);
    auto it = i.neighbors.find(src);
    auto reject = [&](const char* why) {
        trace("sync_rejected", {{"iface", i.cfg.name}, {"neighbor", ip_to_string(src)}, {"reason", why}});
    };

    if (it == i.neighbors.end()) {
        if (opening)
            become_slave(i, src, bt, s);
        else
            reject("unknown_session");
        return;
    }
    NeighborRecord& n = it->second;
    if (bt < n.seq.neighbor_boot_time) return reject("old_boot_time");
    if (bt > n.seq.neighbor_boot_time) {
        remove_neighbor(i, src, "boot_time_increased");
        if (opening)
            become_slave(i, src, bt, s);
        else
            start_sync_as_master(i, src, bt);
        return;
    }

    // Master waiting for the first reply: the peer's SnapshotSN is still unknown.
    if (n.state == SyncState::Slave && n.seq.neighbor_snapshot_sn == 0) {
        if (s.master_flag) {
            // Both claimed Master; the higher interface IP keeps the role.
            if (i.cfg.ip > src || !opening) return reject("master_collision");
            auto& sess = *n.session;
            sess.i_am_master = false;
            sess.retransmit_deadline = kNever;
            sess.exchanged = false;
            sess.sync_sn = 0;
            n.state = SyncState::Master;
            n.seq.neighbor_snapshot_sn = s.my_snapshot_sn;
            trace("sync_yield", {{"iface", i.cfg.name}, {"neighbor", ip_to_string(src)}});
            slave_process(i, n, s);
            return;
        }
        if (s.neighbor_boot_time != i.seq.boot_time ||
            s.neighbor_snapshot_sn != n.seq.my_snapshot_sn_for_neighbor || s.sync_sn != n.session->sync_sn)
            return reject("sequence_mismatch");
        n.seq.neighbor_snapshot_sn = s.my_snapshot_sn;
        master_process_echo(i, n, s);
        return;
    }

    if (s.my_snapshot_sn < n.seq.neighbor_snapshot_sn) return reject("old_snapshot_sn");
    if (s.my_snapshot_sn > n.seq.neighbor_snapshot_sn) {
        // New sync attempt from a known neighbor: everything it told us before is void.
        if (!opening) return reject("unexpected_snapshot_sn");
        remove_neighbor(i, src, "resync");
        become_slave(i, src, bt, s);
        return;
    }

    if (s.neighbor_boot_time != i.seq.boot_time) return reject("neighbor_boot_time_mismatch");
    bool neighbor_ssn_ok = s.neighbor_snapshot_sn == n.seq.my_snapshot_sn_for_neighbor ||
                           (opening && n.state == SyncState::Master);
    if (!neighbor_ssn_ok) return reject("neighbor_snapshot_sn_mismatch");

    switch (n.state) {
        case SyncState::Master:
            if (!s.master_flag) return reject("role_mismatch");
            slave_process(i, n, s);
            break;
        case SyncState::Slave:
            if (s.master_flag) return reject("role_mismatch");
            master_process_echo(i, n, s);
            break;
        case SyncState::Synced:
            if (s.master_flag && n.final_reply && s.sync_sn == n.final_reply->sync_sn)
                emit(i, n.ip, make_sync(i.seq.boot_time, *n.final_reply), true);
            break;
        case SyncState::Unknown: break;
    }
}

void Router::sync_timers() {
    for (auto& i : ifaces_) {
        if (!i.up) continue;
        std::vector<Ipv4> aborted;
        for (auto& [ip, n] : i.neighbors) {
            if (!n.session || !n.session->i_am_master) continue;
            auto& s = *n.session;
            if (s.retransmit_deadline > now_) continue;
            if (s.attempts_left <= 0) {
                aborted.push_back(ip);
                continue;
            }
            --s.attempts_left;
            s.retransmit_deadline = now_ + cfg_.timers.sync_retransmit;
            emit(i, n.ip, make_sync(i.seq.boot_time, *s.last_sent), true);
        }
        for (auto ip : aborted) remove_neighbor(i, ip, "sync_aborted");
    }
}

void Router::hello_timers() {
    for (auto& i : ifaces_) {
        if (!i.up || i.next_hello > now_) continue;
        std::optional<SeqNum> checkpoint;
        if (i.hellos_sent % 3 == 2) {
            i.seq.checkpoint_sn_out = std::max(i.seq.checkpoint_sn_out, i.rtx.checkpoint(i.seq.interface_sn));
            checkpoint = i.seq.checkpoint_sn_out;
        }
        ++i.hellos_sent;
        emit(i, kAllRoutersGroup, make_hello(i.seq.boot_time, hold_seconds(cfg_.timers), checkpoint));
        i.next_hello = now_ + cfg_.timers.hello_period;
    }
}

void Router::liveness_timers() {
    for (auto& i : ifaces_) {
        std::vector<Ipv4> dead;
        for (auto& [ip, n] : i.neighbors)
            if (n.liveness_deadline <= now_) dead.push_back(ip);
        for (auto ip : dead) remove_neighbor(i, ip, "liveness");
    }
}

}  // namespace hpim
