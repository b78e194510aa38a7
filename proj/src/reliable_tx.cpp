#include "hpim/reliable_tx.hpp"

#include <algorithm>

#include "hpim/router.hpp"

namespace hpim {

namespace {

bool is_upstream_msg(const Message& m) {
    auto t = m.header.msg_type;
    return t == MsgType::IamUpstream || t == MsgType::IamNoLongerUpstream;
}

}  // namespace

std::vector<SeqNum> ReliableTx::add(PendingTransmission p) {
    std::vector<SeqNum> dropped;
    if (is_upstream_msg(p.message)) {
        for (auto& e : pending_)
            if (e.tree == p.tree) e.awaiting.clear();
    } else if (p.unicast_target) {
        for (auto& e : pending_)
            if (e.tree == p.tree) e.awaiting.erase(*p.unicast_target);
    }
    for (auto& e : pending_)
        if (e.awaiting.empty()) dropped.push_back(e.stamp.sn);
    prune();
    if (!p.awaiting.empty()) pending_.push_back(std::move(p));
    return dropped;
}

bool ReliableTx::ack(const TreeRef& tree, SeqNum sn, Ipv4 from) {
    for (auto& e : pending_) {
        if (e.tree != tree || e.stamp.sn != sn) continue;
        bool hit = e.awaiting.erase(from) > 0;
        prune();
        return hit;
    }
    return false;
}

void ReliableTx::cancel_below(Ipv4 neighbor, SeqNum snapshot_sn) {
    for (auto& e : pending_)
        if (e.stamp.sn < snapshot_sn) e.awaiting.erase(neighbor);
    prune();
}

void ReliableTx::remove_neighbor(Ipv4 neighbor) {
    for (auto& e : pending_) e.awaiting.erase(neighbor);
    prune();
}

std::vector<ReliableTx::Retransmission> ReliableTx::due(SimTime now, SimTime timeout) {
    std::vector<Retransmission> out;
    for (auto& e : pending_) {
        if (e.retransmit_deadline > now) continue;
        for (auto ip : e.awaiting) out.push_back({ip, e.message});
        e.retransmit_deadline = now + timeout;
    }
    return out;
}

SimTime ReliableTx::next_deadline() const {
    SimTime d = kNever;
    for (auto& e : pending_) d = std::min(d, e.retransmit_deadline);
    return d;
}

SeqNum ReliableTx::checkpoint(SeqNum interface_sn) const {
    if (pending_.empty()) return interface_sn;
    SeqNum lowest = pending_.front().stamp.sn;
    for (auto& e : pending_) lowest = std::min(lowest, e.stamp.sn);
    return lowest - 1;
}

void ReliableTx::prune() {
    std::erase_if(pending_, [](const PendingTransmission& e) { return e.awaiting.empty(); });
}

// ---------------------------------------------------------------------------

void Router::send_upstream(InterfaceState& i, const TreeRef& t, bool upstream, const MetricPair& m) {
    // Neighbors that appear later learn the tree through their sync snapshot.
    if (i.neighbors.empty()) return;
    SeqNum sn = allocate(i);
    Message msg = upstream ? make_iam_upstream(i.seq.boot_time, sn, t, m)
                           : make_iam_no_longer_upstream(i.seq.boot_time, sn, t);
    PendingTransmission p;
    p.tree = t;
    p.stamp = {i.seq.boot_time, sn};
    p.message = msg;
    p.retransmit_deadline = now_ + cfg_.timers.retransmit;
    for (auto& [ip, n] : i.neighbors) p.awaiting.insert(ip);
    i.rtx.add(std::move(p));
    emit(i, kAllRoutersGroup, msg);
}

void Router::send_interest(InterfaceState& i, const TreeRef& t, Ipv4 target, bool interested) {
    if (!i.neighbors.count(target)) return;
    SeqNum sn = allocate(i);
    Message msg = make_interest(i.seq.boot_time, sn, t, interested);
    PendingTransmission p;
    p.tree = t;
    p.stamp = {i.seq.boot_time, sn};
    p.message = msg;
    p.retransmit_deadline = now_ + cfg_.timers.retransmit;
    p.awaiting.insert(target);
    p.unicast_target = target;
    i.rtx.add(std::move(p));
    emit(i, target, msg);
}

void Router::handle_ack(InterfaceState& i, NeighborRecord& n, BootTime bt, const AckBody& a) {
    if (bt != n.seq.neighbor_boot_time) return;
    if (n.seq.neighbor_snapshot_sn == 0 || a.my_snapshot_sn != n.seq.neighbor_snapshot_sn) return;
    if (a.neighbor_boot_time != i.seq.boot_time || a.neighbor_snapshot_sn != n.seq.my_snapshot_sn_for_neighbor)
        return;
    i.rtx.ack(a.tree(), a.neighbor_sn, n.ip);
}

void Router::maybe_ack(InterfaceState& i, NeighborRecord& n, const TreeRef& t, const SeqStamp& stamp) {
    if (n.seq.neighbor_snapshot_sn == 0) return;
    if (!should_ack(n.seq, t, stamp)) return;
    AckBody a;
    a.neighbor_sn = stamp.sn;
    a.source = t.source;
    a.group = t.group;
    a.neighbor_boot_time = n.seq.neighbor_boot_time;
    a.neighbor_snapshot_sn = n.seq.neighbor_snapshot_sn;
    a.my_snapshot_sn = n.seq.my_snapshot_sn_for_neighbor;
    emit(i, n.ip, make_ack(i.seq.boot_time, a));
}

void Router::retransmit_timers() {
    for (auto& i : ifaces_) {
        if (!i.up) continue;
        for (auto& r : i.rtx.due(now_, cfg_.timers.retransmit)) emit(i, r.target, r.message, true);
    }
}

}  // namespace hpim
