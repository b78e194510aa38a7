#include "hpim/interest_engine.hpp"

#include "hpim/router.hpp"

namespace hpim {

bool neighbor_interested(bool is_upstream, std::optional<bool> record, DownstreamInterest initial) {
    if (is_upstream) return false;
    if (record) return *record;
    return initial == DownstreamInterest::DI;
}

DownstreamInterest downstream_interest(bool local_members, bool any_neighbor_interested,
                                       bool source_attached) {
    if (source_attached) return DownstreamInterest::NDI;
    return local_members || any_neighbor_interested ? DownstreamInterest::DI : DownstreamInterest::NDI;
}

ForwardingState forwarding_state(AssertState a, DownstreamInterest di, bool source_attached) {
    if (a == AssertState::AW && di == DownstreamInterest::DI && !source_attached)
        return ForwardingState::Forwarding;
    return ForwardingState::Pruned;
}

std::optional<bool> interest_trigger(const InterestTriggerInput& in) {
    if (in.state != TreeState::Active && in.state != TreeState::Unsure) return std::nullopt;
    if (in.new_aw == 0 || in.new_aw == in.own_ip) return std::nullopt;
    const bool aw_changed = in.old_aw != in.new_aw;
    if (in.is_root) {
        if (in.old_interested != in.new_interested || aw_changed || !in.was_root ||
            (in.iam_upstream_from_aw && !aw_changed) || in.synced_with_aw)
            return in.new_interested;
        return std::nullopt;
    }
    // Non-root: an UNSURE router tells the link's AW it has nothing downstream through it.
    if (in.state != TreeState::Unsure) return std::nullopt;
    if (aw_changed || in.was_root || (in.iam_upstream_from_aw && !aw_changed) || in.synced_with_aw)
        return false;
    return std::nullopt;
}

// ---------------------------------------------------------------------------

bool Router::compute_downstream_interest(const InterfaceState& i, const TreeRef& t,
                                         const InterfaceTreeState&) const {
    for (auto& [ip, n] : i.neighbors) {
        if (!n.synced()) continue;
        auto rec = n.interest.find(t);
        std::optional<bool> record;
        if (rec != n.interest.end()) record = rec->second;
        if (neighbor_interested(n.upstream.count(t) > 0, record, cfg_.initial_downstream_interest)) return true;
    }
    return false;
}

bool Router::neighbor_is_interested(int id, Ipv4 ip, const TreeRef& t) const {
    auto* i = interface(id);
    if (!i) return false;
    auto it = i->neighbors.find(ip);
    if (it == i->neighbors.end() || !it->second.synced()) return false;
    auto rec = it->second.interest.find(t);
    std::optional<bool> record;
    if (rec != it->second.interest.end()) record = rec->second;
    return neighbor_interested(it->second.upstream.count(t) > 0, record, cfg_.initial_downstream_interest);
}

void Router::handle_interest(InterfaceState& i, NeighborRecord& n, MsgType type, const InterestBody& b) {
    TreeRef t = b.tree();
    n.interest[t] = type == MsgType::Interest;
    // Interest from a neighbor also means it is no longer upstream for the tree.
    n.upstream.erase(t);
    if (!n.synced()) return;
    reevaluate(t, {i.cfg.id, n.ip, false, false});
}

void Router::handle_membership(const MembershipChange& m) {
    auto& i = iface(m.iface);
    bool changed = m.members ? i.member_groups.insert(m.group).second : i.member_groups.erase(m.group) > 0;
    if (!changed) return;
    trace("membership", {{"iface", i.cfg.name}, {"group", ip_to_string(m.group)}, {"members", m.members ? "1" : "0"}});
    std::vector<TreeRef> keys;
    for (auto& [t, e] : trees_)
        if (t.group == m.group) keys.push_back(t);
    for (auto& t : keys) reevaluate(t);
}

}  // namespace hpim
