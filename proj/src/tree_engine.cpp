#include "hpim/tree_engine.hpp"

#include <algorithm>

#include "hpim/interest_engine.hpp"
#include "hpim/router.hpp"

namespace hpim {

std::optional<UpstreamCandidate> best_upstream(const std::vector<UpstreamCandidate>& candidates) {
    std::optional<UpstreamCandidate> best;
    for (auto& c : candidates)
        if (!best || better_candidate(c.metric, c.ip, best->metric, best->ip)) best = c;
    return best;
}

std::optional<UpstreamCandidate> select_parent(const std::optional<UpstreamCandidate>& best_on_root,
                                               const MetricPair& my_metric, bool feasibility_check) {
    if (!best_on_root) return std::nullopt;
    if (feasibility_check && !(best_on_root->metric < my_metric)) return std::nullopt;
    return best_on_root;
}

TreeState compute_tree_state(bool is_originator, bool source_active, bool has_parent,
                             bool any_upstream_neighbor) {
    if (is_originator ? source_active : has_parent) return TreeState::Active;
    return any_upstream_neighbor ? TreeState::Unsure : TreeState::Inactive;
}

AssertResult elect_assert_winner(TreeState state, const MetricPair& my_metric, Ipv4 my_ip,
                                 const std::optional<UpstreamCandidate>& best_on_link) {
    switch (state) {
        case TreeState::Active:
            if (!best_on_link || better_candidate(my_metric, my_ip, best_on_link->metric, best_on_link->ip))
                return {AssertState::AW, my_ip};
            return {AssertState::AL, best_on_link->ip};
        case TreeState::Unsure:
            if (!best_on_link) return {AssertState::AW, my_ip};
            return {AssertState::AL, best_on_link->ip};
        case TreeState::Inactive: break;
    }
    return {AssertState::AW, my_ip};
}

// ---------------------------------------------------------------------------

std::optional<UpstreamCandidate> Router::best_upstream_on(const InterfaceState& i, const TreeRef& t) const {
    std::optional<UpstreamCandidate> best;
    for (auto& [ip, n] : i.neighbors) {
        if (!n.synced()) continue;
        auto it = n.upstream.find(t);
        if (it == n.upstream.end()) continue;
        if (!best || better_candidate(it->second, ip, best->metric, best->ip)) best = UpstreamCandidate{ip, it->second};
    }
    return best;
}

bool Router::any_upstream(const TreeRef& t) const {
    for (auto& i : ifaces_) {
        if (!i.up) continue;
        for (auto& [ip, n] : i.neighbors)
            if (n.synced() && n.upstream.count(t)) return true;
    }
    return false;
}

TreeEntry& Router::ensure_entry(const TreeRef& t) {
    auto it = trees_.find(t);
    if (it != trees_.end()) return it->second;
    TreeEntry e;
    e.tree = t;
    auto& ref = trees_[t] = std::move(e);
    return ref;
}

void Router::reevaluate_all(const Cause& cause) {
    std::vector<TreeRef> keys;
    keys.reserve(trees_.size());
    for (auto& [t, e] : trees_) keys.push_back(t);
    for (auto& t : keys) reevaluate(t, cause);
}

TreeEntry Router::derive(const TreeEntry& old) const {
    const TreeRef& t = old.tree;
    TreeEntry e = old;

    // Roles from the unicast oracle.
    const Route* route = nullptr;
    if (auto r = routes_.find(t.source); r != routes_.end()) route = &r->second;
    int root = route ? route->root_iface : 0;
    if (root && !iface(root).up) root = 0;
    e.root_iface = root;
    e.my_metric = root ? route->metric : kInfiniteMetric;
    auto attached = [&](int id) {
        return route && std::find(route->source_attached.begin(), route->source_attached.end(), id) !=
                            route->source_attached.end();
    };
    e.is_originator = root && attached(root);
    if (!e.is_originator) e.sat_deadline.reset();

    for (auto& i : ifaces_) {
        if (!i.up) {
            e.ifaces.erase(i.cfg.id);
            continue;
        }
        auto& its = e.ifaces[i.cfg.id];
        its.role = i.cfg.id == root ? InterfaceRole::Root : InterfaceRole::NonRoot;
        its.source_attached = attached(i.cfg.id);
    }

    // Tree state.
    std::optional<UpstreamCandidate> parent;
    if (root) parent = select_parent(best_upstream_on(iface(root), t), e.my_metric, cfg_.feasibility_check);
    bool source_active = e.sat_deadline && *e.sat_deadline > now_;
    e.state = compute_tree_state(e.is_originator, source_active, parent.has_value(), any_upstream(t));
    e.parent = (!e.is_originator && parent) ? std::optional<Ipv4>(parent->ip) : std::nullopt;

    // AW election, downstream interest, forwarding. Interest records only count while ACTIVE.
    bool interested = false;
    for (auto& [id, its] : e.ifaces) {
        const auto& i = iface(id);
        auto best = best_upstream_on(i, t);
        if (its.role == InterfaceRole::Root) {
            its.assert_state = AssertState::AL;
            its.aw = best ? best->ip : 0;
            its.downstream_interest = DownstreamInterest::NDI;
            its.forwarding = ForwardingState::Pruned;
            continue;
        }
        auto a = elect_assert_winner(e.state, e.my_metric, i.cfg.ip, best);
        its.assert_state = a.state;
        its.aw = a.winner;
        bool neighbors = e.state == TreeState::Active && compute_downstream_interest(i, t, its);
        its.downstream_interest =
            downstream_interest(i.member_groups.count(t.group) > 0, neighbors, its.source_attached);
        its.forwarding = forwarding_state(its.assert_state, its.downstream_interest, its.source_attached);
        if (its.forwarding == ForwardingState::Forwarding) interested = true;
    }
    e.interested = interested;
    return e;
}

void Router::reevaluate(const TreeRef& t, const Cause& cause) {
    auto found = trees_.find(t);
    if (found == trees_.end()) return;
    const TreeEntry old = found->second;
    const bool existed_before = !old.ifaces.empty();
    found->second = derive(old);
    TreeEntry& e = found->second;

    if (e.state != TreeState::Active)
        for (auto& i : ifaces_)
            for (auto& [ip, n] : i.neighbors) n.interest.erase(t);

    // AW -> AL hysteresis.
    for (auto& [id, its] : e.ifaces) {
        auto o = old.ifaces.find(id);
        if (o == old.ifaces.end()) continue;
        if (o->second.role == InterfaceRole::NonRoot && its.role == InterfaceRole::NonRoot &&
            o->second.assert_state == AssertState::AW && its.assert_state == AssertState::AL &&
            o->second.forwarding == ForwardingState::Forwarding)
            its.al_hysteresis_deadline = now_ + cfg_.timers.al_hysteresis;
        if (its.assert_state == AssertState::AW) its.al_hysteresis_deadline = -1;
    }

    // Upstream messages: each non-root interface advertises iff the router is ACTIVE.
    for (auto& [id, its] : e.ifaces) {
        bool desired = e.state == TreeState::Active && its.role == InterfaceRole::NonRoot && !its.source_attached;
        bool changed = desired != its.advertised_upstream || (desired && its.advertised_metric != e.my_metric);
        if (!changed) continue;
        its.advertised_upstream = desired;
        its.advertised_metric = e.my_metric;
        send_upstream(iface(id), t, desired, e.my_metric);
    }

    // Interest messages toward the AW seen from each interface.
    if (e.state == TreeState::Active || e.state == TreeState::Unsure) {
        for (auto& [id, its] : e.ifaces) {
            if (its.source_attached) continue;
            const auto& i = iface(id);
            auto o = old.ifaces.find(id);
            InterestTriggerInput in;
            in.state = e.state;
            in.old_interested = old.interested;
            in.new_interested = e.interested;
            in.is_root = its.role == InterfaceRole::Root;
            in.was_root = existed_before && o != old.ifaces.end() ? o->second.role == InterfaceRole::Root
                                                                  : in.is_root;
            in.own_ip = i.cfg.ip;
            in.old_aw = o != old.ifaces.end() ? o->second.aw : 0;
            in.new_aw = its.aw;
            in.iam_upstream_from_aw = cause.iam_upstream && cause.iface == id && cause.neighbor == its.aw;
            in.synced_with_aw = cause.synced && cause.iface == id && cause.neighbor == its.aw;
            if (auto flag = interest_trigger(in)) send_interest(iface(id), t, its.aw, *flag);
        }
    }

    if (cfg_.tracing) {
        if (old.state != e.state || !existed_before)
            trace("tree_state", {{"tree", to_string(t)}, {"from", to_string(old.state)}, {"to", to_string(e.state)}});
        if (old.root_iface != e.root_iface || old.my_metric != e.my_metric)
            trace("tree_root", {{"tree", to_string(t)},
                                {"root", e.root_iface ? iface(e.root_iface).cfg.name : "-"},
                                {"metric", to_string(e.my_metric)}});
        for (auto& [id, its] : e.ifaces) {
            auto o = old.ifaces.find(id);
            bool fresh = o == old.ifaces.end();
            if (fresh || o->second.aw != its.aw || o->second.assert_state != its.assert_state)
                trace("assert", {{"tree", to_string(t)},
                                 {"iface", iface(id).cfg.name},
                                 {"state", its.role == InterfaceRole::Root ? "root" : to_string(its.assert_state)},
                                 {"aw", its.aw ? ip_to_string(its.aw) : "-"}});
            if (fresh || o->second.forwarding != its.forwarding || o->second.downstream_interest != its.downstream_interest)
                trace("forwarding", {{"tree", to_string(t)},
                                     {"iface", iface(id).cfg.name},
                                     {"di", to_string(its.downstream_interest)},
                                     {"fwd", to_string(its.forwarding)}});
        }
        if (old.interested != e.interested)
            trace("router_interest", {{"tree", to_string(t)}, {"interested", e.interested ? "1" : "0"}});
    }

    // Forget trees with nothing left to remember.
    bool advertising = std::any_of(e.ifaces.begin(), e.ifaces.end(),
                                   [](auto& kv) { return kv.second.advertised_upstream; });
    bool hysteresis = std::any_of(e.ifaces.begin(), e.ifaces.end(),
                                  [&](auto& kv) { return kv.second.al_hysteresis_deadline > now_; });
    if (e.state == TreeState::Inactive && !advertising && !hysteresis && !e.sat_deadline) trees_.erase(found);
}

void Router::handle_upstream(InterfaceState& i, NeighborRecord& n, MsgType type, const UpstreamBody& u) {
    TreeRef t = u.tree();
    if (type == MsgType::IamUpstream) {
        n.upstream[t] = MetricPair{*u.rpc_preference, *u.rpc};
        n.interest.erase(t);
    } else {
        n.upstream.erase(t);
    }
    if (!n.synced()) return;
    if (type == MsgType::IamUpstream) ensure_entry(t);
    reevaluate(t, {i.cfg.id, n.ip, type == MsgType::IamUpstream, false});
}

void Router::handle_route_update(const RouteUpdate& r) {
    auto it = routes_.find(r.source);
    if (it != routes_.end() && it->second == r.route) return;
    routes_[r.source] = r.route;
    trace("route", {{"source", ip_to_string(r.source)},
                    {"root", r.route.root_iface ? iface(r.route.root_iface).cfg.name : "-"},
                    {"metric", to_string(r.route.metric)}});
    std::vector<TreeRef> keys;
    for (auto& [t, e] : trees_)
        if (t.source == r.source) keys.push_back(t);
    for (auto& t : keys) reevaluate(t);
}

void Router::handle_source_data(const TreeRef& t) {
    auto& e = ensure_entry(t);
    bool was_active = e.sat_deadline && *e.sat_deadline > now_;
    e.sat_deadline = now_ + cfg_.timers.source_active;
    if (!was_active) reevaluate(t);
}

void Router::sat_timers() {
    std::vector<TreeRef> expired;
    for (auto& [t, e] : trees_)
        if (e.sat_deadline && *e.sat_deadline <= now_) expired.push_back(t);
    for (auto& t : expired) {
        trees_[t].sat_deadline.reset();
        trace("sat_expired", {{"tree", to_string(t)}});
        reevaluate(t);
    }
}

}  // namespace hpim
