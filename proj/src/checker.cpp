#include "hpim/checker.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>

#include "hpim/netsim.hpp"
#include "hpim/oracle.hpp"

namespace hpim {

std::string to_string(const Violation& v) { return v.invariant + ": " + v.detail; }

namespace {

struct Ctx {
    const Simulator& sim;
    const Topology& topo;
    std::vector<Violation>& out;

    void add(const std::string& inv, const std::string& detail) { out.push_back({inv, detail}); }
    const std::string& name(int r) const { return topo.routers[r].name; }
    bool usable(int r, int iface) const {
        const auto& i = topo.iface(r, iface);
        return sim.alive(r) && i.up && topo.links[i.link].up;
    }
    const TreeEntry* entry(int r, const TreeRef& t) const { return sim.alive(r) ? sim.router(r).tree(t) : nullptr; }
    const InterfaceTreeState* its(int r, int iface, const TreeRef& t) const {
        const TreeEntry* e = entry(r, t);
        if (!e) return nullptr;
        auto it = e->ifaces.find(iface);
        return it == e->ifaces.end() ? nullptr : &it->second;
    }
    TreeState state(int r, const TreeRef& t) const {
        const TreeEntry* e = entry(r, t);
        return e ? e->state : TreeState::Inactive;
    }
};

void loop_freedom(Ctx& c, const TreeRef& t) {
    const std::size_t n = c.topo.routers.size();
    std::vector<int> next(n, -1);
    for (std::size_t r = 0; r < n; ++r) {
        const TreeEntry* e = c.entry(static_cast<int>(r), t);
        if (e && e->state == TreeState::Active && e->parent) next[r] = c.topo.owner_of(*e->parent);
    }
    // Walk parent pointers; a walk longer than n revisits a router.
    for (std::size_t r = 0; r < n; ++r) {
        int cur = static_cast<int>(r);
        std::vector<int> path;
        for (std::size_t steps = 0; cur >= 0 && steps <= n; ++steps) {
            path.push_back(cur);
            cur = next[cur];
            if (cur == static_cast<int>(r)) {
                std::string cycle;
                for (int p : path) cycle += c.name(p) + "->";
                c.add("loop_freedom", to_string(t) + " parent cycle " + cycle + c.name(static_cast<int>(r)));
                return;
            }
        }
    }
}

void aw_uniqueness(Ctx& c, const TreeRef& t) {
    for (std::size_t l = 0; l < c.topo.links.size(); ++l) {
        const auto& link = c.topo.links[l];
        if (!link.up) continue;
        std::vector<std::pair<int, int>> winners;
        for (auto& a : link.attached) {
            if (!c.usable(a.router, a.iface) || c.state(a.router, t) != TreeState::Active) continue;
            auto* s = c.its(a.router, a.iface, t);
            if (s && s->role == InterfaceRole::NonRoot && !s->source_attached && s->assert_state == AssertState::AW)
                winners.push_back({a.router, a.iface});
        }
        if (winners.size() > 1) {
            std::string who;
            for (auto& w : winners) who += " " + c.name(w.first);
            c.add("aw_uniqueness", to_string(t) + " link " + link.name + " has AWs" + who);
        }
        if (winners.size() != 1) continue;
        Ipv4 aw_ip = c.topo.iface(winners[0].first, winners[0].second).ip;
        for (auto& a : link.attached) {
            if (!c.usable(a.router, a.iface)) continue;
            TreeState st = c.state(a.router, t);
            if (st == TreeState::Inactive) continue;
            auto* s = c.its(a.router, a.iface, t);
            if (s && !s->source_attached && s->aw != aw_ip)
                c.add("aw_uniqueness", to_string(t) + " link " + link.name + ": " + c.name(a.router) +
                                           " sees AW " + (s->aw ? ip_to_string(s->aw) : "-") + " instead of " +
                                           ip_to_string(aw_ip));
        }
    }
}

// Expected quiescent state from the unicast oracle and the membership set.
void correctness(Ctx& c, int source, Ipv4 group) {
    const auto& topo = c.topo;
    const TreeRef t = c.sim.tree_of(source, group);
    auto routes = compute_routes(topo, source);
    const std::size_t n = topo.routers.size();

    // Source liveness as seen by the originators.
    int running = 0, originators = 0;
    for (std::size_t r = 0; r < n; ++r) {
        if (!c.sim.alive(static_cast<int>(r)) || !routes[r].root_iface) continue;
        const auto& sa = routes[r].source_attached;
        if (std::find(sa.begin(), sa.end(), routes[r].root_iface) == sa.end()) continue;
        ++originators;
        const TreeEntry* e = c.entry(static_cast<int>(r), t);
        if (e && e->sat_deadline && *e->sat_deadline > c.sim.now()) ++running;
    }
    if (running != 0 && running != originators) return;  // mixed; no single expected state
    const bool live = running > 0;

    if (!live) {
        for (std::size_t r = 0; r < n; ++r) {
            if (!c.sim.alive(static_cast<int>(r))) continue;
            TreeState st = c.state(static_cast<int>(r), t);
            if (st != TreeState::Inactive)
                c.add("correctness", to_string(t) + " " + c.name(static_cast<int>(r)) + " is " + to_string(st) +
                                         " without an active source");
        }
        return;
    }

    auto attached_on = [&](int r, int iface) {
        const auto& sa = routes[r].source_attached;
        return std::find(sa.begin(), sa.end(), iface) != sa.end();
    };
    // Upstream candidates of a link: connected routers with a non-root, non-source-attached interface there.
    auto best_on_link = [&](int link, int except) -> std::optional<std::pair<int, int>> {
        std::optional<std::pair<int, int>> best;
        for (auto& a : topo.links[link].attached) {
            if (a.router == except || !c.usable(a.router, a.iface) || !routes[a.router].root_iface) continue;
            if (routes[a.router].root_iface == a.iface || attached_on(a.router, a.iface)) continue;
            if (!best) {
                best = std::make_pair(a.router, a.iface);
                continue;
            }
            if (better_candidate(routes[a.router].metric, topo.iface(a.router, a.iface).ip, routes[best->first].metric,
                                 topo.iface(best->first, best->second).ip))
                best = std::make_pair(a.router, a.iface);
        }
        return best;
    };

    // Tree state, root, metric, parent.
    for (std::size_t ru = 0; ru < n; ++ru) {
        int r = static_cast<int>(ru);
        if (!c.sim.alive(r)) continue;
        const Route& rt = routes[r];
        const TreeEntry* e = c.entry(r, t);
        std::string who = to_string(t) + " " + c.name(r);
        if (!rt.root_iface) {
            if (e && e->state != TreeState::Inactive)
                c.add("correctness", who + " is " + to_string(e->state) + " but has no route to the source");
            continue;
        }
        if (!e || e->state != TreeState::Active) {
            c.add("correctness", who + " is " + (e ? to_string(e->state) : "INACTIVE") + ", expected ACTIVE");
            continue;
        }
        if (e->root_iface != rt.root_iface) c.add("correctness", who + " root interface differs from unicast");
        if (e->my_metric != rt.metric)
            c.add("correctness", who + " metric " + to_string(e->my_metric) + " != " + to_string(rt.metric));
        if (attached_on(r, rt.root_iface)) {
            if (e->parent) c.add("correctness", who + " originator has a parent");
            continue;
        }
        auto best = best_on_link(topo.iface(r, rt.root_iface).link, r);
        Ipv4 want = best ? topo.iface(best->first, best->second).ip : 0;
        Ipv4 got = e->parent.value_or(0);
        if (want != got)
            c.add("correctness", who + " parent " + (got ? ip_to_string(got) : "-") + ", expected " +
                                     (want ? ip_to_string(want) : "-"));
    }

    // Interest, bottom-up: routers further from the source first.
    std::vector<int> order;
    for (std::size_t r = 0; r < n; ++r)
        if (c.sim.alive(static_cast<int>(r)) && routes[r].root_iface) order.push_back(static_cast<int>(r));
    std::sort(order.begin(), order.end(), [&](int a, int b) { return routes[b].metric < routes[a].metric; });
    std::vector<char> interested(n, 0);
    std::map<std::pair<int, int>, bool> fwd;  // (router, iface) -> expected FORWARDING
    for (int r : order) {
        bool any = false;
        for (auto& i : topo.routers[r].ifaces) {
            if (!c.usable(r, i.id) || i.id == routes[r].root_iface || attached_on(r, i.id)) continue;
            auto best = best_on_link(i.link, -1);
            bool aw = best && best->first == r && best->second == i.id;
            bool di = c.sim.members(i.link, group);
            for (auto& a : topo.links[i.link].attached) {
                if (a.router == r || !c.usable(a.router, a.iface)) continue;
                if (routes[a.router].root_iface == a.iface && interested[a.router]) di = true;
            }
            bool f = aw && di;
            fwd[{r, i.id}] = f;
            any = any || f;
        }
        interested[r] = any;
    }
    for (auto& [key, want] : fwd) {
        auto* s = c.its(key.first, key.second, t);
        bool got = s && s->forwarding == ForwardingState::Forwarding;
        if (got != want)
            c.add("correctness", to_string(t) + " " + c.name(key.first) + " " + topo.iface(key.first, key.second).name +
                                     (got ? " FORWARDING" : " PRUNED") + ", expected " + (want ? "FORWARDING" : "PRUNED"));
    }
}

void coherence(Ctx& c) {
    for (std::size_t r = 0; r < c.topo.routers.size(); ++r) {
        if (!c.sim.alive(static_cast<int>(r))) continue;
        const Router& rt = c.sim.router(static_cast<int>(r));
        for (auto& v : rt.self_check()) c.add("mroute_coherence", v);
        for (auto& m : rt.mroutes()) {
            if (m.forwarding_set.count(m.root_iface))
                c.add("mroute_coherence", c.name(static_cast<int>(r)) + " " + to_string(m.tree) + " forwards on its root");
            const TreeEntry* e = rt.tree(m.tree);
            for (auto& [id, its] : e->ifaces)
                if ((its.forwarding == ForwardingState::Forwarding) != (m.forwarding_set.count(id) > 0))
                    c.add("mroute_coherence", c.name(static_cast<int>(r)) + " " + to_string(m.tree) + " mroute mismatch");
        }
    }
}

void sync_symmetry(Ctx& c) {
    const auto& topo = c.topo;
    for (auto& link : topo.links) {
        if (!link.up) continue;
        for (auto& a : link.attached) {
            for (auto& b : link.attached) {
                if (a.router == b.router || !c.usable(a.router, a.iface) || !c.usable(b.router, b.iface)) continue;
                const Router& ra = c.sim.router(a.router);
                const Router& rb = c.sim.router(b.router);
                const auto& ia = *ra.interface(a.iface);
                const auto& ib = *rb.interface(b.iface);
                std::string pair = c.name(a.router) + "/" + c.name(b.router) + " on " + link.name;
                const NeighborRecord* nab = ra.neighbor(a.iface, ib.cfg.ip);
                if (!nab || !nab->synced()) {
                    c.add("sync_symmetry", pair + ": " + c.name(a.router) + " has neighbor in state " +
                                               (nab ? to_string(nab->state) : "ABSENT"));
                    continue;
                }
                const NeighborRecord* nba = rb.neighbor(b.iface, ia.cfg.ip);
                if (!nba || !nba->synced()) continue;  // reported from the other side
                if (nab->seq.neighbor_boot_time != ib.seq.boot_time)
                    c.add("sync_symmetry", pair + ": stale neighbor BootTime");
                if (nab->seq.neighbor_snapshot_sn != nba->seq.my_snapshot_sn_for_neighbor)
                    c.add("sync_symmetry", pair + ": SnapshotSN views differ");
                // Upstream records mirror what the neighbor advertises on that interface.
                std::map<TreeRef, MetricPair> advertised;
                for (auto& [t, e] : rb.trees()) {
                    auto it = e.ifaces.find(b.iface);
                    if (it != e.ifaces.end() && it->second.advertised_upstream)
                        advertised[t] = it->second.advertised_metric;
                }
                if (advertised != nab->upstream)
                    c.add("sync_symmetry", pair + ": upstream records of " + c.name(a.router) + " differ from what " +
                                               c.name(b.router) + " advertises");
            }
        }
    }
}

void interest_knowledge(Ctx& c, const TreeRef& t) {
    const auto& topo = c.topo;
    for (auto& link : topo.links) {
        if (!link.up) continue;
        for (auto& a : link.attached) {
            if (!c.usable(a.router, a.iface) || c.state(a.router, t) != TreeState::Active) continue;
            auto* s = c.its(a.router, a.iface, t);
            if (!s || s->role != InterfaceRole::NonRoot || s->source_attached || s->assert_state != AssertState::AW)
                continue;
            for (auto& b : link.attached) {
                if (b.router == a.router || !c.usable(b.router, b.iface)) continue;
                const TreeEntry* eb = c.entry(b.router, t);
                if (!eb || eb->state != TreeState::Active || eb->root_iface != b.iface) continue;
                Ipv4 bip = topo.iface(b.router, b.iface).ip;
                bool known = c.sim.router(a.router).neighbor_is_interested(a.iface, bip, t);
                if (known != eb->interested)
                    c.add("interest_knowledge", to_string(t) + " AW " + c.name(a.router) + " on " + link.name +
                                                    " thinks " + c.name(b.router) + " is " +
                                                    (known ? "interested" : "not interested"));
            }
        }
    }
}

}  // namespace

std::vector<Violation> check_invariants(const Simulator& sim, const CheckOptions& opt) {
    std::vector<Violation> out;
    Ctx c{sim, sim.topology(), out};
    for (auto& [source, group] : sim.started_trees()) {
        TreeRef t = sim.tree_of(source, group);
        if (opt.loop_freedom) loop_freedom(c, t);
        if (opt.aw_uniqueness) aw_uniqueness(c, t);
        if (opt.correctness) correctness(c, source, group);
        if (opt.interest_knowledge) interest_knowledge(c, t);
    }
    if (opt.coherence) coherence(c);
    if (opt.sync_symmetry) sync_symmetry(c);
    return out;
}

}  // namespace hpim
