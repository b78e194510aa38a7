#include "hpim/oracle.hpp"

#include <limits>
#include <queue>

namespace hpim {

namespace {

constexpr std::uint64_t kUnreached = std::numeric_limits<std::uint64_t>::max();

bool usable(const Topology& t, int r, const TopoInterface& i) {
    return t.routers[r].up && i.up && t.links[i.link].up;
}

}  // namespace

std::vector<Route> compute_routes(const Topology& topo, int source) {
    const int src_link = topo.sources[source].link;
    const std::size_t n = topo.routers.size();
    std::vector<std::uint64_t> dist(n, kUnreached);

    using Item = std::pair<std::uint64_t, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    for (std::size_t r = 0; r < n; ++r)
        for (auto& i : topo.routers[r].ifaces)
            if (i.link == src_link && usable(topo, static_cast<int>(r), i) && i.cost < dist[r]) {
                dist[r] = i.cost;
                pq.push({dist[r], static_cast<int>(r)});
            }
    while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (d != dist[u]) continue;
        for (auto& ui : topo.routers[u].ifaces) {
            if (!usable(topo, u, ui)) continue;
            for (auto& a : topo.links[ui.link].attached) {
                if (a.router == u) continue;
                const auto& vi = topo.iface(a.router, a.iface);
                if (!usable(topo, a.router, vi)) continue;
                std::uint64_t cand = d + vi.cost;
                if (cand < dist[a.router]) {
                    dist[a.router] = cand;
                    pq.push({cand, a.router});
                }
            }
        }
    }

    std::vector<Route> out(n);
    for (std::size_t r = 0; r < n; ++r) {
        if (dist[r] == kUnreached) continue;
        const auto& tr = topo.routers[r];
        std::uint64_t best = kUnreached;
        int root = 0;
        for (auto& i : tr.ifaces) {
            if (!usable(topo, static_cast<int>(r), i)) continue;
            std::uint64_t via = kUnreached;
            if (i.link == src_link) {
                via = 0;
            } else {
                for (auto& a : topo.links[i.link].attached) {
                    if (a.router == static_cast<int>(r)) continue;
                    if (!usable(topo, a.router, topo.iface(a.router, a.iface))) continue;
                    via = std::min(via, dist[a.router]);
                }
            }
            if (via == kUnreached) continue;
            std::uint64_t total = via + i.cost;
            if (total < best) {
                best = total;
                root = i.id;
            }
        }
        auto& route = out[r];
        route.root_iface = root;
        route.metric = {tr.preference, static_cast<std::uint32_t>(std::min<std::uint64_t>(best, 0xFFFFFFFEu))};
        for (auto& i : tr.ifaces)
            if (i.link == src_link && usable(topo, static_cast<int>(r), i)) route.source_attached.push_back(i.id);
    }
    return out;
}

}  // namespace hpim
