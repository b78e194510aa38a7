#include <gtest/gtest.h>

#include <random>

#include "harness.hpp"
#include "hpim/oracle.hpp"
#include "hpim/sweep.hpp"

using namespace hpim;

namespace {

// Plain relaxation to a fixed point: a router's distance is the cheapest of its
// interfaces, each costing its own cost plus the best live peer on that link
// (or nothing extra on the source link).
std::vector<Route> relax(const Topology& t, int source) {
    const int src = t.sources[source].link;
    const std::uint64_t inf = ~0ull;
    auto live = [&](int r, const TopoInterface& i) { return t.routers[r].up && i.up && t.links[i.link].up; };
    std::vector<std::uint64_t> dist(t.routers.size(), inf);
    auto via = [&](int r, const TopoInterface& i) {
        if (i.link == src) return std::uint64_t{0};
        std::uint64_t best = inf;
        for (auto& a : t.links[i.link].attached)
            if (a.router != r && live(a.router, t.iface(a.router, a.iface))) best = std::min(best, dist[a.router]);
        return best;
    };
    for (bool changed = true; changed;) {
        changed = false;
        for (int r = 0; r < static_cast<int>(t.routers.size()); ++r)
            for (auto& i : t.routers[r].ifaces) {
                if (!live(r, i)) continue;
                std::uint64_t v = via(r, i);
                if (v != inf && v + i.cost < dist[r]) {
                    dist[r] = v + i.cost;
                    changed = true;
                }
            }
    }
    std::vector<Route> out(t.routers.size());
    for (int r = 0; r < static_cast<int>(t.routers.size()); ++r) {
        if (dist[r] == inf) continue;
        for (auto& i : t.routers[r].ifaces) {
            if (!live(r, i)) continue;
            if (i.link == src) out[r].source_attached.push_back(i.id);
            std::uint64_t v = via(r, i);
            if (!out[r].root_iface && v != inf && v + i.cost == dist[r]) out[r].root_iface = i.id;
        }
        out[r].metric = {t.routers[r].preference, static_cast<std::uint32_t>(dist[r])};
    }
    return out;
}

}  // namespace

TEST(Oracle, MatchesRelaxationOnRandomTopologies) {
    std::mt19937_64 rng(11);
    SweepOptions opt;
    for (std::size_t k = 0; k < 50; ++k) {
        Topology t = parse_topology(generate_case(99, k, opt).topology_text);
        for (int variant = 0; variant < 4; ++variant) {
            if (variant > 0) {  // knock out a router, a link or an interface
                int r = static_cast<int>(rng() % t.routers.size());
                switch (variant) {
                    case 1: t.routers[r].up = false; break;
                    case 2: t.links[rng() % t.links.size()].up = false; break;
                    default: t.routers[r].ifaces[rng() % t.routers[r].ifaces.size()].up = false;
                }
            }
            auto got = compute_routes(t, 0);
            auto want = relax(t, 0);
            ASSERT_EQ(got.size(), want.size());
            for (std::size_t r = 0; r < got.size(); ++r)
                EXPECT_EQ(got[r], want[r]) << "case " << k << " variant " << variant << " router " << t.routers[r].name;
        }
    }
}

TEST(Oracle, Fig17Values) {
    Topology t = hpim::test::paper_topology("fig17.topo");
    auto routes = compute_routes(t, 0);
    auto r = [&](const char* name) { return routes[t.router_index(name)]; };
    EXPECT_EQ(r("R1").metric.rpc, 10u);
    EXPECT_EQ(r("R2").metric.rpc, 20u);
    EXPECT_EQ(r("R3").metric.rpc, 30u);
    EXPECT_EQ(r("R3").root_iface, t.iface_id(t.router_index("R3"), "i2"));
    EXPECT_EQ(r("R4").metric.rpc, 30u);
    t.iface(t.router_index("R3"), 1).cost = 5;
    routes = compute_routes(t, 0);
    EXPECT_EQ(r("R3").metric.rpc, 15u);
    EXPECT_EQ(r("R3").root_iface, 1);
}
