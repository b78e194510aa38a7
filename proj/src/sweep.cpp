#include "hpim/sweep.hpp"

#include <random>
#include <set>
#include <sstream>

#include "hpim/netsim.hpp"
#include "hpim/scenario.hpp"

namespace hpim {

namespace {

struct GenIface {
    int router;
    std::string name;
};

struct GenLink {
    std::string name;
    bool shared;
    std::vector<GenIface> ends;
};

std::mt19937_64 case_rng(std::uint64_t seed, std::size_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), 0x5eedu};
    return std::mt19937_64(seq);
}

}  // namespace

SweepCase generate_case(std::uint64_t seed, std::size_t index, const SweepOptions& opt) {
    auto rng = case_rng(seed, index);
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    auto chance = [&](double p) { return std::uniform_real_distribution<double>(0, 1)(rng) < p; };

    const int n = pick(2, std::max(2, opt.max_routers));
    std::vector<int> next_iface(n, 0);
    std::vector<GenLink> links;
    std::set<std::pair<int, int>> p2p;
    auto attach = [&](GenLink& l, int r) { l.ends.push_back({r, "e" + std::to_string(next_iface[r]++)}); };

    // Spanning tree first, so the graph starts connected.
    for (int r = 1; r < n; ++r) {
        std::vector<std::size_t> open;
        for (std::size_t k = 0; k < links.size(); ++k)
            if (links[k].shared && links[k].ends.size() < 4) open.push_back(k);
        if (!open.empty() && chance(0.3)) {
            attach(links[open[pick(0, static_cast<int>(open.size()) - 1)]], r);
            continue;
        }
        int peer = pick(0, r - 1);
        GenLink l{"l" + std::to_string(links.size()), chance(0.25), {}};
        attach(l, peer);
        attach(l, r);
        if (!l.shared) p2p.insert({peer, r});
        links.push_back(l);
    }
    for (int extra = pick(0, n / 2); extra > 0 && n > 2; --extra) {
        int a = pick(0, n - 1), b = pick(0, n - 1);
        if (a == b || p2p.count({std::min(a, b), std::max(a, b)})) continue;
        p2p.insert({std::min(a, b), std::max(a, b)});
        GenLink l{"l" + std::to_string(links.size()), false, {}};
        attach(l, a);
        attach(l, b);
        links.push_back(l);
    }
    std::vector<std::size_t> core(links.size());
    for (std::size_t k = 0; k < core.size(); ++k) core[k] = k;

    // Source subnet: one originator, sometimes two.
    GenLink src{"lsrc", true, {}};
    int o1 = pick(0, n - 1);
    attach(src, o1);
    if (n > 2 && chance(0.3)) {
        int o2 = pick(0, n - 1);
        if (o2 != o1) attach(src, o2);
    }
    links.push_back(src);
    const int receivers = pick(1, 3);
    for (int h = 0; h < receivers; ++h) {
        GenLink l{"lh" + std::to_string(h), false, {}};
        attach(l, pick(0, n - 1));
        links.push_back(l);
    }

    std::ostringstream topo;
    topo << "# sweep case " << index << " seed " << seed << "\n";
    for (int r = 0; r < n; ++r) topo << "router R" << r << "\n";
    for (auto& l : links) topo << "link " << l.name << (l.shared ? " shared" : " p2p") << "\n";
    for (auto& l : links)
        for (auto& e : l.ends) topo << "iface R" << e.router << " " << e.name << " " << l.name << " cost " << pick(1, 20) << "\n";
    topo << "source S lsrc\n";
    for (int h = 0; h < receivers; ++h) topo << "receiver H" << h << " lh" << h << "\n";

    // Event script. Tracks enough state to keep every action meaningful.
    std::ostringstream scn;
    scn << "topology sweep.topo\n";
    const std::string group = "239.1.1.1";
    std::vector<bool> router_up(n, true), link_up(links.size(), true), joined(receivers, false);
    bool source_on = true;
    SimTime t = 30 * kSecond;
    for (int h = 0; h < receivers; ++h)
        if (chance(0.5)) {
            scn << "at 1s host_join H" << h << " " << group << "\n";
            joined[h] = true;
        }
    scn << "at " << format_time(t) << " start_source S " << group << " period 5s\n";
    for (int e = 0; e < opt.events; ++e) {
        t += opt.spacing;
        std::string line;
        for (int attempt = 0; attempt < 20 && line.empty(); ++attempt) {
            switch (pick(0, 7)) {
                case 0: {
                    int r = pick(0, n - 1);
                    if (router_up[r]) {
                        router_up[r] = false;
                        line = "fail_router R" + std::to_string(r);
                    } else {
                        router_up[r] = true;
                        line = "recover_router R" + std::to_string(r);
                    }
                    break;
                }
                case 1: {
                    auto k = core[pick(0, static_cast<int>(core.size()) - 1)];
                    line = (link_up[k] ? "fail_link " : "recover_link ") + links[k].name;
                    link_up[k] = !link_up[k];
                    break;
                }
                case 2:
                case 3: {
                    auto& l = links[pick(0, static_cast<int>(links.size()) - 1)];
                    auto& end = l.ends[pick(0, static_cast<int>(l.ends.size()) - 1)];
                    line = "set_cost R" + std::to_string(end.router) + " " + end.name + " " + std::to_string(pick(1, 30));
                    break;
                }
                case 4: {
                    int h = pick(0, receivers - 1);
                    line = (joined[h] ? "host_leave H" : "host_join H") + std::to_string(h) + " " + group;
                    joined[h] = !joined[h];
                    break;
                }
                case 5: {
                    auto& l = links[core[pick(0, static_cast<int>(core.size()) - 1)]];
                    auto& end = l.ends[pick(0, static_cast<int>(l.ends.size()) - 1)];
                    if (router_up[end.router]) line = "reboot_interface R" + std::to_string(end.router) + " " + end.name;
                    break;
                }
                case 6:
                    line = source_on ? "stop_source S " + group : "start_source S " + group + " period 5s";
                    source_on = !source_on;
                    break;
                default:
                    break;
            }
        }
        if (!line.empty()) scn << "at " << format_time(t) << " " << line << "\n";
    }
    scn << "end " << format_time(t + opt.spacing) << "\n";
    return {index, topo.str(), scn.str()};
}

SweepResult sweep(const SweepOptions& opt) {
    SweepResult res;
    for (std::size_t i = 0; i < opt.topologies; ++i) {
        SweepCase c = generate_case(opt.seed, i, opt);
        Scenario s = parse_scenario(c.scenario_text, "sweep.scn");
        SimOptions so;
        so.seed = opt.seed + i;
        so.trace = false;
        so.frame_log = false;
        Simulator sim(parse_topology(c.topology_text, "sweep.topo"), so);
        sim.load(s);
        std::set<SimTime> points;
        for (auto& a : s.actions) points.insert(a.time - 1);
        points.insert(s.end);
        ++res.cases;
        for (SimTime p : points) {
            sim.run_until(p);
            if (!sim.quiescent()) {
                ++res.skipped;
                continue;
            }
            ++res.checkpoints;
            auto v = check_invariants(sim, opt.checks);
            if (!v.empty()) {
                res.failure = SweepFailure{c, p, std::move(v)};
                return res;
            }
        }
    }
    return res;
}

}  // namespace hpim
