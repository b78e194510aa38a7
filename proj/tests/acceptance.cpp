// Acceptance runner: one PASS/FAIL line per criterion, exit 1 if any fails.
// Usage: hpim_acceptance [criterion numbers...]

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "harness.hpp"
#include "hpim/checker.hpp"
#include "hpim/explore.hpp"
#include "hpim/sweep.hpp"

using namespace hpim;
using namespace hpim::test;
namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int number;
    std::string name;
    std::function<Outcome()> run;
};

const Ipv4 kG = *parse_ip("232.1.1.1");

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Assertion failures plus end-of-run invariants.
std::vector<std::string> problems_of(const Simulator& sim) {
    std::vector<std::string> out;
    for (auto& f : sim.failures()) out.push_back("line " + std::to_string(f.line) + ": " + f.message);
    if (sim.quiescent())
        for (auto& v : check_invariants(sim)) out.push_back(to_string(v));
    return out;
}

std::string first_or(const std::vector<std::string>& v, const std::string& fallback) {
    return v.empty() ? fallback : v.front();
}

std::vector<fs::path> suite(const std::string& dir, const std::string& ext) {
    std::vector<fs::path> files;
    for (auto& e : fs::directory_iterator(scenario_dir() / dir))
        if (e.path().extension() == ext) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    return files;
}

std::string router_of_ip(const Simulator& sim, std::optional<Ipv4> ip) {
    if (!ip) return "-";
    int r = sim.topology().owner_of(*ip);
    return r < 0 ? ip_to_string(*ip) : sim.topology().routers[r].name;
}

Ipv4 iface_ip(const Topology& t, const std::string& r, const std::string& i) {
    int ri = t.router_index(r);
    return t.iface(ri, t.iface_id(ri, i)).ip;
}

const InterfaceTreeState* tree_iface(const Simulator& sim, const std::string& r, const std::string& i, TreeRef t) {
    int ri = sim.topology().router_index(r);
    const TreeEntry* e = sim.router(ri).tree(t);
    if (!e) return nullptr;
    auto it = e->ifaces.find(sim.topology().iface_id(ri, i));
    return it == e->ifaces.end() ? nullptr : &it->second;
}

std::vector<Json> router_events(const Simulator& sim, const std::string& kind) {
    std::vector<Json> out;
    for (auto& line : sim.trace()) {
        Json j = Json::parse(line);
        if (j.value("ev", "") == "router" && j.value("kind", "") == kind) out.push_back(std::move(j));
    }
    return out;
}

bool upstream_class(MsgType t) { return t == MsgType::IamUpstream || t == MsgType::IamNoLongerUpstream; }

// 1
Outcome fig17_formation() {
    auto t0 = std::chrono::steady_clock::now();
    Simulator sim = run_scenario(paper_scenario("figures/fig17_formation.scn"));
    double wall = seconds_since(t0);
    auto problems = problems_of(sim);
    if (!problems.empty()) return {false, problems.front()};
    if (!sim.quiescent()) return {false, "not quiescent at end"};
    TreeRef t = sim.tree_of(0, kG);
    std::ostringstream parents;
    for (std::size_t r = 0; r < sim.topology().routers.size(); ++r) {
        const TreeEntry* e = sim.router(static_cast<int>(r)).tree(t);
        if (!e || e->state != TreeState::Active) return {false, sim.topology().routers[r].name + " not ACTIVE"};
        if (e->parent) parents << sim.topology().routers[r].name << "->" << router_of_ip(sim, e->parent) << " ";
    }
    std::string p = parents.str();
    if (p != "R2->R1 R3->R2 R4->R2 ") return {false, "parents " + p};
    auto* aw = tree_iface(sim, "R4", "i1", t);
    if (!aw || aw->aw != iface_ip(sim.topology(), "R2", "i2")) return {false, "lk3 AW is not R2"};
    if (wall >= 1.0) return {false, "wall time " + std::to_string(wall) + " s"};
    return {true, "parents " + p + "AW(lk3)=R2, all ACTIVE, " + std::to_string(wall) + " s wall"};
}

// 2
Outcome fig17_cost_change() {
    Simulator sim = run_scenario(paper_scenario("figures/fig17_cost_change.scn"));
    auto problems = problems_of(sim);
    if (!problems.empty()) return {false, problems.front()};
    const auto& topo = sim.topology();
    int r3 = topo.router_index("R3");
    std::multiset<std::string> got;
    for (auto* f : frames_since(sim, 100 * kSecond, [](const FrameRecord& f) { return upstream_class(f.type); })) {
        std::string s = topo.routers[f->router].name + " " + topo.iface(f->router, f->iface).name + " " + to_string(f->type);
        if (f->type == MsgType::IamUpstream) s += " rpc=" + std::to_string(*std::get<UpstreamBody>(decode(*f).body).rpc);
        if (f->retransmission) s += " retx";
        got.insert(s);
    }
    std::multiset<std::string> want{"R3 i2 IamUpstream rpc=15", "R3 i1 IamNoLongerUpstream"};
    if (got != want) {
        std::string s;
        for (auto& g : got) s += "[" + g + "] ";
        return {false, "upstream-class messages " + s};
    }
    TreeRef t = sim.tree_of(0, kG);
    if (sim.router(r3).tree(t)->state != TreeState::Active) return {false, "R3 left ACTIVE"};
    Ipv4 r3ip = iface_ip(topo, "R3", "i2");
    auto* r2 = tree_iface(sim, "R2", "i2", t);
    auto* r4 = tree_iface(sim, "R4", "i1", t);
    if (!r2 || r2->aw != r3ip || !r4 || r4->aw != r3ip) return {false, "R2/R4 do not see R3 as AW"};
    return {true, "R3 sent exactly {IamUpstream rpc 15 on i2, IamNoLongerUpstream on i1}; R2 and R4 elect R3"};
}

// 3
Outcome fig17_aw_failure() {
    Simulator sim = run_scenario(paper_scenario("figures/fig17_aw_failure.scn"));
    auto problems = problems_of(sim);
    if (!problems.empty()) return {false, problems.front()};
    const auto& topo = sim.topology();
    std::set<Ipv4> r3_ips;
    for (auto& i : topo.routers[topo.router_index("R3")].ifaces) r3_ips.insert(i.ip);
    SimTime detected = kNever;
    for (auto& j : router_events(sim, "neighbor_removed"))
        if (r3_ips.count(*parse_ip(j["neighbor"].get<std::string>()))) detected = std::min<SimTime>(detected, j["t"].get<SimTime>());
    if (detected == kNever) return {false, "R3's death never detected"};
    auto upstream = frames_since(sim, detected, [](const FrameRecord& f) { return upstream_class(f.type); });
    auto other = frames_since(sim, detected, [](const FrameRecord& f) { return is_tree_message(f.type) && !upstream_class(f.type); });
    if (!upstream.empty())
        return {false, std::to_string(upstream.size()) + " upstream messages after detection at " + format_time(detected)};
    return {true, "AW(lk3)=R2 from stored state; 0 upstream messages after detection at " + format_time(detected) + " (" +
                      std::to_string(other.size()) + " interest/ack frames to the new AW)"};
}

// 4
Outcome fig18_feasibility() {
    Simulator ok = run_scenario(paper_scenario("figures/fig18_feasibility.scn"));
    auto problems = problems_of(ok);
    if (!problems.empty()) return {false, "feasibility on: " + problems.front()};

    Scenario s = load_scenario(scenario_dir() / "mutants" / "fig18_no_feasibility.scn");
    SimOptions so;
    so.trace = false;
    so.frame_log = false;
    Simulator bad = run_scenario(s, so);
    auto has_loop = [](const std::vector<Violation>& v) {
        return std::any_of(v.begin(), v.end(), [](auto& x) { return x.invariant == "loop_freedom"; });
    };
    if (!has_loop(check_invariants(bad))) return {false, "feasibility off: no loop reported at end"};
    // The loop keeps R2 and R3 trading interest messages, so the run never settles; check it much later too.
    bad.run_until(s.end + 600 * kSecond);
    TreeRef t = bad.tree_of(0, kG);
    const auto& topo = bad.topology();
    for (auto name : {"R2", "R3"})
        if (bad.router(topo.router_index(name)).tree(t)->state != TreeState::Active)
            return {false, std::string("feasibility off: ") + name + " left ACTIVE"};
    if (!has_loop(check_invariants(bad))) return {false, "feasibility off: loop vanished"};
    return {true, "on: R1,R2,R3 INACTIVE after stop; off: R2<->R3 ACTIVE loop reported and still there 10 min later"};
}

// 5
Outcome fig33_sync() {
    Topology topo = paper_topology("pair_src.topo");
    topo.params.fragment_size = 3;
    SimOptions so;
    so.trace = false;
    Simulator sim(topo, so);
    const int r1 = topo.router_index("R1"), r2 = topo.router_index("R2");
    sim.fail_router(r2);
    sim.run_until(1 * kSecond);
    for (int k = 1; k <= 5; ++k) sim.start_source(0, *parse_ip("232.1.1." + std::to_string(k)));
    sim.run_until(200 * kSecond);
    const int eth1 = topo.iface_id(r1, "eth1");
    sim.mutable_router(r1).test_set_interface_sn(eth1, 50);
    const SimTime t0 = sim.now();
    sim.recover_router(r2);
    sim.run_until(t0 + 30 * kSecond);

    struct Seen {
        std::string who;
        std::uint16_t sync_sn;
        SeqNum ssn;
        bool master, more;
        std::size_t trees;
    };
    std::vector<Seen> seen;
    for (auto* f : frames_since(sim, t0, [](const FrameRecord& f) { return f.type == MsgType::Sync; })) {
        auto b = std::get<SyncBody>(decode(*f).body);
        seen.push_back({topo.routers[f->router].name, b.sync_sn, b.my_snapshot_sn, b.master_flag, b.more_flag, b.trees.size()});
    }
    const std::vector<Seen> want = {
        {"R1", 0, 51, true, true, 3}, {"R2", 0, 1, false, false, 0}, {"R1", 1, 51, true, true, 2},
        {"R2", 1, 1, false, false, 0}, {"R1", 2, 51, true, false, 0}, {"R2", 2, 1, false, false, 0},
    };
    std::ostringstream got;
    for (auto& s : seen)
        got << s.who << "(sn=" << s.sync_sn << " ssn=" << s.ssn << " M=" << s.master << " m=" << s.more << " n=" << s.trees << ") ";
    bool match = seen.size() == want.size();
    for (std::size_t k = 0; match && k < want.size(); ++k) {
        auto& a = seen[k];
        auto& b = want[k];
        match = a.who == b.who && a.sync_sn == b.sync_sn && a.ssn == b.ssn && a.master == b.master && a.more == b.more &&
                a.trees == b.trees;
    }
    if (!match) return {false, "sync exchange " + got.str()};
    Ipv4 ip1 = topo.iface(r1, eth1).ip;
    Ipv4 ip2 = topo.iface(r2, topo.iface_id(r2, "eth0")).ip;
    auto* n12 = sim.router(r1).neighbor(eth1, ip2);
    auto* n21 = sim.router(r2).neighbor(topo.iface_id(r2, "eth0"), ip1);
    if (!n12 || !n21 || !n12->synced() || !n21->synced()) return {false, "not SYNCED at both ends"};
    if (n21->upstream.size() != 5) return {false, "R2 holds " + std::to_string(n21->upstream.size()) + " UPSTREAM trees"};
    return {true, "SyncSN 0,0,1,1,2,2; SSN 51/1; flags M/m = 11,00,11,00,10,00; 3+2 records; both SYNCED; 5 UPSTREAM at R2"};
}

Topology pair_bench_topology(SimTime hello, SimTime hold) {
    Topology topo = paper_topology("pair_src.topo");
    topo.params.timers.hello_period = hello;
    topo.params.timers.hold_time = hold;
    return topo;
}

// 6
Outcome sequencing_vignettes() {
    const TreeRef g1{*parse_ip("10.1.0.200"), *parse_ip("232.1.1.1")};
    const TreeRef g2{*parse_ip("10.1.0.200"), *parse_ip("232.1.1.2")};
    std::vector<std::string> bad;

    // Reversed IamNoLongerUpstream(7) / IamUpstream(8) after stored 6.
    {
        NeighborSeqState s;
        s.neighbor_boot_time = 1;
        s.per_tree_sn[g1] = 6;
        if (classify_incoming(s, g1, {1, 8}) != Classification::Accept) bad.push_back("fig25: SN 8 not accepted");
        if (classify_incoming(s, g1, {1, 7}) != Classification::Stale) bad.push_back("fig25: SN 7 not stale");
    }
    // Same thing through two routers: the late IamNoLongerUpstream must not win.
    {
        Bench b(pair_bench_topology(30 * kSecond, 120 * kSecond));
        b.boot();
        b.advance(5 * kSecond);
        const int eth1 = 2;
        b.router(0).test_set_interface_sn(eth1, 5);
        b.source_data(0, g1.group);
        b.advance(10 * kSecond);
        auto from_r1_upstream = [](const Bench::Pending& p) { return p.from == 0 && upstream_class(p.frame.type); };
        auto pass = [&](const Bench::Pending& p) { return !from_r1_upstream(p); };
        b.advance(215 * kSecond, pass, from_r1_upstream);  // SAT expiry: data at 5 s + 210 s
        b.source_data(0, g1.group);
        b.pump(pass, from_r1_upstream);
        std::vector<std::pair<MsgType, SeqNum>> sent;
        for (auto& p : b.held) sent.push_back({p.frame.type, std::get<UpstreamBody>(decode(p.frame).body).sn});
        if (sent != std::vector<std::pair<MsgType, SeqNum>>{{MsgType::IamNoLongerUpstream, 7}, {MsgType::IamUpstream, 8}}) {
            bad.push_back("fig25 routers: unexpected held messages (" + std::to_string(sent.size()) + ")");
        } else {
            auto held = b.held;
            b.held.clear();
            b.deliver(held[1]);
            b.deliver(held[0]);
            b.advance(b.now() + 5 * kSecond);
            auto* n = b.router(1).neighbor(1, b.topology().iface(0, eth1).ip);
            if (!n || !n->upstream.count(g1)) bad.push_back("fig25 routers: R2 does not hold R1 UPSTREAM");
        }
    }
    // Two trees: IamUpstream(G1,1), IamUpstream(G2,2), IamNoLongerUpstream(G1,3); 2nd and 3rd reversed.
    {
        NeighborSeqState s;
        s.neighbor_boot_time = 1;
        bool ok = classify_incoming(s, g1, {1, 1}) == Classification::Accept &&
                  classify_incoming(s, g1, {1, 3}) == Classification::Accept &&
                  classify_incoming(s, g2, {1, 2}) == Classification::Accept;
        std::map<TreeRef, SeqNum> want{{g1, 3}, {g2, 2}};
        if (!ok || s.per_tree_sn != want) bad.push_back("fig26: per-tree SNs differ");
    }
    // BootTime: (BT=1,SN=1001) stored, then (BT=2,SN=1) after a reboot.
    {
        NeighborSeqState s;
        s.neighbor_boot_time = 1;
        classify_incoming(s, g1, {1, 1000});
        classify_incoming(s, g1, {1, 1001});
        if (!fresher({2, 1}, {1, 1001})) bad.push_back("fig27: (2,1) not fresher");
        if (classify_incoming(s, g1, {2, 1}) != Classification::RequiresSync) bad.push_back("fig27: (2,1) does not restart sync");
    }
    // Router level: R1 goes INACTIVE, reboots its interface and becomes ACTIVE again.
    {
        Bench b(pair_bench_topology(30 * kSecond, 120 * kSecond));
        b.boot();
        b.advance(5 * kSecond);
        b.source_data(0, g1.group);
        b.advance(5 * kSecond + 211 * kSecond);
        const Ipv4 ip1 = b.topology().iface(0, 2).ip;
        auto* before = b.router(1).neighbor(1, ip1);
        if (!before || before->upstream.count(g1)) bad.push_back("fig27 routers: R1 still UPSTREAM after going INACTIVE");
        BootTime old_bt = b.router(0).interface(2)->seq.boot_time;
        b.run(0, InterfaceChange{2, InterfaceChange::Kind::Reboot});
        b.source_data(0, g1.group);
        b.advance(b.now() + 10 * kSecond);
        auto* after = b.router(1).neighbor(1, ip1);
        if (b.router(0).interface(2)->seq.boot_time <= old_bt) bad.push_back("fig27 routers: BootTime did not grow");
        if (!after || !after->upstream.count(g1) || after->seq.neighbor_boot_time != b.router(0).interface(2)->seq.boot_time)
            bad.push_back("fig27 routers: R2 does not hold rebooted R1 UPSTREAM");
    }
    if (!bad.empty()) return {false, bad.front()};
    return {true, "reversed pair ends UPSTREAM (SN 8 kept, 7 stale); {(S,G1):3,(S,G2):2}; (BT=2,SN=1) fresher and applied after resync"};
}

// 7
Outcome fig31_checkpoint() {
    NeighborSeqState s;
    s.neighbor_boot_time = 1;
    auto tree = [](int k) { return TreeRef{*parse_ip("10.0.0." + std::to_string(k)), *parse_ip("232.0.0." + std::to_string(k))}; };
    const SeqNum sns[6] = {455, 470, 478, 483, 489, 495};
    for (int k = 0; k < 6; ++k) s.per_tree_sn[tree(k + 1)] = sns[k];
    apply_checkpoint(s, 490);
    std::map<TreeRef, SeqNum> want{{tree(6), 495}};
    if (s.per_tree_sn != want) return {false, std::to_string(s.per_tree_sn.size()) + " entries after checkpoint 490"};
    if (classify_incoming(s, tree(7), {1, 490}) != Classification::Stale) return {false, "unknown tree at SN 490 accepted"};
    if (classify_incoming(s, tree(1), {1, 498}) != Classification::Accept) return {false, "SN 498 rejected"};
    if (s.per_tree_sn.size() != 2 || s.per_tree_sn[tree(1)] != 498) return {false, "SN 498 not stored"};
    return {true, "six entries compact to one at checkpoint 490; SN 498 accepted and stored"};
}

// 8
Outcome fig34_ack_validation() {
    // Short hello/hold so each side can lose the other quickly.
    Bench b(pair_bench_topology(1 * kSecond, 5 * kSecond));
    const TreeRef t{b.topology().sources[0].ip, kG};
    const int r1 = 0, r2 = 1, r1_eth1 = 2, r2_eth0 = 1;
    const Ipv4 ip1 = b.topology().iface(r1, r1_eth1).ip, ip2 = b.topology().iface(r2, r2_eth0).ip;
    b.boot();
    b.advance(3 * kSecond);
    if (!b.router(r1).neighbor(r1_eth1, ip2) || !b.router(r1).neighbor(r1_eth1, ip2)->synced()) return {false, "no initial sync"};

    // R1 stops hearing R2 and drops it.
    b.advance(10 * kSecond, [&](auto& p) { return p.from != r2; });
    if (b.router(r1).neighbor(r1_eth1, ip2)) return {false, "R1 kept R2"};

    // R2's next Hello restarts the sync; R1's Sync is held back.
    auto r1_sync = [&](const Bench::Pending& p) { return p.from == r1 && p.frame.type == MsgType::Sync; };
    auto not_sync = [&](const Bench::Pending& p) { return !r1_sync(p); };
    while (!b.router(r1).neighbor(r1_eth1, ip2)) b.advance(b.now() + 100 * kMillisecond, not_sync, r1_sync);
    if (b.held.empty()) return {false, "R1 sent no Sync"};
    const SeqNum new_ssn = b.router(r1).neighbor(r1_eth1, ip2)->seq.my_snapshot_sn_for_neighbor;

    // R1 becomes ACTIVE; its IamUpstream overtakes the Sync and R2 (still synced with R1's old period) ACKs it.
    b.source_data(0, kG);
    std::size_t acks = 0, stale_acks = 0;
    auto count_acks = [&](const Bench::Pending& p) {
        if (p.from == r2 && p.frame.type == MsgType::Ack) {
            ++acks;
            if (std::get<AckBody>(decode(p.frame).body).neighbor_snapshot_sn != new_ssn) ++stale_acks;
        }
        return not_sync(p);
    };
    b.pump(count_acks, r1_sync);
    auto awaiting = [&] {
        for (auto& p : b.router(r1).interface(r1_eth1)->rtx.pending())
            if (p.tree == t && p.awaiting.count(ip2)) return true;
        return false;
    };
    if (stale_acks == 0) return {false, "R2 sent no ACK carrying the old SnapshotSN"};
    if (!awaiting()) return {false, "R1 accepted the stale-SSN ACK"};

    // R2 now loses R1; R1's frames (retransmissions included) are dropped meanwhile.
    b.advance(b.now() + 6 * kSecond, [&](auto& p) { return p.from != r1; });
    if (b.router(r2).neighbor(r2_eth0, ip1)) return {false, "R2 kept R1"};

    // The delayed Sync lands; R2 learns R1's snapshot, which lacks the tree.
    auto held = b.held;
    b.held.clear();
    std::size_t retx_before = 0;
    b.deliver(held.front());
    b.advance(b.now() + 20 * kSecond, [&](const Bench::Pending& p) {
        if (p.from == r1 && p.frame.type == MsgType::IamUpstream && p.frame.retransmission) ++retx_before;
        return true;
    });
    auto* n = b.router(r2).neighbor(r2_eth0, ip1);
    if (!n || !n->synced()) return {false, "R2 not SYNCED with R1 after the late Sync"};
    if (retx_before == 0) return {false, "IamUpstream never retransmitted"};
    if (!n->upstream.count(t)) return {false, "R2 does not hold R1 UPSTREAM"};
    if (awaiting()) return {false, "R1 still waiting for an ACK"};
    std::string digest = b.router(r2).digest();
    std::string line = "upstream eth0 " + ip_to_string(ip1) + " " + to_string(t);
    if (digest.find(line) == std::string::npos) return {false, "digest lacks '" + line + "'"};
    return {true, std::to_string(stale_acks) + " stale-SSN ACK rejected; " + std::to_string(retx_before) +
                      " IamUpstream retransmissions until R2 stored (S1,G1) UPSTREAM"};
}

// 9
Outcome model_check() {
    auto t0 = std::chrono::steady_clock::now();
    std::size_t total = 0;
    for (auto& path : suite("modelcheck", ".explore")) {
        ExploreOptions opt;
        opt.bound = 10000;
        auto r = explore(load_scenario(path), opt);
        total += r.schedules;
        if (r.budget_exceeded) return {false, path.filename().string() + ": step budget exceeded"};
        if (r.counterexample)
            return {false, path.filename().string() + ": sample " + std::to_string(r.counterexample->sample) + ": " +
                               first_or(r.counterexample->problems, "?")};
        if (r.schedules < 10000) return {false, path.filename().string() + ": only " + std::to_string(r.schedules) + " schedules"};
    }
    double wall = seconds_since(t0);
    if (wall >= 300) return {false, "took " + std::to_string(wall) + " s"};
    return {true, "8 tests x 10000 schedules (" + std::to_string(total) + ") all reach their target states, " +
                      std::to_string(static_cast<int>(wall)) + " s"};
}

std::optional<std::string> run_suite(const std::string& dir, bool lossy) {
    for (auto& path : suite(dir, ".scn")) {
        Scenario s = load_scenario(path);
        SimOptions so;
        so.trace = false;
        if (lossy) {
            LinkModel m;
            m.loss = 0.2;
            m.reorder = true;
            m.jitter = 10 * kMillisecond;
            so.link_override = m;
            s.params.emplace_back("hello_period", "10s");
        }
        Simulator sim = run_scenario(s, so);
        auto p = problems_of(sim);
        if (!p.empty()) return path.filename().string() + ": " + p.front();
    }
    return std::nullopt;
}

// 10
Outcome test_suite() {
    auto t0 = std::chrono::steady_clock::now();
    if (auto e = run_suite("tests", false)) return {false, "FIFO: " + *e};
    if (auto e = run_suite("tests", true)) return {false, "lossy: " + *e};
    double wall = seconds_since(t0);
    if (wall >= 300) return {false, "took " + std::to_string(wall) + " s"};
    return {true, "17/17 under FIFO and under loss 0.2 + reorder, " + std::to_string(wall) + " s"};
}

// 11
Outcome replay_suite() {
    std::set<std::string> classes;
    for (auto& path : suite("replay", ".scn")) {
        Scenario s = load_scenario(path);
        for (auto& a : s.actions)
            if (a.verb == "capture") classes.insert(a.args[2]);
    }
    if (classes.size() != 7) return {false, std::to_string(classes.size()) + " message classes covered"};
    if (auto e = run_suite("replay", false)) return {false, *e};
    return {true, "Hello, Sync, IamUpstream, IamNoLongerUpstream, Interest, NoInterest, Ack replays leave every digest unchanged"};
}

// 12
Outcome sat_timing() {
    SimOptions so;
    so.trace_data = true;
    Simulator sim = run_scenario(paper_scenario("figures/sat_timing.scn"), so);
    auto problems = problems_of(sim);
    if (!problems.empty()) return {false, problems.front()};
    const int r1 = sim.topology().router_index("R1");
    SimTime last_data = -1;
    for (auto& line : sim.trace()) {
        Json j = Json::parse(line);
        if (j.value("ev", "") == "data" && j.value("router", "") == "R1") last_data = std::max(last_data, j["t"].get<SimTime>());
    }
    if (last_data < 0) return {false, "R1 never saw data"};
    auto removals = frames_since(sim, 0, [&](const FrameRecord& f) { return f.router == r1 && f.type == MsgType::IamNoLongerUpstream; });
    if (removals.empty()) return {false, "no IamNoLongerUpstream from R1"};
    SimTime got = removals.front()->time, want = last_data + 210 * kSecond;
    if (got != want) return {false, "removal at " + format_time(got) + ", expected " + format_time(want)};
    return {true, "last data at R1 " + format_time(last_data) + ", IamNoLongerUpstream at " + format_time(got)};
}

// 13
Outcome sn_overflow() {
    Scenario s = paper_scenario("figures/sn_churn.scn");
    SimOptions so;
    Simulator reference = run_scenario(s, so);
    s.params.emplace_back("max_sn", "20");
    Simulator wrapped = run_scenario(s, so);
    for (auto* sim : {&reference, &wrapped}) {
        auto p = problems_of(*sim);
        if (!p.empty()) return {false, p.front()};
    }
    auto overflows = router_events(wrapped, "sn_overflow");
    if (overflows.empty()) return {false, "SN never wrapped"};
    if (!router_events(reference, "sn_overflow").empty()) return {false, "reference run wrapped"};
    SimTime first = overflows.front()["t"].get<SimTime>();
    std::size_t resyncs = 0;
    for (auto& j : router_events(wrapped, "sync_done"))
        if (j["t"].get<SimTime>() >= first) ++resyncs;
    if (resyncs == 0) return {false, "no resync after the wrap"};
    if (reference.digest(false) != wrapped.digest(false)) return {false, "digest differs from the reference run"};
    return {true, std::to_string(overflows.size()) + " wraps, " + std::to_string(resyncs) +
                      " completed resyncs; protocol digest equals the no-wrap run"};
}

// 14
Outcome property_sweep() {
    auto t0 = std::chrono::steady_clock::now();
    SweepOptions opt;
    opt.topologies = 200;
    opt.max_routers = 8;
    SweepResult r = sweep(opt);
    double wall = seconds_since(t0);
    if (r.failure)
        return {false, "case " + std::to_string(r.failure->c.index) + " at " + format_time(r.failure->time) + ": " +
                           to_string(r.failure->violations.front())};
    if (r.cases != 200) return {false, std::to_string(r.cases) + " cases"};
    if (wall >= 600) return {false, "took " + std::to_string(wall) + " s"};
    return {true, "200 topologies, " + std::to_string(r.checkpoints) + " quiescent checkpoints, 0 violations, " +
                      std::to_string(static_cast<int>(wall)) + " s"};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> all = {
        {1, "fig17 formation", fig17_formation},
        {2, "fig17 cost change", fig17_cost_change},
        {3, "fig17 AW failure", fig17_aw_failure},
        {4, "fig18 feasibility", fig18_feasibility},
        {5, "fig33 sync", fig33_sync},
        {6, "sequencing vignettes", sequencing_vignettes},
        {7, "fig31 checkpoint", fig31_checkpoint},
        {8, "fig34 ACK validation", fig34_ack_validation},
        {9, "model-check suite", model_check},
        {10, "scenario test suite", test_suite},
        {11, "replay suite", replay_suite},
        {12, "SAT timing", sat_timing},
        {13, "SN overflow", sn_overflow},
        {14, "property sweep", property_sweep},
    };
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::stoi(argv[i]));
    int failed = 0;
    for (auto& c : all) {
        if (!only.empty() && !only.count(c.number)) continue;
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::cout << (o.pass ? "PASS" : "FAIL") << " " << c.number << " " << c.name << ": " << o.detail << std::endl;
    }
    return failed ? 1 : 0;
}
