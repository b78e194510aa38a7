#include <gtest/gtest.h>

#include <algorithm>

#include "harness.hpp"
#include "hpim/checker.hpp"

using namespace hpim;
using namespace hpim::test;

namespace {

const Ipv4 kG = *parse_ip("232.1.1.1");

std::vector<std::filesystem::path> scn_files(const std::string& dir) {
    std::vector<std::filesystem::path> out;
    for (auto& e : std::filesystem::directory_iterator(scenario_dir() / dir))
        if (e.path().extension() == ".scn") out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

SimOptions lossy(std::uint64_t seed) {
    SimOptions o;
    o.seed = seed;
    LinkModel m;
    m.loss = 0.2;
    m.reorder = true;
    m.jitter = 10 * kMillisecond;
    o.link_override = m;
    return o;
}

}  // namespace

TEST(Netsim, SameSeedSameTrace) {
    Scenario s = paper_scenario("tests/test14_reboot_nonroot.scn");
    s.params.emplace_back("hello_period", "10s");
    Simulator a = run_scenario(s, lossy(5));
    Simulator b = run_scenario(s, lossy(5));
    ASSERT_FALSE(a.trace().empty());
    EXPECT_EQ(a.trace(), b.trace());
    Simulator c = run_scenario(s, lossy(6));
    EXPECT_NE(a.trace(), c.trace());
}

// Without loss or reordering nothing ever arrives out of date.
TEST(Netsim, FifoLinksNeverDeliverStaleMessages) {
    for (auto& path : scn_files("tests")) {
        Simulator sim = run_scenario(load_scenario(path));
        EXPECT_EQ(sim.stale_count(), 0u) << path.filename();
        EXPECT_TRUE(sim.failures().empty()) << path.filename() << "\n" << failures_text(sim);
    }
}

TEST(Netsim, RouterSelfCheckAfterEveryFigure) {
    for (auto& path : scn_files("figures")) {
        Simulator sim = run_scenario(load_scenario(path));
        for (std::size_t r = 0; r < sim.topology().routers.size(); ++r) {
            if (!sim.alive(static_cast<int>(r))) continue;
            auto bad = sim.router(static_cast<int>(r)).self_check();
            EXPECT_TRUE(bad.empty()) << path.filename() << " " << sim.topology().routers[r].name << ": " << (bad.empty() ? "" : bad[0]);
        }
    }
}

TEST(Netsim, DataReachesJoinedReceiverOnly) {
    Topology t = paper_topology("fig17_rx.topo");
    Simulator sim(t);
    int h = t.receiver_index("H");
    sim.host_join(h, kG);
    sim.run_until(60 * kSecond);
    sim.start_source(0, kG);
    sim.run_until(70 * kSecond);
    auto got = sim.last_delivery(h, sim.tree_of(0, kG));
    ASSERT_TRUE(got);
    EXPECT_GT(*got, 69 * kSecond);
    sim.host_leave(h, kG);
    sim.run_until(80 * kSecond);
    EXPECT_LT(*sim.last_delivery(h, sim.tree_of(0, kG)), 71 * kSecond);
    EXPECT_TRUE(check_invariants(sim).empty());
}

TEST(Netsim, WrongKeyKeepsNeighborsApart) {
    const char* text =
        "router R1\nrouter R2\nlink l p2p\niface R1 a l cost 10\niface R2 b l cost 10\nkey l s3cret\n";
    Topology t = parse_topology(text);
    Simulator good(t);
    good.run_until(5 * kSecond);
    const Ipv4 r2_ip = t.iface(1, 1).ip;
    EXPECT_TRUE(good.router(0).neighbor(1, r2_ip));

    RouterConfig c = t.router_config(1);
    c.interfaces[0].key = Bytes{'x'};
    Router r2(c);
    Router r1(t.router_config(0));
    r1.boot(0);
    r2.boot(0);
    auto out = r2.dispatch(TimerFire{}, 0);
    ASSERT_FALSE(out.frames.empty());
    bool auth_error = false;
    for (auto& f : out.frames) {
        auto res = r1.dispatch(FrameIn{1, f.src, f.dst, f.bytes}, 1000);
        for (auto& tr : res.trace)
            for (auto& [k, v] : tr.fields)
                if (tr.kind == "rx_error" && k == "error" && v == "AuthFail") auth_error = true;
    }
    EXPECT_TRUE(auth_error);
    EXPECT_FALSE(r1.neighbor(1, r2_ip));
}

TEST(Netsim, BadInputsAreRejected) {
    EXPECT_THROW(parse_topology("router R1\nrouter R1\n"), ScenarioInvalid);
    EXPECT_THROW(parse_topology("router R1\nlink l p2p\niface R1 a nowhere cost 10\n"), ScenarioInvalid);
    EXPECT_THROW(parse_topology("router R1\nlink l p2p\niface R1 a l cost 0\n"), ScenarioInvalid);
    EXPECT_THROW(parse_topology("bogus line\n"), ScenarioInvalid);
    EXPECT_THROW(parse_scenario("at 5s start_source S 232.1.1.1\nat 4s stop_source S 232.1.1.1\n", "x.scn"), ScenarioInvalid);
    Simulator sim(paper_topology("pair.topo"));
    EXPECT_THROW(sim.load(parse_scenario("at 1s fail_router R9\nend 2s\n", "x.scn")), ScenarioInvalid);
    EXPECT_THROW(sim.load(parse_scenario("at 1s explode R1\nend 2s\n", "x.scn")), ScenarioInvalid);
}

TEST(Netsim, TimeParsing) {
    EXPECT_EQ(parse_time("10"), 10 * kSecond);
    EXPECT_EQ(parse_time("250ms"), 250 * kMillisecond);
    EXPECT_EQ(parse_time("5us"), 5);
    EXPECT_EQ(parse_time("2m"), 120 * kSecond);
    EXPECT_EQ(parse_time("1.5s"), 1500 * kMillisecond);
    EXPECT_EQ(format_time(1500 * kMillisecond), "1.500000s");
}
