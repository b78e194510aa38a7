#include "hpim/explore.hpp"

#include <random>

namespace hpim {

namespace {

struct Target {
    int source = -1;
    Ipv4 group = 0;
    int fail = -1;
    int reboot_router = -1;
    int reboot_iface = 0;
    std::vector<std::pair<int, TreeState>> expect;
};

Target resolve(const Topology& topo, const ExploreSpec& e) {
    Target t;
    t.source = topo.source_index(e.source);
    if (t.source < 0) throw ScenarioInvalid("unknown source " + e.source);
    auto g = parse_ip(e.group);
    if (!g || !is_multicast(*g)) throw ScenarioInvalid("bad group " + e.group);
    t.group = *g;
    if (!e.fail_router.empty()) {
        t.fail = topo.router_index(e.fail_router);
        if (t.fail < 0) throw ScenarioInvalid("unknown router " + e.fail_router);
    }
    if (!e.reboot_router.empty()) {
        t.reboot_router = topo.router_index(e.reboot_router);
        if (t.reboot_router < 0) throw ScenarioInvalid("unknown router " + e.reboot_router);
        t.reboot_iface = topo.iface_id(t.reboot_router, e.reboot_iface);
        if (!t.reboot_iface) throw ScenarioInvalid("unknown interface " + e.reboot_iface);
    }
    for (auto& [name, st] : e.expect) {
        int r = topo.router_index(name);
        if (r < 0) throw ScenarioInvalid("unknown router " + name);
        t.expect.emplace_back(r, st);
    }
    return t;
}

struct Outcome {
    std::size_t steps = 0;
    bool exceeded = false;
    std::vector<std::pair<int, int>> schedule;
};

// One interleaving. inject_at = SIZE_MAX means no injection.
Outcome run_schedule(Simulator& sim, const Target& t, std::mt19937_64& rng, std::size_t inject_at, std::size_t budget,
                     bool keep_schedule) {
    Outcome o;
    bool pending = inject_at != SIZE_MAX && (t.fail >= 0 || t.reboot_router >= 0);
    auto inject = [&] {
        pending = false;
        if (t.fail >= 0) sim.fail_router_detected(t.fail);
        if (t.reboot_router >= 0 && sim.alive(t.reboot_router)) sim.reboot_interface(t.reboot_router, t.reboot_iface);
    };
    for (;;) {
        if (pending && o.steps == inject_at) inject();
        auto ready = sim.ready_channels();
        if (ready.empty()) {
            if (!pending) break;
            inject();
            continue;
        }
        if (o.steps >= budget) {
            o.exceeded = true;
            break;
        }
        auto key = ready[std::uniform_int_distribution<std::size_t>(0, ready.size() - 1)(rng)];
        if (keep_schedule) o.schedule.push_back(key);
        sim.deliver_channel(key);
        ++o.steps;
    }
    return o;
}

std::vector<std::string> judge(const Simulator& sim, const Target& t, const CheckOptions& checks) {
    std::vector<std::string> problems;
    const auto& topo = sim.topology();
    TreeRef tree = sim.tree_of(t.source, t.group);
    for (auto& [r, want] : t.expect) {
        TreeState got = TreeState::Inactive;
        if (sim.alive(r))
            if (const TreeEntry* e = sim.router(r).tree(tree)) got = e->state;
        if (got != want)
            problems.push_back(topo.routers[r].name + " is " + to_string(got) + ", expected " + to_string(want));
    }
    if (!sim.quiescent()) problems.push_back("terminal state is not quiescent");
    for (auto& v : check_invariants(sim, checks)) problems.push_back(to_string(v));
    return problems;
}

Simulator warm_up(const Scenario& s, const Target& t, bool trace) {
    SimOptions so;
    so.trace = trace;
    so.frame_log = false;
    Simulator sim(scenario_topology(s), so);
    sim.load(s);
    // In-flight Hellos do not count against quiescence; give them time to land first.
    sim.run_until(s.end + 10 * kSecond);
    if (!sim.run_until_quiescent(s.end + 3600 * kSecond)) throw ScenarioInvalid(s.origin + ": warm-up never settles");
    sim.set_channel_mode(true);
    sim.start_source(t.source, t.group, 0);
    return sim;
}

std::uint64_t sample_seed(std::uint64_t seed, std::size_t i) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i >> 32)};
    std::uint32_t words[2];
    seq.generate(words, words + 2);
    return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

}  // namespace

ExploreResult explore(const Scenario& s, const ExploreOptions& opt) {
    if (!s.explore.enabled()) throw ScenarioInvalid(s.origin + ": no explore_source line");
    ExploreResult res;
    Target t = resolve(scenario_topology(s), s.explore);
    const Simulator warm = warm_up(s, t, false);

    {
        Simulator base = warm;
        std::mt19937_64 rng(sample_seed(opt.seed, SIZE_MAX));
        Outcome o = run_schedule(base, t, rng, SIZE_MAX, opt.step_budget, false);
        res.baseline_steps = o.steps;
        if (o.exceeded) {
            res.budget_exceeded = true;
            return res;
        }
    }

    for (std::size_t i = 0; i < opt.bound; ++i) {
        std::mt19937_64 rng(sample_seed(opt.seed, i));
        std::size_t k = std::uniform_int_distribution<std::size_t>(0, res.baseline_steps)(rng);
        Simulator sim = warm;
        Outcome o = run_schedule(sim, t, rng, k, opt.step_budget, false);
        ++res.schedules;
        res.max_steps = std::max(res.max_steps, o.steps);
        if (o.exceeded) {
            res.budget_exceeded = true;
            return res;
        }
        auto problems = judge(sim, t, opt.checks);
        if (problems.empty()) continue;

        // Same sample again with tracing for the report.
        Counterexample cx;
        cx.sample = i;
        cx.inject_step = k;
        cx.problems = std::move(problems);
        Simulator traced = warm_up(s, t, true);
        std::mt19937_64 again(sample_seed(opt.seed, i));
        std::uniform_int_distribution<std::size_t>(0, res.baseline_steps)(again);
        cx.schedule = run_schedule(traced, t, again, k, opt.step_budget, true).schedule;
        cx.trace = traced.trace();
        res.counterexample = std::move(cx);
        return res;
    }
    return res;
}

}  // namespace hpim
