// hpimsim: scenario runner, suite checker, schedule explorer, random sweeps and trace tools.
//
// Exit codes: 0 success, 1 property violation, 2 usage or I/O error.

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "hpim/checker.hpp"
#include "hpim/explore.hpp"
#include "hpim/netsim.hpp"
#include "hpim/sweep.hpp"
#include "json.hpp"

#ifndef HPIM_SCENARIO_DIR
#define HPIM_SCENARIO_DIR "scenarios/paper"
#endif

namespace fs = std::filesystem;
using namespace hpim;
using Json = nlohmann::json;

namespace {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Overrides {
    std::map<std::string, std::string> params;
    double loss = 0;
    bool reorder = false;
    std::string jitter = "10ms";

    void add(CLI::App* app) {
        static const std::vector<std::pair<std::string, std::string>> flags = {
            {"--fragment-size", "fragment_size"}, {"--max-sn", "max_sn"},
            {"--hello-period", "hello_period"},   {"--hold-time", "hold_time"},
            {"--sat", "sat"},                     {"--retransmit-timeout", "retransmit"},
            {"--al-hysteresis", "al_hysteresis"},
        };
        for (auto& [flag, key] : flags) app->add_option(flag, params[key], "override " + key);
        app->add_option("--loss", loss, "loss probability on every link")->check(CLI::Range(0.0, 1.0));
        app->add_flag("--reorder", reorder, "allow reordering on every link");
        app->add_option("--jitter", jitter, "reorder jitter (default 10ms)");
    }

    void apply(Scenario& s) const {
        for (auto& [k, v] : params)
            if (!v.empty()) s.params.emplace_back(k, v);
    }

    SimOptions sim_options(std::uint64_t seed) const {
        SimOptions o;
        o.seed = seed;
        if (loss > 0 || reorder) {
            LinkModel m;
            m.loss = loss;
            m.reorder = reorder;
            if (reorder) m.jitter = parse_time(jitter);
            o.link_override = m;
        }
        return o;
    }
};

Scenario load(const std::string& path, const std::string& topo_override) {
    Scenario s = load_scenario(path);
    if (!topo_override.empty()) s.topology_path = topo_override;
    return s;
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot write " + path);
    for (auto& l : lines) f << l << "\n";
}

std::vector<Json> read_trace(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot read " + path);
    std::vector<Json> out;
    std::string line;
    int n = 0;
    while (std::getline(f, line)) {
        ++n;
        if (line.empty()) continue;
        try {
            out.push_back(Json::parse(line));
        } catch (const Json::exception&) {
            throw IoError(path + ":" + std::to_string(n) + ": not a JSON record");
        }
    }
    return out;
}

// Scenario assertions plus the invariant suite when the run ends quiescent.
int report_run(const Simulator& sim, const std::string& name, bool invariants) {
    int bad = 0;
    for (auto& f : sim.failures()) {
        std::cerr << name << ":" << f.line << ": at " << format_time(f.time) << ": " << f.message << "\n";
        ++bad;
    }
    if (invariants && sim.quiescent())
        for (auto& v : check_invariants(sim)) {
            std::cerr << name << ": at end: " << to_string(v) << "\n";
            ++bad;
        }
    return bad;
}

fs::path suite_dir(const std::string& suite, const std::string& root) {
    static const std::map<std::string, std::string> named = {
        {"paper-tests", "tests"}, {"replay", "replay"}, {"model-check", "modelcheck"}, {"figures", "figures"}};
    auto it = named.find(suite);
    fs::path dir = it != named.end() ? fs::path(root) / it->second : fs::path(suite);
    if (!fs::is_directory(dir)) throw IoError("no suite directory " + dir.string());
    return dir;
}

int cmd_run(const std::string& scn, const std::string& topo, std::uint64_t seed, const std::string& trace_path,
            bool trace_data, const Overrides& ov) {
    Scenario s = load(scn, topo);
    ov.apply(s);
    SimOptions so = ov.sim_options(seed);
    so.trace_data = trace_data;
    Simulator sim = run_scenario(s, so);
    if (!trace_path.empty()) write_lines(trace_path, sim.trace());
    int bad = report_run(sim, scn, false);
    std::cerr << scn << ": " << s.actions.size() << " actions, " << sim.frames().size() << " frames, "
              << (bad ? std::to_string(bad) + " failed assertions" : "all assertions hold") << "\n";
    return bad ? 1 : 0;
}

int cmd_check(const std::string& suite, const std::string& scn, const std::string& root, std::uint64_t seed,
              std::size_t bound, const Overrides& ov) {
    std::vector<fs::path> files;
    if (!scn.empty()) files.push_back(scn);
    if (!suite.empty()) {
        for (auto& e : fs::directory_iterator(suite_dir(suite, root)))
            if (e.path().extension() == ".scn" || e.path().extension() == ".explore") files.push_back(e.path());
    }
    if (files.empty()) throw CLI::ValidationError("check", "give --suite or --scenario");
    std::sort(files.begin(), files.end());
    int failed = 0;
    for (auto& f : files) {
        auto t0 = std::chrono::steady_clock::now();
        Scenario s = load_scenario(f);
        ov.apply(s);
        bool ok;
        if (s.explore.enabled()) {
            ExploreOptions eo;
            eo.seed = seed;
            eo.bound = bound;
            auto r = explore(s, eo);
            ok = r.ok();
            if (r.counterexample)
                for (auto& p : r.counterexample->problems) std::cerr << f.string() << ": " << p << "\n";
            if (r.budget_exceeded) std::cerr << f.string() << ": step budget exhausted\n";
        } else {
            Simulator sim = run_scenario(s, ov.sim_options(seed));
            ok = report_run(sim, f.string(), true) == 0;
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::cerr << (ok ? "PASS " : "FAIL ") << f.filename().string() << " (" << secs << " s)\n";
        failed += ok ? 0 : 1;
    }
    std::cerr << files.size() - failed << "/" << files.size() << " passed\n";
    return failed ? 1 : 0;
}

int cmd_explore(const std::string& scn, const std::string& topo, const std::string& property,
                const std::vector<std::string>& fail, std::uint64_t seed, std::size_t bound,
                const std::string& trace_path, const Overrides& ov) {
    Scenario s = load(scn, topo);
    ov.apply(s);
    if (!fail.empty()) s.explore.fail_router = fail.front();
    if (!property.empty()) {
        Topology t = scenario_topology(s);
        s.explore.expect.clear();
        for (auto& r : t.routers) {
            if (r.name == s.explore.fail_router) continue;
            if (property == "all-active-except-failed")
                s.explore.expect.emplace_back(r.name, TreeState::Active);
            else if (property == "all-inactive")
                s.explore.expect.emplace_back(r.name, TreeState::Inactive);
            else if (property != "invariants")
                throw CLI::ValidationError("--property", "unknown property " + property);
        }
    }
    ExploreOptions eo;
    eo.seed = seed;
    eo.bound = bound;
    auto t0 = std::chrono::steady_clock::now();
    ExploreResult r = explore(s, eo);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cerr << scn << ": " << r.schedules << " schedules, baseline " << r.baseline_steps << " deliveries, longest "
              << r.max_steps << " (" << secs << " s)\n";
    if (r.budget_exceeded) {
        std::cerr << "step budget exhausted; verdict is partial\n";
        return 1;
    }
    if (r.counterexample) {
        auto& cx = *r.counterexample;
        std::cerr << "counterexample: sample " << cx.sample << ", failure injected after " << cx.inject_step
                  << " deliveries, " << cx.schedule.size() << " deliveries in total\n";
        for (auto& p : cx.problems) std::cerr << "  " << p << "\n";
        if (!trace_path.empty()) {
            write_lines(trace_path, cx.trace);
            std::cerr << "trace written to " << trace_path << "\n";
        }
        return 1;
    }
    std::cerr << "all schedules satisfy the properties\n";
    return 0;
}

void write_case(const SweepCase& c, const std::string& out_dir) {
    fs::create_directories(out_dir);
    std::ofstream(fs::path(out_dir) / "sweep.topo") << c.topology_text;
    std::ofstream(fs::path(out_dir) / "sweep.scn") << c.scenario_text;
    std::cerr << "case " << c.index << " written to " << out_dir << "\n";
}

int cmd_sweep(SweepOptions opt, const std::string& out_dir, int dump) {
    if (dump >= 0) {
        if (out_dir.empty()) throw CLI::ValidationError("--dump", "needs --out");
        write_case(generate_case(opt.seed, static_cast<std::size_t>(dump), opt), out_dir);
        return 0;
    }
    auto t0 = std::chrono::steady_clock::now();
    SweepResult r = sweep(opt);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cerr << r.cases << " topologies, " << r.checkpoints << " quiescent points checked, " << r.skipped
              << " busy points skipped (" << secs << " s)\n";
    if (!r.failure) return 0;
    auto& f = *r.failure;
    std::cerr << "case " << f.c.index << " at " << format_time(f.time) << ":\n";
    for (auto& v : f.violations) std::cerr << "  " << to_string(v) << "\n";
    if (!out_dir.empty()) write_case(f.c, out_dir);
    return 1;
}

std::string trace_digest(const std::string& path) {
    std::string out;
    for (auto& j : read_trace(path))
        if (j.value("ev", "") == "digest") out += j.value("text", "");
    if (out.empty()) throw IoError(path + ": no digest records");
    return out;
}

int cmd_digest(const std::string& trace, const std::string& against) {
    std::string a = trace_digest(trace);
    if (against.empty()) {
        std::cout << a;
        return 0;
    }
    std::string b = trace_digest(against);
    if (a == b) {
        std::cerr << "digests equal\n";
        return 0;
    }
    auto lines = [](const std::string& s) {
        std::multiset<std::string> out;
        std::istringstream in(s);
        for (std::string l; std::getline(in, l);) out.insert(l);
        return out;
    };
    auto la = lines(a), lb = lines(b);
    std::vector<std::string> only_a, only_b;
    std::set_difference(la.begin(), la.end(), lb.begin(), lb.end(), std::back_inserter(only_a));
    std::set_difference(lb.begin(), lb.end(), la.begin(), la.end(), std::back_inserter(only_b));
    for (auto& l : only_a) std::cerr << "- " << l << "\n";
    for (auto& l : only_b) std::cerr << "+ " << l << "\n";
    return 1;
}

int cmd_render(const std::string& trace) {
    for (auto& j : read_trace(trace)) {
        std::string ev = j.value("ev", "?");
        if (ev == "digest") continue;
        std::ostringstream line;
        line << std::setw(14) << format_time(j.value("t", SimTime{0})) << "  " << std::left << std::setw(6)
             << j.value("router", "") << std::right << " ";
        if (ev == "router") line << j.value("kind", "");
        else line << ev;
        for (auto& [k, v] : j.items()) {
            if (k == "t" || k == "ev" || k == "router" || k == "kind") continue;
            line << " " << k << "=" << (v.is_string() ? v.get<std::string>() : v.dump());
        }
        std::cout << line.str() << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"HPIM-DM simulator"};
    app.require_subcommand(1);
    std::uint64_t seed = 1;
    std::string scenario, topology, trace, against, suite, property, out_dir;
    std::string root = HPIM_SCENARIO_DIR;
    std::vector<std::string> fail;
    std::size_t bound = 10000;
    bool trace_data = false;
    int dump = -1;
    Overrides ov;
    SweepOptions sw;

    auto* run = app.add_subcommand("run", "run one scenario");
    run->add_option("--scenario", scenario)->required();
    run->add_option("--topology", topology, "replace the scenario's topology");
    run->add_option("--seed", seed);
    run->add_option("--trace", trace, "write the JSON Lines trace here");
    run->add_flag("--trace-data", trace_data, "record data packet paths too");
    ov.add(run);

    auto* check = app.add_subcommand("check", "run a suite of scenarios and check invariants");
    check->add_option("--suite", suite, "paper-tests, replay, model-check, figures or a directory");
    check->add_option("--scenario", scenario);
    check->add_option("--scenario-dir", root);
    check->add_option("--seed", seed);
    check->add_option("--bound", bound, "schedules per explore file");
    ov.add(check);

    auto* exp = app.add_subcommand("explore", "sample delivery interleavings");
    exp->add_option("--scenario", scenario)->required();
    exp->add_option("--topology", topology);
    exp->add_option("--property", property, "all-active-except-failed, all-inactive or invariants");
    exp->add_option("--fail", fail, "router failing during the run");
    exp->add_option("--bound", bound);
    exp->add_option("--seed", seed);
    exp->add_option("--trace", trace, "counterexample trace output");
    ov.add(exp);

    auto* swp = app.add_subcommand("sweep", "random topologies and event scripts");
    swp->add_option("--count", sw.topologies);
    swp->add_option("--seed", sw.seed);
    swp->add_option("--max-routers", sw.max_routers)->check(CLI::Range(2, 16));
    swp->add_option("--events", sw.events);
    swp->add_option("--out", out_dir, "write a failing case here");
    swp->add_option("--dump", dump, "only write case <n> to --out");

    auto* dig = app.add_subcommand("digest", "print or compare the final digest of a trace");
    dig->add_option("--trace", trace)->required();
    dig->add_option("--against", against, "second trace to compare with");

    auto* ren = app.add_subcommand("render", "print a trace as a timeline");
    ren->add_option("--trace", trace)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, std::cerr, std::cerr);
        return code == 0 ? 0 : 2;
    }
    try {
        if (*run) return cmd_run(scenario, topology, seed, trace, trace_data, ov);
        if (*check) return cmd_check(suite, scenario, root, seed, bound, ov);
        if (*exp) return cmd_explore(scenario, topology, property, fail, seed, bound, trace, ov);
        if (*swp) return cmd_sweep(sw, out_dir, dump);
        if (*dig) return cmd_digest(trace, against);
        if (*ren) return cmd_render(trace);
    } catch (const ScenarioInvalid& e) {
        std::cerr << "invalid scenario: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const CLI::Error& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
