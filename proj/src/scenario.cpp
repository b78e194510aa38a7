#include "hpim/scenario.hpp"

#include <fstream>
#include <sstream>

namespace hpim {

Scenario parse_scenario(const std::string& text, const std::filesystem::path& origin) {
    Scenario s;
    s.origin = origin.string();
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    SimTime last = 0;
    auto fail = [&](const std::string& msg) {
        throw ScenarioInvalid(s.origin + ":" + std::to_string(lineno) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++lineno;
        auto w = split_line(line);
        if (w.empty()) continue;
        try {
            const auto& cmd = w[0];
            if (cmd == "topology") {
                if (w.size() != 2) fail("usage: topology <path>");
                s.topology_path = origin.parent_path() / w[1];
            } else if (cmd == "set") {
                if (w.size() != 3) fail("usage: set <param> <value>");
                ProtocolParams probe;
                if (!apply_param(probe, w[1], w[2])) fail("unknown parameter " + w[1]);
                s.params.emplace_back(w[1], w[2]);
            } else if (cmd == "linkmodel") {
                if (w.size() < 2) fail("usage: linkmodel <link>|* fields...");
                LinkModel probe;
                parse_linkmodel_args(probe, w, 2);
                s.linkmodels.push_back(w);
            } else if (cmd == "at") {
                if (w.size() < 3) fail("usage: at <time> <action> args...");
                ScenarioAction a;
                a.time = parse_time(w[1]);
                if (a.time < last) fail("time goes backwards");
                last = a.time;
                a.line = lineno;
                a.verb = w[2];
                a.args.assign(w.begin() + 3, w.end());
                s.actions.push_back(std::move(a));
            } else if (cmd == "end") {
                if (w.size() != 2) fail("usage: end <time>");
                s.end = parse_time(w[1]);
            } else if (cmd == "explore_source") {
                if (w.size() != 3) fail("usage: explore_source <source> <group>");
                s.explore.source = w[1];
                s.explore.group = w[2];
            } else if (cmd == "explore_fail") {
                if (w.size() != 2) fail("usage: explore_fail <router>");
                s.explore.fail_router = w[1];
            } else if (cmd == "explore_reboot") {
                if (w.size() != 3) fail("usage: explore_reboot <router> <iface>");
                s.explore.reboot_router = w[1];
                s.explore.reboot_iface = w[2];
            } else if (cmd == "expect") {
                if (w.size() != 3) fail("usage: expect <router> <state>");
                auto st = parse_tree_state(w[2]);
                if (!st) fail("bad tree state " + w[2]);
                s.explore.expect.emplace_back(w[1], *st);
            } else {
                fail("unknown command " + cmd);
            }
        } catch (const ScenarioInvalid& e) {
            std::string msg = e.what();
            if (msg.rfind(s.origin, 0) == 0) throw;
            fail(msg);
        }
    }
    if (s.topology_path.empty()) throw ScenarioInvalid(s.origin + ": missing topology line");
    if (s.end < last) s.end = last;
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ScenarioInvalid("cannot read " + path.string());
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_scenario(ss.str(), path);
}

Topology scenario_topology(const Scenario& s) {
    Topology t = load_topology(s.topology_path);
    for (auto& [k, v] : s.params) apply_param(t.params, k, v);
    for (auto& w : s.linkmodels) {
        if (w[1] == "*") {
            for (auto& l : t.links) parse_linkmodel_args(l.model, w, 2);
        } else {
            int l = t.link_index(w[1]);
            if (l < 0) throw ScenarioInvalid(s.origin + ": unknown link " + w[1]);
            parse_linkmodel_args(t.links[l].model, w, 2);
        }
    }
    return t;
}

}  // namespace hpim
