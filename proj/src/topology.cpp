#include "hpim/topology.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace hpim {

int Topology::router_index(const std::string& name) const {
    for (std::size_t k = 0; k < routers.size(); ++k)
        if (routers[k].name == name) return static_cast<int>(k);
    return -1;
}

int Topology::link_index(const std::string& name) const {
    for (std::size_t k = 0; k < links.size(); ++k)
        if (links[k].name == name) return static_cast<int>(k);
    return -1;
}

int Topology::source_index(const std::string& name) const {
    for (std::size_t k = 0; k < sources.size(); ++k)
        if (sources[k].name == name) return static_cast<int>(k);
    return -1;
}

int Topology::receiver_index(const std::string& name) const {
    for (std::size_t k = 0; k < receivers.size(); ++k)
        if (receivers[k].name == name) return static_cast<int>(k);
    return -1;
}

int Topology::iface_id(int router, const std::string& name) const {
    if (router < 0) return 0;
    for (auto& i : routers[router].ifaces)
        if (i.name == name) return i.id;
    return 0;
}

int Topology::owner_of(Ipv4 ip) const {
    for (std::size_t k = 0; k < routers.size(); ++k)
        for (auto& i : routers[k].ifaces)
            if (i.ip == ip) return static_cast<int>(k);
    return -1;
}

RouterConfig Topology::router_config(int r) const {
    const auto& tr = routers[r];
    RouterConfig c;
    c.name = tr.name;
    c.router_id = tr.router_id;
    c.initial_downstream_interest = params.initial_interest;
    c.timers = params.timers;
    c.max_sn = params.max_sn;
    c.fragment_size = params.fragment_size;
    c.feasibility_check = params.feasibility_check;
    for (auto& i : tr.ifaces) {
        InterfaceConfig ic;
        ic.id = i.id;
        ic.name = i.name;
        ic.ip = i.ip;
        ic.link = links[i.link].name;
        ic.cost = i.cost;
        ic.key = links[i.link].key;
        c.interfaces.push_back(ic);
    }
    return c;
}

SimTime parse_time(const std::string& text) {
    std::size_t pos = 0;
    double v = 0;
    try {
        v = std::stod(text, &pos);
    } catch (const std::exception&) {
        throw ScenarioInvalid("bad time '" + text + "'");
    }
    std::string unit = text.substr(pos);
    double scale = static_cast<double>(kSecond);
    if (unit == "us") scale = 1;
    else if (unit == "ms") scale = static_cast<double>(kMillisecond);
    else if (unit == "s" || unit.empty()) scale = static_cast<double>(kSecond);
    else if (unit == "m") scale = 60.0 * static_cast<double>(kSecond);
    else throw ScenarioInvalid("bad time unit in '" + text + "'");
    if (v < 0) throw ScenarioInvalid("negative time '" + text + "'");
    return static_cast<SimTime>(std::llround(v * scale));
}

std::string format_time(SimTime t) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%lld.%06llds", static_cast<long long>(t / kSecond),
                  static_cast<long long>(t % kSecond));
    return buf;
}

namespace {

std::uint64_t parse_uint(const std::string& v, const std::string& what) {
    try {
        std::size_t pos = 0;
        auto n = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return n;
    } catch (const std::exception&) {
        throw ScenarioInvalid("bad " + what + " '" + v + "'");
    }
}

double parse_prob(const std::string& v) {
    try {
        double p = std::stod(v);
        if (p < 0 || p > 1) throw std::out_of_range(v);
        return p;
    } catch (const std::exception&) {
        throw ScenarioInvalid("bad probability '" + v + "'");
    }
}

Ipv4 need_ip(const std::string& v) {
    auto ip = parse_ip(v);
    if (!ip) throw ScenarioInvalid("bad address '" + v + "'");
    return *ip;
}

}  // namespace

bool apply_param(ProtocolParams& p, const std::string& name, const std::string& value) {
    if (name == "hello_period") p.timers.hello_period = parse_time(value);
    else if (name == "hold_time") p.timers.hold_time = parse_time(value);
    else if (name == "sat") p.timers.source_active = parse_time(value);
    else if (name == "retransmit") p.timers.retransmit = parse_time(value);
    else if (name == "sync_retransmit") p.timers.sync_retransmit = parse_time(value);
    else if (name == "sync_attempts") p.timers.sync_attempts = static_cast<int>(parse_uint(value, name));
    else if (name == "al_hysteresis") p.timers.al_hysteresis = parse_time(value);
    else if (name == "max_sn") p.max_sn = static_cast<SeqNum>(parse_uint(value, name));
    else if (name == "fragment_size") p.fragment_size = parse_uint(value, name);
    else if (name == "initial_interest") {
        if (value == "DI") p.initial_interest = DownstreamInterest::DI;
        else if (value == "NDI") p.initial_interest = DownstreamInterest::NDI;
        else throw ScenarioInvalid("initial_interest must be DI or NDI");
    } else if (name == "feasibility") p.feasibility_check = parse_uint(value, name) != 0;
    else return false;
    if (p.fragment_size == 0) throw ScenarioInvalid("fragment_size must be >= 1");
    if (p.max_sn < 2) throw ScenarioInvalid("max_sn must be >= 2");
    if (p.timers.hello_period <= 0) throw ScenarioInvalid("hello_period must be positive");
    return true;
}

void parse_linkmodel_args(LinkModel& m, const std::vector<std::string>& a, std::size_t k) {
    for (; k + 1 < a.size(); k += 2) {
        const auto& key = a[k];
        const auto& v = a[k + 1];
        if (key == "delay") m.delay = parse_time(v);
        else if (key == "jitter") m.jitter = parse_time(v);
        else if (key == "loss") m.loss = parse_prob(v);
        else if (key == "reorder") m.reorder = parse_uint(v, key) != 0;
        else if (key == "dup") m.duplicate = parse_prob(v);
        else throw ScenarioInvalid("unknown link model field '" + key + "'");
    }
    if (k != a.size()) throw ScenarioInvalid("link model fields come in pairs");
    if (m.reorder && m.jitter == 0) m.jitter = 10 * kMillisecond;
}

std::vector<std::string> split_line(const std::string& line) {
    std::string body = line.substr(0, line.find('#'));
    std::istringstream in(body);
    std::vector<std::string> out;
    for (std::string w; in >> w;) out.push_back(w);
    return out;
}

Topology parse_topology(const std::string& text, const std::string& origin) {
    Topology t;
    struct PendingIface {
        int router;
        std::size_t index;
        bool explicit_ip;
    };
    std::vector<PendingIface> ifaces;
    std::vector<bool> source_ip_given;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    auto fail = [&](const std::string& msg) { throw ScenarioInvalid(origin + ":" + std::to_string(lineno) + ": " + msg); };
    while (std::getline(in, line)) {
        ++lineno;
        auto w = split_line(line);
        if (w.empty()) continue;
        try {
            const auto& cmd = w[0];
            if (cmd == "set") {
                if (w.size() != 3 || !apply_param(t.params, w[1], w[2])) fail("bad set");
            } else if (cmd == "router") {
                if (w.size() < 2) fail("router needs a name");
                if (t.router_index(w[1]) >= 0) fail("duplicate router " + w[1]);
                TopoRouter r;
                r.name = w[1];
                r.router_id = static_cast<Ipv4>(0x01000000u + t.routers.size() + 1);
                for (std::size_t k = 2; k + 1 < w.size(); k += 2) {
                    if (w[k] == "id") r.router_id = need_ip(w[k + 1]);
                    else if (w[k] == "pref") r.preference = static_cast<std::uint32_t>(parse_uint(w[k + 1], "pref"));
                    else if (w[k] == "route_delay") r.route_delay = parse_time(w[k + 1]);
                    else fail("unknown router field " + w[k]);
                }
                t.routers.push_back(r);
            } else if (cmd == "link") {
                if (w.size() != 3 || (w[2] != "p2p" && w[2] != "shared")) fail("usage: link <name> p2p|shared");
                if (t.link_index(w[1]) >= 0) fail("duplicate link " + w[1]);
                TopoLink l;
                l.name = w[1];
                l.shared = w[2] == "shared";
                t.links.push_back(l);
            } else if (cmd == "iface") {
                if (w.size() < 6 || w[4] != "cost") fail("usage: iface <router> <name> <link> cost <n> [ip <ip>]");
                int r = t.router_index(w[1]);
                int l = t.link_index(w[3]);
                if (r < 0) fail("unknown router " + w[1]);
                if (l < 0) fail("unknown link " + w[3]);
                if (t.iface_id(r, w[2])) fail("duplicate interface " + w[2]);
                TopoInterface i;
                i.id = static_cast<int>(t.routers[r].ifaces.size()) + 1;
                i.name = w[2];
                i.link = l;
                auto cost = parse_uint(w[5], "cost");
                if (cost < 1) fail("cost must be >= 1");
                i.cost = static_cast<std::uint32_t>(cost);
                bool explicit_ip = false;
                if (w.size() >= 8 && w[6] == "ip") {
                    i.ip = need_ip(w[7]);
                    explicit_ip = true;
                }
                t.routers[r].ifaces.push_back(i);
                t.links[l].attached.push_back({r, i.id});
                ifaces.push_back({r, t.routers[r].ifaces.size() - 1, explicit_ip});
            } else if (cmd == "source") {
                if (w.size() < 3) fail("usage: source <name> <link> [ip <ip>]");
                int l = t.link_index(w[2]);
                if (l < 0) fail("unknown link " + w[2]);
                TopoSource s;
                s.name = w[1];
                s.link = l;
                bool given = w.size() >= 5 && w[3] == "ip";
                if (given) s.ip = need_ip(w[4]);
                t.sources.push_back(s);
                source_ip_given.push_back(given);
            } else if (cmd == "receiver") {
                if (w.size() != 3) fail("usage: receiver <name> <link>");
                int l = t.link_index(w[2]);
                if (l < 0) fail("unknown link " + w[2]);
                t.receivers.push_back({w[1], l});
            } else if (cmd == "key") {
                if (w.size() != 3) fail("usage: key <link> <secret>");
                int l = t.link_index(w[1]);
                if (l < 0) fail("unknown link " + w[1]);
                t.links[l].key = Bytes(w[2].begin(), w[2].end());
            } else if (cmd == "linkmodel") {
                if (w.size() < 2) fail("usage: linkmodel <link>|* fields...");
                if (w[1] == "*") {
                    for (auto& l : t.links) parse_linkmodel_args(l.model, w, 2);
                } else {
                    int l = t.link_index(w[1]);
                    if (l < 0) fail("unknown link " + w[1]);
                    parse_linkmodel_args(t.links[l].model, w, 2);
                }
            } else {
                fail("unknown command " + cmd);
            }
        } catch (const ScenarioInvalid& e) {
            std::string msg = e.what();
            if (msg.rfind(origin, 0) == 0) throw;
            fail(msg);
        }
    }
    lineno = 0;
    for (auto& p : ifaces) {
        auto& i = t.routers[p.router].ifaces[p.index];
        if (!p.explicit_ip)
            i.ip = (10u << 24) | (static_cast<Ipv4>(i.link + 1) << 16) | static_cast<Ipv4>(p.router + 1);
    }
    for (std::size_t k = 0; k < t.sources.size(); ++k)
        if (!source_ip_given[k])
            t.sources[k].ip = (10u << 24) | (static_cast<Ipv4>(t.sources[k].link + 1) << 16) |
                              static_cast<Ipv4>(200 + k);
    for (auto& l : t.links) {
        if (!l.shared && l.attached.size() > 2) fail("p2p link " + l.name + " has more than two interfaces");
    }
    for (auto& r : t.routers)
        for (auto& i : r.ifaces)
            for (auto& r2 : t.routers)
                for (auto& j : r2.ifaces)
                    if (&i != &j && i.ip == j.ip) fail("duplicate address " + ip_to_string(i.ip));
    return t;
}

Topology load_topology(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ScenarioInvalid("cannot read " + path.string());
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_topology(ss.str(), path.string());
}

}  // namespace hpim
