#pragma once

// Line-oriented topology files:
//
//   set <param> <value>              timer/protocol defaults (see apply_param)
//   router <name> [id <ip>] [pref <n>] [route_delay <time>]
//   link <name> p2p|shared
//   iface <router> <name> <link> cost <n> [ip <ip>]
//   source <name> <link> [ip <ip>]
//   receiver <name> <link>
//   key <link> <secret>
//   linkmodel <link>|* [delay <t>] [loss <p>] [reorder 0|1] [dup <p>] [jitter <t>]
//
// Interface ids follow declaration order per router, starting at 1.
// Addresses left out are assigned as 10.<link>.0.<router> and 10.<link>.0.200+k for sources.

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "hpim/router.hpp"

namespace hpim {

class ScenarioInvalid : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

struct LinkModel {
    SimTime delay = 1 * kMillisecond;
    SimTime jitter = 0;  // extra uniform delay, only used with reorder
    double loss = 0.0;
    bool reorder = false;
    double duplicate = 0.0;
    bool operator==(const LinkModel&) const = default;
};

struct TopoInterface {
    int id = 0;
    std::string name;
    int link = -1;
    std::uint32_t cost = 10;
    Ipv4 ip = 0;
    bool up = true;
};

struct TopoRouter {
    std::string name;
    Ipv4 router_id = 0;
    std::uint32_t preference = 0;
    SimTime route_delay = 0;
    std::vector<TopoInterface> ifaces;
    bool up = true;
};

struct Attachment {
    int router = -1;
    int iface = 0;
};

struct TopoLink {
    std::string name;
    bool shared = false;
    std::vector<Attachment> attached;
    Key key;
    LinkModel model;
    bool up = true;
};

struct TopoSource {
    std::string name;
    int link = -1;
    Ipv4 ip = 0;
};

struct TopoReceiver {
    std::string name;
    int link = -1;
};

struct ProtocolParams {
    TimerConfig timers;
    SeqNum max_sn = kDefaultMaxSn;
    std::size_t fragment_size = 100;
    DownstreamInterest initial_interest = DownstreamInterest::DI;
    bool feasibility_check = true;
};

struct Topology {
    std::vector<TopoRouter> routers;
    std::vector<TopoLink> links;
    std::vector<TopoSource> sources;
    std::vector<TopoReceiver> receivers;
    ProtocolParams params;

    int router_index(const std::string& name) const;
    int link_index(const std::string& name) const;
    int source_index(const std::string& name) const;
    int receiver_index(const std::string& name) const;
    int iface_id(int router, const std::string& name) const;
    const TopoInterface& iface(int router, int id) const { return routers[router].ifaces[id - 1]; }
    TopoInterface& iface(int router, int id) { return routers[router].ifaces[id - 1]; }
    // Router owning an interface address, or -1.
    int owner_of(Ipv4 ip) const;

    RouterConfig router_config(int r) const;
};

// Parses "10", "10s", "250ms", "5us", "2m", "1.5s"; bare numbers are seconds.
SimTime parse_time(const std::string& text);
std::string format_time(SimTime t);

// Applies one `set` parameter; returns false for an unknown name. Throws on a bad value.
bool apply_param(ProtocolParams& p, const std::string& name, const std::string& value);

void parse_linkmodel_args(LinkModel& m, const std::vector<std::string>& args, std::size_t from);

Topology parse_topology(const std::string& text, const std::string& origin = "<topology>");
Topology load_topology(const std::filesystem::path& path);

// Tokenizes one line, dropping `#` comments.
std::vector<std::string> split_line(const std::string& line);

}  // namespace hpim
