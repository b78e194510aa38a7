#pragma once

// Scenario files:
//
//   topology <path>                  relative to the scenario file
//   set <param> <value>              overrides the topology's defaults
//   linkmodel <link>|* fields...
//   at <time> <action> args...       times must not decrease
//   end <time>
//
// Exploration files use the same header plus
//   explore_source <source> <group>
//   explore_fail <router>            | explore_reboot <router> <iface>
//   expect <router> ACTIVE|UNSURE|INACTIVE
//
// Actions are listed in netsim.hpp next to their handlers.

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "hpim/topology.hpp"

namespace hpim {

struct ScenarioAction {
    SimTime time = 0;
    int line = 0;
    std::string verb;
    std::vector<std::string> args;
};

struct ExploreSpec {
    std::string source;
    std::string group;
    std::string fail_router;
    std::string reboot_router;
    std::string reboot_iface;
    std::vector<std::pair<std::string, TreeState>> expect;
    bool enabled() const { return !source.empty(); }
};

struct Scenario {
    std::string origin;
    std::filesystem::path topology_path;
    std::vector<std::pair<std::string, std::string>> params;
    std::vector<std::vector<std::string>> linkmodels;
    std::vector<ScenarioAction> actions;
    SimTime end = 0;
    ExploreSpec explore;
};

Scenario parse_scenario(const std::string& text, const std::filesystem::path& origin);
Scenario load_scenario(const std::filesystem::path& path);

// Topology referenced by the scenario with its overrides applied.
Topology scenario_topology(const Scenario& s);

}  // namespace hpim
