#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hpim/checker.hpp"
#include "hpim/types.hpp"

namespace hpim {

struct SweepOptions {
    std::uint64_t seed = 1;
    std::size_t topologies = 200;
    int max_routers = 8;
    int events = 8;
    SimTime spacing = 150 * kSecond;
    CheckOptions checks;
};

// A generated case, as files that `hpimsim run` accepts.
struct SweepCase {
    std::size_t index = 0;
    std::string topology_text;
    std::string scenario_text;  // refers to the topology as "sweep.topo"
};

struct SweepFailure {
    SweepCase c;
    SimTime time = 0;
    std::vector<Violation> violations;
};

struct SweepResult {
    std::size_t cases = 0;
    std::size_t checkpoints = 0;  // quiescent points checked
    std::size_t skipped = 0;      // points that were not quiescent
    std::optional<SweepFailure> failure;
};

SweepCase generate_case(std::uint64_t seed, std::size_t index, const SweepOptions& opt);

// Stops at the first case with a violation.
SweepResult sweep(const SweepOptions& opt = {});

}  // namespace hpim
