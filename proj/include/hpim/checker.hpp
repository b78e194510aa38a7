#pragma once

#include <string>
#include <vector>

namespace hpim {

class Simulator;

struct Violation {
    std::string invariant;
    std::string detail;
};

struct CheckOptions {
    bool loop_freedom = true;
    bool aw_uniqueness = true;
    bool correctness = true;  // quiescent state against the unicast oracle
    bool coherence = true;    // router self-check and mroute table
    bool sync_symmetry = true;
    bool interest_knowledge = true;
};

// Global invariant suite over the live routers of a quiescent network.
std::vector<Violation> check_invariants(const Simulator& sim, const CheckOptions& opt = {});

std::string to_string(const Violation& v);

}  // namespace hpim
