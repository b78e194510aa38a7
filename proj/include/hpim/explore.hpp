#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hpim/checker.hpp"
#include "hpim/netsim.hpp"
#include "hpim/scenario.hpp"

namespace hpim {

struct ExploreOptions {
    std::uint64_t seed = 1;
    std::size_t bound = 10000;         // sampled schedules
    std::size_t step_budget = 200000;  // deliveries per schedule before giving up
    CheckOptions checks;
};

struct Counterexample {
    std::size_t sample = 0;
    std::size_t inject_step = 0;
    std::vector<std::pair<int, int>> schedule;  // delivered channels, in order
    std::vector<std::string> problems;
    std::vector<std::string> trace;  // replayed with tracing on
};

struct ExploreResult {
    std::size_t schedules = 0;
    std::size_t baseline_steps = 0;
    std::size_t max_steps = 0;
    bool budget_exceeded = false;
    std::optional<Counterexample> counterexample;
    bool ok() const { return !counterexample && !budget_exceeded; }
};

// Runs the scenario's timed actions to quiescence, starts the explored source and
// samples delivery interleavings. When the exploration file names a failure or reboot it is
// injected after a uniformly drawn number of deliveries. Every terminal state is
// checked against the expected tree states and the invariant suite.
ExploreResult explore(const Scenario& s, const ExploreOptions& opt = {});

}  // namespace hpim
