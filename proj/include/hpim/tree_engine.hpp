#pragma once

#include <optional>
#include <vector>

#include "hpim/types.hpp"

namespace hpim {

struct UpstreamCandidate {
    Ipv4 ip = 0;
    MetricPair metric;
    bool operator==(const UpstreamCandidate&) const = default;
};

// Best of the candidates: lowest metric, ties to the highest IP.
std::optional<UpstreamCandidate> best_upstream(const std::vector<UpstreamCandidate>& candidates);

// Parent = best UPSTREAM neighbor on the root interface, if feasible (metric < my metric).
std::optional<UpstreamCandidate> select_parent(const std::optional<UpstreamCandidate>& best_on_root,
                                               const MetricPair& my_metric, bool feasibility_check = true);

TreeState compute_tree_state(bool is_originator, bool source_active, bool has_parent,
                             bool any_upstream_neighbor);

struct AssertResult {
    AssertState state = AssertState::AW;
    Ipv4 winner = 0;  // own IP when AW
};

// Non-root interface election given the router state and the best UPSTREAM neighbor on the link.
AssertResult elect_assert_winner(TreeState state, const MetricPair& my_metric, Ipv4 my_ip,
                                 const std::optional<UpstreamCandidate>& best_on_link);

}  // namespace hpim
