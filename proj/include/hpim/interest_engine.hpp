#pragma once

#include <optional>

#include "hpim/types.hpp"

namespace hpim {

// A neighbor counts as interested unless UPSTREAM; without a record the startup default decides.
bool neighbor_interested(bool is_upstream, std::optional<bool> record, DownstreamInterest initial);

DownstreamInterest downstream_interest(bool local_members, bool any_neighbor_interested,
                                       bool source_attached);

ForwardingState forwarding_state(AssertState a, DownstreamInterest di, bool source_attached);

struct InterestTriggerInput {
    TreeState state = TreeState::Inactive;
    bool old_interested = false;
    bool new_interested = false;
    bool is_root = false;
    bool was_root = false;
    Ipv4 own_ip = 0;
    Ipv4 old_aw = 0;
    Ipv4 new_aw = 0;
    bool iam_upstream_from_aw = false;  // IamUpstream just received from new_aw
    bool synced_with_aw = false;        // sync with new_aw just completed
};

// Interest flag to unicast to new_aw, or nothing.
std::optional<bool> interest_trigger(const InterestTriggerInput& in);

}  // namespace hpim
