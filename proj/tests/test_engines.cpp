#include <gtest/gtest.h>

#include "hpim/interest_engine.hpp"
#include "hpim/tree_engine.hpp"

using namespace hpim;

TEST(TreeEngine, BestUpstreamTiesGoToHigherIp) {
    EXPECT_FALSE(best_upstream({}));
    std::vector<UpstreamCandidate> c{{5, {0, 20}}, {9, {0, 20}}, {7, {0, 30}}};
    EXPECT_EQ(best_upstream(c)->ip, 9u);
    c.push_back({1, {0, 10}});
    EXPECT_EQ(best_upstream(c)->ip, 1u);
    c.push_back({2, {0, 5000}});
    c.back().metric.preference = 0;
    EXPECT_EQ(best_upstream({{3, {1, 1}}, {4, {0, 99}}})->ip, 4u);  // preference before rpc
}

TEST(TreeEngine, FeasibilityNeedsStrictlyLowerMetric) {
    UpstreamCandidate p{1, {0, 20}};
    EXPECT_TRUE(select_parent(p, {0, 30}));
    EXPECT_FALSE(select_parent(p, {0, 20}));
    EXPECT_FALSE(select_parent(p, {0, 10}));
    EXPECT_TRUE(select_parent(p, {0, 10}, false));
    EXPECT_FALSE(select_parent(std::nullopt, {0, 30}));
}

TEST(TreeEngine, StateTable) {
    EXPECT_EQ(compute_tree_state(true, true, false, false), TreeState::Active);
    EXPECT_EQ(compute_tree_state(true, false, true, true), TreeState::Unsure);
    EXPECT_EQ(compute_tree_state(true, false, false, false), TreeState::Inactive);
    EXPECT_EQ(compute_tree_state(false, true, true, true), TreeState::Active);
    EXPECT_EQ(compute_tree_state(false, false, false, true), TreeState::Unsure);
    EXPECT_EQ(compute_tree_state(false, true, false, false), TreeState::Inactive);
}

TEST(TreeEngine, AssertElection) {
    UpstreamCandidate other{20, {0, 15}};
    EXPECT_EQ(elect_assert_winner(TreeState::Active, {0, 20}, 10, other).state, AssertState::AL);
    EXPECT_EQ(elect_assert_winner(TreeState::Active, {0, 20}, 10, other).winner, 20u);
    EXPECT_EQ(elect_assert_winner(TreeState::Active, {0, 10}, 10, other).state, AssertState::AW);
    EXPECT_EQ(elect_assert_winner(TreeState::Active, {0, 15}, 30, other).state, AssertState::AW);
    EXPECT_EQ(elect_assert_winner(TreeState::Active, {0, 15}, 10, other).state, AssertState::AL);
    EXPECT_EQ(elect_assert_winner(TreeState::Unsure, {0, 1}, 10, other).state, AssertState::AL);
    EXPECT_EQ(elect_assert_winner(TreeState::Unsure, {0, 1}, 10, std::nullopt).state, AssertState::AW);
    EXPECT_EQ(elect_assert_winner(TreeState::Active, {0, 20}, 10, std::nullopt).winner, 10u);
}

TEST(InterestEngine, NeighborInterest) {
    EXPECT_FALSE(neighbor_interested(true, true, DownstreamInterest::DI));
    EXPECT_TRUE(neighbor_interested(false, std::nullopt, DownstreamInterest::DI));
    EXPECT_FALSE(neighbor_interested(false, std::nullopt, DownstreamInterest::NDI));
    EXPECT_FALSE(neighbor_interested(false, false, DownstreamInterest::DI));
    EXPECT_TRUE(neighbor_interested(false, true, DownstreamInterest::NDI));
}

TEST(InterestEngine, DownstreamAndForwarding) {
    EXPECT_EQ(downstream_interest(true, false, false), DownstreamInterest::DI);
    EXPECT_EQ(downstream_interest(false, true, false), DownstreamInterest::DI);
    EXPECT_EQ(downstream_interest(false, false, false), DownstreamInterest::NDI);
    EXPECT_EQ(downstream_interest(true, true, true), DownstreamInterest::NDI);
    EXPECT_EQ(forwarding_state(AssertState::AW, DownstreamInterest::DI, false), ForwardingState::Forwarding);
    EXPECT_EQ(forwarding_state(AssertState::AL, DownstreamInterest::DI, false), ForwardingState::Pruned);
    EXPECT_EQ(forwarding_state(AssertState::AW, DownstreamInterest::NDI, false), ForwardingState::Pruned);
    EXPECT_EQ(forwarding_state(AssertState::AW, DownstreamInterest::DI, true), ForwardingState::Pruned);
}

TEST(InterestEngine, Triggers) {
    InterestTriggerInput in;
    in.state = TreeState::Active;
    in.is_root = in.was_root = true;
    in.own_ip = 1;
    in.old_aw = in.new_aw = 2;
    EXPECT_FALSE(interest_trigger(in));
    in.new_interested = true;
    EXPECT_EQ(interest_trigger(in), true);
    in.old_interested = true;
    in.new_aw = 3;
    EXPECT_EQ(interest_trigger(in), true);  // new AW hears it again
    in.old_aw = 3;
    in.synced_with_aw = true;
    EXPECT_EQ(interest_trigger(in), true);
    in.state = TreeState::Inactive;
    EXPECT_FALSE(interest_trigger(in));

    InterestTriggerInput nr;  // non-root of an UNSURE router
    nr.state = TreeState::Unsure;
    nr.own_ip = 1;
    nr.old_aw = 2;
    nr.new_aw = 3;
    EXPECT_EQ(interest_trigger(nr), false);
    nr.state = TreeState::Active;
    EXPECT_FALSE(interest_trigger(nr));
    nr.state = TreeState::Unsure;
    nr.new_aw = 1;
    EXPECT_FALSE(interest_trigger(nr));
}
