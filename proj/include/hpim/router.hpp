#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "hpim/neighbor_sync.hpp"
#include "hpim/reliable_tx.hpp"
#include "hpim/seq.hpp"
#include "hpim/tree_engine.hpp"
#include "hpim/types.hpp"
#include "hpim/wire.hpp"

namespace hpim {

struct TimerConfig {
    SimTime hello_period = 30 * kSecond;
    SimTime hold_time = 120 * kSecond;
    SimTime source_active = 210 * kSecond;
    SimTime retransmit = 1 * kSecond;
    SimTime sync_retransmit = 3 * kSecond;
    int sync_attempts = 5;
    SimTime al_hysteresis = 1 * kSecond;
};

struct InterfaceConfig {
    int id = 0;  // 1-based, declaration order
    std::string name;
    Ipv4 ip = 0;
    std::string link;
    std::uint32_t cost = 10;
    Key key;
};

struct RouterConfig {
    std::string name;
    Ipv4 router_id = 0;
    std::vector<InterfaceConfig> interfaces;
    DownstreamInterest initial_downstream_interest = DownstreamInterest::DI;
    TimerConfig timers;
    SeqNum max_sn = kDefaultMaxSn;
    std::size_t fragment_size = 100;
    bool feasibility_check = true;  // test hook: false lets an infeasible neighbor be parent
    bool tracing = true;
};

// Unicast oracle answer for one source.
struct Route {
    int root_iface = 0;  // 0: unreachable
    MetricPair metric = kInfiniteMetric;
    std::vector<int> source_attached;  // interfaces on the source's link
    bool operator==(const Route&) const = default;
};

// Inputs to dispatch.
struct FrameIn {
    int iface = 0;
    Ipv4 src = 0;
    Ipv4 dst = 0;
    Bytes bytes;
};
struct TimerFire {};
struct DataIn {
    int iface = 0;
    TreeRef tree;
};
struct RouteUpdate {
    Ipv4 source = 0;
    Route route;
};
struct MembershipChange {
    int iface = 0;
    Ipv4 group = 0;
    bool members = false;
};
struct InterfaceChange {
    enum class Kind { Up, Down, Reboot };
    int iface = 0;
    Kind kind = Kind::Up;
};
// Out-of-band neighbor failure, used by schedule exploration only.
struct NeighborDown {
    int iface = 0;
    Ipv4 neighbor = 0;
};
using RouterEvent =
    std::variant<FrameIn, TimerFire, DataIn, RouteUpdate, MembershipChange, InterfaceChange, NeighborDown>;

struct OutFrame {
    int iface = 0;
    Ipv4 src = 0;
    Ipv4 dst = 0;
    MsgType type = MsgType::Hello;
    std::optional<TreeRef> tree;
    Bytes bytes;
    bool retransmission = false;
};

struct TraceRecord {
    std::string kind;
    std::vector<std::pair<std::string, std::string>> fields;
};

struct RouterOutput {
    std::vector<OutFrame> frames;
    std::optional<std::vector<int>> data_out;  // set for DataIn
    std::vector<TraceRecord> trace;
};

struct InterfaceTreeState {
    InterfaceRole role = InterfaceRole::NonRoot;
    AssertState assert_state = AssertState::AW;
    Ipv4 aw = 0;  // AW of the link as seen here; own IP when AW, 0 when unknown
    DownstreamInterest downstream_interest = DownstreamInterest::NDI;
    ForwardingState forwarding = ForwardingState::Pruned;
    bool source_attached = false;
    bool advertised_upstream = false;
    MetricPair advertised_metric;
    SimTime al_hysteresis_deadline = -1;
};

struct TreeEntry {
    TreeRef tree;
    TreeState state = TreeState::Inactive;
    bool is_originator = false;
    MetricPair my_metric = kInfiniteMetric;
    int root_iface = 0;
    std::optional<SimTime> sat_deadline;
    std::optional<Ipv4> parent;
    bool interested = false;
    std::map<int, InterfaceTreeState> ifaces;
};

struct MRouteEntry {
    TreeRef tree;
    int root_iface = 0;
    std::set<int> forwarding_set;
    bool operator==(const MRouteEntry&) const = default;
};

struct InterfaceState {
    InterfaceConfig cfg;
    bool up = true;
    InterfaceSeqState seq;
    SimTime next_hello = kNever;
    std::uint64_t hellos_sent = 0;
    std::map<Ipv4, NeighborRecord> neighbors;
    ReliableTx rtx;
    std::set<Ipv4> member_groups;
};

class Router {
   public:
    explicit Router(RouterConfig cfg);

    void boot(SimTime now);
    RouterOutput dispatch(const RouterEvent& ev, SimTime now);

    SimTime next_deadline() const;
    // Pending ACKs, running sync sessions.
    bool busy() const;

    std::string digest(bool include_sequence = true) const;
    std::vector<MRouteEntry> mroutes() const;
    // Shadow recomputation of every derived state; returns violations.
    std::vector<std::string> self_check() const;

    const RouterConfig& config() const { return cfg_; }
    const std::string& name() const { return cfg_.name; }
    const std::map<TreeRef, TreeEntry>& trees() const { return trees_; }
    const TreeEntry* tree(const TreeRef& t) const;
    const std::vector<InterfaceState>& interfaces() const { return ifaces_; }
    const InterfaceState* interface(int id) const;
    const InterfaceState* interface_by_name(const std::string& name) const;
    const NeighborRecord* neighbor(int iface, Ipv4 ip) const;
    const std::map<Ipv4, Route>& routes() const { return routes_; }
    // Effective downstream interest of neighbor `ip` on `iface` for tree t.
    bool neighbor_is_interested(int iface, Ipv4 ip, const TreeRef& t) const;

    // Test hooks.
    void test_set_interface_sn(int iface, SeqNum sn);
    void set_feasibility_check(bool on) { cfg_.feasibility_check = on; }

   private:
    struct Cause {
        int iface;
        Ipv4 neighbor;
        bool iam_upstream;
        bool synced;
    };

    InterfaceState& iface(int id) { return ifaces_[static_cast<std::size_t>(id - 1)]; }
    const InterfaceState& iface(int id) const { return ifaces_[static_cast<std::size_t>(id - 1)]; }
    void trace(std::string kind, std::vector<std::pair<std::string, std::string>> fields);
    void emit(InterfaceState& i, Ipv4 dst, const Message& m, bool retransmission = false);

    // router_core
    void handle_frame(const FrameIn& f);
    void fire_timers();
    std::vector<int> forward_data(const TreeRef& t, int in_iface);
    void handle_interface_change(const InterfaceChange& c);

    // neighbor_sync
    void handle_hello(InterfaceState& i, Ipv4 src, BootTime bt, const HelloBody& h);
    void handle_sync(InterfaceState& i, Ipv4 src, BootTime bt, const SyncBody& s);
    void start_sync_as_master(InterfaceState& i, Ipv4 src, BootTime bt);
    void become_slave(InterfaceState& i, Ipv4 src, BootTime bt, const SyncBody& s);
    void slave_process(InterfaceState& i, NeighborRecord& n, const SyncBody& s);
    void master_process_echo(InterfaceState& i, NeighborRecord& n, const SyncBody& s);
    void finish_sync(InterfaceState& i, NeighborRecord& n);
    void send_sync(InterfaceState& i, NeighborRecord& n);
    NeighborRecord& new_neighbor(InterfaceState& i, Ipv4 src, BootTime bt, SyncState state);
    void remove_neighbor(InterfaceState& i, Ipv4 ip, const char* reason);
    SeqNum allocate(InterfaceState& i);
    std::vector<SyncTreeRecord> build_snapshot(const InterfaceState& i) const;
    void sync_timers();
    void hello_timers();
    void liveness_timers();

    // tree_engine
    void handle_upstream(InterfaceState& i, NeighborRecord& n, MsgType type, const UpstreamBody& u);
    void handle_route_update(const RouteUpdate& r);
    void handle_source_data(const TreeRef& t);
    void sat_timers();
    TreeEntry& ensure_entry(const TreeRef& t);
    void reevaluate(const TreeRef& t, const Cause& cause = {});
    void reevaluate_all(const Cause& cause = {});
    std::optional<UpstreamCandidate> best_upstream_on(const InterfaceState& i, const TreeRef& t) const;
    bool any_upstream(const TreeRef& t) const;
    // Derived state of an entry from the current inputs; no side effects.
    TreeEntry derive(const TreeEntry& old) const;

    // interest_engine
    void handle_interest(InterfaceState& i, NeighborRecord& n, MsgType type, const InterestBody& b);
    void handle_membership(const MembershipChange& m);
    bool compute_downstream_interest(const InterfaceState& i, const TreeRef& t,
                                     const InterfaceTreeState& its) const;

    // reliable_tx
    void send_upstream(InterfaceState& i, const TreeRef& t, bool upstream, const MetricPair& m);
    void send_interest(InterfaceState& i, const TreeRef& t, Ipv4 target, bool interested);
    void handle_ack(InterfaceState& i, NeighborRecord& n, BootTime bt, const AckBody& a);
    void maybe_ack(InterfaceState& i, NeighborRecord& n, const TreeRef& t, const SeqStamp& stamp);
    void retransmit_timers();

    RouterConfig cfg_;
    SimTime now_ = 0;
    std::vector<InterfaceState> ifaces_;
    std::map<TreeRef, TreeEntry> trees_;
    std::map<Ipv4, Route> routes_;
    RouterOutput out_;
};

}  // namespace hpim
