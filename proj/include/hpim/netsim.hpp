#pragma once

// Discrete-event network of HPIM routers.
//
// Scenario actions (`at <time> <action> ...`):
//   start_source <src> <group> [period <t>]   stop_source <src> <group>   send_data <src> <group>
//   fail_router <r>        recover_router <r>
//   fail_link <link>       recover_link <link>
//   set_cost <r> <iface> <cost>
//   host_join <host> <group>   host_leave <host> <group>
//   reboot_interface <r> <iface>
//   set_link_model <link>|* fields...
//   capture <name> <r> <msg type> [first|last|<n>]
//   replay <name>
//   assert_digest save|equal <name> [noseq]
//   assert_invariants
//   assert_state tree <r> <src> <group> ACTIVE|UNSURE|INACTIVE
//   assert_state parent <r> <src> <group> <router>|-
//   assert_state root <r> <src> <group> <iface>|-
//   assert_state rpc <r> <src> <group> <n>
//   assert_state assert <r> <iface> <src> <group> AW|AL|root
//   assert_state fwd <r> <iface> <src> <group> FORWARDING|PRUNED
//   assert_state di <r> <iface> <src> <group> DI|NDI
//   assert_state interested <r> <src> <group> 0|1
//   assert_state neighbor <r> <iface> <router> SYNCED|MASTER|SLAVE|ABSENT
//   assert_state upstream <r> <iface> <router> <src> <group> 0|1
//   assert_state aw <link> <src> <group> <router>|-
//   assert_state receiving <host> <src> <group> 0|1

#include <deque>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "hpim/router.hpp"
#include "hpim/scenario.hpp"
#include "hpim/topology.hpp"

namespace hpim {

struct SimOptions {
    std::uint64_t seed = 1;
    bool trace = true;       // JSONL records kept in memory
    bool frame_log = true;   // every transmitted control frame, for capture/replay and counting
    bool trace_data = false;
    std::optional<LinkModel> link_override;
};

struct FrameRecord {
    std::uint64_t id = 0;
    SimTime time = 0;
    int router = -1;
    int iface = 0;
    int link = -1;
    Ipv4 src = 0;
    Ipv4 dst = 0;
    MsgType type = MsgType::Hello;
    std::optional<TreeRef> tree;
    Bytes bytes;
    bool retransmission = false;
    bool replay = false;
};

struct AssertionFailure {
    SimTime time = 0;
    int line = 0;
    std::string message;
};

class Simulator {
   public:
    explicit Simulator(Topology topo, SimOptions opt = {});

    // Validates every action against the topology and schedules it.
    void load(const Scenario& s);

    bool step();
    void run_until(SimTime t);
    // Runs until quiescent (checked between events) or until `limit`; true if quiescent.
    bool run_until_quiescent(SimTime limit);
    // No non-Hello control frame in flight, no pending route notification, no router busy.
    bool quiescent() const;
    SimTime now() const { return now_; }

    void start_source(int s, Ipv4 group, SimTime period = kSecond);
    void stop_source(int s, Ipv4 group);
    void send_data(int s, Ipv4 group);
    void fail_router(int r);
    void recover_router(int r);
    void fail_link(int l);
    void recover_link(int l);
    void set_cost(int r, int iface, std::uint32_t cost);
    void host_join(int h, Ipv4 group);
    void host_leave(int h, Ipv4 group);
    void reboot_interface(int r, int iface);
    void set_link_model(int l, const LinkModel& m);
    void inject(const FrameRecord& f);

    const Topology& topology() const { return topo_; }
    bool alive(int r) const { return alive_[static_cast<std::size_t>(r)]; }
    const Router& router(int r) const { return routers_[static_cast<std::size_t>(r)]; }
    Router& mutable_router(int r) { return routers_[static_cast<std::size_t>(r)]; }
    std::string digest(bool include_sequence = true) const;
    const std::vector<FrameRecord>& frames() const { return frames_; }
    const std::vector<std::string>& trace() const { return trace_; }
    const std::vector<AssertionFailure>& failures() const { return failures_; }
    // Trees of every source that was ever started.
    const std::set<std::pair<int, Ipv4>>& started_trees() const { return started_; }
    bool members(int link, Ipv4 group) const;
    std::optional<SimTime> last_delivery(int host, const TreeRef& t) const;
    std::uint64_t stale_count() const { return stale_; }
    TreeRef tree_of(int source, Ipv4 group) const { return {topo_.sources[source].ip, group}; }
    // Appends one digest record per router to the trace.
    void trace_final_digests();

    // Exploration: frames, route notices and failure notices queue per channel
    // and are delivered one at a time by deliver_channel; time advances 1us per delivery.
    void set_channel_mode(bool on) { channel_mode_ = on; }
    std::vector<std::pair<int, int>> ready_channels() const;
    void deliver_channel(const std::pair<int, int>& key);
    // Router failure noticed at once by every neighbor (no Hello timeout).
    void fail_router_detected(int r);

   private:
    struct EvWake {
        int router;
        std::uint64_t gen;
    };
    struct EvFrame {
        int router;
        FrameIn frame;
        bool control;
    };
    struct EvRoute {
        int router;
        RouteUpdate update;
    };
    struct EvData {
        int router;
        DataIn data;
        int ttl;
    };
    struct EvSourceTick {
        int source;
        Ipv4 group;
        std::uint64_t gen;
    };
    struct EvAction {
        std::size_t index;
    };
    using Payload = std::variant<EvWake, EvFrame, EvRoute, EvData, EvSourceTick, EvAction>;
    struct Event {
        SimTime time;
        std::uint64_t seq;
        Payload payload;
        bool operator>(const Event& o) const { return time != o.time ? time > o.time : seq > o.seq; }
    };
    struct ChannelItem {
        int router;
        RouterEvent ev;
        bool control;
        bool route;
    };

    void push(SimTime t, Payload p);
    void handle(const Event& e);
    void deliver_to(int r, const RouterEvent& ev, int ttl = 0);
    void process_output(int r, RouterOutput& out, const RouterEvent& ev, int ttl);
    void reschedule_wake(int r);
    void transmit(int r, const OutFrame& f, bool replay);
    void send_frame_to(int from, int link, const Attachment& a, const FrameIn& f, bool control, bool replay);
    void emit_data(int link, const TreeRef& t, int ttl, int except_router);
    void recompute_routes();
    void run_action(const ScenarioAction& a);
    void validate_action(const ScenarioAction& a) const;
    void check_assert(const ScenarioAction& a);
    void fail(const ScenarioAction& a, const std::string& msg);
    void record(const std::string& line);
    LinkModel model_of(int link) const;

    Topology topo_;
    SimOptions opt_;
    std::mt19937_64 rng_;
    SimTime now_ = 0;
    std::uint64_t seq_ = 0;
    std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
    std::vector<Router> routers_;
    std::vector<bool> alive_;
    std::vector<std::uint64_t> wake_gen_;
    std::vector<SimTime> wake_at_;
    std::vector<std::vector<std::optional<Route>>> notified_;  // [router][source]
    std::int64_t control_in_flight_ = 0;
    std::int64_t routes_in_flight_ = 0;
    std::map<std::pair<int, Ipv4>, std::pair<std::uint64_t, SimTime>> source_gen_;  // running: (gen, period)
    std::uint64_t source_epoch_ = 0;
    std::set<std::pair<int, Ipv4>> started_;
    std::map<std::pair<int, Ipv4>, std::set<int>> member_hosts_;  // (link, group) -> hosts
    std::map<std::pair<int, TreeRef>, SimTime> host_rx_;
    std::uint64_t frame_id_ = 0;
    std::vector<FrameRecord> frames_;
    std::vector<std::string> trace_;
    std::uint64_t stale_ = 0;
    std::vector<ScenarioAction> actions_;
    std::vector<AssertionFailure> failures_;
    std::map<std::string, std::string> saved_digests_;
    std::map<std::string, FrameRecord> captures_;
    bool channel_mode_ = false;
    std::map<std::pair<int, int>, std::deque<ChannelItem>> channels_;
};

// Loads, runs to the scenario's end and returns the simulator for inspection.
Simulator run_scenario(const Scenario& s, SimOptions opt = {});

}  // namespace hpim
