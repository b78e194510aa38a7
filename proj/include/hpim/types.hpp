#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hpim {

// Simulated time, integer microseconds.
using SimTime = std::int64_t;
using Ipv4 = std::uint32_t;
using BootTime = std::uint64_t;
using SeqNum = std::uint32_t;
using Bytes = std::vector<std::uint8_t>;

constexpr SimTime kMillisecond = 1000;
constexpr SimTime kSecond = 1000 * kMillisecond;
constexpr SimTime kNever = std::numeric_limits<SimTime>::max();

// 224.0.0.13, the link-local group all HPIM routers listen on.
constexpr Ipv4 kAllRoutersGroup = 0xE000000D;
constexpr std::uint8_t kIpProtocol = 103;

std::string ip_to_string(Ipv4 ip);
std::optional<Ipv4> parse_ip(std::string_view text);
inline bool is_multicast(Ipv4 ip) { return (ip >> 28) == 0xE; }

struct TreeRef {
    Ipv4 source = 0;
    Ipv4 group = 0;
    auto operator<=>(const TreeRef&) const = default;
};
std::string to_string(const TreeRef& t);

// Unicast metric advertised with IamUpstream. Lower is better, preference first.
struct MetricPair {
    std::uint32_t preference = 0;
    std::uint32_t rpc = 0;
    auto operator<=>(const MetricPair&) const = default;
};
constexpr MetricPair kInfiniteMetric{std::numeric_limits<std::uint32_t>::max(),
                                     std::numeric_limits<std::uint32_t>::max()};
std::string to_string(const MetricPair& m);

// Ordering used by AW election and parent selection: metric, then higher IP.
inline bool better_candidate(const MetricPair& a, Ipv4 a_ip, const MetricPair& b, Ipv4 b_ip) {
    if (a != b) return a < b;
    return a_ip > b_ip;
}

enum class TreeState { Inactive, Unsure, Active };
enum class AssertState { AW, AL };
enum class DownstreamInterest { DI, NDI };
enum class ForwardingState { Forwarding, Pruned };
enum class SyncState { Unknown, Master, Slave, Synced };
enum class InterfaceRole { Root, NonRoot };

const char* to_string(TreeState s);
const char* to_string(AssertState s);
const char* to_string(DownstreamInterest s);
const char* to_string(ForwardingState s);
const char* to_string(SyncState s);
const char* to_string(InterfaceRole s);

std::optional<TreeState> parse_tree_state(std::string_view s);

std::string hex(const Bytes& b);
std::optional<Bytes> parse_hex(std::string_view s);

}  // namespace hpim
