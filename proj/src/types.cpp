#include "hpim/types.hpp"

#include <charconv>
#include <cstdio>

namespace hpim {

std::string ip_to_string(Ipv4 ip) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%u.%u.%u.%u", (ip >> 24) & 0xFF, (ip >> 16) & 0xFF,
                  (ip >> 8) & 0xFF, ip & 0xFF);
    return buf;
}

std::optional<Ipv4> parse_ip(std::string_view text) {
    Ipv4 out = 0;
    const char* p = text.data();
    const char* end = text.data() + text.size();
    for (int i = 0; i < 4; ++i) {
        unsigned v = 0;
        auto [next, ec] = std::from_chars(p, end, v);
        if (ec != std::errc() || next == p || v > 255) return std::nullopt;
        out = (out << 8) | v;
        p = next;
        if (i < 3) {
            if (p == end || *p != '.') return std::nullopt;
            ++p;
        }
    }
    if (p != end) return std::nullopt;
    return out;
}

std::string to_string(const TreeRef& t) {
    return ip_to_string(t.source) + "," + ip_to_string(t.group);
}

std::string to_string(const MetricPair& m) {
    return std::to_string(m.preference) + "/" + std::to_string(m.rpc);
}

const char* to_string(TreeState s) {
    switch (s) {
        case TreeState::Inactive: return "INACTIVE";
        case TreeState::Unsure: return "UNSURE";
        case TreeState::Active: return "ACTIVE";
    }
    return "?";
}

const char* to_string(AssertState s) { return s == AssertState::AW ? "AW" : "AL"; }
const char* to_string(DownstreamInterest s) { return s == DownstreamInterest::DI ? "DI" : "NDI"; }
const char* to_string(ForwardingState s) {
    return s == ForwardingState::Forwarding ? "FORWARDING" : "PRUNED";
}

const char* to_string(SyncState s) {
    switch (s) {
        case SyncState::Unknown: return "UNKNOWN";
        case SyncState::Master: return "MASTER";
        case SyncState::Slave: return "SLAVE";
        case SyncState::Synced: return "SYNCED";
    }
    return "?";
}

const char* to_string(InterfaceRole s) { return s == InterfaceRole::Root ? "root" : "nonroot"; }

std::optional<TreeState> parse_tree_state(std::string_view s) {
    if (s == "ACTIVE") return TreeState::Active;
    if (s == "UNSURE") return TreeState::Unsure;
    if (s == "INACTIVE") return TreeState::Inactive;
    return std::nullopt;
}

std::string hex(const Bytes& b) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(b.size() * 2);
    for (auto c : b) {
        out.push_back(digits[c >> 4]);
        out.push_back(digits[c & 0xF]);
    }
    return out;
}

std::optional<Bytes> parse_hex(std::string_view s) {
    if (s.size() % 2) return std::nullopt;
    Bytes out;
    for (size_t i = 0; i < s.size(); i += 2) {
        unsigned v = 0;
        auto [p, ec] = std::from_chars(s.data() + i, s.data() + i + 2, v, 16);
        if (ec != std::errc() || p != s.data() + i + 2) return std::nullopt;
        out.push_back(static_cast<std::uint8_t>(v));
    }
    return out;
}

}  // namespace hpim
