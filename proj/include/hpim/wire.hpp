#pragma once

// Control message codec. All integers are big-endian.
//
//   header   version:u8 msg_type:u8 boot_time:u64
//            sec_type:u16 sec_length:u16 sec_value[sec_length]
//   Hello    TLV* (type:u16 length:u16 value); 1 = hold_time:u16, 2 = checkpoint_sn:u32
//   Sync     my_ssn:u32 nei_ssn:u32 nei_bt:u64 flags:u8 (0x02 M, 0x01 m) sync_sn:u16
//            [hello_hold_time:u16 when m clear] record* (src:u32 grp:u32 pref:u32 rpc:u32)
//   IamUpstream          sn:u32 src:u32 grp:u32 pref:u32 rpc:u32
//   IamNoLongerUpstream, Interest, NoInterest   sn:u32 src:u32 grp:u32
//   Ack      nei_sn:u32 src:u32 grp:u32 nei_bt:u64 nei_ssn:u32 my_ssn:u32
//
// With a key, sec_type = 1 and sec_value is HMAC-SHA256 over
// src:u32 dst:u32 followed by the message with sec_value zeroed.

#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "hpim/types.hpp"

namespace hpim {

enum class MsgType : std::uint8_t {
    Hello = 1,
    Sync = 2,
    IamUpstream = 3,
    IamNoLongerUpstream = 4,
    Interest = 5,
    NoInterest = 6,
    Ack = 7,
};
const char* to_string(MsgType t);
std::optional<MsgType> parse_msg_type(std::string_view s);

constexpr std::uint8_t kProtocolVersion = 1;
constexpr std::uint16_t kSecNone = 0;
constexpr std::uint16_t kSecHmacSha256 = 1;
constexpr std::size_t kMacLength = 32;

constexpr std::uint16_t kTlvHoldTime = 1;
constexpr std::uint16_t kTlvCheckpointSn = 2;

struct SecurityBlock {
    std::uint16_t sec_type = kSecNone;
    Bytes sec_value;
    bool operator==(const SecurityBlock&) const = default;
};

struct MessageHeader {
    BootTime boot_time = 0;
    std::uint8_t version = kProtocolVersion;
    MsgType msg_type = MsgType::Hello;
    bool operator==(const MessageHeader&) const = default;
};

struct RawTlv {
    std::uint16_t type = 0;
    Bytes value;
    bool operator==(const RawTlv&) const = default;
};

struct HelloBody {
    std::uint16_t hold_time = 0;
    std::optional<SeqNum> checkpoint_sn;
    std::vector<RawTlv> unknown_tlvs;  // kept only by lenient decode
    bool operator==(const HelloBody&) const = default;
};

struct SyncTreeRecord {
    Ipv4 source = 0;
    Ipv4 group = 0;
    std::uint32_t rpc_preference = 0;
    std::uint32_t rpc = 0;
    TreeRef tree() const { return {source, group}; }
    MetricPair metric() const { return {rpc_preference, rpc}; }
    bool operator==(const SyncTreeRecord&) const = default;
};

struct SyncBody {
    SeqNum my_snapshot_sn = 0;
    SeqNum neighbor_snapshot_sn = 0;
    BootTime neighbor_boot_time = 0;
    bool master_flag = false;
    bool more_flag = false;
    std::uint16_t sync_sn = 0;
    std::vector<SyncTreeRecord> trees;
    std::optional<std::uint16_t> hello_hold_time;
    bool operator==(const SyncBody&) const = default;
};

struct UpstreamBody {
    SeqNum sn = 0;
    Ipv4 source = 0;
    Ipv4 group = 0;
    std::optional<std::uint32_t> rpc_preference;
    std::optional<std::uint32_t> rpc;
    TreeRef tree() const { return {source, group}; }
    bool operator==(const UpstreamBody&) const = default;
};

struct InterestBody {
    SeqNum sn = 0;
    Ipv4 source = 0;
    Ipv4 group = 0;
    TreeRef tree() const { return {source, group}; }
    bool operator==(const InterestBody&) const = default;
};

struct AckBody {
    SeqNum neighbor_sn = 0;
    Ipv4 source = 0;
    Ipv4 group = 0;
    BootTime neighbor_boot_time = 0;
    SeqNum neighbor_snapshot_sn = 0;
    SeqNum my_snapshot_sn = 0;
    TreeRef tree() const { return {source, group}; }
    bool operator==(const AckBody&) const = default;
};

using MessageBody = std::variant<HelloBody, SyncBody, UpstreamBody, InterestBody, AckBody>;

struct Message {
    MessageHeader header;
    MessageBody body;
    SecurityBlock security;  // filled by encode/decode, not part of equality

    bool operator==(const Message& o) const { return header == o.header && body == o.body; }
};

// Convenience constructors; they set header.msg_type consistently with the body.
Message make_hello(BootTime bt, std::uint16_t hold_time, std::optional<SeqNum> checkpoint = {});
Message make_sync(BootTime bt, SyncBody body);
Message make_iam_upstream(BootTime bt, SeqNum sn, TreeRef t, MetricPair m);
Message make_iam_no_longer_upstream(BootTime bt, SeqNum sn, TreeRef t);
Message make_interest(BootTime bt, SeqNum sn, TreeRef t, bool interested);
Message make_ack(BootTime bt, const AckBody& body);

// Tree the message refers to, if any (Hello and Sync have none).
std::optional<TreeRef> message_tree(const Message& m);

class InvalidMessage : public std::invalid_argument {
   public:
    using std::invalid_argument::invalid_argument;
};

enum class DecodeError { None, AuthFail, Truncated, UnknownType, MalformedTLV, BadVersion };
const char* to_string(DecodeError e);

struct DecodeResult {
    DecodeError error = DecodeError::None;
    Message message;
    bool ok() const { return error == DecodeError::None; }
};

using Key = std::optional<Bytes>;

Bytes encode_message(const Message& msg, Ipv4 src, Ipv4 dst, const Key& key);
DecodeResult decode_message(const Bytes& bytes, Ipv4 src, Ipv4 dst, const Key& key,
                            bool lenient = false);

// Reads only the fixed header; used by tracing of frames that fail to decode.
std::optional<MsgType> peek_type(const Bytes& bytes);

}  // namespace hpim
