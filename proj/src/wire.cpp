#include "hpim/wire.hpp"

#include <openssl/evp.h>
#include <openssl/hmac.h>

#include <cstring>

namespace hpim {

namespace {

constexpr std::size_t kFixedHeader = 1 + 1 + 8 + 2 + 2;
constexpr std::uint8_t kFlagMaster = 0x02;
constexpr std::uint8_t kFlagMore = 0x01;

class Writer {
   public:
    void u8(std::uint8_t v) { out_.push_back(v); }
    void u16(std::uint16_t v) {
        u8(static_cast<std::uint8_t>(v >> 8));
        u8(static_cast<std::uint8_t>(v));
    }
    void u32(std::uint32_t v) {
        u16(static_cast<std::uint16_t>(v >> 16));
        u16(static_cast<std::uint16_t>(v));
    }
    void u64(std::uint64_t v) {
        u32(static_cast<std::uint32_t>(v >> 32));
        u32(static_cast<std::uint32_t>(v));
    }
    void bytes(const Bytes& b) { out_.insert(out_.end(), b.begin(), b.end()); }
    Bytes& out() { return out_; }

   private:
    Bytes out_;
};

class Reader {
   public:
    Reader(const Bytes& b, std::size_t pos, std::size_t end) : b_(b), pos_(pos), end_(end) {}
    bool has(std::size_t n) const { return end_ - pos_ >= n; }
    std::size_t remaining() const { return end_ - pos_; }
    std::uint8_t u8() { return b_[pos_++]; }
    std::uint16_t u16() {
        std::uint16_t hi = u8();
        return static_cast<std::uint16_t>((hi << 8) | u8());
    }
    std::uint32_t u32() {
        std::uint32_t hi = u16();
        return (hi << 16) | u16();
    }
    std::uint64_t u64() {
        std::uint64_t hi = u32();
        return (hi << 32) | u32();
    }
    Bytes take(std::size_t n) {
        Bytes v(b_.begin() + static_cast<long>(pos_), b_.begin() + static_cast<long>(pos_ + n));
        pos_ += n;
        return v;
    }

   private:
    const Bytes& b_;
    std::size_t pos_;
    std::size_t end_;
};

Bytes compute_mac(const Bytes& key, Ipv4 src, Ipv4 dst, const Bytes& msg_zeroed) {
    Writer w;
    w.u32(src);
    w.u32(dst);
    w.bytes(msg_zeroed);
    unsigned int len = 0;
    Bytes mac(EVP_MAX_MD_SIZE);
    HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), w.out().data(), w.out().size(),
         mac.data(), &len);
    mac.resize(len);
    return mac;
}

void require(bool cond, const char* what) {
    if (!cond) throw InvalidMessage(what);
}

MsgType expected_type_for(const MessageBody& body, MsgType declared) {
    switch (body.index()) {
        case 0: return MsgType::Hello;
        case 1: return MsgType::Sync;
        case 2:
            return declared == MsgType::IamNoLongerUpstream ? MsgType::IamNoLongerUpstream
                                                            : MsgType::IamUpstream;
        case 3: return declared == MsgType::NoInterest ? MsgType::NoInterest : MsgType::Interest;
        default: return MsgType::Ack;
    }
}

void validate(const Message& m) {
    require(m.header.version == kProtocolVersion, "unsupported version");
    require(expected_type_for(m.body, m.header.msg_type) == m.header.msg_type,
            "msg_type does not match body");
    if (auto* s = std::get_if<SyncBody>(&m.body)) {
        require(s->hello_hold_time.has_value() == !s->more_flag,
                "hello_hold_time must be present iff more flag is clear");
        for (auto& r : s->trees) require(is_multicast(r.group), "sync record group not multicast");
    } else if (auto* u = std::get_if<UpstreamBody>(&m.body)) {
        bool want = m.header.msg_type == MsgType::IamUpstream;
        require(u->rpc.has_value() == want && u->rpc_preference.has_value() == want,
                "rpc fields present iff IamUpstream");
        require(is_multicast(u->group), "group not multicast");
    } else if (auto* i = std::get_if<InterestBody>(&m.body)) {
        require(is_multicast(i->group), "group not multicast");
    } else if (auto* a = std::get_if<AckBody>(&m.body)) {
        require(is_multicast(a->group), "group not multicast");
    } else if (auto* h = std::get_if<HelloBody>(&m.body)) {
        for (auto& t : h->unknown_tlvs) {
            require(t.type != kTlvHoldTime && t.type != kTlvCheckpointSn, "reserved tlv type");
            require(t.value.size() <= 0xFFFF, "tlv too long");
        }
    }
}

void encode_body(Writer& w, const Message& m) {
    std::visit(
        [&](const auto& b) {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, HelloBody>) {
                w.u16(kTlvHoldTime);
                w.u16(2);
                w.u16(b.hold_time);
                if (b.checkpoint_sn) {
                    w.u16(kTlvCheckpointSn);
                    w.u16(4);
                    w.u32(*b.checkpoint_sn);
                }
                for (auto& t : b.unknown_tlvs) {
                    w.u16(t.type);
                    w.u16(static_cast<std::uint16_t>(t.value.size()));
                    w.bytes(t.value);
                }
            } else if constexpr (std::is_same_v<T, SyncBody>) {
                w.u32(b.my_snapshot_sn);
                w.u32(b.neighbor_snapshot_sn);
                w.u64(b.neighbor_boot_time);
                std::uint8_t flags = (b.master_flag ? kFlagMaster : 0) | (b.more_flag ? kFlagMore : 0);
                w.u8(flags);
                w.u16(b.sync_sn);
                if (!b.more_flag) w.u16(*b.hello_hold_time);
                for (auto& r : b.trees) {
                    w.u32(r.source);
                    w.u32(r.group);
                    w.u32(r.rpc_preference);
                    w.u32(r.rpc);
                }
            } else if constexpr (std::is_same_v<T, UpstreamBody>) {
                w.u32(b.sn);
                w.u32(b.source);
                w.u32(b.group);
                if (b.rpc) {
                    w.u32(*b.rpc_preference);
                    w.u32(*b.rpc);
                }
            } else if constexpr (std::is_same_v<T, InterestBody>) {
                w.u32(b.sn);
                w.u32(b.source);
                w.u32(b.group);
            } else {
                w.u32(b.neighbor_sn);
                w.u32(b.source);
                w.u32(b.group);
                w.u64(b.neighbor_boot_time);
                w.u32(b.neighbor_snapshot_sn);
                w.u32(b.my_snapshot_sn);
            }
        },
        m.body);
}

// Body decoders return None on success and fill m.body.
DecodeError decode_hello(Reader& r, Message& m, bool lenient) {
    HelloBody h;
    bool have_hold = false;
    while (r.remaining() > 0) {
        if (!r.has(4)) return DecodeError::Truncated;
        std::uint16_t type = r.u16();
        std::uint16_t len = r.u16();
        if (!r.has(len)) return DecodeError::Truncated;
        if (type == kTlvHoldTime) {
            if (len != 2 || have_hold) return DecodeError::MalformedTLV;
            h.hold_time = r.u16();
            have_hold = true;
        } else if (type == kTlvCheckpointSn) {
            if (len != 4 || h.checkpoint_sn) return DecodeError::MalformedTLV;
            h.checkpoint_sn = r.u32();
        } else {
            Bytes v = r.take(len);
            if (lenient) h.unknown_tlvs.push_back({type, std::move(v)});
        }
    }
    if (!have_hold) return DecodeError::MalformedTLV;
    m.body = std::move(h);
    return DecodeError::None;
}

DecodeError decode_sync(Reader& r, Message& m) {
    SyncBody s;
    if (!r.has(4 + 4 + 8 + 1 + 2)) return DecodeError::Truncated;
    s.my_snapshot_sn = r.u32();
    s.neighbor_snapshot_sn = r.u32();
    s.neighbor_boot_time = r.u64();
    std::uint8_t flags = r.u8();
    if (flags & ~(kFlagMaster | kFlagMore)) return DecodeError::MalformedTLV;
    s.master_flag = flags & kFlagMaster;
    s.more_flag = flags & kFlagMore;
    s.sync_sn = r.u16();
    if (!s.more_flag) {
        if (!r.has(2)) return DecodeError::Truncated;
        s.hello_hold_time = r.u16();
    }
    if (r.remaining() % 16 != 0) return DecodeError::Truncated;
    while (r.remaining() > 0) {
        SyncTreeRecord t;
        t.source = r.u32();
        t.group = r.u32();
        t.rpc_preference = r.u32();
        t.rpc = r.u32();
        if (!is_multicast(t.group)) return DecodeError::MalformedTLV;
        s.trees.push_back(t);
    }
    m.body = std::move(s);
    return DecodeError::None;
}

DecodeError decode_fixed(Reader& r, Message& m) {
    auto type = m.header.msg_type;
    std::size_t need = type == MsgType::IamUpstream ? 20 : type == MsgType::Ack ? 28 : 12;
    if (!r.has(need)) return DecodeError::Truncated;
    if (r.remaining() != need) return DecodeError::MalformedTLV;
    if (type == MsgType::IamUpstream || type == MsgType::IamNoLongerUpstream) {
        UpstreamBody u;
        u.sn = r.u32();
        u.source = r.u32();
        u.group = r.u32();
        if (type == MsgType::IamUpstream) {
            u.rpc_preference = r.u32();
            u.rpc = r.u32();
        }
        if (!is_multicast(u.group)) return DecodeError::MalformedTLV;
        m.body = u;
    } else if (type == MsgType::Interest || type == MsgType::NoInterest) {
        InterestBody i;
        i.sn = r.u32();
        i.source = r.u32();
        i.group = r.u32();
        if (!is_multicast(i.group)) return DecodeError::MalformedTLV;
        m.body = i;
    } else {
        AckBody a;
        a.neighbor_sn = r.u32();
        a.source = r.u32();
        a.group = r.u32();
        a.neighbor_boot_time = r.u64();
        a.neighbor_snapshot_sn = r.u32();
        a.my_snapshot_sn = r.u32();
        if (!is_multicast(a.group)) return DecodeError::MalformedTLV;
        m.body = a;
    }
    return DecodeError::None;
}

}  // namespace

const char* to_string(MsgType t) {
    switch (t) {
        case MsgType::Hello: return "Hello";
        case MsgType::Sync: return "Sync";
        case MsgType::IamUpstream: return "IamUpstream";
        case MsgType::IamNoLongerUpstream: return "IamNoLongerUpstream";
        case MsgType::Interest: return "Interest";
        case MsgType::NoInterest: return "NoInterest";
        case MsgType::Ack: return "Ack";
    }
    return "?";
}

std::optional<MsgType> parse_msg_type(std::string_view s) {
    for (int i = 1; i <= 7; ++i) {
        auto t = static_cast<MsgType>(i);
        if (s == to_string(t)) return t;
    }
    return std::nullopt;
}

const char* to_string(DecodeError e) {
    switch (e) {
        case DecodeError::None: return "None";
        case DecodeError::AuthFail: return "AuthFail";
        case DecodeError::Truncated: return "Truncated";
        case DecodeError::UnknownType: return "UnknownType";
        case DecodeError::MalformedTLV: return "MalformedTLV";
        case DecodeError::BadVersion: return "BadVersion";
    }
    return "?";
}

Message make_hello(BootTime bt, std::uint16_t hold_time, std::optional<SeqNum> checkpoint) {
    Message m;
    m.header = {bt, kProtocolVersion, MsgType::Hello};
    m.body = HelloBody{hold_time, checkpoint, {}};
    return m;
}

Message make_sync(BootTime bt, SyncBody body) {
    Message m;
    m.header = {bt, kProtocolVersion, MsgType::Sync};
    m.body = std::move(body);
    return m;
}

Message make_iam_upstream(BootTime bt, SeqNum sn, TreeRef t, MetricPair metric) {
    Message m;
    m.header = {bt, kProtocolVersion, MsgType::IamUpstream};
    m.body = UpstreamBody{sn, t.source, t.group, metric.preference, metric.rpc};
    return m;
}

Message make_iam_no_longer_upstream(BootTime bt, SeqNum sn, TreeRef t) {
    Message m;
    m.header = {bt, kProtocolVersion, MsgType::IamNoLongerUpstream};
    m.body = UpstreamBody{sn, t.source, t.group, std::nullopt, std::nullopt};
    return m;
}

Message make_interest(BootTime bt, SeqNum sn, TreeRef t, bool interested) {
    Message m;
    m.header = {bt, kProtocolVersion, interested ? MsgType::Interest : MsgType::NoInterest};
    m.body = InterestBody{sn, t.source, t.group};
    return m;
}

Message make_ack(BootTime bt, const AckBody& body) {
    Message m;
    m.header = {bt, kProtocolVersion, MsgType::Ack};
    m.body = body;
    return m;
}

std::optional<TreeRef> message_tree(const Message& m) {
    if (auto* u = std::get_if<UpstreamBody>(&m.body)) return u->tree();
    if (auto* i = std::get_if<InterestBody>(&m.body)) return i->tree();
    if (auto* a = std::get_if<AckBody>(&m.body)) return a->tree();
    return std::nullopt;
}

Bytes encode_message(const Message& msg, Ipv4 src, Ipv4 dst, const Key& key) {
    validate(msg);
    Writer w;
    w.u8(msg.header.version);
    w.u8(static_cast<std::uint8_t>(msg.header.msg_type));
    w.u64(msg.header.boot_time);
    if (key) {
        w.u16(kSecHmacSha256);
        w.u16(kMacLength);
        for (std::size_t i = 0; i < kMacLength; ++i) w.u8(0);
    } else {
        w.u16(kSecNone);
        w.u16(0);
    }
    encode_body(w, msg);
    Bytes out = std::move(w.out());
    if (key) {
        Bytes mac = compute_mac(*key, src, dst, out);
        std::memcpy(out.data() + kFixedHeader, mac.data(), kMacLength);
    }
    return out;
}

DecodeResult decode_message(const Bytes& bytes, Ipv4 src, Ipv4 dst, const Key& key, bool lenient) {
    DecodeResult res;
    if (bytes.size() < kFixedHeader) {
        res.error = DecodeError::Truncated;
        return res;
    }
    Reader r(bytes, 0, bytes.size());
    Message& m = res.message;
    m.header.version = r.u8();
    std::uint8_t type = r.u8();
    m.header.boot_time = r.u64();
    m.security.sec_type = r.u16();
    std::uint16_t sec_len = r.u16();
    if (!r.has(sec_len)) {
        res.error = DecodeError::Truncated;
        return res;
    }
    m.security.sec_value = r.take(sec_len);

    if (key) {
        if (m.security.sec_type != kSecHmacSha256 || sec_len != kMacLength) {
            res.error = DecodeError::AuthFail;
            return res;
        }
        Bytes zeroed = bytes;
        std::memset(zeroed.data() + kFixedHeader, 0, kMacLength);
        Bytes mac = compute_mac(*key, src, dst, zeroed);
        if (CRYPTO_memcmp(mac.data(), m.security.sec_value.data(), kMacLength) != 0) {
            res.error = DecodeError::AuthFail;
            return res;
        }
    } else if (m.security.sec_type != kSecNone || sec_len != 0) {
        res.error = DecodeError::AuthFail;
        return res;
    }

    if (m.header.version != kProtocolVersion) {
        res.error = DecodeError::BadVersion;
        return res;
    }
    if (type < 1 || type > 7) {
        res.error = DecodeError::UnknownType;
        return res;
    }
    m.header.msg_type = static_cast<MsgType>(type);

    switch (m.header.msg_type) {
        case MsgType::Hello: res.error = decode_hello(r, m, lenient); break;
        case MsgType::Sync: res.error = decode_sync(r, m); break;
        default: res.error = decode_fixed(r, m); break;
    }
    return res;
}

std::optional<MsgType> peek_type(const Bytes& bytes) {
    if (bytes.size() < 2 || bytes[1] < 1 || bytes[1] > 7) return std::nullopt;
    return static_cast<MsgType>(bytes[1]);
}

}  // namespace hpim
