#include <gtest/gtest.h>

#include <random>

#include "hpim/wire.hpp"

using namespace hpim;

namespace {

const Ipv4 kSrc = 0x0A0100C8;  // 10.1.0.200
const Ipv4 kGrp = 0xE8010101;  // 232.1.1.1
const Ipv4 kFrom = 0x0A010001;

Bytes from_hex(const char* s) { return *parse_hex(s); }

Bytes enc(const Message& m, const Key& key = std::nullopt) { return encode_message(m, kFrom, kAllRoutersGroup, key); }

}  // namespace

// Byte layouts written out by hand from the field table in wire.hpp.
TEST(WireGolden, Hello) {
    auto m = make_hello(0x0102030405060708ull, 120, 7);
    EXPECT_EQ(hex(enc(m)), "0101" "0102030405060708" "0000" "0000" "000100020078" "0002000400000007");
}

TEST(WireGolden, HelloWithoutCheckpoint) {
    EXPECT_EQ(hex(enc(make_hello(1, 105))), "0101" "0000000000000001" "00000000" "000100020069");
}

TEST(WireGolden, IamUpstream) {
    auto m = make_iam_upstream(1, 5, {kSrc, kGrp}, {0, 15});
    EXPECT_EQ(hex(enc(m)), "0103" "0000000000000001" "00000000" "00000005" "0a0100c8" "e8010101" "00000000" "0000000f");
}

TEST(WireGolden, IamNoLongerUpstreamInterestNoInterest) {
    EXPECT_EQ(hex(enc(make_iam_no_longer_upstream(1, 6, {kSrc, kGrp}))),
              "0104" "0000000000000001" "00000000" "00000006" "0a0100c8" "e8010101");
    EXPECT_EQ(hex(enc(make_interest(1, 7, {kSrc, kGrp}, true))), "0105" "0000000000000001" "00000000" "00000007" "0a0100c8" "e8010101");
    EXPECT_EQ(hex(enc(make_interest(1, 8, {kSrc, kGrp}, false))), "0106" "0000000000000001" "00000000" "00000008" "0a0100c8" "e8010101");
}

TEST(WireGolden, Ack) {
    AckBody a{9, kSrc, kGrp, 3, 4, 5};
    EXPECT_EQ(hex(enc(make_ack(2, a))), "0107" "0000000000000002" "00000000" "00000009" "0a0100c8" "e8010101"
                                        "0000000000000003" "00000004" "00000005");
}

TEST(WireGolden, SyncWithMoreFlag) {
    SyncBody s;
    s.my_snapshot_sn = 51;
    s.neighbor_boot_time = 7;
    s.master_flag = true;
    s.more_flag = true;
    s.trees.push_back({kSrc, kGrp, 0, 10});
    EXPECT_EQ(hex(enc(make_sync(1, s))), "0102" "0000000000000001" "00000000" "00000033" "00000000" "0000000000000007" "03" "0000"
                                         "0a0100c8" "e8010101" "00000000" "0000000a");
}

TEST(WireGolden, SyncLastCarriesHoldTime) {
    SyncBody s;
    s.my_snapshot_sn = 1;
    s.neighbor_snapshot_sn = 51;
    s.neighbor_boot_time = 9;
    s.sync_sn = 2;
    s.hello_hold_time = 120;
    EXPECT_EQ(hex(enc(make_sync(4, s))), "0102" "0000000000000004" "00000000" "00000001" "00000033" "0000000000000009" "00" "0002" "0078");
}

// MAC computed outside the codec (Python hmac/sha256) over src, dst and the zeroed message.
TEST(WireGolden, HmacSha256) {
    Key key = Bytes{'k', '3', 'y'};
    auto m = make_iam_upstream(1, 5, {kSrc, kGrp}, {0, 15});
    Bytes b = enc(m, key);
    EXPECT_EQ(hex(b), "0103000000000000000100010020883df438f77d238c7aab114a28b88d62ff7398d884fc2b14bf5e2d7093111bc6"
                      "000000050a0100c8e8010101000000000000000f");
    auto r = decode_message(b, kFrom, kAllRoutersGroup, key);
    ASSERT_TRUE(r.ok());
    EXPECT_EQ(r.message, m);
}

TEST(WireDecode, AuthFailures) {
    Key key = Bytes{'k', '3', 'y'};
    Bytes b = enc(make_hello(3, 120), key);
    EXPECT_EQ(decode_message(b, kFrom, kAllRoutersGroup, Bytes{'x'}).error, DecodeError::AuthFail);
    EXPECT_EQ(decode_message(b, kFrom + 1, kAllRoutersGroup, key).error, DecodeError::AuthFail);
    EXPECT_EQ(decode_message(b, kFrom, kAllRoutersGroup, std::nullopt).error, DecodeError::AuthFail);
    Bytes plain = enc(make_hello(3, 120));
    EXPECT_EQ(decode_message(plain, kFrom, kAllRoutersGroup, key).error, DecodeError::AuthFail);
    b.back() ^= 1;
    EXPECT_EQ(decode_message(b, kFrom, kAllRoutersGroup, key).error, DecodeError::AuthFail);
}

TEST(WireDecode, Errors) {
    Bytes hello = enc(make_hello(3, 120, 4));
    for (std::size_t n = 0; n < hello.size(); ++n) {
        Bytes cut(hello.begin(), hello.begin() + static_cast<long>(n));
        auto e = decode_message(cut, kFrom, kAllRoutersGroup, std::nullopt).error;
        if (n == 20) {  // ends on a TLV boundary: a hello without the checkpoint
            EXPECT_EQ(e, DecodeError::None);
            continue;
        }
        EXPECT_NE(e, DecodeError::None) << "prefix " << n;
    }
    Bytes bad_version = hello;
    bad_version[0] = 2;
    EXPECT_EQ(decode_message(bad_version, kFrom, kAllRoutersGroup, std::nullopt).error, DecodeError::BadVersion);
    Bytes bad_type = hello;
    bad_type[1] = 9;
    EXPECT_EQ(decode_message(bad_type, kFrom, kAllRoutersGroup, std::nullopt).error, DecodeError::UnknownType);
    EXPECT_EQ(decode_message(from_hex("0101000000000000000100000000"), kFrom, kAllRoutersGroup, std::nullopt).error,
              DecodeError::MalformedTLV);  // no hold time
    EXPECT_EQ(decode_message(from_hex("0101000000000000000100000000000100030000ff"), kFrom, kAllRoutersGroup, std::nullopt).error,
              DecodeError::MalformedTLV);  // hold time of length 3
    Bytes extra = enc(make_interest(1, 1, {kSrc, kGrp}, true));
    extra.push_back(0);
    EXPECT_EQ(decode_message(extra, kFrom, kAllRoutersGroup, std::nullopt).error, DecodeError::MalformedTLV);
    Bytes unicast_group = enc(make_interest(1, 1, {kSrc, kGrp}, true));
    unicast_group[22] = 0x0A;
    EXPECT_EQ(decode_message(unicast_group, kFrom, kAllRoutersGroup, std::nullopt).error, DecodeError::MalformedTLV);
}

TEST(WireDecode, UnknownTlvSkippedOrKept) {
    Bytes b = from_hex("0101" "0000000000000001" "00000000" "000100020078" "0009000199");
    auto strict = decode_message(b, kFrom, kAllRoutersGroup, std::nullopt);
    ASSERT_TRUE(strict.ok());
    EXPECT_TRUE(std::get<HelloBody>(strict.message.body).unknown_tlvs.empty());
    auto lenient = decode_message(b, kFrom, kAllRoutersGroup, std::nullopt, true);
    ASSERT_TRUE(lenient.ok());
    auto& tlvs = std::get<HelloBody>(lenient.message.body).unknown_tlvs;
    ASSERT_EQ(tlvs.size(), 1u);
    EXPECT_EQ(tlvs[0].type, 9);
    EXPECT_EQ(encode_message(lenient.message, kFrom, kAllRoutersGroup, std::nullopt), b);
}

TEST(WireEncode, RejectsInconsistentMessages) {
    auto m = make_iam_upstream(1, 1, {kSrc, kGrp}, {0, 1});
    m.header.msg_type = MsgType::Interest;
    EXPECT_THROW(enc(m), InvalidMessage);
    auto s = make_sync(1, SyncBody{});
    std::get<SyncBody>(s.body).hello_hold_time.reset();
    EXPECT_THROW(enc(s), InvalidMessage);
    EXPECT_THROW(enc(make_interest(1, 1, {kSrc, kFrom}, true)), InvalidMessage);
}

// Property: decode(encode(m)) == m for random well-formed messages, with and without a key.
TEST(WireProperty, RoundTrip10k) {
    std::mt19937_64 rng(42);
    auto u32 = [&] { return static_cast<std::uint32_t>(rng()); };
    auto group = [&] { return 0xE0000000u | (u32() & 0x0FFFFFFFu); };
    for (int n = 0; n < 10000; ++n) {
        BootTime bt = rng();
        TreeRef t{u32(), group()};
        Message m;
        switch (n % 7) {
            case 0: {
                std::optional<SeqNum> cp;
                if (rng() & 1) cp = u32();
                m = make_hello(bt, static_cast<std::uint16_t>(u32()), cp);
                break;
            }
            case 1: {
                SyncBody s;
                s.my_snapshot_sn = u32();
                s.neighbor_snapshot_sn = u32();
                s.neighbor_boot_time = rng();
                s.master_flag = rng() & 1;
                s.more_flag = rng() & 1;
                s.sync_sn = static_cast<std::uint16_t>(u32());
                if (!s.more_flag) s.hello_hold_time = static_cast<std::uint16_t>(u32());
                for (int k = static_cast<int>(rng() % 6); k > 0; --k) s.trees.push_back({u32(), group(), u32(), u32()});
                m = make_sync(bt, s);
                break;
            }
            case 2: m = make_iam_upstream(bt, u32(), t, {u32(), u32()}); break;
            case 3: m = make_iam_no_longer_upstream(bt, u32(), t); break;
            case 4: m = make_interest(bt, u32(), t, true); break;
            case 5: m = make_interest(bt, u32(), t, false); break;
            default: m = make_ack(bt, AckBody{u32(), t.source, t.group, rng(), u32(), u32()});
        }
        Key key;
        if (n % 3 == 0) key = Bytes{static_cast<std::uint8_t>(n), 1, 2};
        Ipv4 src = u32(), dst = u32();
        Bytes b = encode_message(m, src, dst, key);
        auto r = decode_message(b, src, dst, key);
        ASSERT_TRUE(r.ok()) << n << " " << to_string(r.error);
        ASSERT_EQ(r.message, m) << n;
        ASSERT_EQ(peek_type(b), m.header.msg_type);
    }
}
