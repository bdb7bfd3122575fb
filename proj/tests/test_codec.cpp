#include "abpsim/hello_codec.hpp"
#include "abpsim/rng.hpp"

#include <doctest.h>

#include <bitset>
#include <cmath>
#include <limits>
#include <string>

using namespace abpsim;

namespace {

// Reference assembly straight from the layout table, via std::bitset text.
std::string reference_bits(const HelloPacket& p, ProtocolVariant v)
{
    std::string s = std::bitset<8>(p.mh_id).to_string();
    if (v == ProtocolVariant::LID || v == ProtocolVariant::HD)
        return s;
    s += std::bitset<8>(p.ch_id).to_string() + std::bitset<8>(p.chc_q).to_string();
    if (v == ProtocolVariant::VC)
        return s + "00000000";
    return s + std::bitset<4>(p.option).to_string() + std::bitset<8>(p.bp_code).to_string();
}

HelloPacket random_packet(Rng& rng, ProtocolVariant v)
{
    HelloPacket p;
    p.mh_id = static_cast<NodeId>(rng.below(255));
    if (v == ProtocolVariant::LID || v == ProtocolVariant::HD)
        return p;
    p.ch_id = static_cast<NodeId>(rng.below(256)); // 255 = no cluster
    p.chc_q = static_cast<std::uint8_t>(rng.below(256));
    if (v == ProtocolVariant::VC)
        return p;
    p.option = static_cast<std::uint8_t>(rng.below(16));
    p.bp_code = static_cast<std::uint8_t>(rng.below(256));
    return p;
}

} // namespace

TEST_CASE("packet sizes")
{
    CHECK(packet_size_bits(ProtocolVariant::LID) == 8);
    CHECK(packet_size_bits(ProtocolVariant::HD) == 8);
    CHECK(packet_size_bits(ProtocolVariant::VC) == 32);
    CHECK(packet_size_bits(ProtocolVariant::ABP) == 36);
}

TEST_CASE("ABP zero packet")
{
    const auto bits = encode_hello(HelloPacket{}, ProtocolVariant::ABP);
    CHECK(bits.to_string() == std::string(36, '0'));
    CHECK(decode_hello(bits, ProtocolVariant::ABP) == HelloPacket{});
}

TEST_CASE("hand-assembled ABP packet")
{
    HelloPacket p{1, kNoCluster, 8, 10, 1};
    const auto bits = encode_hello(p, ProtocolVariant::ABP);
    CHECK(bits == BitString::from_string("00000001 11111111 00001000 1010 00000001"));
    CHECK(decode_hello(bits, ProtocolVariant::ABP) == p);
}

TEST_CASE("LID packet is the bare id")
{
    HelloPacket p;
    p.mh_id = 7;
    CHECK(encode_hello(p, ProtocolVariant::LID).to_string() == "00000111");
}

TEST_CASE("randomized round trip against reference layout")
{
    Rng rng(42);
    for (auto v : kAllVariants) {
        for (int i = 0; i < 10000; ++i) {
            const auto p = random_packet(rng, v);
            const auto bits = encode_hello(p, v);
            REQUIRE(bits.size() == static_cast<std::size_t>(packet_size_bits(v)));
            REQUIRE(bits.to_string() == reference_bits(p, v));
            REQUIRE(decode_hello(bits, v) == p);
        }
    }
}

TEST_CASE("field overflow names the field")
{
    HelloPacket p;
    p.option = 16;
    try {
        encode_hello(p, ProtocolVariant::ABP);
        FAIL("expected CodecError");
    } catch (const CodecError& e) {
        CHECK(std::string(e.what()).find("Option") != std::string::npos);
    }
    p = {};
    p.mh_id = kNoCluster;
    CHECK_THROWS_AS(encode_hello(p, ProtocolVariant::LID), CodecError);
}

TEST_CASE("wrong length rejected")
{
    CHECK_THROWS_AS(decode_hello(BitString(8), ProtocolVariant::ABP), CodecError);
    CHECK_THROWS_AS(decode_hello(BitString(36), ProtocolVariant::VC), CodecError);
    CHECK_NOTHROW(decode_hello(BitString(32), ProtocolVariant::VC));
}

TEST_CASE("CHC quantizer")
{
    ChcQuantizer q{0.05};
    CHECK(quantize_chc(0.0, q) == 0);
    CHECK(quantize_chc(0.0, ChcQuantizer{0.5}) == 0);
    CHECK(quantize_chc(3.8, q) == 76);
    CHECK(quantize_chc(1e6, q) == 255);
    CHECK(quantize_chc(-3.0, q) == 0);
    CHECK_THROWS_AS(quantize_chc(std::numeric_limits<double>::quiet_NaN(), q), CodecError);
    CHECK_THROWS_AS(quantize_chc(std::numeric_limits<double>::infinity(), q), CodecError);

    // monotone, and within half a step of the input inside the range
    Rng rng(7);
    double prev_x = -1.0;
    std::uint8_t prev_c = 0;
    for (int i = 0; i < 5000; ++i) {
        const double x = prev_x + rng.uniform(0.0, 0.01);
        const auto c = q.quantize(x);
        CHECK(c >= prev_c);
        if (x >= 0.0 && x <= 255 * q.scale)
            CHECK(std::abs(q.dequantize(c) - x) <= q.scale / 2 + 1e-12);
        prev_x = x;
        prev_c = c;
    }
}

TEST_CASE("BP code")
{
    CHECK(bp_to_code(1.0, 1.0) == 1);
    CHECK(bp_to_code(8.0, 1.0) == 8);
    CHECK(bp_to_code(0.0, 1.0) == 1);
    CHECK(bp_to_code(1000.0, 1.0) == 255);
    CHECK(code_to_bp(bp_to_code(2.5, 0.5), 0.5) == doctest::Approx(2.5));
}

TEST_CASE("dump groups fields")
{
    HelloPacket p{1, 1, 76, 0, 1};
    const auto s = dump_hello(p, ProtocolVariant::ABP);
    CHECK(s.find("00000001 00000001 01001100 0000 00000001") != std::string::npos);
}
