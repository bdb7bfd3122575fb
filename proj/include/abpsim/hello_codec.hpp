#pragma once

// Bit-exact Hello packet codec.
//
// ABP layout (36 bits, MSB first):  MH_ID(8) | CH_ID(8) | CHC(8) | Option(4) | BP(8)
// VC layout (32 bits):              MH_ID(8) | CH_ID(8) | Vote(8) | Reserved(8)
// LID / HD (8 bits):                MH_ID(8)

#include "abpsim/types.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace abpsim {

struct CodecError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Option code a CH advertises when it refused at least one membership request.
inline constexpr std::uint8_t kOptionOverflow = 15;
inline constexpr std::uint8_t kOptionMax = 15;

struct HelloPacket {
    NodeId mh_id = 0;
    NodeId ch_id = 0;
    std::uint8_t chc_q = 0;   // quantized CHC (vote for VC)
    std::uint8_t option = 0;  // 4-bit member count
    std::uint8_t bp_code = 0; // broadcast period in bp_min units

    friend bool operator==(const HelloPacket&, const HelloPacket&) = default;
};

class BitString {
public:
    BitString() = default;
    explicit BitString(std::size_t n) : bits_(n, false) {}

    static BitString from_string(std::string_view s); // '0'/'1', whitespace ignored

    std::size_t size() const { return bits_.size(); }
    bool operator[](std::size_t i) const { return bits_[i]; }
    void push_back(bool b) { bits_.push_back(b); }

    std::string to_string() const;
    /// Binary grouped by field widths, e.g. "00000001 11111111 ...".
    std::string grouped(const std::vector<int>& widths) const;

    friend bool operator==(const BitString&, const BitString&) = default;

private:
    std::vector<bool> bits_;
};

int packet_size_bits(ProtocolVariant variant);

/// Field widths in wire order for the variant.
std::vector<int> field_widths(ProtocolVariant variant);

BitString encode_hello(const HelloPacket& packet, ProtocolVariant variant);
HelloPacket decode_hello(const BitString& bits, ProtocolVariant variant);

struct ChcQuantizer {
    double scale = 0.05;

    std::uint8_t quantize(double chc) const;
    double dequantize(std::uint8_t code) const { return code * scale; }
};

std::uint8_t quantize_chc(double chc, const ChcQuantizer& q);

/// round(bp / bp_min) clamped to [1, 255].
std::uint8_t bp_to_code(double bp, double bp_min);
inline double code_to_bp(std::uint8_t code, double bp_min) { return code * bp_min; }

/// Multi-line dump of a packet's bit layout, used by `codec dump`.
std::string dump_hello(const HelloPacket& packet, ProtocolVariant variant);

} // namespace abpsim
