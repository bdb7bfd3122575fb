#include "abpsim/hello_codec.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace abpsim {

std::string_view to_string(ProtocolVariant v)
{
    switch (v) {
    case ProtocolVariant::LID: return "LID";
    case ProtocolVariant::HD: return "HD";
    case ProtocolVariant::VC: return "VC";
    case ProtocolVariant::ABP: return "ABP";
    }
    return "?";
}

ProtocolVariant parse_variant(std::string_view s)
{
    for (auto v : kAllVariants)
        if (to_string(v) == s)
            return v;
    throw ConfigError("unknown protocol variant '" + std::string(s) + "'");
}

std::string_view to_string(Role r)
{
    switch (r) {
    case Role::CH: return "CH";
    case Role::GATEWAY: return "GATEWAY";
    case Role::ORDINARY: return "ORDINARY";
    case Role::UNCLUSTERED: return "UNCLUSTERED";
    }
    return "?";
}

BitString BitString::from_string(std::string_view s)
{
    BitString out;
    for (char c : s) {
        if (c == '0' || c == '1')
            out.push_back(c == '1');
        else if (c != ' ' && c != '\t' && c != '|')
            throw CodecError(std::string("invalid bit character '") + c + "'");
    }
    return out;
}

std::string BitString::to_string() const
{
    std::string s;
    s.reserve(bits_.size());
    for (bool b : bits_)
        s.push_back(b ? '1' : '0');
    return s;
}

std::string BitString::grouped(const std::vector<int>& widths) const
{
    std::string s;
    std::size_t pos = 0;
    for (int w : widths) {
        if (!s.empty())
            s.push_back(' ');
        for (int i = 0; i < w && pos < bits_.size(); ++i, ++pos)
            s.push_back(bits_[pos] ? '1' : '0');
    }
    return s;
}

int packet_size_bits(ProtocolVariant variant)
{
    switch (variant) {
    case ProtocolVariant::LID:
    case ProtocolVariant::HD: return 8;
    case ProtocolVariant::VC: return 32;
    case ProtocolVariant::ABP: return 36;
    }
    return 0;
}

std::vector<int> field_widths(ProtocolVariant variant)
{
    switch (variant) {
    case ProtocolVariant::LID:
    case ProtocolVariant::HD: return {8};
    case ProtocolVariant::VC: return {8, 8, 8, 8};
    case ProtocolVariant::ABP: return {8, 8, 8, 4, 8};
    }
    return {};
}

namespace {

void put(BitString& out, unsigned value, int width)
{
    for (int i = width - 1; i >= 0; --i)
        out.push_back(((value >> i) & 1u) != 0);
}

unsigned get(const BitString& in, std::size_t& pos, int width)
{
    unsigned v = 0;
    for (int i = 0; i < width; ++i)
        v = (v << 1) | (in[pos++] ? 1u : 0u);
    return v;
}

void check_id(unsigned v, const char* field, bool allow_no_cluster)
{
    if (v <= static_cast<unsigned>(kMaxNodeId))
        return;
    if (allow_no_cluster && v == kNoCluster)
        return;
    throw CodecError(std::string("field ") + field + " out of range: " + std::to_string(v));
}

} // namespace

BitString encode_hello(const HelloPacket& p, ProtocolVariant variant)
{
    check_id(p.mh_id, "MH_ID", false);
    BitString out;
    put(out, p.mh_id, 8);
    if (variant == ProtocolVariant::LID || variant == ProtocolVariant::HD)
        return out;

    check_id(p.ch_id, "CH_ID", true);
    put(out, p.ch_id, 8);
    put(out, p.chc_q, 8);
    if (variant == ProtocolVariant::VC) {
        put(out, 0, 8); // reserved
        return out;
    }
    if (p.option > kOptionMax)
        throw CodecError("field Option out of range: " + std::to_string(p.option));
    put(out, p.option, 4);
    put(out, p.bp_code, 8);
    return out;
}

HelloPacket decode_hello(const BitString& bits, ProtocolVariant variant)
{
    const auto expected = static_cast<std::size_t>(packet_size_bits(variant));
    if (bits.size() != expected)
        throw CodecError("bad " + std::string(to_string(variant)) + " packet length: got " +
                         std::to_string(bits.size()) + " bits, expected " + std::to_string(expected));
    HelloPacket p;
    std::size_t pos = 0;
    p.mh_id = static_cast<NodeId>(get(bits, pos, 8));
    check_id(p.mh_id, "MH_ID", false);
    if (variant == ProtocolVariant::LID || variant == ProtocolVariant::HD)
        return p;
    p.ch_id = static_cast<NodeId>(get(bits, pos, 8));
    check_id(p.ch_id, "CH_ID", true);
    p.chc_q = static_cast<std::uint8_t>(get(bits, pos, 8));
    if (variant == ProtocolVariant::VC)
        return p; // reserved byte ignored
    p.option = static_cast<std::uint8_t>(get(bits, pos, 4));
    p.bp_code = static_cast<std::uint8_t>(get(bits, pos, 8));
    return p;
}

std::uint8_t ChcQuantizer::quantize(double chc) const
{
    if (!std::isfinite(chc))
        throw CodecError("CHC must be finite");
    if (!(scale > 0.0))
        throw CodecError("CHC quantizer scale must be positive");
    const double clamped = std::clamp(chc, 0.0, 255.0 * scale);
    // Guard against 255.0000001 after division.
    const double code = std::round(clamped / scale);
    return static_cast<std::uint8_t>(std::min(code, 255.0));
}

std::uint8_t quantize_chc(double chc, const ChcQuantizer& q) { return q.quantize(chc); }

std::uint8_t bp_to_code(double bp, double bp_min)
{
    const double code = std::round(bp / bp_min);
    return static_cast<std::uint8_t>(std::clamp(code, 1.0, 255.0));
}

std::string dump_hello(const HelloPacket& p, ProtocolVariant variant)
{
    static const char* abp_names[] = {"MH_ID", "CH_ID", "CHC", "Option", "BP"};
    static const char* vc_names[] = {"MH_ID", "CH_ID", "Vote", "Reserved"};
    static const char* id_names[] = {"MH_ID"};
    const char* const* names = variant == ProtocolVariant::ABP  ? abp_names
                               : variant == ProtocolVariant::VC ? vc_names
                                                                : id_names;
    const auto bits = encode_hello(p, variant);
    const auto widths = field_widths(variant);
    std::ostringstream os;
    os << to_string(variant) << " hello, " << bits.size() << " bits\n";
    os << bits.grouped(widths) << "\n";
    std::size_t pos = 0;
    for (std::size_t f = 0; f < widths.size(); ++f) {
        std::string field;
        for (int i = 0; i < widths[f]; ++i)
            field.push_back(bits[pos++] ? '1' : '0');
        os << "  " << names[f] << "(" << widths[f] << ") = " << field << " ("
           << std::stoul(field, nullptr, 2) << ")\n";
    }
    return os.str();
}

} // namespace abpsim
