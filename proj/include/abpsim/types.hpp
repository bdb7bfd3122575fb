#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace abpsim {

using NodeId = std::uint8_t;

/// Reserved CH_ID code for "not a member of any cluster".
inline constexpr NodeId kNoCluster = 255;
inline constexpr int kMaxNodeId = 254;
inline constexpr int kMaxNodes = kMaxNodeId + 1;

enum class ProtocolVariant { LID, HD, VC, ABP };

inline constexpr ProtocolVariant kAllVariants[] = {ProtocolVariant::LID, ProtocolVariant::HD,
                                                   ProtocolVariant::VC, ProtocolVariant::ABP};

std::string_view to_string(ProtocolVariant v);
ProtocolVariant parse_variant(std::string_view s);

enum class Role { CH, GATEWAY, ORDINARY, UNCLUSTERED };

std::string_view to_string(Role r);

/// Simulation time in ticks.
using Tick = std::int64_t;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace abpsim
