#include "abpsim/sim_config.hpp"

#include "abpsim/hello_codec.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace abpsim {

namespace {

void require(bool ok, const std::string& key, const std::string& what)
{
    if (!ok)
        throw ConfigError(key + ": " + what);
}

bool is_multiple(double value, double unit)
{
    const double r = value / unit;
    return std::abs(r - std::round(r)) < 1e-9;
}

} // namespace

void SimConfig::validate() const
{
    require(node_count >= 0 && node_count <= kMaxNodeId, "node_count", "must be in [0, 254]");
    require(terrain_width > 0.0, "terrain_width", "must be > 0");
    require(terrain_height > 0.0, "terrain_height", "must be > 0");
    require(speed_min >= 0.0 && speed_max >= speed_min, "speed_max", "need 0 <= speed_min <= speed_max");
    require(battery_min >= 0.0 && battery_max >= battery_min, "battery_max",
            "need 0 <= battery_min <= battery_max");
    require(duration >= 0.0, "duration", "must be >= 0");
    require(radio_range > 0.0, "radio_range", "must be > 0");
    require(heading_redraw_interval >= 0.0, "heading_redraw_interval", "must be >= 0");
    require(c1 >= 0.0 && c1 <= 1.0, "c1", "must be in [0, 1]");
    require(c2 >= 0.0 && c2 <= 1.0, "c2", "must be in [0, 1]");
    require(std::abs(c1 + c2 - 1.0) < 1e-9, "c2", "c1 + c2 must equal 1");
    require(p >= 0, "p", "must be a non-negative integer");
    require(T >= 1 && T <= kOptionMax, "T", "must be in [1, 15] (4-bit Option field)");
    require(chc_scale > 0.0, "chc_scale", "must be > 0");
    require(bp_min > 0.0, "bp_min", "must be > 0");
    require(bp_max >= bp_min, "bp_max", "must be >= bp_min");
    require(bp_max <= 255.0 * bp_min, "bp_max", "must fit the 8-bit BP field (<= 255 * bp_min)");
    require(is_multiple(bp_max, bp_min), "bp_max", "must be a multiple of bp_min");
    require(mr_ref > 0.0, "mr_ref", "must be > 0");
    require(history >= 2, "n", "THT depth must be >= 2");
    require(baseline_bp > 0.0, "baseline_bp", "must be > 0");
    require(tick > 0.0 && tick <= bp_min, "tick", "must be in (0, bp_min]");
    require(is_multiple(bp_min, tick), "tick", "bp_min must be a whole number of ticks");
    require(is_multiple(baseline_bp, tick), "baseline_bp", "must be a whole number of ticks");
    energy.validate();
}

Tick SimConfig::ticks_per_bp_min() const { return static_cast<Tick>(std::llround(bp_min / tick)); }
Tick SimConfig::baseline_ticks() const { return static_cast<Tick>(std::llround(baseline_bp / tick)); }
Tick SimConfig::total_ticks() const { return static_cast<Tick>(std::llround(duration / tick)); }

void set_mean_speed(SimConfig& cfg, double mean_speed, double speed_cap)
{
    if (mean_speed < 0.0 || mean_speed > speed_cap)
        throw ConfigError("mean_speed must be in [0, " + std::to_string(speed_cap) + "]");
    const double w = std::min(mean_speed, speed_cap - mean_speed);
    cfg.speed_min = std::max(0.0, mean_speed - w);
    cfg.speed_max = mean_speed + w;
}

} // namespace abpsim
