#pragma once

#include "abpsim/types.hpp"
#include "abpsim/world.hpp"

namespace abpsim {

/// Run parameters. Defaults are the evaluation setup.
struct SimConfig {
    ProtocolVariant variant = ProtocolVariant::ABP;

    int node_count = 50;
    double terrain_width = 600.0;
    double terrain_height = 600.0;
    double speed_min = 0.0;
    double speed_max = 15.0;
    double battery_min = 20.0;
    double battery_max = 100.0;
    double duration = 180.0; // seconds
    double radio_range = 150.0;
    double heading_redraw_interval = 0.0;

    // CHC weights and penalty, admission threshold
    double c1 = 0.5;
    double c2 = 0.5;
    int p = 2;
    int T = 10;
    double chc_scale = 0.5;

    // broadcast period control
    double bp_min = 1.0;
    double bp_max = 8.0;
    double mr_ref = 8.0;
    int history = 5; // THT depth n
    double baseline_bp = 1.0;

    EnergyModel energy;

    /// One simulation tick; defaults to 0.1 * bp_min.
    double tick = 0.1;

    /// Throws ConfigError naming the offending key.
    void validate() const;

    /// Ticks per bp_min (integer; validated).
    Tick ticks_per_bp_min() const;
    Tick baseline_ticks() const;
    Tick total_ticks() const;
};

/// Speed range for the "average speed" axis: uniform over [max(0, s-w), s+w],
/// w = min(s, 15 - s).
void set_mean_speed(SimConfig& cfg, double mean_speed, double speed_cap = 15.0);

} // namespace abpsim
