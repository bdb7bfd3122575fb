#pragma once

#include "abpsim/graph.hpp"
#include "abpsim/rng.hpp"
#include "abpsim/types.hpp"

#include <cstdint>
#include <map>
#include <vector>

namespace abpsim {

struct SimConfig;
struct ClusterAssignment;


struct NodeState {
    NodeId id = 0;
    double x = 0.0;
    double y = 0.0;
    double speed = 0.0;   // m/s
    double heading = 0.0; // radians in [0, 2pi)
    double battery = 0.0; // units
    bool alive = true;

    friend bool operator==(const NodeState&, const NodeState&) = default;
};

struct EnergyModel {
    double e_ordinary = 0.05;      // units/s, ordinary nodes and gateways
    double e_ch_base = 0.05;       // units/s
    double e_ch_per_member = 0.02; // units/s per dominated member

    void validate() const;
};

struct World {
    std::vector<NodeState> nodes; // nodes[i].id == i
    double terrain_width = 600.0;
    double terrain_height = 600.0;
    double radio_range = 150.0;
    double clock = 0.0;
    double heading_redraw_interval = 0.0; // 0 = never
    Rng rng;

    friend bool operator==(const World&, const World&) = default;
};

/// Draw order on the world stream, per node in ascending ID:
/// x, y, battery, speed, heading.
World init_world(const SimConfig& config, std::uint64_t seed);

/// Advances every node by speed*dt along its heading, reflecting specularly at
/// the terrain walls. Dead nodes keep moving.
void step_motion(World& world, double dt);

/// Closed unit-disk graph over alive nodes.
Graph adjacency(const World& world);

/// Linear drain; CHs pay a per-member surcharge. Batteries clamp at 0.
void drain_energy(World& world, const ClusterAssignment& roles, double dt, const EnergyModel& model);

/// Population variance of battery over alive nodes (0 if none).
double energy_variance(const World& world);

} // namespace abpsim
