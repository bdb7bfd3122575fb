#include "abpsim/world.hpp"

#include "abpsim/cluster_assignment.hpp"
#include "abpsim/sim_config.hpp"

#include <cmath>
#include <numbers>

namespace abpsim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double a)
{
    a = std::fmod(a, kTwoPi);
    if (a < 0.0)
        a += kTwoPi;
    return a;
}

// Folds x into [0, limit]; returns true if an odd number of reflections happened.
bool fold(double& x, double limit)
{
    bool flipped = false;
    while (x < 0.0 || x > limit) {
        if (x > limit)
            x = 2.0 * limit - x;
        else
            x = -x;
        flipped = !flipped;
    }
    return flipped;
}

} // namespace

void EnergyModel::validate() const
{
    if (e_ordinary < 0.0)
        throw ConfigError("energy.e_ordinary must be >= 0");
    if (e_ch_base < 0.0)
        throw ConfigError("energy.e_ch_base must be >= 0");
    if (e_ch_per_member < 0.0)
        throw ConfigError("energy.e_ch_per_member must be >= 0");
    if (e_ch_base < e_ordinary)
        throw ConfigError("energy.e_ch_base must be >= energy.e_ordinary");
}

World init_world(const SimConfig& config, std::uint64_t seed)
{
    if (config.node_count < 0 || config.node_count > kMaxNodes - 1)
        throw ConfigError("node_count must be in [0, 254]");
    if (!(config.terrain_width > 0.0) || !(config.terrain_height > 0.0))
        throw ConfigError("terrain dimensions must be positive");

    World w;
    w.terrain_width = config.terrain_width;
    w.terrain_height = config.terrain_height;
    w.radio_range = config.radio_range;
    w.heading_redraw_interval = config.heading_redraw_interval;
    w.rng = Rng(splitmix64(seed));
    w.nodes.reserve(config.node_count);
    for (int i = 0; i < config.node_count; ++i) {
        NodeState n;
        n.id = static_cast<NodeId>(i);
        n.x = w.rng.uniform(0.0, w.terrain_width);
        n.y = w.rng.uniform(0.0, w.terrain_height);
        n.battery = w.rng.uniform(config.battery_min, config.battery_max);
        n.speed = w.rng.uniform(config.speed_min, config.speed_max);
        n.heading = w.rng.uniform(0.0, kTwoPi);
        n.alive = n.battery > 0.0;
        w.nodes.push_back(n);
    }
    return w;
}

void step_motion(World& world, double dt)
{
    const double before = world.clock;
    world.clock += dt;
    if (world.heading_redraw_interval > 0.0 &&
        std::floor(world.clock / world.heading_redraw_interval) >
            std::floor(before / world.heading_redraw_interval)) {
        for (auto& n : world.nodes)
            n.heading = world.rng.uniform(0.0, kTwoPi);
    }
    for (auto& n : world.nodes) {
        if (n.speed == 0.0)
            continue;
        double dx = std::cos(n.heading);
        double dy = std::sin(n.heading);
        n.x += n.speed * dt * dx;
        n.y += n.speed * dt * dy;
        if (fold(n.x, world.terrain_width))
            dx = -dx;
        if (fold(n.y, world.terrain_height))
            dy = -dy;
        n.heading = wrap_angle(std::atan2(dy, dx));
    }
}

Graph adjacency(const World& world)
{
    Graph g;
    const double r2 = world.radio_range * world.radio_range;
    for (const auto& a : world.nodes)
        if (a.alive)
            g.add_node(a.id);
    for (std::size_t i = 0; i < world.nodes.size(); ++i) {
        const auto& a = world.nodes[i];
        if (!a.alive)
            continue;
        for (std::size_t j = i + 1; j < world.nodes.size(); ++j) {
            const auto& b = world.nodes[j];
            if (!b.alive)
                continue;
            const double dx = a.x - b.x;
            const double dy = a.y - b.y;
            if (dx * dx + dy * dy <= r2)
                g.add_edge(a.id, b.id);
        }
    }
    return g;
}

void drain_energy(World& world, const ClusterAssignment& roles, double dt, const EnergyModel& model)
{
    const auto counts = roles.member_counts();
    for (auto& n : world.nodes) {
        if (!n.alive)
            continue;
        double rate = model.e_ordinary;
        if (auto it = counts.find(n.id); it != counts.end())
            rate = model.e_ch_base + model.e_ch_per_member * it->second;
        n.battery = std::max(0.0, n.battery - rate * dt);
        if (n.battery <= 0.0)
            n.alive = false;
    }
}

double energy_variance(const World& world)
{
    double sum = 0.0;
    int n = 0;
    for (const auto& node : world.nodes)
        if (node.alive) {
            sum += node.battery;
            ++n;
        }
    if (n == 0)
        return 0.0;
    const double mean = sum / n;
    double acc = 0.0;
    for (const auto& node : world.nodes)
        if (node.alive)
            acc += (node.battery - mean) * (node.battery - mean);
    return acc / n;
}

} // namespace abpsim
