#pragma once

#include "abpsim/cluster_assignment.hpp"
#include "abpsim/graph.hpp"
#include "abpsim/protocols.hpp"
#include "abpsim/sim_config.hpp"
#include "abpsim/world.hpp"

#include <cstdint>
#include <ostream>
#include <span>
#include <string_view>
#include <vector>

namespace abpsim {

/// Totals over one bp_min-long window.
struct WindowSample {
    std::int64_t window = 0;
    std::uint64_t msgs = 0;
    std::uint64_t bits = 0;
    std::uint64_t ch_changes = 0;
    double energy_var = 0.0;

    friend bool operator==(const WindowSample&, const WindowSample&) = default;
};

struct MetricsRecord {
    std::uint64_t control_msgs = 0;
    std::uint64_t control_bits = 0;
    std::uint64_t ch_changes = 0;      // per-node reassignments
    std::uint64_t ch_resignations = 0; // nodes losing the CH role
    double energy_variance = 0.0;      // at run end, alive nodes
    int max_cluster_size = 0;          // largest member count seen at any tick
    std::vector<WindowSample> series;

    friend bool operator==(const MetricsRecord&, const MetricsRecord&) = default;
};

/// Per-node reassignments between two snapshots; acquiring a first CH is
/// formation, not a change. Only nodes present in `cur` are counted.
std::uint64_t count_ch_change(const ClusterAssignment& prev, const ClusterAssignment& cur);

struct TraceSinks {
    std::ostream* world = nullptr;   // tick,node_id,x,y,battery,role
    std::ostream* events = nullptr;  // cycle,node,event,old_ch,new_ch
    std::ostream* metrics = nullptr; // cycle,variant,msgs,bits,ch_changes,energy_var
};

/// Transmission log; counts every frame put on the air, independently of the
/// protocol-side counters.
class MessageBus {
public:
    void transmit(const BitString& frame) { ++frames_, bits_ += frame.size(); }
    std::uint64_t frames() const { return frames_; }
    std::uint64_t bits() const { return bits_; }

private:
    std::uint64_t frames_ = 0;
    std::uint64_t bits_ = 0;
};

/// One deterministic run. Per tick: motion and energy drain, adjacency
/// refresh, cycle-end processing in ascending node ID, then the Hellos due
/// at this tick in ascending node ID.
class Simulation {
public:
    Simulation(const SimConfig& config, std::uint64_t seed, TraceSinks traces = {});

    bool done() const { return finished_; }
    void step();
    MetricsRecord run();

    Tick now() const { return tick_; }
    const SimConfig& config() const { return cfg_; }
    const World& world() const { return world_; }
    const Graph& graph() const { return graph_; }
    const std::vector<AbpNode>& abp_nodes() const { return abp_; }
    const ClusterAssignment& assignment() const { return snapshot_; }
    const MetricsRecord& metrics() const { return metrics_; }
    const MessageBus& bus() const { return bus_; }
    /// Tick at which node v's current cycle ends.
    Tick cycle_end(NodeId v) const { return cycle_end_[v]; }

private:
    void start_cycle(NodeId v, Tick len);
    void abp_cycle_ends();
    void baseline_cycle_end();
    void send_hellos();
    void close_window();
    void finish();
    void trace_world();

    SimConfig cfg_;
    TraceSinks traces_;
    World world_;
    Rng sched_;
    Graph graph_;
    std::vector<AbpNode> abp_;
    ClusterAssignment snapshot_;
    std::vector<Tick> cycle_end_;
    std::vector<Tick> send_tick_;
    std::vector<std::vector<NodeId>> heard_; // baselines: senders heard this cycle
    std::int64_t baseline_cycle_ = 0;
    MessageBus bus_;
    MetricsRecord metrics_;
    WindowSample window_;
    Tick tick_ = 0;
    Tick total_ = 0;
    Tick tpc_ = 10;
    bool finished_ = false;
};

MetricsRecord run(const SimConfig& config, std::uint64_t seed, TraceSinks traces = {});

struct MetricsSummary {
    double control_msgs = 0.0;
    double control_bits = 0.0;
    double ch_changes = 0.0;
    double ch_resignations = 0.0;
    double energy_variance = 0.0;

    friend bool operator==(const MetricsSummary&, const MetricsSummary&) = default;
};

enum class Metric { CONTROL_MSGS, CONTROL_BITS, CH_CHANGES, CH_RESIGNATIONS, ENERGY_VARIANCE };

std::string_view to_string(Metric m);
double metric_value(const MetricsRecord& r, Metric m);
double metric_value(const MetricsSummary& s, Metric m);

struct BatchResult {
    std::vector<std::uint64_t> seeds;
    std::vector<MetricsRecord> per_seed;
    MetricsSummary mean;
};

/// Runs every seed (in parallel when threads != 1; 0 = hardware concurrency)
/// and averages. Throws std::invalid_argument on an empty seed list.
BatchResult run_batch(const SimConfig& config, std::span<const std::uint64_t> seeds, unsigned threads = 0);

enum class SweepAxis { NONE, NODE_COUNT, MEAN_SPEED };

std::string_view to_string(SweepAxis a);
SweepAxis parse_axis(std::string_view s);
void apply_axis(SimConfig& cfg, SweepAxis axis, double value);

struct SweepRow {
    ProtocolVariant variant;
    double axis_value;
    BatchResult batch;
};

/// Cross product of values x variants, rows ordered by variant then value.
std::vector<SweepRow> sweep(const SimConfig& base, SweepAxis axis, std::span<const double> values,
                            std::span<const ProtocolVariant> variants, std::span<const std::uint64_t> seeds,
                            unsigned threads = 0);

} // namespace abpsim
