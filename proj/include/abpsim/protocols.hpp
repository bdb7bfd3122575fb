#pragma once

#include "abpsim/cluster_assignment.hpp"
#include "abpsim/graph.hpp"
#include "abpsim/hello_codec.hpp"
#include "abpsim/mobility_bp.hpp"
#include "abpsim/rng.hpp"
#include "abpsim/types.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string_view>
#include <vector>

namespace abpsim {

struct ChcParams {
    double c1 = 0.5;
    double c2 = 0.5;
    int p = 2;  // handover penalty, applied to non-CHs only
    int T = 10; // max dominated members

    void validate() const;
};

/// c1*d + c2*b - (is_ch ? 0 : p)
double chc(int d, double b, bool is_ch, const ChcParams& params);

struct Candidate {
    NodeId id = 0;
    double chc = 0.0;
    int option = 0;

    friend bool operator==(const Candidate&, const Candidate&) = default;
};

/// Drops candidates advertising option >= T, except current_ch.
std::vector<Candidate> admission_filter(std::vector<Candidate> candidates, int T,
                                        NodeId current_ch = kNoCluster);

/// Highest CHC wins, ties by lowest ID. Empty input -> nullopt.
std::optional<NodeId> pick_head(std::span<const Candidate> candidates);

/// Fills role_of from ch_of: CH, GATEWAY (>= 2 CHs in open neighbourhood),
/// ORDINARY, or UNCLUSTERED.
ClusterAssignment classify_roles(ClusterAssignment assignment, const Graph& graph);

/// Strict priority order: true if a outranks b.
using Priority = std::function<bool(NodeId a, NodeId b)>;

/// v is CH iff no neighbouring CH outranks it (greedy by priority); every
/// other node joins its best-ranked neighbouring CH.
ClusterAssignment priority_assign(const Graph& graph, const Priority& better);

ClusterAssignment lid_assign(const Graph& graph);
ClusterAssignment hd_assign(const Graph& graph);

struct VcParams {
    double c1 = 0.5;
    double c2 = 0.5;
    std::optional<ChcQuantizer> quantizer; // compare 8-bit vote codes when set
};

/// vote = c1*d + c2*b (no penalty, no size cap).
ClusterAssignment vc_assign(const Graph& graph, const std::map<NodeId, double>& batteries,
                            const VcParams& params = {});

// ---------------------------------------------------------------------------
// ABP per-node state machine

struct AbpConfig {
    ChcParams params;
    ChcQuantizer quantizer{0.05};
    double bp_min = 1.0;
    double bp_max = 8.0;
    double mr_ref = 4.0;
    int history = 5;
    Tick ticks_per_code = 10; // ticks per bp_min
    bool adapt = true;

    std::uint8_t bp_max_code() const { return bp_to_code(bp_max, bp_min); }
};

struct ProtocolEvent {
    enum class Kind { CH_GAINED, CH_LOST, JOINED, CH_CHANGED, STALE };

    Kind kind;
    NodeId node;
    NodeId old_ch;
    NodeId new_ch;
};

std::string_view to_string(ProtocolEvent::Kind k);

class AbpNode {
public:
    struct Neighbor {
        HelloPacket last;
        Tick heard_at = 0;
        std::uint8_t prev_bp_code = 0; // 0 = unknown
        Tick affiliation_changed_at = 0; // first heard, or CH_ID changed
    };

    AbpNode(NodeId id, const AbpConfig& config);

    NodeId id() const { return id_; }
    NodeId ch_id() const { return ch_id_; }
    bool is_ch() const { return ch_id_ == id_; }
    int degree() const { return degree_; }
    /// Members this CH has admitted (empty for non-CHs).
    const std::set<NodeId>& admitted() const { return admitted_; }
    int member_count() const { return static_cast<int>(admitted_.size()); }
    /// Waiting for the CH to confirm a membership request.
    bool pending() const { return pending_; }
    int cycles_completed() const { return cycles_; }
    /// Length, in bp_min units, of the cycle currently running.
    std::uint8_t cycle_code() const { return cycle_code_; }
    /// BP announced in this cycle's Hello; length of the next cycle.
    std::uint8_t announced_code() const { return announced_code_; }
    const TopologyHistoryTable& tht() const { return tht_; }
    const std::map<NodeId, Neighbor>& neighbors() const { return table_; }
    std::uint64_t dropped_packets() const { return dropped_; }
    const std::set<NodeId>& refused_by() const { return refused_by_; }

    /// Neighbour IDs whose last Hello is still fresh at `now`.
    IdSet live_neighbors(Tick now) const;

    void receive(const HelloPacket& packet, Tick now);
    /// Raw-bit reception; malformed packets are counted and dropped.
    void receive_bits(const BitString& bits, Tick now);

    /// Builds this cycle's Hello. CHs run admission control here.
    HelloPacket make_hello(double battery, Tick now);

    /// Cycle-end processing: degree count, election (from the second cycle on),
    /// BP planning. Returns CH-change events.
    std::vector<ProtocolEvent> end_cycle(double battery, Tick now);

    /// Own CHC as it would be advertised now.
    std::uint8_t own_chc_code(double battery) const;

private:
    Tick lifetime(const Neighbor& n) const;
    void purge(Tick now);
    bool overflow_coin(NodeId ch, Tick now) const;

    NodeId id_;
    AbpConfig cfg_;
    NodeId ch_id_ = kNoCluster;
    int degree_ = 0;
    int cycles_ = 0;
    std::map<NodeId, Neighbor> table_;
    std::set<NodeId> admitted_;
    Tick last_end_ = -1;
    std::set<NodeId> refused_by_; // CHs that turned us away; skipped while still CH and in range
    bool pending_ = false;
    bool request_sent_ = false;
    Tick request_tick_ = 0;
    std::uint8_t cycle_code_ = 1;
    std::uint8_t announced_code_ = 1;
    TopologyHistoryTable tht_;
    BpController bp_;
    std::uint64_t dropped_ = 0;
};

/// BP field a CH puts in its Hello. Throws NotEntitledError for non-CHs.
std::uint8_t propagate_bp(const AbpNode& ch);

/// One call of the ABP cycle on an inbox: deliver, then end the cycle.
std::vector<ProtocolEvent> abp_cycle(AbpNode& node, std::span<const HelloPacket> inbox,
                                     double battery, Tick now);

/// ABP snapshot: membership counts only if the CH admitted the node.
ClusterAssignment abp_snapshot(std::span<const AbpNode> nodes, const Graph& graph,
                               const std::vector<bool>& alive);

/// Synchronous-round ABP on a fixed graph with fixed batteries: every node
/// sends one Hello per round at a random tick offset, then all end the cycle.
class StaticAbpNetwork {
public:
    StaticAbpNetwork(const Graph& graph, std::map<NodeId, double> batteries, AbpConfig config,
                     std::uint64_t seed = 1);

    void run_cycle();
    void run_cycles(int n)
    {
        for (int i = 0; i < n; ++i)
            run_cycle();
    }

    const std::map<NodeId, AbpNode>& nodes() const { return nodes_; }
    const AbpNode& node(NodeId v) const { return nodes_.at(v); }
    std::set<NodeId> heads() const;
    ClusterAssignment snapshot() const;
    const std::vector<ProtocolEvent>& events() const { return events_; }
    int cycles() const { return cycle_; }

private:
    Graph graph_;
    std::map<NodeId, double> batteries_;
    AbpConfig config_;
    std::map<NodeId, AbpNode> nodes_;
    Rng rng_;
    int cycle_ = 0;
    std::vector<ProtocolEvent> events_;
};

} // namespace abpsim
