#include "abpsim/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace abpsim {

void ChcParams::validate() const
{
    if (c1 < 0.0 || c1 > 1.0)
        throw ConfigError("c1: must be in [0, 1]");
    if (c2 < 0.0 || c2 > 1.0)
        throw ConfigError("c2: must be in [0, 1]");
    if (std::abs(c1 + c2 - 1.0) > 1e-9)
        throw ConfigError("c2: c1 + c2 must equal 1");
    if (p < 0)
        throw ConfigError("p: must be non-negative");
    if (T < 1 || T > kOptionMax)
        throw ConfigError("T: must be in [1, 15]");
}

double chc(int d, double b, bool is_ch, const ChcParams& params)
{
    return params.c1 * d + params.c2 * b - (is_ch ? 0.0 : static_cast<double>(params.p));
}

std::vector<Candidate> admission_filter(std::vector<Candidate> candidates, int T, NodeId current_ch)
{
    std::erase_if(candidates,
                  [&](const Candidate& c) { return c.option >= T && c.id != current_ch; });
    return candidates;
}

std::optional<NodeId> pick_head(std::span<const Candidate> candidates)
{
    if (candidates.empty())
        return std::nullopt;
    const Candidate* best = &candidates.front();
    for (const auto& c : candidates)
        if (c.chc > best->chc || (c.chc == best->chc && c.id < best->id))
            best = &c;
    return best->id;
}

ClusterAssignment classify_roles(ClusterAssignment a, const Graph& graph)
{
    a.role_of.clear();
    for (auto [v, h] : a.ch_of) {
        Role r;
        if (h == kNoCluster)
            r = Role::UNCLUSTERED;
        else if (h == v)
            r = Role::CH;
        else {
            int heads = 0;
            if (graph.contains(v))
                for (auto u : graph.neighbors(v))
                    if (a.is_head(u))
                        ++heads;
            r = heads >= 2 ? Role::GATEWAY : Role::ORDINARY;
        }
        a.role_of[v] = r;
    }
    return a;
}

ClusterAssignment priority_assign(const Graph& graph, const Priority& better)
{
    std::vector<NodeId> order = graph.nodes();
    std::stable_sort(order.begin(), order.end(), better);

    ClusterAssignment a;
    std::vector<bool> head(kMaxNodes, false);
    for (auto v : order) {
        bool dominated = false;
        for (auto u : graph.neighbors(v))
            if (head[u]) {
                dominated = true;
                break;
            }
        head[v] = !dominated;
    }
    for (auto v : graph.nodes()) {
        if (head[v]) {
            a.ch_of[v] = v;
            continue;
        }
        std::optional<NodeId> best;
        for (auto u : graph.neighbors(v))
            if (head[u] && (!best || better(u, *best)))
                best = u;
        a.ch_of[v] = best.value_or(kNoCluster);
    }
    return classify_roles(std::move(a), graph);
}

ClusterAssignment lid_assign(const Graph& graph)
{
    return priority_assign(graph, [](NodeId a, NodeId b) { return a < b; });
}

ClusterAssignment hd_assign(const Graph& graph)
{
    return priority_assign(graph, [&](NodeId a, NodeId b) {
        const int da = graph.degree(a);
        const int db = graph.degree(b);
        return da != db ? da > db : a < b;
    });
}

ClusterAssignment vc_assign(const Graph& graph, const std::map<NodeId, double>& batteries,
                            const VcParams& params)
{
    std::vector<double> vote(kMaxNodes, 0.0);
    for (auto v : graph.nodes()) {
        auto it = batteries.find(v);
        const double b = it == batteries.end() ? 0.0 : it->second;
        const double raw = params.c1 * graph.degree(v) + params.c2 * b;
        vote[v] = params.quantizer ? params.quantizer->quantize(raw) : raw;
    }
    return priority_assign(graph, [&](NodeId a, NodeId b) {
        return vote[a] != vote[b] ? vote[a] > vote[b] : a < b;
    });
}

// ---------------------------------------------------------------------------

std::string_view to_string(ProtocolEvent::Kind k)
{
    switch (k) {
    case ProtocolEvent::Kind::CH_GAINED: return "ch_gained";
    case ProtocolEvent::Kind::CH_LOST: return "ch_lost";
    case ProtocolEvent::Kind::JOINED: return "joined";
    case ProtocolEvent::Kind::CH_CHANGED: return "ch_changed";
    case ProtocolEvent::Kind::STALE: return "stale";
    }
    return "?";
}

AbpNode::AbpNode(NodeId id, const AbpConfig& config)
    : id_(id), cfg_(config), tht_(static_cast<std::size_t>(std::max(2, config.history))),
      bp_(BpController::make(config.bp_min, config.bp_max, config.mr_ref))
{
}

Tick AbpNode::lifetime(const Neighbor& n) const
{
    const int a = std::max<int>(1, n.last.bp_code);
    const int prev = n.prev_bp_code ? n.prev_bp_code : cfg_.bp_max_code();
    return cfg_.ticks_per_code * (a + std::max(a, prev));
}

void AbpNode::purge(Tick now)
{
    std::erase_if(table_, [&](const auto& kv) { return now - kv.second.heard_at >= lifetime(kv.second); });
}

IdSet AbpNode::live_neighbors(Tick now) const
{
    IdSet out;
    for (const auto& [u, n] : table_)
        if (now - n.heard_at < lifetime(n))
            out.insert(u);
    return out;
}

void AbpNode::receive(const HelloPacket& packet, Tick now)
{
    if (packet.mh_id == id_)
        return;
    auto [it, fresh] = table_.try_emplace(packet.mh_id);
    if (fresh || it->second.last.ch_id != packet.ch_id)
        it->second.affiliation_changed_at = now;
    it->second.prev_bp_code = fresh ? 0 : it->second.last.bp_code;
    it->second.last = packet;
    it->second.heard_at = now;
}

void AbpNode::receive_bits(const BitString& bits, Tick now)
{
    try {
        receive(decode_hello(bits, ProtocolVariant::ABP), now);
    } catch (const CodecError&) {
        ++dropped_;
    }
}

std::uint8_t AbpNode::own_chc_code(double battery) const
{
    return cfg_.quantizer.quantize(chc(degree_, battery, is_ch(), cfg_.params));
}

HelloPacket AbpNode::make_hello(double battery, Tick now)
{
    purge(now);
    std::uint8_t option = 0;
    if (is_ch()) {
        std::set<NodeId> namers;
        for (const auto& [u, n] : table_)
            if (n.last.ch_id == id_)
                namers.insert(u);
        std::erase_if(admitted_, [&](NodeId u) { return !namers.count(u); });
        bool refused = false;
        for (auto u : namers) { // ascending ID
            if (admitted_.count(u))
                continue;
            if (static_cast<int>(admitted_.size()) < cfg_.params.T)
                admitted_.insert(u);
            else
                refused = true;
        }
        option = refused ? kOptionOverflow : static_cast<std::uint8_t>(admitted_.size());
    } else {
        admitted_.clear();
    }

    HelloPacket p;
    p.mh_id = id_;
    p.ch_id = ch_id_;
    p.chc_q = own_chc_code(battery);
    p.option = option;
    p.bp_code = announced_code_;

    if (!is_ch() && ch_id_ != kNoCluster) {
        // follow the CH's latest announcement without waiting a cycle
        auto it = table_.find(ch_id_);
        if (it != table_.end() && it->second.last.ch_id == ch_id_)
            announced_code_ = it->second.last.bp_code;
        p.bp_code = announced_code_;
    }

    if (pending_ && !request_sent_) {
        request_sent_ = true;
        request_tick_ = now;
    }
    return p;
}

bool AbpNode::overflow_coin(NodeId ch, Tick now) const
{
    const auto h = splitmix64((static_cast<std::uint64_t>(id_) << 40) ^
                              (static_cast<std::uint64_t>(ch) << 32) ^ static_cast<std::uint64_t>(now));
    return (h & 1u) != 0;
}

std::vector<ProtocolEvent> AbpNode::end_cycle(double battery, Tick now)
{
    std::vector<ProtocolEvent> events;
    purge(now);
    ++cycles_;
    degree_ = static_cast<int>(table_.size());

    std::erase_if(refused_by_, [&](NodeId c) {
        auto it = table_.find(c);
        return it == table_.end() || it->second.last.ch_id != c;
    });

    const NodeId old_ch = ch_id_;
    const bool was_ch = is_ch();
    bool stale = false;
    std::optional<NodeId> refused_by;

    if (!was_ch && ch_id_ != kNoCluster) {
        auto it = table_.find(ch_id_);
        if (it == table_.end()) {
            stale = true;
        } else if (pending_ && request_sent_ && it->second.heard_at > request_tick_ &&
                   it->second.last.ch_id == ch_id_) {
            const bool overflow = it->second.last.option == kOptionOverflow && cfg_.params.T < kOptionMax;
            if (!overflow)
                pending_ = false;
            else if (overflow_coin(ch_id_, now)) {
                refused_by = ch_id_;
                refused_by_.insert(ch_id_);
            }
        }
    }
    if (stale) {
        events.push_back({ProtocolEvent::Kind::STALE, id_, ch_id_, kNoCluster});
        ch_id_ = kNoCluster;
        pending_ = false;
    }

    if (cycles_ >= 2) {
        std::vector<Candidate> candidates;
        candidates.push_back({id_, static_cast<double>(own_chc_code(battery)), 0});
        for (const auto& [u, n] : table_) {
            const bool head = n.last.ch_id == u;
            if (!head && n.last.ch_id != kNoCluster)
                continue; // member of some cluster: not electable
            if (refused_by_.count(u))
                continue;
            candidates.push_back({u, static_cast<double>(n.last.chc_q), head ? n.last.option : 0});
        }
        candidates = admission_filter(std::move(candidates), cfg_.params.T, ch_id_);
        const NodeId winner = pick_head(candidates).value_or(id_);
        if (winner != ch_id_) {
            ch_id_ = winner;
            pending_ = winner != id_;
            request_sent_ = false;
        }
    } else if (refused_by) {
        ch_id_ = kNoCluster;
        pending_ = false;
    }

    const bool now_ch = is_ch();
    if (was_ch != now_ch) {
        tht_.clear();
        if (!now_ch)
            admitted_.clear();
    }

    if (ch_id_ != old_ch) {
        using K = ProtocolEvent::Kind;
        K kind;
        if (now_ch)
            kind = K::CH_GAINED;
        else if (was_ch)
            kind = K::CH_LOST;
        else if (old_ch == kNoCluster || stale)
            kind = K::JOINED;
        else
            kind = K::CH_CHANGED;
        if (!(stale && ch_id_ == kNoCluster))
            events.push_back({kind, id_, stale ? kNoCluster : old_ch, ch_id_});
    }

    // BP for the cycle after next.
    std::uint8_t planned = 1;
    if (now_ch) {
        tht_.record(cycles_, live_neighbors(now));
        planned = stale ? 1 : announced_code_;
        if (cfg_.adapt) {
            if (auto mr = cluster_mean_mr(tht_, true)) {
                double bp = adapt_bp(*mr, bp_);
                // lengthen only once the neighbourhood's clustering has stopped moving
                const bool settled = std::none_of(table_.begin(), table_.end(), [&](const auto& kv) {
                    return kv.second.affiliation_changed_at > last_end_;
                });
                if (!settled)
                    bp = std::min(bp, code_to_bp(planned, cfg_.bp_min));
                bp_.request_change(true, bp);
                planned = bp_to_code(bp_.bp_current, cfg_.bp_min);
            }
        }
    } else if (ch_id_ != kNoCluster) {
        auto it = table_.find(ch_id_);
        if (it != table_.end() && it->second.last.ch_id == ch_id_)
            planned = it->second.last.bp_code;
    }
    bp_.bp_current = code_to_bp(planned, cfg_.bp_min);
    last_end_ = now;

    cycle_code_ = announced_code_;
    announced_code_ = planned;
    if (now_ch && !was_ch) {
        // a fresh cluster starts at bp_min; Hellos earlier than announced are harmless
        cycle_code_ = 1;
        announced_code_ = 1;
    }
    return events;
}

std::uint8_t propagate_bp(const AbpNode& ch)
{
    if (!ch.is_ch())
        throw NotEntitledError("only cluster heads originate the cluster BP");
    return ch.announced_code();
}

std::vector<ProtocolEvent> abp_cycle(AbpNode& node, std::span<const HelloPacket> inbox, double battery,
                                     Tick now)
{
    for (const auto& p : inbox)
        node.receive(p, now);
    return node.end_cycle(battery, now);
}

ClusterAssignment abp_snapshot(std::span<const AbpNode> nodes, const Graph& graph,
                               const std::vector<bool>& alive)
{
    ClusterAssignment a;
    for (const auto& n : nodes) {
        if (!alive[n.id()])
            continue;
        NodeId h = kNoCluster;
        if (n.is_ch())
            h = n.id();
        else if (n.ch_id() != kNoCluster && n.ch_id() < nodes.size()) {
            const auto& c = nodes[n.ch_id()];
            if (alive[c.id()] && c.is_ch() && c.admitted().count(n.id()))
                h = c.id();
        }
        a.ch_of[n.id()] = h;
    }
    return classify_roles(std::move(a), graph);
}

// ---------------------------------------------------------------------------

StaticAbpNetwork::StaticAbpNetwork(const Graph& graph, std::map<NodeId, double> batteries,
                                   AbpConfig config, std::uint64_t seed)
    : graph_(graph), batteries_(std::move(batteries)), config_(config), rng_(splitmix64(seed))
{
    for (auto v : graph_.nodes())
        nodes_.emplace(v, AbpNode(v, config_));
}

void StaticAbpNetwork::run_cycle()
{
    const Tick len = config_.ticks_per_code;
    const Tick start = static_cast<Tick>(cycle_) * len;

    std::vector<std::pair<Tick, NodeId>> sends;
    for (auto v : graph_.nodes())
        sends.emplace_back(start + static_cast<Tick>(rng_.below(static_cast<std::uint64_t>(len))), v);
    std::sort(sends.begin(), sends.end());

    for (auto [t, v] : sends) {
        const auto hello = nodes_.at(v).make_hello(batteries_[v], t);
        const auto bits = encode_hello(hello, ProtocolVariant::ABP);
        for (auto u : graph_.neighbors(v))
            nodes_.at(u).receive_bits(bits, t);
    }
    ++cycle_;
    const Tick end = start + len;
    for (auto& [v, node] : nodes_) {
        auto ev = node.end_cycle(batteries_[v], end);
        events_.insert(events_.end(), ev.begin(), ev.end());
    }
}

std::set<NodeId> StaticAbpNetwork::heads() const
{
    std::set<NodeId> out;
    for (const auto& [v, n] : nodes_)
        if (n.is_ch())
            out.insert(v);
    return out;
}

ClusterAssignment StaticAbpNetwork::snapshot() const
{
    ClusterAssignment a;
    for (const auto& [v, n] : nodes_) {
        NodeId h = kNoCluster;
        if (n.is_ch())
            h = v;
        else if (auto it = nodes_.find(n.ch_id()); it != nodes_.end() && it->second.is_ch() &&
                                                    it->second.admitted().count(v))
            h = n.ch_id();
        a.ch_of[v] = h;
    }
    return classify_roles(std::move(a), graph_);
}

} // namespace abpsim
