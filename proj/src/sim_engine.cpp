#include "abpsim/sim_engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

namespace abpsim {

std::uint64_t count_ch_change(const ClusterAssignment& prev, const ClusterAssignment& cur)
{
    std::uint64_t n = 0;
    for (auto [v, h] : cur.ch_of) {
        const NodeId before = prev.head_of(v);
        if (before != kNoCluster && before != h)
            ++n;
    }
    return n;
}

namespace {

AbpConfig abp_config(const SimConfig& c)
{
    AbpConfig a;
    a.params = {c.c1, c.c2, c.p, c.T};
    a.quantizer = ChcQuantizer{c.chc_scale};
    a.bp_min = c.bp_min;
    a.bp_max = c.bp_max;
    a.mr_ref = c.mr_ref;
    a.history = c.history;
    a.ticks_per_code = c.ticks_per_bp_min();
    return a;
}

} // namespace

Simulation::Simulation(const SimConfig& config, std::uint64_t seed, TraceSinks traces)
    : cfg_(config), traces_(traces)
{
    cfg_.validate();
    world_ = init_world(cfg_, seed);
    // offsets come from their own stream so the world draws stay put
    sched_ = Rng(splitmix64(seed ^ 0x5c4ed1e5ull));
    tpc_ = cfg_.ticks_per_bp_min();
    total_ = cfg_.total_ticks();
    cycle_end_.assign(world_.nodes.size(), 0);
    send_tick_.assign(world_.nodes.size(), -1);
    heard_.assign(world_.nodes.size(), {});
    window_.window = 0;

    if (cfg_.variant == ProtocolVariant::ABP) {
        const auto ac = abp_config(cfg_);
        abp_.reserve(world_.nodes.size());
        for (const auto& n : world_.nodes)
            abp_.emplace_back(n.id, ac);
    }
    graph_ = adjacency(world_);
    for (auto v : graph_.nodes())
        snapshot_.ch_of[v] = kNoCluster;
    snapshot_ = classify_roles(std::move(snapshot_), graph_);

    if (traces_.world)
        *traces_.world << "tick,node_id,x,y,battery,role\n";
    if (traces_.events)
        *traces_.events << "cycle,node,event,old_ch,new_ch\n";
    if (traces_.metrics)
        *traces_.metrics << "cycle,variant,msgs,bits,ch_changes,energy_var\n";

    if (total_ == 0)
        finished_ = true;
}

void Simulation::start_cycle(NodeId v, Tick len)
{
    cycle_end_[v] = tick_ + len;
    send_tick_[v] = tick_ + static_cast<Tick>(sched_.below(static_cast<std::uint64_t>(len)));
}

void Simulation::step()
{
    if (finished_)
        return;
    const double dt = cfg_.tick;
    if (tick_ > 0) {
        step_motion(world_, dt);
        drain_energy(world_, snapshot_, dt, cfg_.energy);
    }
    graph_ = adjacency(world_);

    if (cfg_.variant == ProtocolVariant::ABP) {
        abp_cycle_ends();
    } else {
        const Tick len = cfg_.baseline_ticks();
        if (tick_ % len == 0) {
            if (tick_ > 0)
                baseline_cycle_end();
            for (const auto& n : world_.nodes)
                if (n.alive)
                    start_cycle(n.id, len);
        }
    }

    send_hellos();

    if (cfg_.variant == ProtocolVariant::ABP) {
        std::vector<bool> alive(world_.nodes.size());
        for (const auto& n : world_.nodes)
            alive[n.id] = n.alive;
        snapshot_ = abp_snapshot(abp_, graph_, alive);
        for (const auto& n : abp_)
            if (alive[n.id()] && n.is_ch())
                metrics_.max_cluster_size = std::max(metrics_.max_cluster_size, n.member_count());
    }
    for (auto [c, m] : snapshot_.member_counts())
        metrics_.max_cluster_size = std::max(metrics_.max_cluster_size, m);

    trace_world();
    ++tick_;
    if (tick_ % tpc_ == 0)
        close_window();
    if (tick_ >= total_)
        finish();
}

void Simulation::abp_cycle_ends()
{
    if (tick_ == 0) {
        for (const auto& n : world_.nodes)
            if (n.alive)
                start_cycle(n.id, tpc_ * abp_[n.id].cycle_code());
        return;
    }
    for (const auto& w : world_.nodes) {
        if (!w.alive || cycle_end_[w.id] != tick_)
            continue;
        auto& node = abp_[w.id];
        const NodeId before = node.ch_id();
        const bool was_ch = node.is_ch();
        const auto events = node.end_cycle(w.battery, tick_);
        if (before != kNoCluster && node.ch_id() != before) {
            ++metrics_.ch_changes;
            ++window_.ch_changes;
        }
        if (was_ch && !node.is_ch())
            ++metrics_.ch_resignations;
        if (traces_.events)
            for (const auto& e : events)
                *traces_.events << node.cycles_completed() << ',' << int(e.node) << ',' << to_string(e.kind)
                                << ',' << int(e.old_ch) << ',' << int(e.new_ch) << '\n';
        start_cycle(w.id, tpc_ * node.cycle_code());
    }
}

void Simulation::baseline_cycle_end()
{
    ++baseline_cycle_;
    Graph heard;
    for (const auto& n : world_.nodes)
        if (n.alive)
            heard.add_node(n.id);
    for (const auto& n : world_.nodes) {
        if (!n.alive)
            continue;
        for (auto u : heard_[n.id])
            if (world_.nodes[u].alive && u != n.id)
                heard.add_edge(n.id, u);
        heard_[n.id].clear();
    }

    ClusterAssignment next;
    switch (cfg_.variant) {
    case ProtocolVariant::LID: next = lid_assign(heard); break;
    case ProtocolVariant::HD: next = hd_assign(heard); break;
    default: {
        std::map<NodeId, double> batteries;
        for (const auto& n : world_.nodes)
            if (n.alive)
                batteries[n.id] = n.battery;
        next = vc_assign(heard, batteries, VcParams{cfg_.c1, cfg_.c2, ChcQuantizer{cfg_.chc_scale}});
    }
    }
    // roles on the live graph, membership from what was heard
    next = classify_roles(std::move(next), graph_);

    const auto changes = count_ch_change(snapshot_, next);
    metrics_.ch_changes += changes;
    window_.ch_changes += changes;
    for (auto [v, h] : next.ch_of) {
        const NodeId before = snapshot_.head_of(v);
        if (before == v && h != v)
            ++metrics_.ch_resignations;
        if (traces_.events && before != h) {
            std::string_view kind = h == v             ? "ch_gained"
                                    : before == v      ? "ch_lost"
                                    : before == kNoCluster ? "joined"
                                                       : "ch_changed";
            *traces_.events << baseline_cycle_ << ',' << int(v) << ',' << kind << ',' << int(before) << ','
                            << int(h) << '\n';
        }
    }
    snapshot_ = std::move(next);
}

void Simulation::send_hellos()
{
    const auto variant = cfg_.variant;
    const ChcQuantizer q{cfg_.chc_scale};
    for (const auto& w : world_.nodes) {
        if (!w.alive || send_tick_[w.id] != tick_)
            continue;
        HelloPacket p;
        if (variant == ProtocolVariant::ABP) {
            p = abp_[w.id].make_hello(w.battery, tick_);
        } else {
            p.mh_id = w.id;
            if (variant == ProtocolVariant::VC) {
                p.ch_id = snapshot_.head_of(w.id);
                const int d = graph_.contains(w.id) ? graph_.degree(w.id) : 0;
                p.chc_q = q.quantize(cfg_.c1 * d + cfg_.c2 * w.battery);
            }
        }
        const BitString frame = encode_hello(p, variant);
        bus_.transmit(frame);
        ++metrics_.control_msgs;
        metrics_.control_bits += frame.size();
        ++window_.msgs;
        window_.bits += frame.size();

        for (auto u : graph_.neighbors(w.id)) {
            if (variant == ProtocolVariant::ABP) {
                abp_[u].receive_bits(frame, tick_);
            } else {
                const auto got = decode_hello(frame, variant);
                heard_[u].push_back(got.mh_id);
            }
        }
    }
}

void Simulation::close_window()
{
    window_.energy_var = energy_variance(world_);
    if (traces_.metrics)
        *traces_.metrics << window_.window << ',' << to_string(cfg_.variant) << ',' << window_.msgs << ','
                         << window_.bits << ',' << window_.ch_changes << ',' << window_.energy_var << '\n';
    metrics_.series.push_back(window_);
    WindowSample next;
    next.window = window_.window + 1;
    window_ = next;
}

void Simulation::finish()
{
    // bring motion and energy up to the full duration
    step_motion(world_, cfg_.tick);
    drain_energy(world_, snapshot_, cfg_.tick, cfg_.energy);
    if (window_.msgs || window_.bits || window_.ch_changes)
        close_window();
    metrics_.energy_variance = energy_variance(world_);
    finished_ = true;
}

void Simulation::trace_world()
{
    if (!traces_.world)
        return;
    for (const auto& n : world_.nodes) {
        auto it = snapshot_.role_of.find(n.id);
        const std::string_view role = !n.alive ? "DEAD" : it == snapshot_.role_of.end() ? "UNCLUSTERED"
                                                                                        : to_string(it->second);
        *traces_.world << tick_ << ',' << int(n.id) << ',' << n.x << ',' << n.y << ',' << n.battery << ','
                       << role << '\n';
    }
}

MetricsRecord Simulation::run()
{
    while (!finished_)
        step();
    return metrics_;
}

MetricsRecord run(const SimConfig& config, std::uint64_t seed, TraceSinks traces)
{
    return Simulation(config, seed, traces).run();
}

// ---------------------------------------------------------------------------

std::string_view to_string(Metric m)
{
    switch (m) {
    case Metric::CONTROL_MSGS: return "control_msgs";
    case Metric::CONTROL_BITS: return "control_bits";
    case Metric::CH_CHANGES: return "ch_changes";
    case Metric::CH_RESIGNATIONS: return "ch_resignations";
    case Metric::ENERGY_VARIANCE: return "energy_variance";
    }
    return "?";
}

double metric_value(const MetricsRecord& r, Metric m)
{
    switch (m) {
    case Metric::CONTROL_MSGS: return static_cast<double>(r.control_msgs);
    case Metric::CONTROL_BITS: return static_cast<double>(r.control_bits);
    case Metric::CH_CHANGES: return static_cast<double>(r.ch_changes);
    case Metric::CH_RESIGNATIONS: return static_cast<double>(r.ch_resignations);
    case Metric::ENERGY_VARIANCE: return r.energy_variance;
    }
    return 0.0;
}

double metric_value(const MetricsSummary& s, Metric m)
{
    switch (m) {
    case Metric::CONTROL_MSGS: return s.control_msgs;
    case Metric::CONTROL_BITS: return s.control_bits;
    case Metric::CH_CHANGES: return s.ch_changes;
    case Metric::CH_RESIGNATIONS: return s.ch_resignations;
    case Metric::ENERGY_VARIANCE: return s.energy_variance;
    }
    return 0.0;
}

BatchResult run_batch(const SimConfig& config, std::span<const std::uint64_t> seeds, unsigned threads)
{
    if (seeds.empty())
        throw std::invalid_argument("run_batch: empty seed list");
    config.validate();

    BatchResult out;
    out.seeds.assign(seeds.begin(), seeds.end());
    out.per_seed.resize(seeds.size());

    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(seeds.size()));

    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    auto worker = [&] {
        for (std::size_t i = next++; i < seeds.size(); i = next++) {
            try {
                out.per_seed[i] = run(config, seeds[i]);
            } catch (...) {
                std::lock_guard lock(error_mu);
                if (!error)
                    error = std::current_exception();
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back(worker);
        for (auto& t : pool)
            t.join();
    }
    if (error)
        std::rethrow_exception(error);

    const double n = static_cast<double>(seeds.size());
    for (const auto& r : out.per_seed) {
        out.mean.control_msgs += r.control_msgs / n;
        out.mean.control_bits += r.control_bits / n;
        out.mean.ch_changes += r.ch_changes / n;
        out.mean.ch_resignations += r.ch_resignations / n;
        out.mean.energy_variance += r.energy_variance / n;
    }
    return out;
}

std::string_view to_string(SweepAxis a)
{
    switch (a) {
    case SweepAxis::NONE: return "none";
    case SweepAxis::NODE_COUNT: return "node_count";
    case SweepAxis::MEAN_SPEED: return "mean_speed";
    }
    return "?";
}

SweepAxis parse_axis(std::string_view s)
{
    if (s == "none")
        return SweepAxis::NONE;
    if (s == "node_count")
        return SweepAxis::NODE_COUNT;
    if (s == "mean_speed" || s == "speed")
        return SweepAxis::MEAN_SPEED;
    throw ConfigError("experiment.axis: unknown axis '" + std::string(s) + "'");
}

void apply_axis(SimConfig& cfg, SweepAxis axis, double value)
{
    switch (axis) {
    case SweepAxis::NONE: break;
    case SweepAxis::NODE_COUNT:
        if (value != std::floor(value) || value < 0 || value > kMaxNodeId)
            throw ConfigError("node_count: axis value must be an integer in [0, 254]");
        cfg.node_count = static_cast<int>(value);
        break;
    case SweepAxis::MEAN_SPEED: set_mean_speed(cfg, value); break;
    }
}

std::vector<SweepRow> sweep(const SimConfig& base, SweepAxis axis, std::span<const double> values,
                            std::span<const ProtocolVariant> variants, std::span<const std::uint64_t> seeds,
                            unsigned threads)
{
    std::vector<SweepRow> rows;
    std::vector<double> vals(values.begin(), values.end());
    if (axis == SweepAxis::NONE && vals.empty())
        vals.push_back(0.0);
    for (auto v : variants)
        for (double x : vals) {
            SimConfig cfg = base;
            cfg.variant = v;
            apply_axis(cfg, axis, x);
            cfg.validate();
            rows.push_back({v, x, run_batch(cfg, seeds, threads)});
        }
    return rows;
}

} // namespace abpsim
