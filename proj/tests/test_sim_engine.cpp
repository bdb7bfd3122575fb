#include "abpsim/sim_engine.hpp"

#include <doctest.h>

#include <algorithm>
#include <sstream>

using namespace abpsim;

namespace {

SimConfig short_config(ProtocolVariant v, double duration = 20.0)
{
    SimConfig c;
    c.variant = v;
    c.duration = duration;
    return c;
}

ClusterAssignment assignment(std::map<NodeId, NodeId> ch_of)
{
    ClusterAssignment a;
    a.ch_of = std::move(ch_of);
    return a;
}

} // namespace

TEST_CASE("count_ch_change")
{
    const auto a = assignment({{1, 1}, {2, 1}, {3, 1}, {4, 4}});
    CHECK(count_ch_change(a, a) == 0);
    CHECK(count_ch_change(a, assignment({{1, 1}, {2, 4}, {3, 1}, {4, 4}})) == 1);

    SUBCASE("re-election in a 6-member cluster")
    {
        std::map<NodeId, NodeId> before, after;
        before[0] = 0;
        for (NodeId v = 1; v <= 6; ++v)
            before[v] = 0;
        // head 0 is gone; every member repoints to 9
        after[9] = 9;
        for (NodeId v = 1; v <= 6; ++v)
            after[v] = 9;
        CHECK(count_ch_change(assignment(before), assignment(after)) == 6);
    }
    SUBCASE("formation is not a change")
    {
        const auto fresh = assignment({{1, kNoCluster}, {2, kNoCluster}});
        CHECK(count_ch_change(fresh, assignment({{1, 1}, {2, 1}})) == 0);
        CHECK(count_ch_change(assignment({{1, 1}, {2, 1}}), fresh) == 2);
    }
    SUBCASE("nodes absent from cur are ignored")
    {
        CHECK(count_ch_change(a, assignment({{1, 1}, {2, 1}})) == 0);
    }
}

TEST_CASE("run is deterministic and conserves its counters")
{
    for (auto v : kAllVariants) {
        CAPTURE(to_string(v));
        auto c = short_config(v);
        c.speed_max = 10;
        const auto r1 = run(c, 11);
        const auto r2 = run(c, 11);
        CHECK(r1 == r2);
        CHECK_FALSE(r1 == run(c, 12));

        Simulation sim(c, 11);
        const auto r3 = sim.run();
        CHECK(r3 == r1);
        CHECK(sim.bus().frames() == r1.control_msgs);
        CHECK(sim.bus().bits() == r1.control_bits);
        CHECK(r1.control_bits == r1.control_msgs * static_cast<std::uint64_t>(packet_size_bits(v)));

        std::uint64_t msgs = 0, bits = 0, changes = 0;
        for (const auto& w : r1.series) {
            msgs += w.msgs;
            bits += w.bits;
            changes += w.ch_changes;
        }
        CHECK(msgs == r1.control_msgs);
        CHECK(bits == r1.control_bits);
        CHECK(changes == r1.ch_changes);
        CHECK(r1.series.size() == 20);
    }
}

TEST_CASE("zero duration")
{
    auto c = short_config(ProtocolVariant::ABP, 0.0);
    const auto r = run(c, 1);
    CHECK(r.control_msgs == 0);
    CHECK(r.control_bits == 0);
    CHECK(r.ch_changes == 0);
    CHECK(r.series.empty());
}

TEST_CASE("invalid config fails before simulating")
{
    auto c = short_config(ProtocolVariant::ABP);
    c.T = 16;
    CHECK_THROWS_WITH_AS(run(c, 1), doctest::Contains("T"), ConfigError);
    c = short_config(ProtocolVariant::ABP);
    c.node_count = 255;
    CHECK_THROWS_AS(run(c, 1), ConfigError);
}

TEST_CASE("baselines send one Hello per node per period")
{
    for (auto v : {ProtocolVariant::LID, ProtocolVariant::HD, ProtocolVariant::VC}) {
        auto c = short_config(v, 30.0);
        const auto r = run(c, 2);
        CHECK(r.control_msgs == 30u * 50u);
        c.baseline_bp = 5.0;
        CHECK(run(c, 2).control_msgs == 6u * 50u);
    }
}

TEST_CASE("static ABP undercuts LID")
{
    auto c = short_config(ProtocolVariant::ABP, 60.0);
    c.speed_max = 0;
    const auto abp = run(c, 4);
    c.variant = ProtocolVariant::LID;
    const auto lid = run(c, 4);
    CHECK(abp.control_msgs < lid.control_msgs);
}

TEST_CASE("ABP snapshot respects the size bound at every tick")
{
    auto c = short_config(ProtocolVariant::ABP, 30.0);
    c.node_count = 100;
    c.T = 6;
    Simulation sim(c, 8);
    while (!sim.done()) {
        sim.step();
        for (auto [h, n] : sim.assignment().member_counts())
            REQUIRE(n <= 6);
    }
    CHECK(sim.metrics().max_cluster_size <= 6);
    CHECK(sim.metrics().max_cluster_size > 0);
}

TEST_CASE("traces")
{
    auto c = short_config(ProtocolVariant::ABP, 3.0);
    c.node_count = 5;
    std::ostringstream world, events, metrics;
    const auto r = run(c, 1, TraceSinks{&world, &events, &metrics});
    CHECK(world.str().rfind("tick,node_id,x,y,battery,role\n", 0) == 0);
    CHECK(events.str().rfind("cycle,node,event,old_ch,new_ch\n", 0) == 0);
    CHECK(metrics.str().rfind("cycle,variant,msgs,bits,ch_changes,energy_var\n", 0) == 0);
    const std::string m = metrics.str();
    CHECK(std::count(m.begin(), m.end(), '\n') == 1 + static_cast<long>(r.series.size()));
    CHECK(r == run(c, 1));
}

TEST_CASE("run_batch")
{
    auto c = short_config(ProtocolVariant::ABP, 10.0);
    CHECK_THROWS_AS(run_batch(c, std::vector<std::uint64_t>{}), std::invalid_argument);

    const std::vector<std::uint64_t> one{3};
    const auto single = run_batch(c, one);
    const auto direct = run(c, 3);
    CHECK(single.mean.control_msgs == direct.control_msgs);
    CHECK(single.mean.energy_variance == direct.energy_variance);

    const std::vector<std::uint64_t> repeated{3, 3, 3};
    CHECK(run_batch(c, repeated).mean == single.mean);

    const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    const auto par = run_batch(c, seeds, 4);
    const auto ser = run_batch(c, seeds, 1);
    CHECK(par.per_seed == ser.per_seed);
    CHECK(par.mean == ser.mean);
    for (auto m : {Metric::CONTROL_MSGS, Metric::CONTROL_BITS, Metric::CH_CHANGES, Metric::ENERGY_VARIANCE}) {
        double lo = 1e300, hi = -1e300, sum = 0;
        for (const auto& r : par.per_seed) {
            lo = std::min(lo, metric_value(r, m));
            hi = std::max(hi, metric_value(r, m));
            sum += metric_value(r, m);
        }
        CHECK(metric_value(par.mean, m) >= lo);
        CHECK(metric_value(par.mean, m) <= hi);
        CHECK(metric_value(par.mean, m) == doctest::Approx(sum / 5));
    }
}

TEST_CASE("sweep")
{
    auto c = short_config(ProtocolVariant::ABP, 5.0);
    c.node_count = 20;
    const std::vector<std::uint64_t> seeds{1};
    const std::vector<ProtocolVariant> abp_only{ProtocolVariant::ABP};
    const std::vector<ProtocolVariant> all(std::begin(kAllVariants), std::end(kAllVariants));

    const std::vector<double> one{5};
    CHECK(sweep(c, SweepAxis::MEAN_SPEED, one, abp_only, seeds).size() == 1);

    std::vector<double> speeds;
    for (int s = 0; s <= 15; ++s)
        speeds.push_back(s);
    const auto rows = sweep(c, SweepAxis::MEAN_SPEED, speeds, all, seeds);
    CHECK(rows.size() == 64);
    CHECK(rows.front().variant == ProtocolVariant::LID);
    CHECK(rows[1].axis_value == 1);
    CHECK(rows.back().variant == ProtocolVariant::ABP);
    CHECK(rows.back().axis_value == 15);

    const std::vector<double> counts{20, 40, 60, 80, 100, 120};
    const auto by_count = sweep(c, SweepAxis::NODE_COUNT, counts, abp_only, seeds);
    REQUIRE(by_count.size() == 6);
    CHECK(by_count[5].batch.per_seed[0].control_msgs > by_count[0].batch.per_seed[0].control_msgs);

    CHECK(parse_axis("speed") == SweepAxis::MEAN_SPEED);
    CHECK(parse_axis("node_count") == SweepAxis::NODE_COUNT);
    CHECK_THROWS_AS(parse_axis("colour"), ConfigError);
}
