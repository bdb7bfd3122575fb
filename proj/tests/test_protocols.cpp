#include "abpsim/cli.hpp"
#include "abpsim/protocols.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace abpsim;

namespace {

Graph complete(std::initializer_list<int> ids)
{
    Graph g;
    for (int a : ids)
        for (int b : ids)
            if (a != b)
                g.add_edge(static_cast<NodeId>(a), static_cast<NodeId>(b));
    return g;
}

ChcParams table1_params() { return ChcParams{0.4, 0.6, 1, 10}; }

AbpConfig static_config(ChcParams params)
{
    AbpConfig c;
    c.params = params;
    c.quantizer = ChcQuantizer{0.05};
    c.adapt = false;
    return c;
}

HelloPacket hello(int id, int ch, int chc_q, int option = 0, int bp = 1)
{
    HelloPacket p;
    p.mh_id = static_cast<NodeId>(id);
    p.ch_id = static_cast<NodeId>(ch);
    p.chc_q = static_cast<std::uint8_t>(chc_q);
    p.option = static_cast<std::uint8_t>(option);
    p.bp_code = static_cast<std::uint8_t>(bp);
    return p;
}

} // namespace

TEST_CASE("chc")
{
    const auto p = table1_params();
    CHECK(chc(6, 4, false, p) == doctest::Approx(3.8));
    CHECK(chc(5, 5, false, p) == doctest::Approx(4.0));
    CHECK(chc(0, 0, true, ChcParams{0.3, 0.7, 4, 10}) == 0.0);
    for (int d = 0; d < 20; ++d)
        CHECK(chc(d, 37.5, false, ChcParams{1, 0, 0, 10}) == d);

    SUBCASE("reference table column")
    {
        const double expected[] = {3.8, 3.6, 2.4, 2.6, 1, 3.4, 2.2, 1.6, 3.4, 4, 2.2, 2.2, 2.6, 4, 1.8};
        const auto rows = table1_fixture();
        REQUIRE(rows.size() == 15);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            CHECK(chc(rows[i].d, rows[i].b, false, p) == doctest::Approx(expected[i]));
            // p removed: exactly one higher
            CHECK(chc(rows[i].d, rows[i].b, false, ChcParams{0.4, 0.6, 0, 10}) ==
                  doctest::Approx(expected[i] + 1));
            CHECK(ChcQuantizer{0.05}.quantize(expected[i]) == std::lround(expected[i] / 0.05));
        }
    }
    SUBCASE("parameter validation")
    {
        CHECK_NOTHROW(p.validate());
        CHECK_THROWS_AS((ChcParams{0.5, 0.6, 1, 10}.validate()), ConfigError);
        CHECK_THROWS_AS((ChcParams{0.5, 0.5, -1, 10}.validate()), ConfigError);
        CHECK_THROWS_WITH_AS((ChcParams{0.5, 0.5, 1, 16}.validate()), doctest::Contains("T"), ConfigError);
        CHECK_THROWS_AS((ChcParams{0.5, 0.5, 1, 0}.validate()), ConfigError);
    }
}

TEST_CASE("admission filter")
{
    CHECK(admission_filter({}, 10).empty());
    const std::vector<Candidate> c{{1, 5, 10}, {2, 4, 9}, {3, 3, 15}};
    const auto kept = admission_filter(c, 10);
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].id == 2);
    const auto with_current = admission_filter(c, 10, 1);
    REQUIRE(with_current.size() == 2);
    CHECK(with_current[0].id == 1);
}

TEST_CASE("pick_head")
{
    CHECK_FALSE(pick_head(std::vector<Candidate>{}).has_value());
    const std::vector<Candidate> tie{{7, 4.0, 0}, {3, 4.0, 0}, {5, 3.9, 0}};
    CHECK(pick_head(tie) == 3);
    const std::vector<Candidate> clear{{7, 4.0, 0}, {3, 2.0, 0}, {9, 4.5, 0}};
    CHECK(pick_head(clear) == 9);
}

TEST_CASE("lid_assign")
{
    SUBCASE("complete graph")
    {
        const auto a = lid_assign(complete({3, 7, 9}));
        CHECK(a.heads() == std::set<NodeId>{3});
        CHECK(a.members(3) == std::vector<NodeId>{7, 9});
    }
    SUBCASE("path 1-2-3")
    {
        Graph g;
        g.add_edge(1, 2);
        g.add_edge(2, 3);
        const auto a = lid_assign(g);
        CHECK(a.heads() == std::set<NodeId>{1, 3});
        CHECK(a.head_of(2) == 1);
        CHECK(a.role_of.at(2) == Role::GATEWAY);
    }
    SUBCASE("single node")
    {
        Graph g;
        g.add_node(5);
        CHECK(lid_assign(g).heads() == std::set<NodeId>{5});
    }
}

TEST_CASE("hd_assign")
{
    SUBCASE("star")
    {
        Graph g;
        for (int leaf = 1; leaf <= 5; ++leaf)
            g.add_edge(9, static_cast<NodeId>(leaf));
        const auto a = hd_assign(g);
        CHECK(a.heads() == std::set<NodeId>{9});
        CHECK(a.members(9).size() == 5);
    }
    SUBCASE("complete graph tie")
    {
        CHECK(hd_assign(complete({4, 2, 8, 6})).heads() == std::set<NodeId>{2});
    }
}

TEST_CASE("lid and hd match the brute-force oracle")
{
    Rng rng(77);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 1 + static_cast<int>(rng.below(10));
        const Graph g = oracle::random_graph(n, rng.uniform(0.1, 0.7), rng);
        const auto lid = lid_assign(g);
        const auto lid_ref = oracle::brute_force_assign(g, [](NodeId a, NodeId b) { return a < b; });
        REQUIRE(lid.ch_of == lid_ref.ch_of);
        const auto hd = hd_assign(g);
        const auto hd_ref = oracle::brute_force_assign(g, [&](NodeId a, NodeId b) {
            return g.degree(a) != g.degree(b) ? g.degree(a) > g.degree(b) : a < b;
        });
        REQUIRE(hd.ch_of == hd_ref.ch_of);
    }
}

TEST_CASE("vc_assign")
{
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const Graph g = oracle::random_graph(12, 0.3, rng);
        std::map<NodeId, double> flat;
        for (auto v : g.nodes())
            flat[v] = 42.0;
        CHECK(vc_assign(g, flat).heads() == hd_assign(g).heads());
    }
    Graph single;
    single.add_node(4);
    CHECK(vc_assign(single, {{4, 10.0}}).heads() == std::set<NodeId>{4});

    // battery can outweigh degree
    Graph g;
    g.add_edge(1, 2);
    g.add_edge(1, 3);
    const auto a = vc_assign(g, {{1, 1.0}, {2, 10.0}, {3, 1.0}});
    CHECK(a.heads() == std::set<NodeId>{2, 3});
}

TEST_CASE("classify_roles")
{
    Graph g;
    g.add_edge(1, 4);
    g.add_edge(1, 9);
    g.add_edge(2, 4);
    g.add_edge(4, 9);
    ClusterAssignment a;
    a.ch_of = {{1, 4}, {2, 4}, {4, 4}, {9, 9}, {7, kNoCluster}};
    g.add_node(7);
    const auto r = classify_roles(a, g);
    CHECK(r.role_of.at(1) == Role::GATEWAY);
    CHECK(r.role_of.at(2) == Role::ORDINARY);
    CHECK(r.role_of.at(4) == Role::CH);
    CHECK(r.role_of.at(9) == Role::CH);
    CHECK(r.role_of.at(7) == Role::UNCLUSTERED);
}

TEST_CASE("abp node election")
{
    const auto cfg = static_config(ChcParams{0.5, 0.5, 1, 10});

    SUBCASE("isolated node self-elects after the second cycle")
    {
        AbpNode n(3, cfg);
        CHECK(n.ch_id() == kNoCluster);
        CHECK(abp_cycle(n, {}, 10.0, 10).empty());
        CHECK(n.ch_id() == kNoCluster);
        const auto ev = abp_cycle(n, {}, 10.0, 20);
        CHECK(n.is_ch());
        REQUIRE(ev.size() == 1);
        CHECK(ev[0].kind == ProtocolEvent::Kind::CH_GAINED);
    }
    SUBCASE("equal CHC goes to the lower ID")
    {
        AbpNode a(4, cfg), b(6, cfg);
        for (Tick t : {10, 20}) {
            const auto ha = a.make_hello(10.0, t - 5);
            const auto hb = b.make_hello(10.0, t - 4);
            CHECK(ha.chc_q == hb.chc_q);
            a.receive(hb, t - 4);
            b.receive(ha, t - 5);
            a.end_cycle(10.0, t);
            b.end_cycle(10.0, t);
        }
        CHECK(a.is_ch());
        CHECK(b.ch_id() == 4);
        CHECK(b.pending());
    }
    SUBCASE("full cluster is not joinable")
    {
        AbpNode n(20, cfg);
        const HelloPacket inbox[] = {hello(1, 1, 200, 10), hello(2, 2, 100, 3)};
        abp_cycle(n, inbox, 1.0, 10);
        abp_cycle(n, inbox, 1.0, 20);
        CHECK(n.ch_id() == 2);
    }
    SUBCASE("every candidate full: self-elect")
    {
        AbpNode n(20, cfg);
        const HelloPacket inbox[] = {hello(1, 1, 200, 10), hello(2, 2, 100, 15)};
        abp_cycle(n, inbox, 1.0, 10);
        abp_cycle(n, inbox, 1.0, 20);
        CHECK(n.is_ch());
    }
    SUBCASE("members of other clusters are not electable")
    {
        AbpNode n(20, cfg);
        const HelloPacket inbox[] = {hello(1, 5, 200), hello(5, 5, 50)};
        abp_cycle(n, inbox, 1.0, 10);
        abp_cycle(n, inbox, 1.0, 20);
        CHECK(n.ch_id() == 5);
    }
    SUBCASE("tie determinism")
    {
        AbpNode x(9, cfg), y(9, cfg);
        const HelloPacket inbox[] = {hello(1, 255, 40), hello(2, 255, 41), hello(3, 255, 41)};
        for (Tick t : {10, 20, 30}) {
            const auto ex = abp_cycle(x, inbox, 3.0, t);
            const auto ey = abp_cycle(y, inbox, 3.0, t);
            CHECK(ex.size() == ey.size());
            CHECK(x.ch_id() == y.ch_id());
        }
        CHECK(x.ch_id() == 2);
    }
}

TEST_CASE("CH admission and the Option field")
{
    auto cfg = static_config(ChcParams{0.5, 0.5, 1, 2});
    AbpNode ch(0, cfg);
    abp_cycle(ch, {}, 100.0, 10);
    abp_cycle(ch, {}, 100.0, 20);
    REQUIRE(ch.is_ch());
    const HelloPacket joiners[] = {hello(3, 0, 1), hello(1, 0, 1), hello(2, 0, 1)};
    for (const auto& p : joiners)
        ch.receive(p, 22);
    const auto h = ch.make_hello(100.0, 25);
    CHECK(ch.admitted() == std::set<NodeId>{1, 2});
    CHECK(h.option == kOptionOverflow);
    CHECK(ch.member_count() == 2);
}

TEST_CASE("propagate_bp")
{
    AbpNode n(1, static_config(table1_params()));
    CHECK_THROWS_AS(propagate_bp(n), NotEntitledError);
    abp_cycle(n, {}, 5.0, 10);
    abp_cycle(n, {}, 5.0, 20);
    REQUIRE(n.is_ch());
    CHECK(propagate_bp(n) == n.announced_code());
}

TEST_CASE("malformed packets are dropped and counted")
{
    AbpNode n(1, static_config(table1_params()));
    auto bits = encode_hello(hello(2, 2, 80), ProtocolVariant::ABP);
    n.receive_bits(bits, 1);
    CHECK(n.neighbors().size() == 1);
    BitString short_frame = BitString::from_string(bits.to_string().substr(0, 35));
    n.receive_bits(short_frame, 2);
    // MH_ID 255 is never a valid sender
    n.receive_bits(BitString::from_string("11111111" + bits.to_string().substr(8)), 3);
    CHECK(n.dropped_packets() == 2);
    CHECK(n.neighbors().size() == 1);
}

TEST_CASE("reference table cluster formation")
{
    const Graph g = table1_graph();
    for (const auto& row : table1_fixture())
        CHECK(g.degree(static_cast<NodeId>(row.id)) == row.d);
    std::map<NodeId, double> batteries;
    for (const auto& row : table1_fixture())
        batteries[static_cast<NodeId>(row.id)] = row.b;

    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        StaticAbpNetwork net(g, batteries, static_config(table1_params()), seed);
        net.run_cycles(2);
        CHECK(net.heads() == std::set<NodeId>{1, 10, 14});

        // heads after formation are exactly the closed-neighbourhood CHC maxima
        std::set<NodeId> local_max;
        for (auto v : g.nodes()) {
            auto val = [&](NodeId u) { return chc(g.degree(u), batteries[u], false, table1_params()); };
            bool best = true;
            for (auto u : g.neighbors(v))
                if (val(u) > val(v) || (val(u) == val(v) && u < v))
                    best = false;
            if (best)
                local_max.insert(v);
        }
        CHECK(net.heads() == local_max);

        net.run_cycles(10);
        CHECK(net.heads() == std::set<NodeId>{1, 10, 14});
        const auto snap = net.snapshot();
        for (auto v : g.nodes())
            CHECK(snap.head_of(v) != kNoCluster);
    }
}

TEST_CASE("ABP with HD weights reproduces hd_assign")
{
    Rng rng(3);
    for (int trial = 0; trial < 30; ++trial) {
        const Graph g = oracle::random_graph(14, 0.25, rng);
        std::map<NodeId, double> batteries;
        for (auto v : g.nodes())
            batteries[v] = rng.uniform(20, 100);
        auto cfg = static_config(ChcParams{1, 0, 0, 15});
        cfg.quantizer = ChcQuantizer{1.0};
        StaticAbpNetwork net(g, batteries, cfg, static_cast<std::uint64_t>(trial));
        net.run_cycles(30);
        CHECK(net.heads() == hd_assign(g).heads());
    }
}
