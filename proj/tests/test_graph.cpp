#include <doctest.h>

#include "hcm/graph.hpp"

#include "golden_common.hpp"

#include <random>

using namespace hcm;

namespace {

// Seven-variable example exercising subunit-only ancestor paths.
HierGraph chain_example() {
    HierGraph g;
    g.add_var("X1", Level::Subunit, true);
    g.add_var("X2", Level::Subunit, true);
    g.add_var("X3", Level::Subunit, true);
    g.add_var("X4", Level::Subunit, true);
    g.add_var("X5", Level::Subunit, true);
    g.add_var("X6", Level::Unit, true);
    g.add_var("X7", Level::Unit, true);
    g.add_edge("X1", "X4");
    g.add_edge("X2", "X6");
    g.add_edge("X6", "X3");
    g.add_edge("X3", "X4");
    g.add_edge("X3", "X7");
    g.add_edge("X4", "X5");
    g.add_edge("X5", "X7");
    return g;
}

} // namespace

TEST_CASE("direct subunit ancestors stop at unit variables") {
    HierGraph g = chain_example();
    auto da7 = direct_subunit_ancestors(g, g.require("X7"));
    CHECK(da7 == std::set<int>{g.require("X1"), g.require("X3"),
                               g.require("X4"), g.require("X5")});
    auto da6 = direct_subunit_ancestors(g, g.require("X6"));
    CHECK(da6 == std::set<int>{g.require("X2")});
}

TEST_CASE("direct unit descendants mirror the ancestor relation") {
    HierGraph g = chain_example();
    auto du3 = direct_unit_descendants(g, g.require("X3"));
    CHECK(du3 == std::set<int>{g.require("X7")});
    auto du2 = direct_unit_descendants(g, g.require("X2"));
    CHECK(du2 == std::set<int>{g.require("X6")});
    // X2 reaches X7 only through the unit variable X6.
    CHECK(!du2.count(g.require("X7")));
}

TEST_CASE("marginalization legality table") {
    for (const auto& c : run_legality_table()) {
        INFO(c.name, " ", c.detail);
        CHECK(c.ok);
    }
}

TEST_CASE("topological order breaks ties by declaration") {
    HierGraph g;
    g.add_var("B", Level::Unit, true);
    g.add_var("A", Level::Unit, true);
    g.add_var("C", Level::Unit, true);
    g.add_edge("B", "C");
    auto order = g.topo_order();
    CHECK(order == std::vector<int>{0, 1, 2});
}

TEST_CASE("cycles are rejected") {
    HierGraph g;
    g.add_var("A", Level::Unit, true);
    g.add_var("B", Level::Unit, true);
    g.add_edge("A", "B");
    g.add_edge("B", "A");
    CHECK(!g.is_acyclic());
    CHECK_THROWS_WITH_AS(g.topo_order(), doctest::Contains("CycleDetected"),
                         Error);
    CHECK(!validate_hcm(g).ok());
}

TEST_CASE("marginalizing an endogenous variable preserves ancestry") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        int n = 3 + int(rng() % 10);
        HierGraph g;
        for (int i = 0; i < n; ++i) {
            Level lv = rng() % 2 ? Level::Unit : Level::Subunit;
            g.add_var("V" + std::to_string(i), lv, rng() % 4 != 0);
        }
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b)
                if (rng() % 100 < 30 &&
                    !(g.var(a).level == Level::Unit &&
                      g.var(b).level == Level::Subunit))
                    g.add_edge(a, b);
        for (int v = 0; v < n; ++v) {
            if (!can_marginalize(g, v).ok) continue;
            if (g.children(v).empty() && g.parents(v).empty()) continue;
            HierGraph h = marginalize_endogenous(g, v);
            // Ancestry among the remaining variables is unchanged.
            for (int a = 0; a < n; ++a) {
                if (a == v) continue;
                auto ha = h.find(g.var(a).name);
                REQUIRE(ha.has_value());
                auto anc_g = g.ancestors(a);
                auto anc_h = h.ancestors(*ha);
                for (int b = 0; b < n; ++b) {
                    if (b == v || b == a) continue;
                    bool in_g = anc_g.count(b) > 0;
                    bool in_h =
                        anc_h.count(*h.find(g.var(b).name)) > 0;
                    INFO("trial ", trial, " v=", v, " a=", a, " b=", b);
                    CHECK(in_g == in_h);
                }
            }
            break;
        }
    }
}

TEST_CASE("latent projection of a fully observed graph keeps its edges") {
    std::mt19937 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        int n = 2 + int(rng() % 7);
        FlatGraph g;
        for (int i = 0; i < n; ++i)
            g.add_var("V" + std::to_string(i), true);
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b)
                if (rng() % 100 < 30) g.add_edge(a, b);
        Admg p = latent_projection(g);
        CHECK(p.bidirected.empty());
        CHECK(p.directed == g.edges());
    }
}

TEST_CASE("latent projection produces bidirected edges for hidden forks") {
    FlatGraph g;
    int u = g.add_var("U", false);
    int a = g.add_var("A", true);
    int y = g.add_var("Y", true);
    g.add_edge(u, a);
    g.add_edge(u, y);
    g.add_edge(a, y);
    Admg p = latent_projection(g);
    CHECK(p.size() == 2);
    CHECK(p.bidirected.count({p.require("A"), p.require("Y")}) == 1);
    CHECK(bidirected_path_exists(p, p.require("A"), {p.require("Y")}));
}

TEST_CASE("districts split on bidirected components") {
    Admg g;
    g.names = {"A", "B", "C"};
    g.deterministic = {false, false, false};
    g.bidirected.insert({0, 1});
    std::set<int> all{0, 1, 2};
    auto d = g.districts(all);
    REQUIRE(d.size() == 2);
    CHECK(d[0] == std::set<int>{0, 1});
    CHECK(d[1] == std::set<int>{2});
}
