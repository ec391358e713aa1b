#include <doctest.h>

#include "hcm/dsl.hpp"

#include "helpers.hpp"

#include <random>

using namespace hcm;

TEST_CASE("parses the backdoor motif") {
    auto pr = load_fixture("confounder.hcm");
    CHECK(pr.graph.name == "confounder");
    CHECK(pr.graph.size() == 3);
    CHECK(pr.graph.var(pr.graph.require("U")).level == Level::Unit);
    CHECK(!pr.graph.var(pr.graph.require("U")).observed);
    CHECK(pr.graph.has_edge(pr.graph.require("A"), pr.graph.require("Y")));
    REQUIRE(pr.query.has_value());
    CHECK(pr.query->treatment == pr.graph.require("A"));
    CHECK(pr.query->intervention == InterventionKind::SoftSubunit);
    CHECK(pr.query->outcome == pr.graph.require("Y"));
    CHECK(pr.query->outcome_form == OutcomeForm::SubunitMarginal);
}

TEST_CASE("parses conditional soft interventions") {
    auto pr = load_fixture("ident_instrument_covariate.hcm");
    REQUIRE(pr.query.has_value());
    CHECK(pr.query->intervention ==
          InterventionKind::ConditionalSoftSubunit);
    CHECK(pr.query->conditioning ==
          std::vector<int>{pr.graph.require("X")});
    CHECK(pr.query->outcome_form == OutcomeForm::UnitValue);
}

TEST_CASE("syntax errors carry a location") {
    CHECK_THROWS_WITH_AS(parse_hcm("hcm broken {\n  unit observed\n}\n"),
                         doctest::Contains("line 2"), Error);
    CHECK_THROWS_AS(parse_hcm("hcm x {"), Error);
    CHECK_THROWS_AS(parse_hcm("model x { }"), Error);
}

TEST_CASE("semantic errors: unknown variables and level violations") {
    const char* unknown =
        "hcm g {\n  subunit observed A\n  A -> B\n}\n";
    CHECK_THROWS_WITH_AS(parse_hcm(unknown),
                         doctest::Contains("SemanticError"), Error);

    const char* dup =
        "hcm g {\n  subunit observed A\n  unit observed A\n}\n";
    CHECK_THROWS_AS(parse_hcm(dup), Error);

    const char* hard_on_subunit =
        "hcm g {\n  subunit observed A\n  subunit observed Y\n  A -> Y\n}\n"
        "query {\n  intervene A = hard\n  outcome Y\n}\n";
    CHECK_THROWS_AS(parse_hcm(hard_on_subunit), Error);

    const char* bad_conditioning =
        "hcm g {\n  subunit observed A\n  subunit observed Y\n"
        "  subunit observed X\n  A -> Y\n}\n"
        "query {\n  intervene A ~ soft | X\n  outcome Y\n}\n";
    CHECK_THROWS_AS(parse_hcm(bad_conditioning), Error);
}

TEST_CASE("comments are ignored") {
    auto pr = parse_hcm("# leading\nhcm g { # trailing\n"
                        "  unit observed A # var\n}\n");
    CHECK(pr.graph.size() == 1);
    CHECK(!pr.query.has_value());
}

TEST_CASE("serialize/parse round-trip on every fixture") {
    const char* fixtures[] = {
        "confounder.hcm",
        "interference.hcm",
        "instrument.hcm",
        "ident_mediator_marginal.hcm",
        "ident_subunit_chain.hcm",
        "ident_subunit_mediator.hcm",
        "ident_instrument_unit_mediator.hcm",
        "ident_instrument_covariate.hcm",
        "ident_unit_mediator_feedback.hcm",
        "ident_conditional_policy.hcm",
        "nonident_confounded_interferer.hcm",
        "nonident_double_confounded_instrument.hcm",
        "nonident_confounded_unit_mediator.hcm",
        "nonident_unit_treatment.hcm",
        "subconf_backdoor.hcm",
        "subconf_frontdoor.hcm",
        "subconf_frontdoor_chain.hcm",
    };
    for (const char* f : fixtures) {
        INFO(f);
        auto pr = load_fixture(f);
        auto rt = parse_hcm(serialize_hcm(pr.graph, pr.query));
        CHECK(rt.graph.size() == pr.graph.size());
        CHECK(rt.graph.edges() == pr.graph.edges());
        for (int v = 0; v < pr.graph.size(); ++v) {
            CHECK(rt.graph.var(v).name == pr.graph.var(v).name);
            CHECK(rt.graph.var(v).level == pr.graph.var(v).level);
            CHECK(rt.graph.var(v).observed == pr.graph.var(v).observed);
        }
        CHECK(rt.query.has_value() == pr.query.has_value());
        if (pr.query) {
            CHECK(rt.query->treatment == pr.query->treatment);
            CHECK(rt.query->intervention == pr.query->intervention);
            CHECK(rt.query->conditioning == pr.query->conditioning);
            CHECK(rt.query->outcome == pr.query->outcome);
        }
    }
}

TEST_CASE("round-trip on random graphs") {
    std::mt19937 rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        HierGraph g;
        int n = 1 + int(rng() % 15);
        for (int i = 0; i < n; ++i)
            g.add_var("V" + std::to_string(i),
                      rng() % 2 ? Level::Unit : Level::Subunit,
                      rng() % 3 != 0);
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b)
                if (rng() % 100 < 25) g.add_edge(a, b);
        auto rt = parse_hcm(serialize_hcm(g, std::nullopt));
        CHECK(rt.graph.size() == g.size());
        CHECK(rt.graph.edges() == g.edges());
    }
}
