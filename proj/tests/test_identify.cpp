#include <doctest.h>

#include "hcm/identify.hpp"

#include "helpers.hpp"

#include <random>

using namespace hcm;

namespace {

const char* kIdentified[] = {
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
    "subconf_backdoor.hcm",
    "subconf_frontdoor.hcm",
    "subconf_frontdoor_chain.hcm",
};

const char* kNotIdentified[] = {
    "nonident_confounded_interferer.hcm",
    "nonident_double_confounded_instrument.hcm",
    "nonident_confounded_unit_mediator.hcm",
    "nonident_unit_treatment.hcm",
};

IdResult run(const char* fixture) {
    auto pr = load_fixture(fixture);
    REQUIRE(pr.query.has_value());
    return identify_hcm(pr.graph, *pr.query);
}

} // namespace

TEST_CASE("identification verdicts across the fixture corpus") {
    for (const char* f : kIdentified) {
        INFO(f);
        auto r = run(f);
        CHECK(r.identified);
    }
    for (const char* f : kNotIdentified) {
        INFO(f);
        auto r = run(f);
        CHECK(!r.identified);
        CHECK(!r.witness.description.empty());
    }
}

TEST_CASE("backdoor motif estimand") {
    auto r = run("confounder.hcm");
    REQUIRE(r.identified);
    ExprPtr want = expectation(
        "units",
        integral({"Q[Y|A]"},
                 product({prob({"Q[Y|A]"}, {}),
                          delta("Q[Y]", {"Q[A]", "Q[Y|A]"})})));
    INFO(to_text(r.estimand.root));
    CHECK(structurally_equal(r.estimand.root, want));
}

TEST_CASE("front-door motif estimand") {
    auto r = run("interference.hcm");
    REQUIRE(r.identified);
    ExprPtr inner = integral(
        {"Q[A]"}, product({prob({"Q[A]"}, {}),
                           prob({"Q[Y|A]"}, {"Q[A]", "Z"})}));
    ExprPtr want = expectation(
        "units",
        integral({"Q[Y|A]", "Z"},
                 product({prob({"Z"}, {"Q[A]"}), inner,
                          delta("Q[Y]", {"Q[A]", "Q[Y|A]"})})));
    INFO(to_text(r.estimand.root));
    CHECK(structurally_equal(r.estimand.root, want));
}

TEST_CASE("instrument motif estimand") {
    auto r = run("instrument.hcm");
    REQUIRE(r.identified);
    ExprPtr want = expectation(
        "units",
        integral({"Q[A|Z]"},
                 product({prob({"Q[A|Z]"}, {}),
                          prob({"Y"}, {"Q[A]", "Q[A|Z]"})})));
    INFO(to_text(r.estimand.root));
    CHECK(structurally_equal(r.estimand.root, want));
}

TEST_CASE("identified results carry positivity assumptions and stages") {
    auto r = run("instrument.hcm");
    REQUIRE(r.identified);
    CHECK(r.assumptions.size() >= 3);
    CHECK(r.stages.size() >= 2);
    CHECK(r.stages.front().label == "collapse");
    CHECK(r.treatment_node == "Q[A]");
}

TEST_CASE("simplification is idempotent on pipeline output") {
    for (const char* f : kIdentified) {
        INFO(f);
        auto r = run(f);
        REQUIRE(r.identified);
        Estimand again = simplify_estimand(r.estimand);
        CHECK(structurally_equal(again.root, r.estimand.root));
    }
}

TEST_CASE("malformed queries are rejected") {
    auto pr = load_fixture("confounder.hcm");
    QuerySpec q = *pr.query;
    q.outcome = q.treatment;
    CHECK_THROWS_WITH_AS(identify_hcm(pr.graph, q),
                         doctest::Contains("InvalidQuery"), Error);
    QuerySpec q2 = *pr.query;
    q2.treatment = pr.graph.require("U"); // hidden, and unit-level
    CHECK_THROWS_AS(identify_hcm(pr.graph, q2), Error);
}

TEST_CASE("sufficient conditions") {
    auto conf = load_fixture("confounder.hcm");
    auto v1 = sufficient_id_check(conf.graph, *conf.query);
    REQUIRE(v1.has_value());
    CHECK(*v1 == SuffVerdict::Identifiable);

    auto inst = load_fixture("instrument.hcm");
    auto v2 = sufficient_id_check(inst.graph, *inst.query);
    REQUIRE(v2.has_value());
    CHECK(*v2 == SuffVerdict::Identifiable);

    auto hard = load_fixture("nonident_unit_treatment.hcm");
    auto v3 = sufficient_id_check(hard.graph, *hard.query);
    REQUIRE(v3.has_value());
    CHECK(*v3 == SuffVerdict::NotIdentifiableAllObserved);

    // Hidden subunit variables with two children break the precondition.
    auto sub = load_fixture("subconf_frontdoor.hcm");
    CHECK(!sufficient_id_check(sub.graph, *sub.query).has_value());

    // Confounded interferer: neither condition applies, no verdict.
    auto ni = load_fixture("nonident_confounded_interferer.hcm");
    CHECK(!sufficient_id_check(ni.graph, *ni.query).has_value());
}

TEST_CASE("a positive sufficient verdict implies pipeline success") {
    const char* all[] = {
        "confounder.hcm", "interference.hcm", "instrument.hcm",
        "ident_mediator_marginal.hcm", "ident_subunit_chain.hcm",
        "ident_subunit_mediator.hcm", "ident_instrument_unit_mediator.hcm",
        "ident_instrument_covariate.hcm", "ident_unit_mediator_feedback.hcm",
        "ident_conditional_policy.hcm", "nonident_confounded_interferer.hcm",
        "nonident_double_confounded_instrument.hcm",
        "nonident_confounded_unit_mediator.hcm", "nonident_unit_treatment.hcm",
        "subconf_backdoor.hcm", "subconf_frontdoor.hcm",
        "subconf_frontdoor_chain.hcm"};
    for (const char* f : all) {
        auto pr = load_fixture(f);
        auto v = sufficient_id_check(pr.graph, *pr.query);
        if (v && *v == SuffVerdict::Identifiable) {
            INFO(f);
            CHECK(identify_hcm(pr.graph, *pr.query).identified);
        }
    }
}

TEST_CASE("flat identification agrees with the bidirected criterion") {
    // For Y = all observed variables except X, identifiability is exactly
    // the absence of a bidirected path from X to one of its children.
    std::mt19937 rng(23);
    int checked = 0;
    for (int trial = 0; trial < 200; ++trial) {
        int n = 2 + int(rng() % 7);
        Admg g;
        for (int i = 0; i < n; ++i) {
            g.names.push_back("V" + std::to_string(i));
            g.deterministic.push_back(false);
        }
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b) {
                if (rng() % 100 < 30) g.directed.insert({a, b});
                if (rng() % 100 < 20) g.bidirected.insert({a, b});
            }
        int x = int(rng() % n);
        std::set<int> X{x}, Y;
        for (int i = 0; i < n; ++i)
            if (i != x) Y.insert(i);
        if (Y.empty()) continue;
        std::set<int> kids;
        for (const auto& [a, b] : g.directed)
            if (a == x) kids.insert(b);
        bool criterion = !bidirected_path_exists(g, x, kids);
        auto r = id_algorithm(g, X, Y);
        INFO("trial ", trial, " x=", x);
        CHECK(r.ok == criterion);
        ++checked;
    }
    CHECK(checked >= 190);
}
