#include <doctest.h>

#include "hcm/estimate.hpp"
#include "hcm/graph.hpp"
#include "hcm/rng.hpp"
#include "hcm/simulate.hpp"

#include <cmath>

using namespace hcm;

TEST_CASE("smoothed Bernoulli means by hand") {
    CHECK(est_q_bernoulli({1, 1, 1, 0}) == doctest::Approx(4.0 / 6.0));
    CHECK(est_q_bernoulli({}) == doctest::Approx(0.5)); // pure pseudocounts

    auto c = est_q_cond_bernoulli({1, 1, 1, 0}, {1, 1, 0, 0});
    // a=1 stratum: y sums to 2 of 3 -> (2+1)/(3+2); a=0: (0+1)/(1+2).
    CHECK(c.mean[1] == doctest::Approx(3.0 / 5.0));
    CHECK(c.mean[0] == doctest::Approx(1.0 / 3.0));

    // Empty stratum falls back to the prior mean.
    auto e = est_q_cond_bernoulli({1, 1}, {1, 0});
    CHECK(e.mean[0] == doctest::Approx(0.5));

    CHECK_THROWS_WITH_AS(est_q_bernoulli({0.25}),
                         doctest::Contains("NonBinaryData"), Error);
    CHECK_THROWS_AS(est_q_cond_bernoulli({2, 0}, {1, 0}), Error);
}

TEST_CASE("OLS recovers an exact linear relation") {
    std::vector<std::vector<double>> X{{0, 1}, {1, 0}, {1, 1}, {2, 3}};
    std::vector<double> y;
    for (const auto& row : X) y.push_back(2.0 + 3.0 * row[0] - row[1]);
    auto fit = fit_ols(X, y);
    CHECK(fit.intercept == doctest::Approx(2.0));
    CHECK(fit.coef[0] == doctest::Approx(3.0));
    CHECK(fit.coef[1] == doctest::Approx(-1.0));
    CHECK(fit.resid_sd == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(fit.predict({2, 2}) == doctest::Approx(6.0));
}

TEST_CASE("constant columns make the design singular") {
    std::vector<std::vector<double>> X{{1.0}, {1.0}, {1.0}};
    CHECK_THROWS_WITH_AS(fit_ols(X, {1, 2, 3}),
                         doctest::Contains("SingularDesign"), Error);
}

TEST_CASE("logistic IRLS matches a grid maximizer on one feature") {
    Rng rng(3, {1});
    std::vector<std::vector<double>> X;
    std::vector<double> y;
    for (int i = 0; i < 50; ++i) {
        double x = rng.normal();
        X.push_back({x});
        y.push_back(rng.bernoulli(sigmoid(-0.4 + 1.2 * x)) ? 1.0 : 0.0);
    }
    auto fit = fit_logistic(X, y);
    REQUIRE(fit.converged);

    auto loglik = [&](double b0, double b1) {
        double ll = 0.0;
        for (size_t i = 0; i < X.size(); ++i) {
            double p = sigmoid(b0 + b1 * X[i][0]);
            ll += y[i] > 0.5 ? std::log(p) : std::log(1.0 - p);
        }
        return ll;
    };
    // Coarse-to-fine grid search around the IRLS solution.
    double b0 = 0.0, b1 = 0.0, step = 1.0;
    for (int pass = 0; pass < 12; ++pass) {
        double best = loglik(b0, b1), nb0 = b0, nb1 = b1;
        for (int di = -10; di <= 10; ++di)
            for (int dj = -10; dj <= 10; ++dj) {
                double ll = loglik(b0 + di * step, b1 + dj * step);
                if (ll > best) {
                    best = ll;
                    nb0 = b0 + di * step;
                    nb1 = b1 + dj * step;
                }
            }
        b0 = nb0;
        b1 = nb1;
        step /= 4.0;
    }
    CHECK(std::abs(fit.intercept - b0) < 1e-4);
    CHECK(std::abs(fit.coef[0] - b1) < 1e-4);
}

TEST_CASE("perfect separation is reported, not silently accepted") {
    std::vector<std::vector<double>> X;
    std::vector<double> y;
    for (int i = 0; i < 20; ++i) {
        double x = i < 10 ? -1.0 - i : 1.0 + i;
        X.push_back({x});
        y.push_back(i < 10 ? 0.0 : 1.0);
    }
    auto fit = fit_logistic(X, y, 30);
    CHECK(!fit.converged);
}

TEST_CASE("backdoor plug-in approaches the closed-form truth") {
    auto d = sample_hcgm(confounder_spec(0.5), 1000, 1000, 21);
    for (int a = 0; a < 2; ++a) {
        auto est = estimator_confounder(d, a);
        CHECK(!est.low_data);
        // The per-unit conditional means vary with sd about 0.2, so the
        // population average has SE near 0.006; 0.02 is a three-sigma band.
        CHECK(std::abs(est.value - true_effect_confounder(0.5, a)) < 0.02);
    }
}

TEST_CASE("tiny datasets are flagged as low-data") {
    auto d = sample_hcgm(confounder_spec(0.5), 1, 5, 3);
    CHECK(estimator_confounder(d, 1).low_data);
}

TEST_CASE("interference plug-in is deterministic in its Monte Carlo seed") {
    auto d = sample_hcgm(interference_spec(0.5), 300, 40, 13);
    auto a = estimator_interference(d, 0.75, 99);
    auto b = estimator_interference(d, 0.75, 99);
    auto c = estimator_interference(d, 0.75, 100);
    CHECK(a.value == b.value);
    CHECK(a.value != c.value);
    CHECK(std::abs(a.value - c.value) < 0.05); // MC noise only
}

TEST_CASE("degenerate strata are rejected") {
    // With two units there cannot be 3 units in every (a, z) stratum.
    auto d = sample_hcgm(interference_spec(0.5), 2, 30, 13);
    CHECK_THROWS_WITH_AS(estimator_interference(d, 0.75, 1),
                         doctest::Contains("DegenerateStratum"), Error);
}

TEST_CASE("instrument plug-in beats the aggregated-feature baseline") {
    auto d = sample_hcgm(instrument_spec(0.5), 1000, 200, 17);
    double truth = true_effect_instrument(0.5, 0.75) -
                   true_effect_instrument(0.5, 0.25);
    auto hi = estimator_instrument(d, 0.75);
    auto lo = estimator_instrument(d, 0.25);
    auto nhi = naive_instrument_baseline(d, 0.75);
    auto nlo = naive_instrument_baseline(d, 0.25);
    double err = std::abs((hi.value - lo.value) - truth);
    double nerr = std::abs((nhi.value - nlo.value) - truth);
    CHECK(err < 0.08);
    CHECK(err < nerr);
}

TEST_CASE("naive regression baseline recovers a clean linear effect") {
    // Unconfounded data: regression of mean y on mean a is consistent for
    // the slope, so slope * contrast approximates the incremental effect.
    auto d = sample_hcgm(confounder_spec(0.0), 2000, 400, 29);
    double truth =
        true_effect_confounder(0.0, 1) - true_effect_confounder(0.0, 0);
    auto est = naive_regression_baseline(d, 1.0);
    CHECK(std::abs(est.value - truth) < 0.03);
}
