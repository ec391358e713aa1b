#pragma once

#include "hcm/dataset.hpp"

#include <cstdint>
#include <vector>

namespace hcm {

// Smoothed Bernoulli estimate: mean[a] for each conditioning level (a single
// entry for marginals). Beta(1,1) pseudocounts keep every mean in (0,1).
struct BernoulliEst {
    std::vector<double> mean;
};

// Marginal: (sum x + 1) / (count + 2). Throws Error("NonBinaryData").
double est_q_bernoulli(const std::vector<double>& x);

// Conditional per treatment level: mean[a] = (sum y 1[a_j=a] + 1) /
// (count 1[a_j=a] + 2). Throws Error("NonBinaryData").
BernoulliEst est_q_cond_bernoulli(const std::vector<double>& a,
                                  const std::vector<double>& y);

struct LinearModel {
    std::vector<double> coef;
    double intercept = 0.0;
    double resid_sd = 0.0;
    double predict(const std::vector<double>& x) const;
};

// OLS via normal equations. Throws Error("SingularDesign").
LinearModel fit_ols(const std::vector<std::vector<double>>& X,
                    const std::vector<double>& y);

struct LogisticModel {
    std::vector<double> coef;
    double intercept = 0.0;
    int iterations = 0;
    bool converged = false;
    double predict(const std::vector<double>& x) const; // P(y=1 | x)
};

// IRLS with a tiny ridge on the Hessian for numerical stability; capped at
// `max_iter` iterations, convergence recorded in the result.
LogisticModel fit_logistic(const std::vector<std::vector<double>>& X,
                           const std::vector<double>& y, int max_iter = 100);

struct EffectEstimate {
    double value = 0.0;
    bool low_data = false; // n < 2 or m < 2: pseudocounts dominate
};

// Plug-in for the backdoor formula on (a, y) data: population average of the
// per-unit smoothed conditional outcome mean at treatment level a_star.
EffectEstimate estimator_confounder(const HierDataset& d, int a_star);

// Front-door plug-in for (a, z, y) data with unit-level interference through
// z. mc_seed drives the 100 Monte Carlo draws per conditional expectation.
// Throws Error("DegenerateStratum") when any (a, z) stratum has < 3 units.
EffectEstimate estimator_interference(const HierDataset& d, double mu_star,
                                      uint64_t mc_seed);

// Instrument backdoor plug-in for (z, a) subunit data with a unit outcome y:
// logistic classifier of y on the three per-unit logit features plus their
// pairwise products, averaged at logit(mu_star).
// Throws Error("ClassifierNotConverged").
EffectEstimate estimator_instrument(const HierDataset& d, double mu_star);

// The same classifier on the single aggregated feature logit(mean a); ignores
// the instrument. Throws Error("ClassifierNotConverged").
EffectEstimate naive_instrument_baseline(const HierDataset& d,
                                         double mu_star);

// OLS of per-unit mean y on per-unit mean a; effect = slope * contrast.
// Throws Error("SingularDesign").
EffectEstimate naive_regression_baseline(const HierDataset& d,
                                         double contrast);

} // namespace hcm
