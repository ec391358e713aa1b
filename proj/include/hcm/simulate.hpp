#pragma once

#include "hcm/dataset.hpp"
#include "hcm/rng.hpp"

#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

namespace hcm {

// One sampling stage of a hierarchical causal generative model. Stages run in
// declaration order (a topological order of the model). A unit stage draws
// one value per unit and may read earlier unit columns and empirical
// aggregates of earlier subunit columns; a subunit stage draws one value per
// row and may read unit columns and earlier subunit values in the same row.
struct StageCtx {
    const HierDataset* d = nullptr;
    int i = 0;  // unit index
    int j = -1; // row index, -1 during unit stages

    double u(int col) const { return d->unit_cols[col][i]; }
    double s(int col) const { return d->sub(col, i, j); }
    double mean(int col) const { return d->unit_mean_sub(col, i); }
};

struct Stage {
    enum Kind { UnitDraw, SubunitDraw } kind = UnitDraw;
    std::string col;
    bool observed = true;
    std::function<double(Rng&, const StageCtx&)> draw;
};

struct MechanismSpec {
    std::string name;
    std::vector<Stage> stages;
    // Whether every unit-variable mechanism depends on subunit parents only
    // through empirical averages (so it converges in the infinite-m limit).
    bool mechanism_convergent = true;
    nlohmann::json meta; // families and parameters, for the sidecar
};

// Draws every stage for n units with m rows each. Each draw consumes a
// dedicated counter stream keyed by (seed, unit, stage[, row]), so the result
// is bitwise reproducible and independent of unit scheduling.
HierDataset sample_hcgm(const MechanismSpec& spec, int n, int m,
                        uint64_t seed);

// The three benchmark generative models. Throw Error("DomainError") on
// out-of-range parameters.
MechanismSpec confounder_spec(double omega);
MechanismSpec interference_spec(double rho);
MechanismSpec instrument_spec(double omega);

// Ground-truth infinite-m effects. E[mean Y] under a soft intervention
// setting the per-unit treatment distribution to Bernoulli(a_star /
// mu_star).
double true_effect_confounder(double omega, int a_star);
double true_effect_interference(double rho, double mu_star);
double true_effect_instrument(double omega, double mu_star);

// E[sigmoid(shift + scale * X)] for X ~ N(0,1), via 201-point trapezoid on
// [-8, 8]; abs error below 1e-8 for |shift| <= 6, |scale| <= 3.
double gauss_expect_sigmoid(double shift, double scale);
// Same integral by Gauss-Hermite quadrature (validation path).
double gauss_expect_sigmoid_gh(double shift, double scale, int nodes);

// Gauss-Hermite nodes/weights for weight exp(-x^2), Newton on the recurrence.
void gauss_hermite(int n, std::vector<double>& x, std::vector<double>& w);

} // namespace hcm
