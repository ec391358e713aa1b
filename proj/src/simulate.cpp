#include "hcm/simulate.hpp"

#include "hcm/graph.hpp"

#include <cmath>

#ifdef HCM_HAVE_OPENMP
#include <omp.h>
#endif

namespace hcm {

namespace {

double beta_checked(Rng& r, double a, double b) {
    if (!(a > 0.0) || !(b > 0.0))
        throw Error("InvalidSpec", "Beta parameters must be positive");
    return r.beta(a, b);
}

int bern_checked(Rng& r, double p) {
    if (!(p >= 0.0 && p <= 1.0))
        throw Error("InvalidSpec", "Bernoulli mean outside [0,1]");
    return r.bernoulli(p);
}

double normal_checked(Rng& r, double mean, double sd) {
    if (!(sd > 0.0))
        throw Error("InvalidSpec", "Normal scale must be positive");
    return mean + sd * r.normal();
}

} // namespace

HierDataset sample_hcgm(const MechanismSpec& spec, int n, int m,
                        uint64_t seed) {
    if (n <= 0 || m <= 0)
        throw Error("InvalidSpec", "n and m must be positive");
    HierDataset d;
    d.n = n;
    d.m = m;
    d.seed = seed;
    for (size_t s = 0; s < spec.stages.size(); ++s) {
        const Stage& st = spec.stages[s];
        if (st.kind == Stage::UnitDraw)
            d.add_unit_col(st.col, st.observed);
        else
            d.add_sub_col(st.col, st.observed);
    }
    int uc = -1, sc = -1;
    for (size_t s = 0; s < spec.stages.size(); ++s) {
        const Stage& st = spec.stages[s];
        if (st.kind == Stage::UnitDraw) {
            ++uc;
            int col = uc;
#ifdef HCM_HAVE_OPENMP
#pragma omp parallel for schedule(static)
#endif
            for (int i = 0; i < n; ++i) {
                Rng r(seed, {static_cast<uint64_t>(i) + 1, s});
                StageCtx c{&d, i, -1};
                d.unit_cols[col][i] = st.draw(r, c);
            }
        } else {
            ++sc;
            int col = sc;
#ifdef HCM_HAVE_OPENMP
#pragma omp parallel for schedule(static)
#endif
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < m; ++j) {
                    Rng r(seed, {static_cast<uint64_t>(i) + 1, s,
                                 static_cast<uint64_t>(j) + 1});
                    StageCtx c{&d, i, j};
                    d.sub(col, i, j) = st.draw(r, c);
                }
            }
        }
    }
    return d;
}

MechanismSpec confounder_spec(double omega) {
    if (!(omega >= 0.0 && omega <= 1.0))
        throw Error("DomainError", "omega must lie in [0,1]");
    MechanismSpec sp;
    sp.name = "confounder";
    sp.meta = {{"model", "confounder"}, {"omega", omega}};
    // Column indices, in declaration order.
    enum { U = 0, MU_A = 1, MU_Y_0 = 2, MU_Y_1 = 3 };
    enum { A = 0 };
    sp.stages = {
        {Stage::UnitDraw, "u", false,
         [omega](Rng& r, const StageCtx&) {
             return double(bern_checked(r, omega));
         }},
        {Stage::UnitDraw, "mu_a", false,
         [](Rng& r, const StageCtx& c) {
             return beta_checked(r, c.u(U) > 0.5 ? 4.0 : 0.5, 1.0);
         }},
        {Stage::UnitDraw, "mu_y_0", false,
         [](Rng& r, const StageCtx& c) {
             return beta_checked(r, c.u(U) > 0.5 ? 1.0 : 0.5, 2.0);
         }},
        {Stage::UnitDraw, "mu_y_1", false,
         [](Rng& r, const StageCtx& c) {
             return beta_checked(r, c.u(U) > 0.5 ? 4.0 : 2.0, 2.0);
         }},
        {Stage::SubunitDraw, "a", true,
         [](Rng& r, const StageCtx& c) {
             return double(bern_checked(r, c.u(MU_A)));
         }},
        {Stage::SubunitDraw, "y", true,
         [](Rng& r, const StageCtx& c) {
             double mu = c.s(A) > 0.5 ? c.u(MU_Y_1) : c.u(MU_Y_0);
             return double(bern_checked(r, mu));
         }},
    };
    return sp;
}

MechanismSpec interference_spec(double rho) {
    if (!(rho >= 0.0))
        throw Error("DomainError", "rho must be non-negative");
    MechanismSpec sp;
    sp.name = "interference";
    sp.meta = {{"model", "interference"}, {"rho", rho}};
    enum { U = 0, MU_A = 1, Z = 2, MU_Y_0 = 3, MU_Y_1 = 4 };
    enum { A = 0 };
    sp.stages = {
        {Stage::UnitDraw, "u", false,
         [](Rng& r, const StageCtx&) { return normal_checked(r, 0.0, 1.0); }},
        {Stage::UnitDraw, "mu_a", false,
         [](Rng& r, const StageCtx& c) {
             return sigmoid(normal_checked(r, 0.5 * c.u(U), 1.0));
         }},
        {Stage::SubunitDraw, "a", true,
         [](Rng& r, const StageCtx& c) {
             return double(bern_checked(r, c.u(MU_A)));
         }},
        {Stage::UnitDraw, "z", true,
         [](Rng& r, const StageCtx& c) {
             return double(
                 bern_checked(r, sigmoid(2.0 * logit(c.mean(A)) - 0.8)));
         }},
        {Stage::UnitDraw, "mu_y_0", false,
         [rho](Rng& r, const StageCtx& c) {
             double mean = rho * (2.0 * c.u(Z) - 1.0) + 0.5 * c.u(U);
             return sigmoid(normal_checked(r, mean, 0.1));
         }},
        {Stage::UnitDraw, "mu_y_1", false,
         [rho](Rng& r, const StageCtx& c) {
             double mean = 0.5 + rho * (2.0 * c.u(Z) - 1.0) + 0.5 * c.u(U);
             return sigmoid(normal_checked(r, mean, 0.1));
         }},
        {Stage::SubunitDraw, "y", true,
         [](Rng& r, const StageCtx& c) {
             double mu = c.s(A) > 0.5 ? c.u(MU_Y_1) : c.u(MU_Y_0);
             return double(bern_checked(r, mu));
         }},
    };
    return sp;
}

MechanismSpec instrument_spec(double omega) {
    if (!(omega >= 0.0 && omega <= 1.0))
        throw Error("DomainError", "omega must lie in [0,1]");
    MechanismSpec sp;
    sp.name = "instrument";
    sp.meta = {{"model", "instrument"}, {"omega", omega}};
    enum { U = 0, MU_Z = 1, MU_A_Z0 = 2, MU_A_Z1 = 3 };
    enum { Z = 0, A = 1 };
    sp.stages = {
        {Stage::UnitDraw, "u", false,
         [omega](Rng& r, const StageCtx&) {
             return double(bern_checked(r, omega));
         }},
        {Stage::UnitDraw, "mu_z", false,
         [](Rng& r, const StageCtx&) { return beta_checked(r, 2.0, 2.0); }},
        {Stage::UnitDraw, "mu_a_z0", false,
         [](Rng& r, const StageCtx& c) {
             double u = c.u(U);
             return 0.2 * beta_checked(r, 2.0 - 1.8 * u, 0.2 + 1.8 * u);
         }},
        {Stage::UnitDraw, "mu_a_z1", false,
         [](Rng& r, const StageCtx& c) {
             double u = c.u(U);
             return 0.8 + 0.2 * beta_checked(r, 2.0 - 1.8 * u, 0.2 + 1.8 * u);
         }},
        {Stage::SubunitDraw, "z", true,
         [](Rng& r, const StageCtx& c) {
             return double(bern_checked(r, c.u(MU_Z)));
         }},
        {Stage::SubunitDraw, "a", true,
         [](Rng& r, const StageCtx& c) {
             double mu = c.s(Z) > 0.5 ? c.u(MU_A_Z1) : c.u(MU_A_Z0);
             return double(bern_checked(r, mu));
         }},
        {Stage::UnitDraw, "y", true,
         [](Rng& r, const StageCtx& c) {
             double p = 0.45 - 0.4 * c.u(U) + 0.5 * c.mean(A);
             return double(bern_checked(r, p));
         }},
    };
    return sp;
}

double true_effect_confounder(double omega, int a_star) {
    if (!(omega >= 0.0 && omega <= 1.0))
        throw Error("DomainError", "omega must lie in [0,1]");
    if (a_star != 0 && a_star != 1)
        throw Error("DomainError", "a_star must be 0 or 1");
    auto alpha = [](int a, int u) {
        if (a == 0) return u ? 1.0 : 0.5;
        return u ? 4.0 : 2.0;
    };
    // E[Beta(alpha, 2)] = alpha / (alpha + 2), mixed over u.
    double e0 = alpha(a_star, 0) / (alpha(a_star, 0) + 2.0);
    double e1 = alpha(a_star, 1) / (alpha(a_star, 1) + 2.0);
    return (1.0 - omega) * e0 + omega * e1;
}

double gauss_expect_sigmoid(double shift, double scale) {
    const int k = 201;
    const double lo = -8.0, hi = 8.0;
    const double h = (hi - lo) / (k - 1);
    const double inv_sqrt_2pi = 0.3989422804014327;
    double s = 0.0;
    for (int t = 0; t < k; ++t) {
        double x = lo + h * t;
        double f = inv_sqrt_2pi * std::exp(-0.5 * x * x) *
                   sigmoid(shift + scale * x);
        s += (t == 0 || t == k - 1) ? 0.5 * f : f;
    }
    return s * h;
}

void gauss_hermite(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    const double pim4 = 0.7511255444649425; // pi^{-1/4}
    int m2 = (n + 1) / 2;
    double z = 0.0;
    for (int i = 0; i < m2; ++i) {
        if (i == 0)
            z = std::sqrt(2.0 * n + 1.0) -
                1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
        else if (i == 1)
            z -= 1.14 * std::pow(double(n), 0.426) / z;
        else if (i == 2)
            z = 1.86 * z - 0.86 * x[0];
        else if (i == 3)
            z = 1.91 * z - 0.91 * x[1];
        else
            z = 2.0 * z - x[i - 2];
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p1 = pim4, p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / (j + 1)) * p2 -
                     std::sqrt(double(j) / (j + 1)) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2;
            double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) < 1e-14) break;
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
}

double gauss_expect_sigmoid_gh(double shift, double scale, int nodes) {
    std::vector<double> x, w;
    gauss_hermite(nodes, x, w);
    const double inv_sqrt_pi = 0.5641895835477563;
    double s = 0.0;
    // X ~ N(0,1): substitute x = sqrt(2) t against weight exp(-t^2).
    for (int i = 0; i < nodes; ++i)
        s += w[i] * sigmoid(shift + scale * std::sqrt(2.0) * x[i]);
    return s * inv_sqrt_pi;
}

double true_effect_interference(double rho, double mu_star) {
    if (!(rho >= 0.0)) throw Error("DomainError", "rho must be non-negative");
    if (!(mu_star > 0.0 && mu_star < 1.0))
        throw Error("DomainError", "mu_star must lie in (0,1)");
    double pi_z = sigmoid(2.0 * logit(mu_star) - 0.8);
    // Var(0.5 U + noise) = 0.25 + 0.01 = 0.26 with U ~ N(0,1), noise sd 0.1.
    double sd = std::sqrt(0.26);
    double total = 0.0;
    for (int a = 0; a <= 1; ++a) {
        double pa = a ? mu_star : 1.0 - mu_star;
        for (int z = 0; z <= 1; ++z) {
            double pz = z ? pi_z : 1.0 - pi_z;
            double shift = 0.5 * a + rho * (2.0 * z - 1.0);
            total += pa * pz * gauss_expect_sigmoid(shift, sd);
        }
    }
    return total;
}

double true_effect_instrument(double omega, double mu_star) {
    if (!(omega >= 0.0 && omega <= 1.0))
        throw Error("DomainError", "omega must lie in [0,1]");
    if (!(mu_star >= 0.0 && mu_star <= 1.0))
        throw Error("DomainError", "mu_star must lie in [0,1]");
    return 0.45 - 0.4 * omega + 0.5 * mu_star;
}

} // namespace hcm
