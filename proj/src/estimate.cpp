#include "hcm/estimate.hpp"

#include "hcm/graph.hpp"
#include "hcm/rng.hpp"

#include <cmath>

#ifdef HCM_HAVE_OPENMP
#include <omp.h>
#endif

namespace hcm {

namespace {

void check_binary(const std::vector<double>& x) {
    for (double v : x)
        if (v != 0.0 && v != 1.0)
            throw Error("NonBinaryData", "expected 0/1 values");
}

// Gaussian elimination with partial pivoting; A is modified.
std::vector<double> solve_linear(std::vector<std::vector<double>> A,
                                 std::vector<double> b) {
    int k = static_cast<int>(b.size());
    for (int c = 0; c < k; ++c) {
        int piv = c;
        for (int r = c + 1; r < k; ++r)
            if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
        if (std::abs(A[piv][c]) < 1e-12)
            throw Error("SingularDesign", "design matrix is rank deficient");
        std::swap(A[c], A[piv]);
        std::swap(b[c], b[piv]);
        for (int r = c + 1; r < k; ++r) {
            double f = A[r][c] / A[c][c];
            for (int c2 = c; c2 < k; ++c2) A[r][c2] -= f * A[c][c2];
            b[r] -= f * b[c];
        }
    }
    std::vector<double> x(k, 0.0);
    for (int c = k - 1; c >= 0; --c) {
        double s = b[c];
        for (int c2 = c + 1; c2 < k; ++c2) s -= A[c][c2] * x[c2];
        x[c] = s / A[c][c];
    }
    return x;
}

std::vector<double> sub_rows(const HierDataset& d, int col, int i) {
    std::vector<double> out(d.m);
    for (int j = 0; j < d.m; ++j) out[j] = d.sub(col, i, j);
    return out;
}

int require_sub(const HierDataset& d, const std::string& name) {
    int c = d.sub_col(name);
    if (c < 0) throw Error("NonBinaryData", "missing subunit column " + name);
    return c;
}

} // namespace

double est_q_bernoulli(const std::vector<double>& x) {
    check_binary(x);
    double s = 0.0;
    for (double v : x) s += v;
    return (s + 1.0) / (static_cast<double>(x.size()) + 2.0);
}

BernoulliEst est_q_cond_bernoulli(const std::vector<double>& a,
                                  const std::vector<double>& y) {
    if (a.size() != y.size())
        throw Error("NonBinaryData", "column length mismatch");
    check_binary(a);
    check_binary(y);
    double n0 = 0.0, n1 = 0.0, s0 = 0.0, s1 = 0.0;
    for (size_t j = 0; j < a.size(); ++j) {
        if (a[j] == 1.0) {
            n1 += 1.0;
            s1 += y[j];
        } else {
            n0 += 1.0;
            s0 += y[j];
        }
    }
    return {{(s0 + 1.0) / (n0 + 2.0), (s1 + 1.0) / (n1 + 2.0)}};
}

double LinearModel::predict(const std::vector<double>& x) const {
    double s = intercept;
    for (size_t k = 0; k < coef.size(); ++k) s += coef[k] * x[k];
    return s;
}

LinearModel fit_ols(const std::vector<std::vector<double>>& X,
                    const std::vector<double>& y) {
    int n = static_cast<int>(y.size());
    int p = n > 0 ? static_cast<int>(X[0].size()) : 0;
    int k = p + 1;
    std::vector<std::vector<double>> A(k, std::vector<double>(k, 0.0));
    std::vector<double> b(k, 0.0);
    for (int r = 0; r < n; ++r) {
        std::vector<double> row(k, 1.0);
        for (int c = 0; c < p; ++c) row[c + 1] = X[r][c];
        for (int c1 = 0; c1 < k; ++c1) {
            b[c1] += row[c1] * y[r];
            for (int c2 = 0; c2 < k; ++c2) A[c1][c2] += row[c1] * row[c2];
        }
    }
    std::vector<double> beta = solve_linear(A, b);
    LinearModel m;
    m.intercept = beta[0];
    m.coef.assign(beta.begin() + 1, beta.end());
    double ssr = 0.0;
    for (int r = 0; r < n; ++r) {
        double e = y[r] - m.predict(X[r]);
        ssr += e * e;
    }
    int dof = n - k;
    m.resid_sd = std::sqrt(ssr / (dof > 0 ? dof : 1));
    return m;
}

double LogisticModel::predict(const std::vector<double>& x) const {
    double s = intercept;
    for (size_t k = 0; k < coef.size(); ++k) s += coef[k] * x[k];
    return sigmoid(s);
}

LogisticModel fit_logistic(const std::vector<std::vector<double>>& X,
                           const std::vector<double>& y, int max_iter) {
    int n = static_cast<int>(y.size());
    int p = n > 0 ? static_cast<int>(X[0].size()) : 0;
    int k = p + 1;
    const double ridge = 1e-6;
    std::vector<double> beta(k, 0.0);
    LogisticModel m;
    for (int it = 0; it < max_iter; ++it) {
        std::vector<std::vector<double>> H(k, std::vector<double>(k, 0.0));
        std::vector<double> g(k, 0.0);
        for (int r = 0; r < n; ++r) {
            std::vector<double> row(k, 1.0);
            for (int c = 0; c < p; ++c) row[c + 1] = X[r][c];
            double eta = 0.0;
            for (int c = 0; c < k; ++c) eta += beta[c] * row[c];
            double pr = sigmoid(eta);
            double w = pr * (1.0 - pr);
            if (w < 1e-10) w = 1e-10;
            for (int c1 = 0; c1 < k; ++c1) {
                g[c1] += row[c1] * (y[r] - pr);
                for (int c2 = 0; c2 < k; ++c2)
                    H[c1][c2] += w * row[c1] * row[c2];
            }
        }
        for (int c = 0; c < k; ++c) H[c][c] += ridge;
        std::vector<double> delta = solve_linear(H, g);
        double biggest = 0.0;
        for (int c = 0; c < k; ++c) {
            beta[c] += delta[c];
            biggest = std::max(biggest, std::abs(delta[c]));
        }
        m.iterations = it + 1;
        if (biggest < 1e-10) {
            m.converged = true;
            break;
        }
    }
    m.intercept = beta[0];
    m.coef.assign(beta.begin() + 1, beta.end());
    return m;
}

EffectEstimate estimator_confounder(const HierDataset& d, int a_star) {
    int ca = require_sub(d, "a"), cy = require_sub(d, "y");
    std::vector<double> per_unit(d.n, 0.0);
#ifdef HCM_HAVE_OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int i = 0; i < d.n; ++i) {
        BernoulliEst e = est_q_cond_bernoulli(sub_rows(d, ca, i),
                                              sub_rows(d, cy, i));
        per_unit[i] = e.mean[a_star ? 1 : 0];
    }
    double s = 0.0;
    for (int i = 0; i < d.n; ++i) s += per_unit[i];
    return {s / d.n, d.n < 2 || d.m < 2};
}

EffectEstimate estimator_interference(const HierDataset& d, double mu_star,
                                      uint64_t mc_seed) {
    int ca = require_sub(d, "a"), cy = require_sub(d, "y");
    int cz = d.unit_col("z");
    if (cz < 0) throw Error("NonBinaryData", "missing unit column z");

    std::vector<double> la(d.n);           // logit of per-unit mean of a
    std::vector<std::vector<double>> ly(2, std::vector<double>(d.n));
#ifdef HCM_HAVE_OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int i = 0; i < d.n; ++i) {
        std::vector<double> ai = sub_rows(d, ca, i);
        la[i] = logit(est_q_bernoulli(ai));
        BernoulliEst e = est_q_cond_bernoulli(ai, sub_rows(d, cy, i));
        ly[0][i] = logit(e.mean[0]);
        ly[1][i] = logit(e.mean[1]);
    }
    check_binary(d.unit_cols[cz]);

    std::vector<std::vector<double>> zx(d.n, std::vector<double>(1));
    for (int i = 0; i < d.n; ++i) zx[i][0] = la[i];
    LogisticModel pz = fit_logistic(zx, d.unit_cols[cz]);
    double pz1 = pz.predict({logit(mu_star)});

    // Per-z linear regressions of the outcome logit on the treatment logit,
    // fitted jointly as parallel lines (shared slope, z intercept shift).
    // A stratum-restricted slope would be extrapolated far outside its own
    // la range during the composition below and pick up a systematic
    // curvature bias; the joint fit spans the full feature range. The raw
    // OLS residual spread is used as-is: the regressors carry estimation
    // noise, but corrections for it are deliberately not applied.
    for (int z = 0; z <= 1; ++z) {
        int count = 0;
        for (int i = 0; i < d.n; ++i)
            count += d.unit_cols[cz][i] == double(z);
        if (count < 3)
            throw Error("DegenerateStratum",
                        "fewer than 3 units with z=" + std::to_string(z));
    }
    LinearModel reg[2]; // features {la, z}
    std::vector<std::vector<double>> X(d.n, std::vector<double>(2));
    for (int i = 0; i < d.n; ++i) {
        X[i][0] = la[i];
        X[i][1] = d.unit_cols[cz][i];
    }
    for (int a = 0; a <= 1; ++a) reg[a] = fit_ols(X, ly[a]);

    // Front-door composition: average the per-(a,z) outcome conditional over
    // the empirical distribution of q^a, with 100 Monte Carlo draws from the
    // fitted normal per conditional expectation.
    double total = 0.0;
    for (int a = 0; a <= 1; ++a) {
        double pa = a ? mu_star : 1.0 - mu_star;
        for (int z = 0; z <= 1; ++z) {
            double pzv = z ? pz1 : 1.0 - pz1;
            double inner = 0.0;
            double sd = reg[a].resid_sd;
            for (int i = 0; i < d.n; ++i) {
                double mean = reg[a].predict({la[i], double(z)});
                Rng r(mc_seed, {0xE57u, static_cast<uint64_t>(a * 2 + z) + 1,
                                static_cast<uint64_t>(i) + 1});
                double acc = 0.0;
                for (int k = 0; k < 100; ++k)
                    acc += sigmoid(mean + sd * r.normal());
                inner += acc / 100.0;
            }
            total += pa * pzv * inner / d.n;
        }
    }
    return {total, d.n < 2 || d.m < 2};
}

namespace {

// Per-unit logit features for the instrument setting: marginal treatment
// rate and the two instrument-conditional rates.
void instrument_features(const HierDataset& d, std::vector<double>& f0,
                         std::vector<double>& f1, std::vector<double>& f2) {
    int cz = require_sub(d, "z"), ca = require_sub(d, "a");
    f0.resize(d.n);
    f1.resize(d.n);
    f2.resize(d.n);
#ifdef HCM_HAVE_OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int i = 0; i < d.n; ++i) {
        std::vector<double> zi = sub_rows(d, cz, i);
        std::vector<double> ai = sub_rows(d, ca, i);
        f0[i] = logit(est_q_bernoulli(ai));
        BernoulliEst e = est_q_cond_bernoulli(zi, ai);
        f1[i] = logit(e.mean[0]);
        f2[i] = logit(e.mean[1]);
    }
}

std::vector<double> with_interactions(double f0, double f1, double f2) {
    return {f0, f1, f2, f0 * f1, f0 * f2, f1 * f2};
}

} // namespace

EffectEstimate estimator_instrument(const HierDataset& d, double mu_star) {
    int cy = d.unit_col("y");
    if (cy < 0) throw Error("NonBinaryData", "missing unit column y");
    check_binary(d.unit_cols[cy]);
    std::vector<double> f0, f1, f2;
    instrument_features(d, f0, f1, f2);
    std::vector<std::vector<double>> X(d.n);
    for (int i = 0; i < d.n; ++i)
        X[i] = with_interactions(f0[i], f1[i], f2[i]);
    LogisticModel cls = fit_logistic(X, d.unit_cols[cy]);
    if (!cls.converged)
        throw Error("ClassifierNotConverged",
                    "logistic classifier hit the iteration cap");
    double star = logit(mu_star);
    double s = 0.0;
    for (int i = 0; i < d.n; ++i)
        s += cls.predict(with_interactions(star, f1[i], f2[i]));
    return {s / d.n, d.n < 2 || d.m < 2};
}

EffectEstimate naive_instrument_baseline(const HierDataset& d,
                                         double mu_star) {
    int cy = d.unit_col("y");
    if (cy < 0) throw Error("NonBinaryData", "missing unit column y");
    check_binary(d.unit_cols[cy]);
    std::vector<double> f0, f1, f2;
    instrument_features(d, f0, f1, f2);
    std::vector<std::vector<double>> X(d.n, std::vector<double>(1));
    for (int i = 0; i < d.n; ++i) X[i][0] = f0[i];
    LogisticModel cls = fit_logistic(X, d.unit_cols[cy]);
    if (!cls.converged)
        throw Error("ClassifierNotConverged",
                    "logistic classifier hit the iteration cap");
    return {cls.predict({logit(mu_star)}), d.n < 2 || d.m < 2};
}

EffectEstimate naive_regression_baseline(const HierDataset& d,
                                         double contrast) {
    int ca = require_sub(d, "a");
    std::vector<std::vector<double>> X(d.n, std::vector<double>(1));
    std::vector<double> yb(d.n);
    int cy_sub = d.sub_col("y");
    int cy_unit = d.unit_col("y");
    for (int i = 0; i < d.n; ++i) {
        X[i][0] = d.unit_mean_sub(ca, i);
        yb[i] = cy_sub >= 0 ? d.unit_mean_sub(cy_sub, i)
                            : d.unit_cols[cy_unit][i];
    }
    LinearModel m = fit_ols(X, yb);
    return {m.coef[0] * contrast, d.n < 2 || d.m < 2};
}

} // namespace hcm
