#include "hcm/reproduce.hpp"

#include "hcm/bayes.hpp"
#include "hcm/estimate.hpp"
#include "hcm/graph.hpp"
#include "hcm/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace hcm {

namespace {

constexpr double kMuHi = 0.75;
constexpr double kMuLo = 0.25;

double nan_value() { return std::numeric_limits<double>::quiet_NaN(); }

// Independent seed substream per parameter setting, so the "20 independent
// simulations" of each setting share no random draws with other settings
// (reusing raw seed indices would correlate estimation errors across cells).
// Sizes within a setting share streams: common random numbers across sizes
// keep the convergence-in-size curves smooth.
uint64_t cell_seed(const std::string& experiment, uint64_t setting_idx,
                   uint64_t s) {
    uint64_t h = 1469598103934665603ull; // FNV-1a over the experiment name
    for (char c : experiment) h = (h ^ static_cast<uint64_t>(c)) * 1099511628211ull;
    // Fixed stream id for the reproduction grids, so other tools deriving
    // seeds from the same hash never collide with grid datasets.
    constexpr uint64_t kGridStream = 0x44975DA92C7DC80Eull;
    uint64_t x = h ^ (((setting_idx + 1) << 32) | s) ^ kGridStream;
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::string fmt_setting(const std::string& key, double v) {
    std::ostringstream s;
    s << key << '=' << v;
    return s.str();
}

} // namespace

std::vector<RunRow> reproduce_grid(const std::string& experiment,
                                   const std::vector<int>& sizes,
                                   int n_seeds) {
    std::vector<RunRow> rows;
    std::vector<double> params;
    if (experiment == "confounder" || experiment == "instrument")
        params = {0.0, 0.2, 0.5};
    else if (experiment == "interference")
        params = {0.0, 0.5, 1.5};
    else
        throw Error("DomainError", "unknown experiment: " + experiment);

    for (size_t pi = 0; pi < params.size(); ++pi) {
        double p = params[pi];
        std::string setting =
            fmt_setting(experiment == "interference" ? "rho" : "omega", p);
        double truth;
        if (experiment == "confounder")
            truth = true_effect_confounder(p, 1) - true_effect_confounder(p, 0);
        else if (experiment == "interference")
            truth = true_effect_interference(p, kMuHi) -
                    true_effect_interference(p, kMuLo);
        else
            truth = true_effect_instrument(p, kMuHi) -
                    true_effect_instrument(p, kMuLo);
        for (int size : sizes) {
            for (int s = 1; s <= n_seeds; ++s) {
                uint64_t seed =
                    cell_seed(experiment, pi, static_cast<uint64_t>(s));
                auto add = [&](const std::string& est, double v) {
                    rows.push_back({setting, size, static_cast<uint64_t>(s),
                                    est, v, truth});
                };
                auto guarded = [&](const std::string& est, auto&& fn) {
                    try {
                        add(est, fn());
                    } catch (const Error&) {
                        add(est, nan_value());
                    }
                };
                if (experiment == "confounder") {
                    HierDataset d =
                        sample_hcgm(confounder_spec(p), size, size, seed);
                    guarded("hcm", [&] {
                        return estimator_confounder(d, 1).value -
                               estimator_confounder(d, 0).value;
                    });
                    guarded("naive", [&] {
                        return naive_regression_baseline(d, 1.0).value;
                    });
                } else if (experiment == "interference") {
                    HierDataset d =
                        sample_hcgm(interference_spec(p), size, size, seed);
                    guarded("hcm", [&] {
                        return estimator_interference(d, kMuHi, seed).value -
                               estimator_interference(d, kMuLo, seed).value;
                    });
                    guarded("confounder", [&] {
                        return estimator_confounder(d, 1).value -
                               estimator_confounder(d, 0).value;
                    });
                } else {
                    HierDataset d =
                        sample_hcgm(instrument_spec(p), size, size, seed);
                    guarded("hcm", [&] {
                        return estimator_instrument(d, kMuHi).value -
                               estimator_instrument(d, kMuLo).value;
                    });
                    guarded("naive", [&] {
                        return naive_instrument_baseline(d, kMuHi).value -
                               naive_instrument_baseline(d, kMuLo).value;
                    });
                }
            }
        }
    }
    return rows;
}

std::string rows_to_csv(const std::vector<RunRow>& rows) {
    std::ostringstream out;
    out.precision(10);
    out << "setting,size,seed,estimator,estimate,truth\n";
    for (const auto& r : rows)
        out << r.setting << ',' << r.size << ',' << r.seed << ','
            << r.estimator << ',' << r.estimate << ',' << r.truth << '\n';
    return out.str();
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    size_t ia = 0, ib = 0;
    while (ia < a.size() && ib < b.size()) {
        if (a[ia] <= b[ib])
            ++ia;
        else
            ++ib;
        double fa = double(ia) / a.size();
        double fb = double(ib) / b.size();
        d = std::max(d, std::abs(fa - fb));
    }
    return d;
}

double wasserstein1(std::vector<double> a, std::vector<double> b) {
    if (a.size() != b.size())
        throw Error("DomainError", "wasserstein1 needs equal sample sizes");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double s = 0.0;
    for (size_t k = 0; k < a.size(); ++k) s += std::abs(a[k] - b[k]);
    return s / a.size();
}

std::vector<ConvergencePoint> reproduce_convergence(int n, int n_seeds) {
    std::vector<ConvergencePoint> out;
    const double omega = 0.2;
    MechanismSpec spec = confounder_spec(omega);

    // Per-unit plug-in estimates of E[Y | A=1] converge in distribution to
    // the latent outcome rate as m grows.
    for (int m : {10, 100, 1000}) {
        double acc = 0.0;
        for (int s = 1; s <= n_seeds; ++s) {
            HierDataset d = sample_hcgm(spec, n, m, s);
            int ca = d.sub_col("a"), cy = d.sub_col("y");
            std::vector<double> est(n);
            for (int i = 0; i < n; ++i) {
                std::vector<double> ai(m), yi(m);
                for (int j = 0; j < m; ++j) {
                    ai[j] = d.sub(ca, i, j);
                    yi[j] = d.sub(cy, i, j);
                }
                est[i] = est_q_cond_bernoulli(ai, yi).mean[1];
            }
            HierDataset ref = sample_hcgm(spec, 2000, 1, 1000 + s);
            acc += ks_statistic(est, ref.unit_cols[ref.unit_col("mu_y_1")]);
        }
        out.push_back({"ks", m, acc / n_seeds});
    }

    // Per-unit empirical means at m vs 4m (same units, larger inner sample).
    for (int m : {25, 100, 400}) {
        double acc = 0.0;
        for (int s = 1; s <= n_seeds; ++s) {
            HierDataset d1 = sample_hcgm(spec, n, m, s);
            HierDataset d4 = sample_hcgm(spec, n, 4 * m, s);
            int c1 = d1.sub_col("y"), c4 = d4.sub_col("y");
            std::vector<double> m1(n), m4(n);
            for (int i = 0; i < n; ++i) {
                m1[i] = d1.unit_mean_sub(c1, i);
                m4[i] = d4.unit_mean_sub(c4, i);
            }
            acc += wasserstein1(m1, m4);
        }
        out.push_back({"w1", m, acc / n_seeds});
    }
    return out;
}

nlohmann::json reproduce_eight_schools(const std::string& csv_path,
                                       int iterations, int chains,
                                       uint64_t seed) {
    std::vector<SchoolSummary> data = load_schools_csv(csv_path);
    ChainSet cs = mh_sample(data, iterations, chains, seed);
    PosteriorSummary s = posterior_ate(cs);
    nlohmann::json j;
    j["parameter"] = "nu";
    j["mean"] = s.mean;
    j["sd"] = s.sd;
    j["p5"] = s.p5;
    j["p95"] = s.p95;
    j["chains"] = chains;
    j["iterations"] = iterations;
    j["seed"] = seed;
    double max_rhat = 0.0;
    for (double r : cs.rhat) max_rhat = std::max(max_rhat, r);
    j["max_rhat"] = max_rhat;
    return j;
}

} // namespace hcm
