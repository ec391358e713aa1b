#include "hcm/bayes.hpp"

#include "hcm/graph.hpp"
#include "hcm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#ifdef HCM_HAVE_OPENMP
#include <omp.h>
#endif

namespace hcm {

std::vector<SchoolSummary> load_schools_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error("SyntaxError", "cannot open " + path);
    std::vector<SchoolSummary> out;
    std::string line;
    bool header_seen = false;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true; // school,mu_hat,sigma
            continue;
        }
        std::istringstream row(line);
        SchoolSummary s;
        std::string mu, sig;
        if (!std::getline(row, s.school, ',') || !std::getline(row, mu, ',') ||
            !std::getline(row, sig, ','))
            throw Error("SyntaxError", "bad row: " + line);
        try {
            s.mu_hat = std::stod(mu);
            s.sigma = std::stod(sig);
        } catch (const std::exception&) {
            throw Error("SyntaxError", "bad number in row: " + line);
        }
        if (!(s.sigma > 0.0))
            throw Error("DomainError", "sigma must be positive: " + line);
        out.push_back(s);
    }
    return out;
}

namespace {

double log_posterior(const std::vector<double>& theta,
                     const std::vector<SchoolSummary>& data) {
    double nu = theta[0];
    double log_tau = theta[1];
    double tau = std::exp(log_tau);
    double lp = -0.5 * (nu / 5.0) * (nu / 5.0);
    // HalfCauchy(5) on tau, plus the Jacobian of tau = exp(log_tau).
    lp += -std::log1p((tau / 5.0) * (tau / 5.0)) + log_tau;
    for (size_t i = 0; i < data.size(); ++i) {
        double mu = theta[2 + i];
        double zg = (mu - nu) / tau;
        lp += -0.5 * zg * zg - log_tau;
        double zl = (data[i].mu_hat - mu) / data[i].sigma;
        lp += -0.5 * zl * zl;
    }
    return lp;
}

double rhat_of(const std::vector<std::vector<std::vector<double>>>& draws,
               int param) {
    int c = static_cast<int>(draws.size());
    int n = static_cast<int>(draws[0].size());
    std::vector<double> means(c, 0.0), vars(c, 0.0);
    for (int k = 0; k < c; ++k) {
        for (int t = 0; t < n; ++t) means[k] += draws[k][t][param];
        means[k] /= n;
        for (int t = 0; t < n; ++t) {
            double e = draws[k][t][param] - means[k];
            vars[k] += e * e;
        }
        vars[k] /= (n - 1);
    }
    double grand = 0.0;
    for (double mk : means) grand += mk;
    grand /= c;
    double b = 0.0;
    for (double mk : means) b += (mk - grand) * (mk - grand);
    b *= double(n) / (c - 1);
    double w = 0.0;
    for (double vk : vars) w += vk;
    w /= c;
    if (w <= 0.0) return 1.0;
    double var_plus = (double(n - 1) / n) * w + b / n;
    return std::sqrt(var_plus / w);
}

} // namespace

ChainSet mh_sample(const std::vector<SchoolSummary>& data, int iterations,
                   int chains, uint64_t seed, bool check_rhat) {
    if (iterations < 10000)
        throw Error("DomainError", "need at least 10000 retained iterations");
    if (chains < 2) throw Error("DomainError", "need at least 2 chains");
    for (const auto& s : data)
        if (!(s.sigma > 0.0))
            throw Error("DomainError", "sigma must be positive");

    int k = 2 + static_cast<int>(data.size());
    int burn = iterations / 2;
    ChainSet cs;
    cs.params = {"nu", "log_tau"};
    for (size_t i = 0; i < data.size(); ++i)
        cs.params.push_back("mu_" + std::to_string(i + 1));
    cs.draws.assign(chains, {});
    std::vector<std::vector<double>> acc_per_chain(
        chains, std::vector<double>(k, 0.0));

#ifdef HCM_HAVE_OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int c = 0; c < chains; ++c) {
        Rng r(seed, {static_cast<uint64_t>(c) + 1});
        std::vector<double> theta(k);
        theta[0] = 2.0 * r.normal();
        theta[1] = r.normal();
        for (int p = 2; p < k; ++p)
            theta[p] = theta[0] + std::exp(theta[1]) * r.normal();
        std::vector<double> step(k, 1.0);
        std::vector<int> acc_window(k, 0), tot_window(k, 0);
        std::vector<long> acc_total(k, 0);
        double lp = log_posterior(theta, data);
        auto& out = cs.draws[c];
        out.reserve(iterations);
        for (int t = 0; t < burn + iterations; ++t) {
            for (int p = 0; p < k; ++p) {
                double old = theta[p];
                theta[p] = old + step[p] * r.normal();
                double lp_new = log_posterior(theta, data);
                if (std::log(r.uniform()) < lp_new - lp) {
                    lp = lp_new;
                    ++acc_window[p];
                    if (t >= burn) ++acc_total[p];
                } else {
                    theta[p] = old;
                }
                ++tot_window[p];
            }
            if (t < burn && (t + 1) % 100 == 0) {
                for (int p = 0; p < k; ++p) {
                    double rate = double(acc_window[p]) / tot_window[p];
                    if (rate < 0.2) step[p] *= 0.8;
                    if (rate > 0.4) step[p] *= 1.25;
                    acc_window[p] = tot_window[p] = 0;
                }
            }
            if (t >= burn) out.push_back(theta);
        }
        for (int p = 0; p < k; ++p)
            acc_per_chain[c][p] = double(acc_total[p]) / iterations;
    }

    cs.acceptance.assign(k, 0.0);
    for (int p = 0; p < k; ++p) {
        for (int c = 0; c < chains; ++c)
            cs.acceptance[p] += acc_per_chain[c][p];
        cs.acceptance[p] /= chains;
    }
    cs.rhat.resize(k);
    for (int p = 0; p < k; ++p) cs.rhat[p] = rhat_of(cs.draws, p);
    if (check_rhat)
        for (int p = 0; p < k; ++p)
            if (cs.rhat[p] > 1.1)
                throw Error("DivergentChain",
                            "R-hat " + std::to_string(cs.rhat[p]) + " for " +
                                cs.params[p]);
    return cs;
}

PosteriorSummary posterior_ate(const ChainSet& chains) {
    for (size_t p = 0; p < chains.rhat.size(); ++p)
        if (chains.rhat[p] > 1.1)
            throw Error("NotConverged",
                        "R-hat " + std::to_string(chains.rhat[p]) + " for " +
                            chains.params[p]);
    std::vector<double> pooled;
    for (const auto& chain : chains.draws)
        for (const auto& row : chain) pooled.push_back(row[0]);
    if (pooled.empty()) throw Error("NotConverged", "no draws");
    PosteriorSummary s;
    for (double v : pooled) s.mean += v;
    s.mean /= pooled.size();
    for (double v : pooled) s.sd += (v - s.mean) * (v - s.mean);
    s.sd = pooled.size() > 1 ? std::sqrt(s.sd / (pooled.size() - 1)) : 0.0;
    std::sort(pooled.begin(), pooled.end());
    auto pct = [&](double q) {
        double pos = q * (pooled.size() - 1);
        size_t lo = static_cast<size_t>(pos);
        size_t hi = std::min(lo + 1, pooled.size() - 1);
        double frac = pos - lo;
        return pooled[lo] * (1.0 - frac) + pooled[hi] * frac;
    };
    s.p5 = pct(0.05);
    s.p95 = pct(0.95);
    return s;
}

std::string chains_to_csv(const ChainSet& chains) {
    std::ostringstream out;
    out.precision(10);
    out << "chain,iter";
    for (const auto& p : chains.params) out << ',' << p;
    out << '\n';
    for (size_t c = 0; c < chains.draws.size(); ++c)
        for (size_t t = 0; t < chains.draws[c].size(); ++t) {
            out << c << ',' << t;
            for (double v : chains.draws[c][t]) out << ',' << v;
            out << '\n';
        }
    return out.str();
}

} // namespace hcm
