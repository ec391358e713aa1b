#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hcm {

struct SchoolSummary {
    std::string school;
    double mu_hat = 0.0; // estimated per-school treatment coefficient
    double sigma = 1.0;  // its standard error, > 0
};

// CSV `school,mu_hat,sigma` with '#' comment lines. Throws
// Error("DomainError") on sigma <= 0, Error("SyntaxError") on bad rows.
std::vector<SchoolSummary> load_schools_csv(const std::string& path);

// Partial-pooling normal model: nu ~ Normal(0,5), tau ~ HalfCauchy(5),
// mu_i ~ Normal(nu, tau), mu_hat_i ~ Normal(mu_i, sigma_i). Sampled on
// (nu, log tau, mu_1..K) with the log-transform Jacobian.
struct ChainSet {
    std::vector<std::string> params; // nu, log_tau, mu_1..
    // draws[chain][iter][param], post burn-in only
    std::vector<std::vector<std::vector<double>>> draws;
    std::vector<double> rhat; // per parameter
    std::vector<double> acceptance; // per parameter, averaged over chains
};

// Random-walk Metropolis, one coordinate at a time, per-coordinate step sizes
// adapted toward 20-40% acceptance during a burn-in of `iterations`/2.
// `iterations` counts retained post-burn-in draws (>= 10000); chains >= 2.
// Throws Error("DivergentChain") when any R-hat exceeds 1.1 and check_rhat
// is set; Error("DomainError") on bad arguments or data.
ChainSet mh_sample(const std::vector<SchoolSummary>& data, int iterations,
                   int chains, uint64_t seed, bool check_rhat = true);

struct PosteriorSummary {
    double mean = 0.0;
    double sd = 0.0;
    double p5 = 0.0;
    double p95 = 0.0;
};

// Pooled cross-chain summary of the population effect nu. Throws
// Error("NotConverged") when any R-hat exceeds 1.1.
PosteriorSummary posterior_ate(const ChainSet& chains);

std::string chains_to_csv(const ChainSet& chains);

} // namespace hcm
