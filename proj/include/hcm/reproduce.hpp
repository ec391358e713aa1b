#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace hcm {

// One cell of an experiment grid. `estimate` is NaN when the estimator
// errored on that draw (possible at the smallest sizes).
struct RunRow {
    std::string setting; // e.g. "omega=0.5"
    int size = 0;        // n = m
    uint64_t seed = 0;
    std::string estimator;
    double estimate = 0.0;
    double truth = 0.0;
};

// experiment in {confounder, interference, instrument}: 3 parameter settings
// x sizes x n_seeds seeds, estimator vs its naive baseline, effect contrasts
// against the closed-form / quadrature truth.
std::vector<RunRow> reproduce_grid(const std::string& experiment,
                                   const std::vector<int>& sizes,
                                   int n_seeds);

std::string rows_to_csv(const std::vector<RunRow>& rows);

struct ConvergencePoint {
    std::string metric; // "ks" or "w1"
    int m = 0;
    double value = 0.0; // averaged over seeds
};

// Collapse convergence (two-sample KS of per-unit outcome-rate estimates
// against direct draws of the latent rate, m in {10,100,1000}) and
// hierarchical empirical convergence (Wasserstein-1 between per-unit means
// at m and 4m, m in {25,100,400}).
std::vector<ConvergencePoint> reproduce_convergence(int n, int n_seeds);

nlohmann::json reproduce_eight_schools(const std::string& csv_path,
                                       int iterations, int chains,
                                       uint64_t seed);

double ks_statistic(std::vector<double> a, std::vector<double> b);
double wasserstein1(std::vector<double> a, std::vector<double> b);

} // namespace hcm
