// Compares single-threaded and multi-threaded runs of the parallel kernels
// (per-unit sampling, per-unit estimation, MCMC chains) and verifies that
// the results are identical: every parallel loop uses per-unit RNG streams
// and fixed-order reductions, so thread count must never change a number.

#include "hcm/bayes.hpp"
#include "hcm/estimate.hpp"
#include "hcm/simulate.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#ifdef HCM_HAVE_OPENMP
#include <omp.h>
#endif

namespace {

using clock_type = std::chrono::steady_clock;

double time_ms(const std::function<void()>& fn) {
    auto t0 = clock_type::now();
    fn();
    auto t1 = clock_type::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

void set_threads(int k) {
#ifdef HCM_HAVE_OPENMP
    omp_set_num_threads(k);
#else
    (void)k;
#endif
}

int default_threads() {
#ifdef HCM_HAVE_OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

bool g_ok = true;

// Runs `fn` once serially and once with the default thread pool, checks the
// two result strings match, and prints the timings.
void bench(const std::string& name, const std::function<std::string()>& fn) {
    int threads = default_threads();
    set_threads(1);
    std::string serial_out;
    double serial_ms = time_ms([&] { serial_out = fn(); });
    set_threads(threads);
    std::string parallel_out;
    double parallel_ms = time_ms([&] { parallel_out = fn(); });
    bool same = serial_out == parallel_out;
    g_ok = g_ok && same;
    std::printf("%-28s serial %8.1f ms   parallel(%d) %8.1f ms   x%.2f   %s\n",
                name.c_str(), serial_ms, threads, parallel_ms,
                parallel_ms > 0 ? serial_ms / parallel_ms : 0.0,
                same ? "identical" : "MISMATCH");
}

} // namespace

int main() {
    using namespace hcm;

    bench("sample confounder 1000x1000", [] {
        return sample_hcgm(confounder_spec(0.5), 1000, 1000, 7).to_csv();
    });

    bench("estimate confounder", [] {
        auto d = sample_hcgm(confounder_spec(0.5), 1000, 1000, 7);
        double v = estimator_confounder(d, 1).value -
                   estimator_confounder(d, 0).value;
        return std::to_string(v);
    });

    bench("estimate interference", [] {
        auto d = sample_hcgm(interference_spec(0.5), 1000, 1000, 7);
        double v = estimator_interference(d, 0.75, 7).value -
                   estimator_interference(d, 0.25, 7).value;
        return std::to_string(v);
    });

    bench("seed grid (8 x 500x500)", [] {
        std::string out;
        for (uint64_t s = 1; s <= 8; ++s) {
            auto d = sample_hcgm(instrument_spec(0.2), 500, 500, s);
            out += std::to_string(estimator_instrument(d, 0.75).value) + "\n";
        }
        return out;
    });

    bench("mcmc 4 chains x 20000", [] {
        std::vector<SchoolSummary> data{{"A", 28, 15}, {"B", 8, 10},
                                        {"C", -3, 16}, {"D", 7, 11}};
        return chains_to_csv(mh_sample(data, 20000, 4, 11));
    });

    if (!g_ok) {
        std::fprintf(stderr, "FAIL: serial and parallel results differ\n");
        return 1;
    }
    std::puts("all kernels thread-count invariant");
    return 0;
}
