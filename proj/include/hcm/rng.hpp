#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace hcm {

// Counter-based splittable generator: a stream is keyed by (seed, path...) so
// parallel consumers get independent, schedule-invariant streams. Each draw
// hashes key + counter with the SplitMix64 finalizer.
class Rng {
public:
    Rng(uint64_t seed, std::initializer_list<uint64_t> path) {
        key_ = mix(seed + 0x9e3779b97f4a7c15ull);
        for (uint64_t p : path) key_ = mix(key_ ^ mix(p + 0x9e3779b97f4a7c15ull));
    }

    uint64_t next() {
        ctr_ += 0x9e3779b97f4a7c15ull;
        return mix(key_ ^ ctr_);
    }

    // Uniform on (0,1), never exactly 0 or 1.
    double uniform() {
        return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform(), u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    int bernoulli(double p) { return uniform() < p ? 1 : 0; }

    // Marsaglia-Tsang for shape >= 1; boosted for shape < 1.
    double gamma(double shape) {
        if (shape < 1.0) {
            double u = uniform();
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        double d = shape - 1.0 / 3.0;
        double c = 1.0 / std::sqrt(9.0 * d);
        while (true) {
            double x = normal();
            double v = 1.0 + c * x;
            if (v <= 0.0) continue;
            v = v * v * v;
            double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
                return d * v;
        }
    }

    double beta(double a, double b) {
        double x = gamma(a);
        double y = gamma(b);
        return x / (x + y);
    }

    double half_cauchy(double scale) {
        return scale * std::tan(1.5707963267948966 * uniform());
    }

private:
    static uint64_t mix(uint64_t z) {
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    uint64_t key_ = 0;
    uint64_t ctr_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// logit with the clamp used throughout estimation.
inline double logit(double p) {
    if (p < 1e-6) p = 1e-6;
    if (p > 1.0 - 1e-6) p = 1.0 - 1e-6;
    return std::log(p / (1.0 - p));
}

} // namespace hcm
