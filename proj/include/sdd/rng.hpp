#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace sdd {

// Deterministic random stream. All samplers are implemented on top of the
// raw mt19937_64 output so that a (seed, call sequence) pair reproduces the
// same draws on every run.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    // Uniform integer in [0, n), rejection sampled to avoid modulo bias.
    int uniform_int(int n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % static_cast<std::uint64_t>(n);
        std::uint64_t x;
        do {
            x = eng_();
        } while (x >= limit);
        return static_cast<int>(x % static_cast<std::uint64_t>(n));
    }

    // Box-Muller; one fresh pair per call, the second value is discarded to
    // keep the stream position independent of call interleaving.
    double normal(double mean, double sd) {
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
        return mean + sd * z;
    }

    // Product-of-uniforms Poisson; means above 500 are split in half and
    // summed so exp(-mean) never underflows.
    int poisson(double mean) {
        if (mean <= 0.0) return 0;
        if (mean > 500.0) {
            return poisson(mean / 2.0) + poisson(mean - mean / 2.0);
        }
        const double limit = std::exp(-mean);
        int k = 0;
        double p = 1.0;
        do {
            p *= uniform01();
            if (p < limit) break;
            ++k;
        } while (true);
        return k;
    }

private:
    std::mt19937_64 eng_;
};

} // namespace sdd
