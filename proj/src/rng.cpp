#include "qoct/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace qoct {

namespace {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// lgamma is not guaranteed bit-stable across libm versions; Stirling with
// correction terms is, and is plenty accurate for the rejection test.
double log_factorial(double k) {
    if (k < 10.0) {
        double r = 0.0;
        for (int i = 2; i <= static_cast<int>(k); ++i)
            r += std::log(static_cast<double>(i));
        return r;
    }
    double x = k + 1.0;
    return (x - 0.5) * std::log(x) - x + 0.9189385332046727 + 1.0 / (12.0 * x) - 1.0 / (360.0 * x * x * x);
}

} // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t index) {
    // Decorrelate the two keys before using splitmix as the stream.
    std::uint64_t s = seed ^ 0xA0761D6478BD642FULL;
    (void)splitmix64(s);
    s ^= index * 0xE7037ED1A0B428DBULL + 0x8EBC6AF09C88C6E3ULL;
    (void)splitmix64(s);
    state_ = s;
}

std::uint64_t CounterRng::next_u64() { return splitmix64(state_); }

double CounterRng::next_unit() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t poisson_sample(double mean, CounterRng& rng) {
    if (!(mean >= 0.0) || !std::isfinite(mean))
        throw std::invalid_argument("poisson_sample: mean must be finite and >= 0");
    if (mean == 0.0)
        return 0;
    if (mean < 30.0) {
        // Knuth: count uniforms until their product drops below exp(-mean).
        const double limit = std::exp(-mean);
        std::uint64_t k = 0;
        double p = 1.0;
        for (;;) {
            p *= rng.next_unit();
            if (p <= limit)
                return k;
            ++k;
        }
    }
    // PTRS (Hormann 1993), exact rejection sampler for large means.
    const double b = 0.931 + 2.53 * std::sqrt(mean);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    const double log_mean = std::log(mean);
    for (;;) {
        double u = rng.next_unit() - 0.5;
        double v = rng.next_unit();
        double us = 0.5 - std::fabs(u);
        double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= v_r)
            return static_cast<std::uint64_t>(kf);
        if (kf < 0.0 || (us < 0.013 && v > us))
            continue;
        if (std::log(v * inv_alpha / (a / (us * us) + b)) <= kf * log_mean - mean - log_factorial(kf))
            return static_cast<std::uint64_t>(kf);
    }
}

} // namespace qoct
