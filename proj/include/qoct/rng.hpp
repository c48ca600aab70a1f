#pragma once

#include <cstdint>

namespace qoct {

// Counter-based generator: the stream for bin `index` depends only on
// (seed, index), so parallel sampling is order-independent and reruns are
// bit-identical.
class CounterRng {
  public:
    CounterRng(std::uint64_t seed, std::uint64_t index);

    std::uint64_t next_u64();
    // Uniform in (0, 1), 53-bit, never exactly 0.
    double next_unit();

  private:
    std::uint64_t state_;
};

// Poisson sample with the given mean, deterministic in the stream.
// Knuth's product method below mean 30, Hormann's PTRS transformed rejection
// above. Throws on negative or non-finite mean.
std::uint64_t poisson_sample(double mean, CounterRng& rng);

} // namespace qoct
