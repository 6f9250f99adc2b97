#pragma once

#include <cstdint>
#include <random>

namespace sustain {

// Portable Gaussian source: std::mt19937_64 (fully specified by the C++
// standard) feeding a Marsaglia polar transform implemented here, so the
// same seed yields the same variates on every conforming platform.
// std::normal_distribution is avoided because its algorithm is
// implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform on [0, 1) with 53 random bits.
    double uniform();

    double normal();

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace sustain
