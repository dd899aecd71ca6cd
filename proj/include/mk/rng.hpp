#pragma once

#include <cmath>
#include <cstdint>
#include <random>

// Seeded randomness with reproducible output. mt19937_64 itself is pinned by
// the standard; the distributions are hand-rolled because the std ones are
// implementation-defined and would break byte-identical reports.

namespace mk {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    // uniform in [0, 1), 53-bit resolution
    double unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // uniform in [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

    // log-uniform in [lo, hi), lo > 0
    double loguniform(double lo, double hi) {
        return std::exp(uniform(std::log(lo), std::log(hi)));
    }

    // uniform integer in [0, n)
    std::uint64_t below(std::uint64_t n) { return eng_() % n; }

    std::uint64_t raw() { return eng_(); }

private:
    std::mt19937_64 eng_;
};

} // namespace mk
