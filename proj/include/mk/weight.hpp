#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

// Core domain types. Index convention throughout the library: math indices
// n = 1..N map to vector positions 0..N-1, and every reported index is 1-based.

namespace mk {

using Sequence = std::vector<double>;

// Integrability exponent p with 1 < p < inf. Derived exponents are computed
// from 1/(p-1) so that conjugate pairs stay consistent to the last ulp.
class Exponent {
public:
    explicit Exponent(double p) : p_(p) {
        if (!std::isfinite(p) || p <= 1.0)
            throw BadExponent("p must be finite and > 1, got " + std::to_string(p));
    }

    [[nodiscard]] double value() const noexcept { return p_; }

    // p' = p/(p-1), the conjugate exponent
    [[nodiscard]] double conjugate_value() const noexcept { return p_ / (p_ - 1.0); }
    [[nodiscard]] Exponent conjugate() const { return Exponent(conjugate_value()); }

    // 1 - p' = -1/(p-1), the power that turns w into its dual weight
    [[nodiscard]] double dual_power() const noexcept { return -1.0 / (p_ - 1.0); }

private:
    double p_;
};

// Nonnegative weight sequence w(1..N). Entries must be finite and >= 0;
// operations that need strict positivity check it themselves.
struct Weight {
    Sequence values;
    std::string label;

    explicit Weight(Sequence v, std::string lab = "") : values(std::move(v)), label(std::move(lab)) {
        if (values.empty())
            throw TooShort("weight must contain at least one entry");
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (!std::isfinite(values[i]) || values[i] < 0.0)
                throw UsageError("weight entry " + std::to_string(i + 1) +
                                 " must be finite and nonnegative");
        }
    }

    [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
};

inline void require_positive(const Weight& w, const char* what) {
    for (std::size_t i = 0; i < w.values.size(); ++i)
        if (w.values[i] <= 0.0)
            throw ZeroWeightEntry(std::string(what) + ": entry " + std::to_string(i + 1) +
                                  " must be strictly positive");
}

inline void require_nonnegative(const Sequence& f, const char* what) {
    for (std::size_t i = 0; i < f.size(); ++i)
        if (!std::isfinite(f[i]) || f[i] < 0.0)
            throw UsageError(std::string(what) + ": entry " + std::to_string(i + 1) +
                             " must be finite and nonnegative");
}

inline void require_same_length(std::size_t a, std::size_t b, const char* what) {
    if (a != b)
        throw LengthMismatch(std::string(what) + ": lengths " + std::to_string(a) +
                             " and " + std::to_string(b) + " differ");
}

// Running prefix sums accumulated in extended precision. prefix[i] holds
// the sum of the first i+1 entries.
inline std::vector<long double> prefix_sums(const Sequence& v) {
    std::vector<long double> out(v.size());
    long double acc = 0.0L;
    for (std::size_t i = 0; i < v.size(); ++i) {
        acc += v[i];
        out[i] = acc;
    }
    return out;
}

} // namespace mk
