#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include <mk/rng.hpp>
#include <mk/weight.hpp>

// Brute-force reference implementations, written straight from the defining
// formulas with independent double loops. Deliberately O(N^2): the library
// must agree with these, not share their code paths.

namespace oracle {

using mk::Sequence;

inline bool rel_close(double a, double b, double tol) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) <= tol * scale;
}

inline Sequence brute_hardy(const Sequence& f) {
    Sequence out(f.size());
    for (std::size_t n = 0; n < f.size(); ++n) {
        long double s = 0.0L;
        for (std::size_t k = 0; k <= n; ++k) s += f[k];
        out[n] = static_cast<double>(s / static_cast<long double>(n + 1));
    }
    return out;
}

inline Sequence brute_maximal(const Sequence& f) {
    const Sequence h = brute_hardy(f);
    Sequence out(f.size());
    for (std::size_t n = 0; n < f.size(); ++n) {
        double best = 0.0;
        for (std::size_t m = n; m < f.size(); ++m) best = std::max(best, h[m]);
        out[n] = best;
    }
    return out;
}

inline double brute_ap(const Sequence& w, double p) {
    double best = 0.0;
    for (std::size_t n = 0; n < w.size(); ++n) {
        long double s1 = 0.0L, s2 = 0.0L;
        for (std::size_t k = 0; k <= n; ++k) {
            s1 += w[k];
            s2 += std::pow(w[k], -1.0 / (p - 1.0));
        }
        const double m = static_cast<double>(n + 1);
        const double q = static_cast<double>(s1 / m) *
                         std::pow(static_cast<double>(s2 / m), p - 1.0);
        best = std::max(best, q);
    }
    return best;
}

inline double brute_a1(const Sequence& w) {
    const Sequence mw = brute_maximal(w);
    double best = 0.0;
    for (std::size_t n = 0; n < w.size(); ++n) best = std::max(best, mw[n] / w[n]);
    return best;
}

inline double brute_ainf(const Sequence& w) {
    double best = 0.0;
    for (std::size_t n = 0; n < w.size(); ++n) {
        long double s = 0.0L, lg = 0.0L;
        for (std::size_t k = 0; k <= n; ++k) {
            s += w[k];
            lg += std::log(static_cast<long double>(w[k]));
        }
        const long double m = static_cast<long double>(n + 1);
        best = std::max(best, static_cast<double>((s / m) * std::exp(-lg / m)));
    }
    return best;
}

inline double brute_bp(const Sequence& w, double p, double tail = 0.0) {
    double best = 0.0;
    for (std::size_t n = 0; n < w.size(); ++n) {
        long double t = tail;
        for (std::size_t k = n; k < w.size(); ++k)
            t += w[k] / std::pow(static_cast<double>(k + 1), p);
        long double head = 0.0L;
        for (std::size_t k = 0; k <= n; ++k) head += w[k];
        const double np = std::pow(static_cast<double>(n + 1), p);
        best = std::max(best, static_cast<double>(np * t / head));
    }
    return best;
}

inline double brute_lp_norm(const Sequence& f, const Sequence& w, double p) {
    long double s = 0.0L;
    for (std::size_t i = 0; i < f.size(); ++i)
        s += w[i] * std::pow(std::abs(f[i]), p);
    return static_cast<double>(std::pow(s, 1.0L / p));
}

inline Sequence random_positive(std::size_t n, std::uint64_t seed, double lo = 1e-2,
                                double hi = 1e2) {
    mk::Rng rng(seed);
    Sequence v(n);
    for (double& x : v) x = rng.loguniform(lo, hi);
    return v;
}

} // namespace oracle
