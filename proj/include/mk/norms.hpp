#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "operators.hpp"
#include "weight.hpp"

// Truncated weight-class constants. Every supremum over window lengths n runs
// over 1 <= n <= N only, where N is the weight's length; reports carry N so a
// value is never quoted without its truncation. Ties in the maximizing window
// resolve to the smallest n.

namespace mk {

enum class NormKind { Ap, A1, Ainf, Bp };

inline const char* norm_kind_name(NormKind k) {
    switch (k) {
        case NormKind::Ap: return "ap";
        case NormKind::A1: return "a1";
        case NormKind::Ainf: return "ainf";
        case NormKind::Bp: return "bp";
    }
    return "?";
}

struct NormReport {
    NormKind kind = NormKind::Ap;
    double value = 0.0;
    std::size_t argmax_n = 0;          // 1-based window length attaining the max
    std::size_t n = 0;                 // truncation length N
    std::optional<double> p;           // absent for A1 / Ainf
    std::optional<std::vector<double>> per_n;
};

namespace detail {

template <typename PerWindow>
NormReport max_over_windows(NormKind kind, std::size_t n, std::optional<double> p,
                            bool keep_per_window, PerWindow&& quantity) {
    NormReport rep;
    rep.kind = kind;
    rep.n = n;
    rep.p = p;
    if (keep_per_window) rep.per_n.emplace();
    double best = -1.0;
    std::size_t best_n = 1;
    for (std::size_t i = 0; i < n; ++i) {
        const double q = quantity(i);
        if (keep_per_window) rep.per_n->push_back(q);
        if (q > best) {
            best = q;
            best_n = i + 1;
        }
    }
    rep.value = best;
    rep.argmax_n = best_n;
    return rep;
}

} // namespace detail

// [w]_{A_p} truncated: max_n (avg_{k<=n} w) * (avg_{k<=n} w^{-1/(p-1)})^{p-1}
inline NormReport ap_norm(const Weight& w, Exponent p, bool keep_per_window = false) {
    require_positive(w, "ap_norm");
    const std::size_t n = w.size();
    const double dp = p.dual_power(); // -1/(p-1)
    Sequence dual(n);
    for (std::size_t i = 0; i < n; ++i) dual[i] = std::pow(w.values[i], dp);
    const auto s1 = prefix_sums(w.values);
    const auto s2 = prefix_sums(dual);
    const double pm1 = p.value() - 1.0;
    return detail::max_over_windows(NormKind::Ap, n, p.value(), keep_per_window,
                                    [&](std::size_t i) {
                                        const double m = static_cast<double>(i) + 1.0;
                                        const double q =
                                            static_cast<double>(s1[i] / m) *
                                            std::pow(static_cast<double>(s2[i] / m), pm1);
                                        // each window is >= 1 by the power-mean
                                        // inequality; anything below is roundoff
                                        return std::max(q, 1.0);
                                    });
}

// [w]_{A_1} truncated: max_n M w(n) / w(n)
inline NormReport a1_norm(const Weight& w, bool keep_per_window = false) {
    require_positive(w, "a1_norm");
    const Sequence mw = maximal(w.values);
    return detail::max_over_windows(NormKind::A1, w.size(), std::nullopt, keep_per_window,
                                    [&](std::size_t i) { return mw[i] / w.values[i]; });
}

// [w]_{A_inf} truncated: max_n (avg_{k<=n} w) * exp(avg_{k<=n} log(1/w))
inline NormReport ainf_norm(const Weight& w, bool keep_per_window = false) {
    require_positive(w, "ainf_norm");
    const std::size_t n = w.size();
    Sequence logs(n);
    for (std::size_t i = 0; i < n; ++i) logs[i] = std::log(w.values[i]);
    const auto s1 = prefix_sums(w.values);
    const auto sl = prefix_sums(logs);
    return detail::max_over_windows(NormKind::Ainf, n, std::nullopt, keep_per_window,
                                    [&](std::size_t i) {
                                        const double m = static_cast<double>(i) + 1.0;
                                        const double q =
                                            static_cast<double>(s1[i] / m) *
                                            std::exp(-static_cast<double>(sl[i]) / m);
                                        // AM-GM floor, as in ap_norm
                                        return std::max(q, 1.0);
                                    });
}

// Tail sum_{k>n} k^{lambda-p} of a power weight, by Euler-Maclaurin; feeds the
// optional analytic tail of bp_constant. Requires p - lambda > 1.
inline double power_tail(double lambda, double p, std::size_t n) {
    const double s = p - lambda;
    if (!(s > 1.0))
        throw BadExponent("power_tail: requires p - lambda > 1 for convergence");
    const double m = static_cast<double>(n) + 1.0;
    const double ms = std::pow(m, -s);
    return std::pow(m, 1.0 - s) / (s - 1.0) + 0.5 * ms + s * ms / (12.0 * m) -
           s * (s + 1.0) * (s + 2.0) * ms / (720.0 * m * m * m);
}

// Truncated B_p constant: max_n n^p (sum_{k=n}^{N} w(k)/k^p + tail) / sum_{k<=n} w(k).
// `tail` is an optional analytic estimate of sum_{k>N} w(k)/k^p; with tail = 0
// the value is the bare truncation and is a lower bound for the full constant.
inline NormReport bp_constant(const Weight& w, Exponent p, double tail = 0.0,
                              bool keep_per_window = false) {
    if (!(tail >= 0.0) || !std::isfinite(tail))
        throw UsageError("bp_constant: tail must be finite and >= 0");
    const std::size_t n = w.size();
    const double pv = p.value();
    // suffix sums of w(k)/k^p
    std::vector<long double> suffix(n + 1, static_cast<long double>(tail));
    for (std::size_t i = n; i-- > 0;)
        suffix[i] = suffix[i + 1] + static_cast<long double>(w.values[i]) /
                                        static_cast<long double>(std::pow(static_cast<double>(i + 1), pv));
    const auto head = prefix_sums(w.values);
    return detail::max_over_windows(NormKind::Bp, n, pv, keep_per_window, [&](std::size_t i) {
        if (head[i] <= 0.0L)
            throw ZeroPrefixSum("bp_constant: weight prefix sum through entry " +
                                std::to_string(i + 1) + " is zero");
        const double m = static_cast<double>(i) + 1.0;
        return static_cast<double>(std::pow(m, pv) * static_cast<double>(suffix[i]) /
                                   static_cast<double>(head[i]));
    });
}

// w^{1-p'} entrywise. Windowed identity: the A_{p'} quantity of the dual
// weight equals the A_p quantity of w raised to p'-1, window by window.
inline Weight dual_weight(const Weight& w, Exponent p) {
    require_positive(w, "dual_weight");
    Sequence out(w.size());
    const double dp = p.dual_power();
    for (std::size_t i = 0; i < w.size(); ++i) out[i] = std::pow(w.values[i], dp);
    return Weight(std::move(out), w.label.empty() ? "" : "dual(" + w.label + ")");
}

// Asymptotic A_p constant of the power weight k^lambda:
// (1/(1+lambda)) * ((p-1)/(p-lambda-1))^(p-1), for -1 < lambda < p-1.
inline double power_phi(Exponent p, double lambda) {
    if (!(lambda > -1.0) || !(lambda < p.value() - 1.0))
        throw LambdaOutOfRange("power_phi: lambda must lie in (-1, p-1), got " +
                               std::to_string(lambda));
    const double pm1 = p.value() - 1.0;
    return (1.0 / (1.0 + lambda)) * std::pow(pm1 / (pm1 - lambda), pm1);
}

// w1 * w2^{1-p}. The composition of two A_1 weights lands in A_p with
// [result]_{A_p} <= [w1]_{A_1} [w2]_{A_1}^{p-1}; the bound holds window by
// window for the truncated constants.
inline Weight factor_compose(const Weight& w1, const Weight& w2, Exponent p) {
    require_same_length(w1.size(), w2.size(), "factor_compose");
    require_positive(w1, "factor_compose");
    require_positive(w2, "factor_compose");
    Sequence out(w1.size());
    const double e = 1.0 - p.value();
    for (std::size_t i = 0; i < w1.size(); ++i)
        out[i] = w1.values[i] * std::pow(w2.values[i], e);
    return Weight(std::move(out));
}

// w1^alpha * w2^{1-alpha}, alpha in (0, 1]. Log-convexity of the windowed
// quantities gives [result]_{A_p} <= [w1]_{A_p}^alpha [w2]_{A_p}^{1-alpha}.
inline Weight interpolate_weights(const Weight& w1, const Weight& w2, double alpha) {
    if (!(alpha > 0.0) || alpha > 1.0 || !std::isfinite(alpha))
        throw AlphaOutOfRange("interpolate_weights: alpha must lie in (0, 1], got " +
                              std::to_string(alpha));
    require_same_length(w1.size(), w2.size(), "interpolate_weights");
    require_positive(w1, "interpolate_weights");
    require_positive(w2, "interpolate_weights");
    Sequence out(w1.size());
    for (std::size_t i = 0; i < w1.size(); ++i)
        out[i] = std::pow(w1.values[i], alpha) * std::pow(w2.values[i], 1.0 - alpha);
    return Weight(std::move(out));
}

// [w]_{A_p} over a strictly increasing grid of exponents; the values are
// nonincreasing in p (the classes grow with p).
inline std::vector<NormReport> ap_norm_profile(const Weight& w, const std::vector<double>& p_grid,
                                               bool keep_per_window = false) {
    if (p_grid.empty())
        throw UsageError("ap_norm_profile: empty exponent grid");
    for (std::size_t i = 0; i < p_grid.size(); ++i) {
        if (!(p_grid[i] > 1.0) || !std::isfinite(p_grid[i]))
            throw BadExponent("ap_norm_profile: grid entries must be finite and > 1");
        if (i > 0 && !(p_grid[i] > p_grid[i - 1]))
            throw BadExponent("ap_norm_profile: grid must be strictly increasing");
    }
    std::vector<NormReport> out;
    out.reserve(p_grid.size());
    for (double p : p_grid) out.push_back(ap_norm(w, Exponent(p), keep_per_window));
    return out;
}

} // namespace mk
