#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "norms.hpp"
#include "operators.hpp"
#include "weight.hpp"

// Geometric-series smoothing of a sequence under repeated application of the
// maximal operator: iterate = sum_{s=0}^{S} T^s h / (2K)^s with T = M or M'.
// K is a caller-supplied bound for ||T||; the construction's guarantees hold
// whenever K really dominates the operator norm, and the iteration aborts
// with NonconvergentSeries when the computed terms show that it does not.

namespace mk {

struct RdfConfig {
    double K = 1.0;            // claimed operator-norm bound, > 0
    std::uint32_t max_terms = 16; // S: highest term index included
    double tail_tol = 0.0;     // early stop once a term norm drops below tail_tol * ||h||
};

struct RdfChecks {
    bool dominates_input = false;        // h <= iterate entrywise, exact
    bool norm_within_double = false;     // ||iterate|| <= 2 ||h|| (1 + 1e-9)
    std::optional<bool> a1_within_2k;    // [iterate]_{A_1} <= 2K (1 + a1_slack)(1 + 1e-9);
                                         // absent when the iterate has zero entries
};

struct RdfResult {
    Sequence iterate;
    std::vector<double> term_norms;      // term_norms[s] = ||T^s h|| / (2K)^s
    double tail_bound = 0.0;             // ||h|| 2^{-terms_used}, valid when K >= ||T||
    std::optional<NormReport> a1_report; // A_1 constant of the iterate (of w * iterate
                                         // for the dual variant); absent on zero entries
    double a1_slack = 0.0;               // measured truncation slack in the A_1 bound
    RdfChecks checks;
    double input_norm = 0.0;
    double iterate_norm = 0.0;
    double term_norm_sum = 0.0;          // triangle-inequality bound for iterate_norm
    std::uint32_t terms_used = 0;        // index of the last term actually added
    double norm_exponent = 0.0;          // p for the plain variant, p' for the dual
};

namespace detail {

inline void validate_rdf_config(const RdfConfig& cfg) {
    if (!std::isfinite(cfg.K) || cfg.K <= 0.0)
        throw UsageError("rdf: K must be finite and > 0");
    if (!std::isfinite(cfg.tail_tol) || cfg.tail_tol < 0.0)
        throw UsageError("rdf: tail_tol must be finite and >= 0");
}

// Shared driver. `dual` switches the operator between M and M', the norm
// exponent between p and p', and the A_1 report between iterate and
// w * iterate.
inline RdfResult rdf_run(const Sequence& h, const Weight& w, Exponent p, const RdfConfig& cfg,
                         bool dual) {
    validate_rdf_config(cfg);
    require_nonnegative(h, "rdf");
    require_same_length(h.size(), w.size(), "rdf");
    require_positive(w, "rdf");

    const std::size_t n = h.size();
    const double q = dual ? p.conjugate_value() : p.value();

    RdfResult res;
    res.norm_exponent = q;
    res.input_norm = lp_norm(h, w, q);
    res.iterate = h;
    res.term_norms.push_back(res.input_norm);

    auto step = [&](const Sequence& f) { return dual ? dual_maximal(f, w) : maximal(f); };

    Sequence cur = h;
    double factor = 1.0;
    int nondecay = 0;
    for (std::uint32_t s = 1; s <= cfg.max_terms; ++s) {
        cur = step(cur);
        factor /= 2.0 * cfg.K;
        const double tnorm = lp_norm(cur, w, q) * factor;
        const double prev = res.term_norms.back();
        res.term_norms.push_back(tnorm);
        for (std::size_t i = 0; i < n; ++i) res.iterate[i] += cur[i] * factor;
        res.terms_used = s;
        if (prev > 0.0 && tnorm >= prev) {
            if (++nondecay >= 3)
                throw NonconvergentSeries(
                    "rdf: term norms failed to decay for 3 consecutive terms (term " +
                    std::to_string(s) + "); K = " + std::to_string(cfg.K) +
                    " does not dominate the operator norm");
        } else {
            nondecay = 0;
        }
        if (tnorm == 0.0 || tnorm < cfg.tail_tol * res.input_norm) break;
    }

    res.tail_bound = std::ldexp(res.input_norm, -static_cast<int>(res.terms_used));
    res.iterate_norm = lp_norm(res.iterate, w, q);
    long double tsum = 0.0L;
    for (double t : res.term_norms) tsum += t;
    res.term_norm_sum = static_cast<double>(tsum);

    res.checks.dominates_input = true;
    for (std::size_t i = 0; i < n; ++i)
        if (res.iterate[i] < h[i]) res.checks.dominates_input = false;
    res.checks.norm_within_double =
        res.iterate_norm <= 2.0 * res.input_norm * (1.0 + 1e-9);

    bool positive = true;
    for (double x : res.iterate)
        if (x <= 0.0) positive = false;
    if (positive) {
        if (dual) {
            Sequence scaled(n);
            for (std::size_t i = 0; i < n; ++i) scaled[i] = w.values[i] * res.iterate[i];
            res.a1_report = a1_norm(Weight(std::move(scaled)));
        } else {
            res.a1_report = a1_norm(Weight(res.iterate));
        }
        // One more application of T bounds the A_1 defect of the truncated
        // series: T(iterate) <= 2K (iterate + next_term) entrywise, so the
        // A_1 constant is at most 2K (1 + max_n next_term(n)/iterate(n)).
        const Sequence next = step(cur);
        const double nfac = factor / (2.0 * cfg.K);
        double slack = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            slack = std::max(slack, next[i] * nfac / res.iterate[i]);
        res.a1_slack = slack;
        res.checks.a1_within_2k =
            res.a1_report->value <= 2.0 * cfg.K * (1.0 + slack) * (1.0 + 1e-9);
    }
    return res;
}

} // namespace detail

// iterate = sum_{s<=S} M^s h / (2K)^s, norms taken in l^p(w). Guarantees when
// K >= ||M||_{l^p(w)}: h <= iterate, ||iterate|| <= 2||h||, and the iterate's
// A_1 constant is at most 2K up to the reported truncation slack.
inline RdfResult rdf_iterate(const Sequence& h, const Weight& w, Exponent p,
                             const RdfConfig& cfg) {
    return detail::rdf_run(h, w, p, cfg, false);
}

// iterate = sum_{s<=S} (M')^s h / (2K)^s, norms taken in l^{p'}(w). Guarantees
// when K >= ||M'||_{l^{p'}(w)} mirror the plain variant, with the A_1 bound
// holding for w * iterate.
inline RdfResult rdf_dual_iterate(const Sequence& h, const Weight& w, Exponent p,
                                  const RdfConfig& cfg) {
    return detail::rdf_run(h, w, p, cfg, true);
}

} // namespace mk
