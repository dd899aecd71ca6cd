#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"
#include "weight.hpp"

// Averaging operators over initial segments, weighted norms, and a randomized
// operator-norm estimator. All operators act on nonnegative sequences of a
// fixed truncation length N and return sequences of the same length.

namespace mk {

// H f(n) = (1/n) sum_{k<=n} f(k)
inline Sequence hardy(const Sequence& f) {
    require_nonnegative(f, "hardy");
    const auto pre = prefix_sums(f);
    Sequence out(f.size());
    for (std::size_t i = 0; i < f.size(); ++i)
        out[i] = static_cast<double>(pre[i] / static_cast<long double>(i + 1));
    return out;
}

// M f(n) = max_{n<=m<=N} (1/m) sum_{k<=m} f(k): the largest initial-segment
// average over windows containing n. Computed as a suffix maximum of the
// Hardy averages; the output is nonincreasing in n.
inline Sequence maximal(const Sequence& f) {
    Sequence avg = hardy(f);
    for (std::size_t i = avg.size() - 1; i-- > 0;)
        avg[i] = std::max(avg[i], avg[i + 1]);
    return avg;
}

// M^w f(n) = max_{n<=m<=N} (1/W(m)) sum_{s<=m} w(s) f(s), W(m) = sum_{s<=m} w(s)
inline Sequence weighted_maximal(const Sequence& f, const Weight& w) {
    require_nonnegative(f, "weighted_maximal");
    require_same_length(f.size(), w.size(), "weighted_maximal");
    const std::size_t n = f.size();
    Sequence out(n);
    long double num = 0.0L, den = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
        num += static_cast<long double>(w.values[i]) * f[i];
        den += w.values[i];
        if (den <= 0.0L)
            throw ZeroPrefixSum("weighted_maximal: weight prefix sum through entry " +
                                std::to_string(i + 1) + " is zero");
        out[i] = static_cast<double>(num / den);
    }
    for (std::size_t i = n - 1; i-- > 0;)
        out[i] = std::max(out[i], out[i + 1]);
    return out;
}

// M' h = M(w h) / w, the companion of M under the pairing sum w f g
inline Sequence dual_maximal(const Sequence& h, const Weight& w) {
    require_nonnegative(h, "dual_maximal");
    require_same_length(h.size(), w.size(), "dual_maximal");
    require_positive(w, "dual_maximal");
    Sequence wh(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) wh[i] = w.values[i] * h[i];
    Sequence out = maximal(wh);
    for (std::size_t i = 0; i < h.size(); ++i) out[i] /= w.values[i];
    return out;
}

// G g = (M(g^{1/gamma} w) / w)^gamma with gamma in (0, 1]. gamma = 1 reduces
// exactly to M'.
inline Sequence g_operator(const Sequence& g, const Weight& w, double gamma) {
    if (!(gamma > 0.0) || gamma > 1.0 || !std::isfinite(gamma))
        throw GammaOutOfRange("g_operator: gamma must lie in (0, 1], got " + std::to_string(gamma));
    require_nonnegative(g, "g_operator");
    require_same_length(g.size(), w.size(), "g_operator");
    Sequence lifted(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
        lifted[i] = (gamma == 1.0) ? g[i] : std::pow(g[i], 1.0 / gamma);
    Sequence out = dual_maximal(lifted, w);
    if (gamma != 1.0)
        for (double& x : out) x = std::pow(x, gamma);
    return out;
}

// || f ||_{l^p(w)} = (sum w |f|^p)^{1/p}, p >= 1
inline double lp_norm(const Sequence& f, const Weight& w, double p) {
    if (!std::isfinite(p) || p < 1.0)
        throw BadExponent("lp_norm: p must be >= 1, got " + std::to_string(p));
    require_same_length(f.size(), w.size(), "lp_norm");
    long double acc = 0.0L;
    for (std::size_t i = 0; i < f.size(); ++i)
        acc += static_cast<long double>(w.values[i]) *
               static_cast<long double>(std::pow(std::fabs(f[i]), p));
    return static_cast<double>(std::pow(acc, static_cast<long double>(1.0 / p)));
}

enum class OperatorKind { Hardy, Maximal, WeightedMaximal, DualMaximal, GOperator };

inline const char* operator_name(OperatorKind op) {
    switch (op) {
        case OperatorKind::Hardy: return "hardy";
        case OperatorKind::Maximal: return "maximal";
        case OperatorKind::WeightedMaximal: return "weighted-maximal";
        case OperatorKind::DualMaximal: return "dual-maximal";
        case OperatorKind::GOperator: return "g";
    }
    return "?";
}

inline OperatorKind parse_operator(const std::string& name) {
    if (name == "hardy") return OperatorKind::Hardy;
    if (name == "maximal") return OperatorKind::Maximal;
    if (name == "weighted-maximal") return OperatorKind::WeightedMaximal;
    if (name == "dual-maximal") return OperatorKind::DualMaximal;
    if (name == "g") return OperatorKind::GOperator;
    throw UnsupportedOperator("unknown operator '" + name + "'");
}

// Best witness found for || op ||_{l^p(w)} = sup_{f >= 0} ||op f||/||f||.
// `value` is always a certified lower bound (it is an attained ratio);
// `is_certified_upper` marks a completed exhaustive small-N search, whose
// nested grid is refined until the value stabilizes and can be read as the
// norm itself.
struct OperatorNormEstimate {
    double value = 0.0;
    Sequence witness;
    std::string strategy;
    std::uint64_t evaluations = 0;
    bool is_certified_upper = false;
};

namespace detail {

struct RatioProblem {
    OperatorKind op;
    const Weight& w;
    double p;

    [[nodiscard]] Sequence apply(const Sequence& f) const {
        switch (op) {
            case OperatorKind::Hardy: return hardy(f);
            case OperatorKind::Maximal: return maximal(f);
            case OperatorKind::DualMaximal: return dual_maximal(f, w);
            default:
                throw UnsupportedOperator("norm estimation supports hardy, maximal, dual-maximal");
        }
    }

    [[nodiscard]] double ratio(const Sequence& f) const {
        const double den = lp_norm(f, w, p);
        if (den <= 0.0) return 0.0;
        return lp_norm(apply(f), w, p) / den;
    }
};

// Budgeted evaluation loop; keeps the best (ratio, witness, strategy) seen.
class RatioSearch {
public:
    RatioSearch(const RatioProblem& prob, std::uint64_t budget)
        : prob_(prob), budget_(budget) {}

    // nullopt once the budget is exhausted
    std::optional<double> eval(const Sequence& f, const char* strategy) {
        if (used_ >= budget_) return std::nullopt;
        ++used_;
        const double r = prob_.ratio(f);
        if (r > best_.value) {
            best_.value = r;
            best_.witness = f;
            best_.strategy = strategy;
        }
        return r;
    }

    [[nodiscard]] bool exhausted() const noexcept { return used_ >= budget_; }
    [[nodiscard]] std::uint64_t used() const noexcept { return used_; }
    [[nodiscard]] const OperatorNormEstimate& best() const noexcept { return best_; }

private:
    const RatioProblem& prob_;
    std::uint64_t budget_;
    std::uint64_t used_ = 0;
    OperatorNormEstimate best_;
};

inline void candidate_family(RatioSearch& search, const Weight& w, double p) {
    const std::size_t n = w.size();
    const double pp = p / (p - 1.0);

    // indicators of [1, m]; every m for small N, a log-spaced subset otherwise
    std::vector<std::size_t> cuts;
    if (n <= 64) {
        for (std::size_t m = 1; m <= n; ++m) cuts.push_back(m);
    } else {
        for (std::size_t m = 1; m < n; m = std::max(m + 1, m + m / 8)) cuts.push_back(m);
        cuts.push_back(n);
    }
    Sequence f(n, 0.0);
    std::size_t filled = 0;
    for (std::size_t m : cuts) {
        while (filled < m) f[filled++] = 1.0;
        if (!search.eval(f, "candidate_family")) return;
    }

    // the classical near-extremal direction w^{-p'/p}, plus w^{-1} which maps
    // dual-maximal back to a unit ratio
    Sequence g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = std::pow(w.values[i], -pp / p);
    if (!search.eval(g, "candidate_family")) return;
    for (std::size_t i = 0; i < n; ++i) g[i] = 1.0 / w.values[i];
    if (!search.eval(g, "candidate_family")) return;

    // unit basis vectors
    Sequence e(n, 0.0);
    for (std::size_t m : cuts) {
        e[m - 1] = 1.0;
        const bool more = search.eval(e, "candidate_family").has_value();
        e[m - 1] = 0.0;
        if (!more) return;
    }
}

// Multiplicative coordinate ascent: try f(k) <- f(k) * (1 +- delta), keep
// improving moves, halve delta after a sweep with no improvement, stop at
// delta < 1e-6. Acceptance is judged against this trajectory's own ratio.
inline void ascent_from(RatioSearch& search, Sequence cur, const char* strategy) {
    auto r0 = search.eval(cur, strategy);
    if (!r0) return;
    double cur_ratio = *r0;
    const std::size_t n = cur.size();
    double delta = 0.5;
    while (delta >= 1e-6 && !search.exhausted()) {
        bool improved = false;
        for (std::size_t i = 0; i < n && !search.exhausted(); ++i) {
            for (double dir : {1.0 + delta, 1.0 - delta}) {
                const double saved = cur[i];
                const double moved = saved * dir;
                if (moved <= 0.0 || !std::isfinite(moved)) continue;
                cur[i] = moved;
                const auto r = search.eval(cur, strategy);
                if (!r) { cur[i] = saved; return; }
                if (*r > cur_ratio) {
                    cur_ratio = *r;
                    improved = true;
                } else {
                    cur[i] = saved;
                }
            }
        }
        if (!improved) delta *= 0.5;
    }
}

inline void random_restart_ascent(RatioSearch& search, const Weight& w, std::uint64_t seed) {
    Rng rng(seed);
    const std::size_t n = w.size();
    while (!search.exhausted()) {
        Sequence f(n);
        for (std::size_t i = 0; i < n; ++i) f[i] = rng.loguniform(1e-2, 1e2);
        ascent_from(search, std::move(f), "random_restart_ascent");
    }
}

// Dense nested-grid search over the ray-normalized cone, N <= 3. The ratio is
// scale-invariant, so each chart fixes one coordinate at 1 and scans the rest
// over [0, 1]^d; refinement recenters on the chart's own best point until the
// value stabilizes. Returns false if the budget ran out mid-refinement.
inline bool exhaustive_small(RatioSearch& search, const RatioProblem& prob, std::size_t n) {
    const char* tag = "exhaustive_small";
    if (n == 1) return search.eval(Sequence{1.0}, tag).has_value();

    if (n == 2) {
        for (int chart = 0; chart < 2; ++chart) {
            auto make = [chart](double t) {
                return (chart == 0) ? Sequence{1.0, t} : Sequence{t, 1.0};
            };
            double center = 0.5, span = 0.5, best_t = 0.5, best_r = -1.0, prev = -1.0;
            for (int round = 0; round < 64; ++round) {
                const double lo = std::max(0.0, center - span);
                const double hi = std::min(1.0, center + span);
                const int pts = 33;
                for (int i = 0; i < pts; ++i) {
                    const double t = lo + (hi - lo) * i / (pts - 1);
                    const auto r = search.eval(make(t), tag);
                    if (!r) return false;
                    if (*r > best_r) { best_r = *r; best_t = t; }
                }
                if (round > 4 && best_r - prev <= 1e-13 * std::max(best_r, 1.0)) break;
                prev = best_r;
                center = best_t;
                span *= 0.25;
            }
        }
        return true;
    }

    // n == 3: three charts, nested 2-d grids
    (void)prob;
    for (int chart = 0; chart < 3; ++chart) {
        const std::size_t ia = (chart == 0) ? 1 : 0;
        const std::size_t ib = (chart == 2) ? 1 : 2;
        double ca = 0.5, cb = 0.5, span = 0.5;
        double best_a = 0.5, best_b = 0.5, best_r = -1.0, prev = -1.0;
        for (int round = 0; round < 64; ++round) {
            const double alo = std::max(0.0, ca - span), ahi = std::min(1.0, ca + span);
            const double blo = std::max(0.0, cb - span), bhi = std::min(1.0, cb + span);
            const int pts = (round == 0) ? 33 : 17;
            for (int i = 0; i < pts; ++i)
                for (int j = 0; j < pts; ++j) {
                    Sequence f(3);
                    f[chart] = 1.0;
                    f[ia] = alo + (ahi - alo) * i / (pts - 1);
                    f[ib] = blo + (bhi - blo) * j / (pts - 1);
                    const auto r = search.eval(f, tag);
                    if (!r) return false;
                    if (*r > best_r) { best_r = *r; best_a = f[ia]; best_b = f[ib]; }
                }
            if (round > 5 && best_r - prev <= 1e-13 * std::max(best_r, 1.0)) break;
            prev = best_r;
            ca = best_a;
            cb = best_b;
            span *= 0.35;
        }
    }
    return true;
}

} // namespace detail

// Randomized lower-bound search for the operator norm on l^p(w), op in
// {hardy, maximal, dual-maximal}. Runs the fixed candidate family, then
// multiplicative coordinate ascent from seeded random restarts; for N <= 3 a
// nested dense grid replaces the restarts and certifies the value. The
// returned value is recomputed from the stored witness, so
// value == ||op(witness)|| / ||witness|| exactly as evaluated.
inline OperatorNormEstimate estimate_operator_norm(OperatorKind op, const Weight& w,
                                                   Exponent p, std::uint64_t budget,
                                                   std::uint64_t seed) {
    if (op != OperatorKind::Hardy && op != OperatorKind::Maximal &&
        op != OperatorKind::DualMaximal)
        throw UnsupportedOperator(std::string("norm estimation does not support '") +
                                  operator_name(op) + "'");
    if (budget == 0)
        throw BudgetTooSmall("estimate_operator_norm: budget must be >= 1");
    require_positive(w, "estimate_operator_norm");

    detail::RatioProblem prob{op, w, p.value()};
    detail::RatioSearch search(prob, budget);

    detail::candidate_family(search, w, p.value());
    bool certified = false;
    if (w.size() <= 3)
        certified = detail::exhaustive_small(search, prob, w.size());
    else
        detail::random_restart_ascent(search, w, seed);

    OperatorNormEstimate est = search.best();
    est.evaluations = search.used();
    est.is_certified_upper = certified;
    if (!est.witness.empty())
        est.value = prob.ratio(est.witness);
    return est;
}

} // namespace mk
