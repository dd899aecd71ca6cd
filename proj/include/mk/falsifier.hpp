#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"
#include "weight.hpp"

// Evaluator and randomized falsifier for a family of discrete Hardy-type
// inequalities. Each form compares
//   lhs = sum_k lam(k) L[1,k]^{alpha-1} (avg of v)^beta
//   rhs = (beta/(beta-alpha))^beta sum_k lam(k) L[1,k]^{alpha-1} v(k)^beta
// where L[1,k] is the running sum of lam and the average is over [1,k] for
// the plain forms and over [1,k-1] for the shifted ones (k = 1 term is 0).
// The hypotheses are 0 < alpha < 1 together with beta < 0 or beta >= 1; the
// "_pos"/"_neg" unweighted forms additionally fix beta - alpha = +1/-1 and
// lam == 1. `violated` means lhs > rhs, i.e. the naive discretization of the
// continuous inequality fails on this instance.

namespace mk {

enum class InequalityForm { KL1, KL1UnweightedPos, KL1UnweightedNeg, KA1, KA1Pos, KA1Neg };

inline const char* form_name(InequalityForm f) {
    switch (f) {
        case InequalityForm::KL1: return "kl1";
        case InequalityForm::KL1UnweightedPos: return "kl1_unweighted_pos";
        case InequalityForm::KL1UnweightedNeg: return "kl1_unweighted_neg";
        case InequalityForm::KA1: return "ka1";
        case InequalityForm::KA1Pos: return "ka1_pos";
        case InequalityForm::KA1Neg: return "ka1_neg";
    }
    return "?";
}

inline InequalityForm parse_form(const std::string& name) {
    if (name == "kl1") return InequalityForm::KL1;
    if (name == "kl1_unweighted_pos") return InequalityForm::KL1UnweightedPos;
    if (name == "kl1_unweighted_neg") return InequalityForm::KL1UnweightedNeg;
    if (name == "ka1") return InequalityForm::KA1;
    if (name == "ka1_pos") return InequalityForm::KA1Pos;
    if (name == "ka1_neg") return InequalityForm::KA1Neg;
    throw BadForm("unknown inequality form '" + name + "'");
}

inline bool form_is_shifted(InequalityForm f) {
    return f == InequalityForm::KA1 || f == InequalityForm::KA1Pos ||
           f == InequalityForm::KA1Neg;
}

inline bool form_is_unweighted(InequalityForm f) {
    return f != InequalityForm::KL1 && f != InequalityForm::KA1;
}

struct InequalityInstance {
    InequalityForm form = InequalityForm::KL1;
    double alpha = 0.5;
    double beta = 1.5;
    Sequence v;
    std::optional<Sequence> lam; // general forms only; absent means lam == 1
};

struct EvalSides {
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0; // lhs - rhs
    bool violated = false;
};

namespace detail {

inline void validate_instance(const InequalityInstance& inst) {
    if (inst.v.empty()) throw TooShort("eval_sides: v must have at least one entry");
    if (!std::isfinite(inst.alpha) || !(inst.alpha > 0.0) || !(inst.alpha < 1.0))
        throw HypothesisViolation("eval_sides: alpha must lie in (0, 1), got " +
                                  std::to_string(inst.alpha));
    if (!std::isfinite(inst.beta) || (inst.beta >= 0.0 && inst.beta < 1.0))
        throw HypothesisViolation("eval_sides: beta must satisfy beta < 0 or beta >= 1, got " +
                                  std::to_string(inst.beta));
    const double rel = inst.beta - inst.alpha;
    switch (inst.form) {
        case InequalityForm::KL1UnweightedPos:
        case InequalityForm::KA1Pos:
            if (std::abs(rel - 1.0) > 1e-12)
                throw HypothesisViolation(std::string("eval_sides: form ") +
                                          form_name(inst.form) + " requires beta - alpha = 1");
            break;
        case InequalityForm::KL1UnweightedNeg:
        case InequalityForm::KA1Neg:
            if (std::abs(rel + 1.0) > 1e-12)
                throw HypothesisViolation(std::string("eval_sides: form ") +
                                          form_name(inst.form) + " requires beta - alpha = -1");
            break;
        default: break;
    }
    if (form_is_unweighted(inst.form) && inst.lam.has_value())
        throw UsageError(std::string("eval_sides: form ") + form_name(inst.form) +
                         " is unweighted; lambda is not accepted");
    if (inst.lam) {
        require_same_length(inst.lam->size(), inst.v.size(), "eval_sides");
        require_positive(Weight(*inst.lam, "lambda"), "eval_sides");
    }
    require_nonnegative(inst.v, "eval_sides");
    if (inst.beta < 0.0)
        for (double x : inst.v)
            if (x <= 0.0)
                throw HypothesisViolation("eval_sides: beta < 0 requires strictly positive v");
}

} // namespace detail

inline EvalSides eval_sides(const InequalityInstance& inst) {
    detail::validate_instance(inst);
    const std::size_t n = inst.v.size();
    const bool shifted = form_is_shifted(inst.form);
    const double cf = std::pow(inst.beta / (inst.beta - inst.alpha), inst.beta);

    long double lam_sum = 0.0L;  // L[1,k]
    long double lamv_sum = 0.0L; // sum of lam v over [1,k]
    long double lhs = 0.0L;
    long double rhs = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
        const double lam_k = inst.lam ? (*inst.lam)[i] : 1.0;
        const long double prev_lam = lam_sum;
        const long double prev_lamv = lamv_sum;
        lam_sum += lam_k;
        lamv_sum += static_cast<long double>(lam_k) * inst.v[i];
        const double wgt =
            lam_k * std::pow(static_cast<double>(lam_sum), inst.alpha - 1.0);
        rhs += static_cast<long double>(wgt) * std::pow(inst.v[i], inst.beta);
        if (shifted && i == 0) continue; // empty average; the k = 1 term is 0
        const double avg = shifted ? static_cast<double>(prev_lamv / prev_lam)
                                   : static_cast<double>(lamv_sum / lam_sum);
        lhs += static_cast<long double>(wgt) * std::pow(avg, inst.beta);
    }

    EvalSides out;
    out.lhs = static_cast<double>(lhs);
    out.rhs = cf * static_cast<double>(rhs);
    out.margin = out.lhs - out.rhs;
    out.violated = out.lhs > out.rhs;
    return out;
}

// Smallest zeta with L[1,k] <= zeta L[1,k-1] over 2 <= k <= N.
inline double zeta_constant(const Sequence& lam) {
    if (lam.size() < 2) throw TooShort("zeta_constant: need at least 2 entries");
    require_positive(Weight(lam, "lambda"), "zeta_constant");
    long double acc = lam[0];
    double best = 0.0;
    for (std::size_t i = 1; i < lam.size(); ++i) {
        const long double prev = acc;
        acc += lam[i];
        best = std::max(best, static_cast<double>(acc / prev));
    }
    return best;
}

struct SearchResult {
    InequalityInstance best;
    EvalSides eval;
    std::uint64_t evaluations = 0;
    std::uint64_t restarts = 0;
};

// Randomized hunt for instances with lhs > rhs: log-uniform restarts followed
// by multiplicative single-coordinate ascent on v, with v rescaled to mean 1
// after every move (both sides are homogeneous of degree beta in v, so the
// margin's sign is scale-invariant and normalizing keeps coordinates bounded).
inline SearchResult violation_search(InequalityForm form, std::size_t n, double alpha,
                                     double beta, std::uint64_t budget, std::uint64_t seed) {
    if (budget == 0) throw BudgetTooSmall("violation_search: budget must be >= 1");
    if (n == 0) throw TooShort("violation_search: n must be >= 1");

    Rng rng(seed);
    std::uint64_t used = 0;

    auto normalize = [n](Sequence v) {
        long double s = 0.0L;
        for (double x : v) s += x;
        const double scale = static_cast<double>(n / s);
        for (double& x : v) x *= scale;
        return v;
    };
    auto make_instance = [&](Sequence v) {
        InequalityInstance inst;
        inst.form = form;
        inst.alpha = alpha;
        inst.beta = beta;
        inst.v = std::move(v);
        return inst;
    };

    SearchResult res;
    bool have_best = false;
    auto eval_candidate = [&](Sequence v) -> std::optional<EvalSides> {
        if (used >= budget) return std::nullopt;
        ++used;
        InequalityInstance inst = make_instance(normalize(std::move(v)));
        EvalSides ev = eval_sides(inst);
        if (!have_best || ev.margin > res.eval.margin) {
            have_best = true;
            res.best = std::move(inst);
            res.eval = ev;
        }
        return ev;
    };

    while (used < budget) {
        Sequence v(n);
        for (double& x : v) x = rng.loguniform(1e-2, 1e2);
        ++res.restarts;
        auto cur = eval_candidate(v);
        if (!cur) break;
        double cur_margin = cur->margin;
        double step = 0.5;
        while (step >= 1e-6 && used < budget) {
            bool improved = false;
            for (std::size_t i = 0; i < n && used < budget; ++i) {
                for (double dir : {1.0 + step, 1.0 / (1.0 + step)}) {
                    if (used >= budget) break;
                    Sequence cand = v;
                    cand[i] *= dir;
                    auto ev = eval_candidate(cand);
                    if (ev && ev->margin > cur_margin) {
                        cur_margin = ev->margin;
                        v = std::move(cand);
                        improved = true;
                        break;
                    }
                }
            }
            if (!improved) step *= 0.5;
        }
    }
    res.evaluations = used;
    return res;
}

// The four bundled numeric instances, with the reference values they are
// compared against and the comparison tolerances. `printed_*` are recorded
// as displayed in the source material for these instances; eval_sides
// recomputes the sums exactly, and any disagreement beyond tolerance is
// reported rather than patched over.
struct ReferenceInstance {
    std::string title;
    InequalityInstance instance;
    double printed_lhs = 0.0;
    double printed_rhs = 0.0;
    double tol_lhs = 5e-4;
    double tol_rhs = 5e-4;
    bool printed_violated = false;
};

inline std::vector<ReferenceInstance> reference_instances() {
    std::vector<ReferenceInstance> out;
    {
        ReferenceInstance r;
        r.title = "plain average, beta - alpha = 1";
        r.instance.form = InequalityForm::KL1UnweightedPos;
        r.instance.alpha = 0.2;
        r.instance.beta = 1.2;
        r.instance.v = {100.0, 1.0, 1.0, 1.0};
        r.printed_lhs = 359.587;
        r.printed_rhs = 314.263;
        r.printed_violated = true;
        out.push_back(std::move(r));
    }
    {
        ReferenceInstance r;
        r.title = "plain average, beta - alpha = -1";
        r.instance.form = InequalityForm::KL1UnweightedNeg;
        r.instance.alpha = 0.1;
        r.instance.beta = -0.9;
        r.instance.v = {1.0, 5.0, 9.0, 13.0, 17.0};
        r.printed_lhs = 1.36913;
        r.printed_rhs = 1.3406;
        r.tol_lhs = 5e-6;
        r.printed_violated = true;
        out.push_back(std::move(r));
    }
    {
        ReferenceInstance r;
        r.title = "shifted average, beta - alpha = 1";
        r.instance.form = InequalityForm::KA1Pos;
        r.instance.alpha = 0.2;
        r.instance.beta = 1.2;
        r.instance.v = {100.0, 1.0, 1.0, 1.0};
        r.printed_lhs = 212.922;
        r.printed_rhs = 314.263;
        r.printed_violated = false;
        out.push_back(std::move(r));
    }
    {
        ReferenceInstance r;
        r.title = "shifted average, beta - alpha = -1";
        r.instance.form = InequalityForm::KA1Neg;
        r.instance.alpha = 0.1;
        r.instance.beta = -0.9;
        r.instance.v = {1.0, 5.0, 9.0, 13.0, 17.0};
        r.printed_lhs = 0.7743;
        r.printed_rhs = 1.3516;
        r.printed_violated = false;
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace mk
