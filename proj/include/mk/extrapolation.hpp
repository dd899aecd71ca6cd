#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "norms.hpp"
#include "operators.hpp"
#include "rdf.hpp"
#include "rng.hpp"
#include "weight.hpp"

// Moving weighted-norm inequalities between exponents. The two lemma checks
// verify the factorization bounds that drive the transfer; transfer_constant
// evaluates the resulting closed-form constants; extrapolation_verify runs
// the whole pipeline empirically on a corpus of test sequences.

namespace mk {

// phi0 describes the assumed dependence of the base-exponent operator bound
// on the weight constant: ||T f|| <= phi0([w]_{A_{p0}}) ||f||.
struct PhiDescriptor {
    enum class Form { Linear, Power, Constant };
    Form form = Form::Linear;
    double c = 1.0;
    double a = 1.0; // only meaningful for Form::Power

    double operator()(double x) const {
        switch (form) {
            case Form::Linear: return c * x;
            case Form::Power: return c * std::pow(x, a);
            case Form::Constant: return c;
        }
        return c;
    }

    std::string to_string() const {
        std::ostringstream os;
        switch (form) {
            case Form::Linear: os << "linear:c=" << c; break;
            case Form::Power: os << "power:c=" << c << ",a=" << a; break;
            case Form::Constant: os << "const:c=" << c; break;
        }
        return os.str();
    }
};

namespace detail {

inline double parse_phi_number(const std::string& item, const char* key) {
    const std::string prefix = std::string(key) + "=";
    if (item.rfind(prefix, 0) != 0)
        throw BadPhiDescriptor("phi descriptor: expected '" + prefix + "<number>', got '" +
                               item + "'");
    const std::string num = item.substr(prefix.size());
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(num, &pos);
    } catch (const std::exception&) {
        throw BadPhiDescriptor("phi descriptor: bad number '" + num + "'");
    }
    if (pos != num.size() || !std::isfinite(v))
        throw BadPhiDescriptor("phi descriptor: bad number '" + num + "'");
    return v;
}

inline std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = s.find(',', start);
        if (comma == std::string::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, comma - start));
        start = comma + 1;
    }
}

} // namespace detail

// Grammar: "linear:c=C" | "power:c=C,a=A" | "const:c=C" with C > 0, A >= 0.
inline PhiDescriptor parse_phi(const std::string& text) {
    const std::size_t colon = text.find(':');
    if (colon == std::string::npos)
        throw BadPhiDescriptor("phi descriptor: expected '<form>:<params>', got '" + text + "'");
    const std::string head = text.substr(0, colon);
    const auto items = detail::split_commas(text.substr(colon + 1));
    PhiDescriptor phi;
    if (head == "linear") {
        if (items.size() != 1)
            throw BadPhiDescriptor("phi descriptor: linear takes exactly c=");
        phi.form = PhiDescriptor::Form::Linear;
        phi.c = detail::parse_phi_number(items[0], "c");
    } else if (head == "power") {
        if (items.size() != 2)
            throw BadPhiDescriptor("phi descriptor: power takes c= and a=");
        phi.form = PhiDescriptor::Form::Power;
        phi.c = detail::parse_phi_number(items[0], "c");
        phi.a = detail::parse_phi_number(items[1], "a");
        if (phi.a < 0.0)
            throw BadPhiDescriptor("phi descriptor: power exponent a must be >= 0");
    } else if (head == "const") {
        if (items.size() != 1)
            throw BadPhiDescriptor("phi descriptor: const takes exactly c=");
        phi.form = PhiDescriptor::Form::Constant;
        phi.c = detail::parse_phi_number(items[0], "c");
    } else {
        throw BadPhiDescriptor("phi descriptor: unknown form '" + head + "'");
    }
    if (phi.c <= 0.0)
        throw BadPhiDescriptor("phi descriptor: c must be > 0");
    return phi;
}

struct TransferConstant {
    double p0 = 0.0;
    double p = 0.0;
    std::string regime; // "down" (p < p0), "up" (p > p0), "same"
    double K = 0.0;
    double ap_norm_value = 0.0;
    double value = 0.0;
};

// Closed-form constant for the transferred bound at exponent p, given the
// base bound phi0 at p0, the weight constant apw = [w]_{A_p}, and K:
//   down:  K >= ||M||_{l^p(w)},   value = 2^{(p0-p)/p0} phi0((2K)^{p0-p} apw)
//   up:    K >= ||M'||_{l^{p'}(w)}, value = 2^{(p-p0)/((p-1)p0)}
//                            phi0((2K)^{(p-p0)/(p-1)} apw^{(p0-1)/(p-1)})
//   same:  value = phi0(apw)
inline TransferConstant transfer_constant(Exponent p0e, Exponent pe, const PhiDescriptor& phi0,
                                          double K, double apw) {
    if (!std::isfinite(K) || K <= 0.0)
        throw UsageError("transfer_constant: K must be finite and > 0");
    if (!std::isfinite(apw) || apw <= 0.0)
        throw UsageError("transfer_constant: weight constant must be finite and > 0");
    const double p0 = p0e.value();
    const double p = pe.value();
    TransferConstant out;
    out.p0 = p0;
    out.p = p;
    out.K = K;
    out.ap_norm_value = apw;
    if (p < p0) {
        out.regime = "down";
        out.value = std::pow(2.0, (p0 - p) / p0) * phi0(std::pow(2.0 * K, p0 - p) * apw);
    } else if (p > p0) {
        out.regime = "up";
        const double theta = (p - p0) / (p - 1.0);
        out.value = std::pow(2.0, theta / p0) *
                    phi0(std::pow(2.0 * K, theta) * std::pow(apw, (p0 - 1.0) / (p - 1.0)));
    } else {
        out.regime = "same";
        out.value = phi0(apw);
    }
    return out;
}

struct LemmaCheckReport {
    std::string lemma; // "lstar" | "l1star"
    double lhs = 0.0;  // [u]_{A_{p0}} of the composed weight
    double rhs = 0.0;  // factorization bound
    double gap = 0.0;  // rhs - lhs
    bool holds = false;
    double a1_value = 0.0;     // A_1 constant entering the bound
    double base_ap_norm = 0.0; // [w]_{A_p}
    std::uint32_t terms_used = 0;
    std::string instance_digest; // FNV-1a over the full instance, for report identity
};

namespace detail {

struct Fnv1a {
    std::uint64_t h = 14695981039346656037ull;
    void feed_bytes(const void* data, std::size_t len) {
        const auto* b = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < len; ++i) {
            h ^= b[i];
            h *= 1099511628211ull;
        }
    }
    void feed(double x) { feed_bytes(&x, sizeof x); }
    void feed(std::uint64_t x) { feed_bytes(&x, sizeof x); }
    void feed(const std::string& s) { feed_bytes(s.data(), s.size()); }
    void feed(const Sequence& v) {
        feed(static_cast<std::uint64_t>(v.size()));
        for (double x : v) feed(x);
    }
    std::string hex() const {
        static const char* digits = "0123456789abcdef";
        std::string out(16, '0');
        std::uint64_t v = h;
        for (int i = 15; i >= 0; --i) {
            out[static_cast<std::size_t>(i)] = digits[v & 0xf];
            v >>= 4;
        }
        return out;
    }
};

inline std::string lemma_digest(const char* lemma, const Weight& w, const Sequence& h,
                                double p, double p0, const RdfConfig& cfg) {
    Fnv1a f;
    f.feed(std::string(lemma));
    f.feed(p);
    f.feed(p0);
    f.feed(cfg.K);
    f.feed(static_cast<std::uint64_t>(cfg.max_terms));
    f.feed(cfg.tail_tol);
    f.feed(w.values);
    f.feed(h);
    return f.hex();
}

} // namespace detail

// Checks [w g^{-(p0-p)}]_{A_{p0}} <= [g]_{A_1}^{p0-p} [w]_{A_p} for the
// smoothed iterate g built from h. Requires p < p0. The inequality is a
// theorem for any positive g with its own truncated A_1 constant, so `holds`
// should only fail on floating-point pathologies.
inline LemmaCheckReport lemma_lstar_check(const Weight& w, const Sequence& h, Exponent p,
                                          Exponent p0, const RdfConfig& cfg,
                                          double slack = 1e-9) {
    if (!(p.value() < p0.value()))
        throw ExponentOrder("lemma_lstar_check: requires p < p0, got p = " +
                            std::to_string(p.value()) + ", p0 = " + std::to_string(p0.value()));
    require_same_length(h.size(), w.size(), "lemma_lstar_check");
    for (std::size_t i = 0; i < h.size(); ++i)
        if (!(h[i] > 0.0) || !std::isfinite(h[i]))
            throw UsageError("lemma_lstar_check: test sequence must be strictly positive");

    const RdfResult rdf = rdf_iterate(h, w, p, cfg);
    const Sequence& g = rdf.iterate;

    const double diff = p0.value() - p.value();
    Sequence u(w.size());
    for (std::size_t i = 0; i < u.size(); ++i)
        u[i] = w.values[i] * std::pow(g[i], -diff);

    LemmaCheckReport rep;
    rep.lemma = "lstar";
    rep.lhs = ap_norm(Weight(std::move(u), "composed"), p0).value;
    rep.base_ap_norm = ap_norm(w, p).value;
    rep.a1_value = rdf.a1_report->value;
    rep.rhs = std::pow(rep.a1_value, diff) * rep.base_ap_norm;
    rep.gap = rep.rhs - rep.lhs;
    rep.holds = rep.lhs <= rep.rhs * (1.0 + slack);
    rep.terms_used = rdf.terms_used;
    rep.instance_digest = detail::lemma_digest("lstar", w, h, p.value(), p0.value(), cfg);
    return rep;
}

// Checks [w g^{theta}]_{A_{p0}} <= [w g]_{A_1}^{theta} [w]_{A_p}^{(p0-1)/(p-1)}
// with theta = (p-p0)/(p-1), for the dual iterate g. Requires p0 < p.
inline LemmaCheckReport lemma_l1star_check(const Weight& w, const Sequence& h, Exponent p,
                                           Exponent p0, const RdfConfig& cfg,
                                           double slack = 1e-9) {
    if (!(p0.value() < p.value()))
        throw ExponentOrder("lemma_l1star_check: requires p0 < p, got p0 = " +
                            std::to_string(p0.value()) + ", p = " + std::to_string(p.value()));
    require_same_length(h.size(), w.size(), "lemma_l1star_check");
    for (std::size_t i = 0; i < h.size(); ++i)
        if (!(h[i] > 0.0) || !std::isfinite(h[i]))
            throw UsageError("lemma_l1star_check: test sequence must be strictly positive");

    const RdfResult rdf = rdf_dual_iterate(h, w, p, cfg);
    const Sequence& g = rdf.iterate;

    const double theta = (p.value() - p0.value()) / (p.value() - 1.0);
    Sequence u(w.size());
    for (std::size_t i = 0; i < u.size(); ++i)
        u[i] = w.values[i] * std::pow(g[i], theta);

    LemmaCheckReport rep;
    rep.lemma = "l1star";
    rep.lhs = ap_norm(Weight(std::move(u), "composed"), p0).value;
    rep.base_ap_norm = ap_norm(w, p).value;
    rep.a1_value = rdf.a1_report->value; // A_1 constant of w * g
    rep.rhs = std::pow(rep.a1_value, theta) *
              std::pow(rep.base_ap_norm, (p0.value() - 1.0) / (p.value() - 1.0));
    rep.gap = rep.rhs - rep.lhs;
    rep.holds = rep.lhs <= rep.rhs * (1.0 + slack);
    rep.terms_used = rdf.terms_used;
    rep.instance_digest = detail::lemma_digest("l1star", w, h, p.value(), p0.value(), cfg);
    return rep;
}

// A family of (f, g) pairs for which ||f||_{l^{p0}(w)} <= phi0([w]) ||g||_{l^{p0}(w)}
// is assumed; the rescaling helpers below produce the derived families.
struct PairFamily {
    struct Pair {
        Sequence f;
        Sequence g;
    };
    std::vector<Pair> pairs;
    std::string description;
};

// (f, g) -> (f^r, g^r), r > 0. Moves a bound at exponent p0 to p0/r.
inline PairFamily corollary_rescale(const PairFamily& fam, double r) {
    if (!std::isfinite(r) || r <= 0.0)
        throw BadExponent("corollary_rescale: r must be finite and > 0, got " +
                          std::to_string(r));
    PairFamily out;
    out.description = fam.description + " ^" + std::to_string(r);
    out.pairs.reserve(fam.pairs.size());
    for (const auto& pr : fam.pairs) {
        require_nonnegative(pr.f, "corollary_rescale");
        require_nonnegative(pr.g, "corollary_rescale");
        PairFamily::Pair q;
        q.f.resize(pr.f.size());
        q.g.resize(pr.g.size());
        for (std::size_t i = 0; i < pr.f.size(); ++i) q.f[i] = std::pow(pr.f[i], r);
        for (std::size_t i = 0; i < pr.g.size(); ++i) q.g[i] = std::pow(pr.g[i], r);
        out.pairs.push_back(std::move(q));
    }
    return out;
}

// (f, g) -> (f^{p0/r}, g^{p0/r}): reduces an A_inf-weighted bound at p0 to a
// bound at the single exponent r > 1.
inline PairFamily corollary_ainf_reduce(const PairFamily& fam, double p0, Exponent r) {
    if (!std::isfinite(p0) || p0 <= 0.0)
        throw BadExponent("corollary_ainf_reduce: p0 must be finite and > 0, got " +
                          std::to_string(p0));
    return corollary_rescale(fam, p0 / r.value());
}

enum class TransferOperator { Identity, Hardy, Maximal };

inline const char* transfer_operator_name(TransferOperator t) {
    switch (t) {
        case TransferOperator::Identity: return "identity";
        case TransferOperator::Hardy: return "hardy";
        case TransferOperator::Maximal: return "maximal";
    }
    return "?";
}

inline TransferOperator parse_transfer_operator(const std::string& name) {
    if (name == "identity") return TransferOperator::Identity;
    if (name == "hardy") return TransferOperator::Hardy;
    if (name == "maximal") return TransferOperator::Maximal;
    throw UnsupportedOperator("verify: unknown operator '" + name +
                              "' (expected identity, hardy, or maximal)");
}

struct VerifyOptions {
    std::uint64_t budget = 2000; // per operator-norm estimate in stage 2
    std::uint64_t seed = 1;
    double safety = 1.5;  // multiplies each estimated K before prediction
    double slack = 1e-9;  // relative tolerance before a measurement counts as a violation
};

struct ExtrapolationReport {
    PhiDescriptor phi0; // fitted upper envelope, Form::Power
    struct Stage1Point {
        std::size_t weight_index = 0;
        double ap0 = 0.0;  // [w]_{A_{p0}}
        double ratio = 0.0; // max_f ||Tf|| / ||f|| over the corpus
    };
    std::vector<Stage1Point> stage1;
    struct Prediction {
        std::size_t weight_index = 0;
        double apw = 0.0;
        double K = 0.0;
        double predicted = 0.0;
        double measured = 0.0;
        bool violated = false;
        std::ptrdiff_t witness_corpus_index = -1; // corpus sequence attaining `measured`
    };
    std::vector<Prediction> predictions;
    std::vector<std::size_t> violations; // indices into `predictions`
    std::size_t skipped = 0;             // (weight, sequence) pairs with zero input norm
};

namespace detail {

inline Sequence apply_transfer_operator(TransferOperator t, const Sequence& f) {
    switch (t) {
        case TransferOperator::Identity: return f;
        case TransferOperator::Hardy: return hardy(f);
        case TransferOperator::Maximal: return maximal(f);
    }
    return f;
}

} // namespace detail

// Empirical two-stage check of the transfer pipeline. Stage 1 measures the
// operator on each base weight, fits phi0(x) = c x^a as an upper envelope of
// the (weight constant, measured ratio) points. Stage 2 predicts a bound at
// the target exponent via transfer_constant, with K estimated per weight and
// inflated by `safety`, then measures the operator on the same corpus and
// records any measurement exceeding its prediction.
inline ExtrapolationReport extrapolation_verify(TransferOperator op,
                                                const std::vector<Sequence>& corpus,
                                                const std::vector<Weight>& weights_p0,
                                                const std::vector<Weight>& weights_p,
                                                Exponent p0, Exponent p,
                                                const VerifyOptions& opt = {}) {
    if (corpus.empty()) throw EmptyCorpus("verify: corpus is empty");
    if (weights_p0.empty()) throw EmptyCorpus("verify: no base weights");
    if (weights_p.empty()) throw EmptyCorpus("verify: no target weights");
    if (!std::isfinite(opt.safety) || opt.safety < 1.0)
        throw UsageError("verify: safety factor must be >= 1");

    const std::size_t n = corpus.front().size();
    for (const auto& f : corpus) {
        require_nonnegative(f, "verify corpus");
        require_same_length(f.size(), n, "verify corpus");
    }
    for (const auto& w : weights_p0) {
        require_positive(w, "verify");
        require_same_length(w.size(), n, "verify");
    }
    for (const auto& w : weights_p) {
        require_positive(w, "verify");
        require_same_length(w.size(), n, "verify");
    }

    ExtrapolationReport rep;

    // max_f ||Tf||/||f|| over the corpus; -1 witness when every pair is skipped
    auto measure = [&](const Weight& w, double q, std::ptrdiff_t* witness) {
        double best = 0.0;
        std::ptrdiff_t arg = -1;
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            const double denom = lp_norm(corpus[i], w, q);
            if (denom == 0.0) {
                ++rep.skipped;
                continue;
            }
            const Sequence tf = detail::apply_transfer_operator(op, corpus[i]);
            const double r = lp_norm(tf, w, q) / denom;
            if (r > best) {
                best = r;
                arg = static_cast<std::ptrdiff_t>(i);
            }
        }
        if (witness) *witness = arg;
        return best;
    };

    for (std::size_t j = 0; j < weights_p0.size(); ++j) {
        ExtrapolationReport::Stage1Point pt;
        pt.weight_index = j;
        pt.ap0 = ap_norm(weights_p0[j], p0).value;
        pt.ratio = measure(weights_p0[j], p0.value(), nullptr);
        rep.stage1.push_back(pt);
    }

    // Upper-envelope fit of ratio <= c x^a on the log-log points. Least
    // squares gives the slope; c is then inflated so no point lies above.
    {
        double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
        std::size_t m = 0;
        for (const auto& pt : rep.stage1) {
            if (pt.ratio <= 0.0) continue;
            const double x = std::log(pt.ap0);
            const double y = std::log(pt.ratio);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            ++m;
        }
        if (m == 0) throw EmptyCorpus("verify: every stage-1 measurement was zero");
        const double mm = static_cast<double>(m);
        const double var = sxx - sx * sx / mm;
        double a = 0.0;
        if (var > 1e-12) a = (sxy - sx * sy / mm) / var;
        a = std::max(0.0, a);
        double c = 0.0;
        for (const auto& pt : rep.stage1) {
            if (pt.ratio <= 0.0) continue;
            c = std::max(c, pt.ratio / std::pow(pt.ap0, a));
        }
        rep.phi0 = PhiDescriptor{PhiDescriptor::Form::Power, c, a};
    }

    const bool down = p.value() < p0.value();
    const bool same = p.value() == p0.value();
    for (std::size_t j = 0; j < weights_p.size(); ++j) {
        ExtrapolationReport::Prediction pr;
        pr.weight_index = j;
        pr.apw = ap_norm(weights_p[j], p).value;
        if (same) {
            pr.K = 1.0; // unused by the "same" regime
        } else if (down) {
            pr.K = opt.safety * estimate_operator_norm(OperatorKind::Maximal, weights_p[j], p,
                                                       opt.budget, opt.seed)
                                    .value;
        } else {
            const Weight dw = dual_weight(weights_p[j], p);
            pr.K = opt.safety *
                   estimate_operator_norm(OperatorKind::Maximal, dw,
                                          Exponent(p.conjugate_value()), opt.budget, opt.seed)
                       .value;
        }
        pr.predicted = transfer_constant(p0, p, rep.phi0, pr.K, pr.apw).value;
        pr.measured = measure(weights_p[j], p.value(), &pr.witness_corpus_index);
        pr.violated = pr.measured > pr.predicted * (1.0 + opt.slack);
        if (pr.violated) rep.violations.push_back(rep.predictions.size());
        rep.predictions.push_back(pr);
    }
    return rep;
}

// Deterministic mixed bag of nonnegative test sequences: power decays, flat
// and cut indicators, a geometric decay, and two seeded random draws.
inline std::vector<Sequence> default_corpus(std::size_t n, std::uint64_t seed) {
    if (n == 0) throw TooShort("default_corpus: n must be >= 1");
    std::vector<Sequence> out;
    for (double mu : {0.25, 0.5, 0.75, 1.0}) {
        Sequence f(n);
        for (std::size_t i = 0; i < n; ++i)
            f[i] = std::pow(static_cast<double>(i + 1), -mu);
        out.push_back(std::move(f));
    }
    for (std::size_t m : {std::size_t{1}, std::max<std::size_t>(1, n / 16),
                          std::max<std::size_t>(1, n / 4), n}) {
        Sequence f(n, 0.0);
        for (std::size_t i = 0; i < m && i < n; ++i) f[i] = 1.0;
        out.push_back(std::move(f));
    }
    {
        Sequence f(n);
        for (std::size_t i = 0; i < n; ++i)
            f[i] = std::exp2(-static_cast<double>(i) / 8.0);
        out.push_back(std::move(f));
    }
    for (std::uint64_t s : {seed, seed + 1}) {
        Rng rng(s);
        Sequence f(n);
        for (std::size_t i = 0; i < n; ++i) f[i] = rng.loguniform(1e-2, 1e2);
        out.push_back(std::move(f));
    }
    return out;
}

} // namespace mk
