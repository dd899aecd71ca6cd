#include <catch2/catch_amalgamated.hpp>

#include <mk/extrapolation.hpp>

#include <cmath>
#include <string>

#include "support.hpp"

using mk::Exponent;
using mk::PhiDescriptor;
using mk::RdfConfig;
using mk::Sequence;
using mk::Weight;

namespace {

double probe_k(bool dual, const Sequence& h, const Weight& w, double q, std::uint32_t steps) {
    double k = 1.0;
    Sequence cur = h;
    double prev = mk::lp_norm(cur, w, q);
    for (std::uint32_t s = 0; s < steps; ++s) {
        cur = dual ? mk::dual_maximal(cur, w) : mk::maximal(cur);
        const double nn = mk::lp_norm(cur, w, q);
        if (prev > 0.0) k = std::max(k, nn / prev);
        prev = nn;
    }
    return k;
}

} // namespace

TEST_CASE("phi descriptor grammar") {
    PhiDescriptor lin = mk::parse_phi("linear:c=2.5");
    CHECK(lin.form == PhiDescriptor::Form::Linear);
    CHECK(lin.c == 2.5);
    CHECK(lin(3.0) == Catch::Approx(7.5));
    CHECK(lin.to_string() == "linear:c=2.5");

    PhiDescriptor pow = mk::parse_phi("power:c=1.5,a=0.5");
    CHECK(pow.form == PhiDescriptor::Form::Power);
    CHECK(pow(4.0) == Catch::Approx(3.0));
    CHECK(pow.to_string() == "power:c=1.5,a=0.5");

    PhiDescriptor cst = mk::parse_phi("const:c=3");
    CHECK(cst(123.0) == 3.0);

    CHECK_THROWS_AS(mk::parse_phi("linear"), mk::BadPhiDescriptor);          // no colon
    CHECK_THROWS_AS(mk::parse_phi("cubic:c=1"), mk::BadPhiDescriptor);       // unknown form
    CHECK_THROWS_AS(mk::parse_phi("linear:c=1,a=2"), mk::BadPhiDescriptor);  // extra item
    CHECK_THROWS_AS(mk::parse_phi("power:c=1"), mk::BadPhiDescriptor);       // missing a=
    CHECK_THROWS_AS(mk::parse_phi("linear:c=abc"), mk::BadPhiDescriptor);
    CHECK_THROWS_AS(mk::parse_phi("linear:c=1x"), mk::BadPhiDescriptor);     // trailing junk
    CHECK_THROWS_AS(mk::parse_phi("linear:d=1"), mk::BadPhiDescriptor);      // wrong key
    CHECK_THROWS_AS(mk::parse_phi("linear:c=0"), mk::BadPhiDescriptor);      // c > 0 required
    CHECK_THROWS_AS(mk::parse_phi("linear:c=-2"), mk::BadPhiDescriptor);
    CHECK_THROWS_AS(mk::parse_phi("power:c=1,a=-1"), mk::BadPhiDescriptor);  // a >= 0 required
    CHECK_THROWS_AS(mk::parse_phi("linear:c=inf"), mk::BadPhiDescriptor);
}

TEST_CASE("transfer constant closed forms") {
    PhiDescriptor lin = mk::parse_phi("linear:c=1");

    auto down = mk::transfer_constant(Exponent(3.0), Exponent(2.0), lin, 2.0, 1.0);
    CHECK(down.regime == "down");
    // 2^{1/3} * (2K)^{p0-p} * apw = 2^{1/3} * 4
    CHECK(down.value == Catch::Approx(5.039684199579493).epsilon(1e-14));

    auto up = mk::transfer_constant(Exponent(2.0), Exponent(3.0), lin, 2.0, 1.0);
    CHECK(up.regime == "up");
    // theta = 1/2: 2^{1/4} * (2K)^{1/2} = 2^{1/4} * 2
    CHECK(up.value == Catch::Approx(2.378414230005442).epsilon(1e-14));

    PhiDescriptor pw = mk::parse_phi("power:c=2,a=0.5");
    auto same = mk::transfer_constant(Exponent(2.0), Exponent(2.0), pw, 7.0, 9.0);
    CHECK(same.regime == "same");
    CHECK(same.value == Catch::Approx(6.0)); // 2 * 9^{1/2}

    CHECK(down.p0 == 3.0);
    CHECK(down.p == 2.0);
    CHECK(down.K == 2.0);
    CHECK(down.ap_norm_value == 1.0);

    CHECK_THROWS_AS(mk::transfer_constant(Exponent(2.0), Exponent(3.0), lin, 0.0, 1.0),
                    mk::UsageError);
    CHECK_THROWS_AS(mk::transfer_constant(Exponent(2.0), Exponent(3.0), lin, 1.0, -1.0),
                    mk::UsageError);
}

TEST_CASE("downward factorization bound holds on random instances") {
    struct Pair { double p, p0; };
    for (Pair pp : {Pair{1.5, 2.0}, Pair{2.0, 3.0}}) {
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            const std::size_t n = 32;
            Weight w(oracle::random_positive(n, seed, 1e-1, 1e1));
            Sequence h = oracle::random_positive(n, seed + 7000);
            RdfConfig cfg;
            cfg.K = probe_k(false, h, w, pp.p, cfg.max_terms + 1);
            auto rep = mk::lemma_lstar_check(w, h, Exponent(pp.p), Exponent(pp.p0), cfg);
            CAPTURE(pp.p, pp.p0, seed, rep.lhs, rep.rhs);
            CHECK(rep.lemma == "lstar");
            CHECK(rep.holds);
            CHECK(rep.gap >= -1e-9 * rep.rhs);
            CHECK(rep.a1_value >= 1.0);
            CHECK(rep.base_ap_norm >= 1.0);
            CHECK(rep.terms_used >= 1);
            CHECK(rep.instance_digest.size() == 16);
        }
    }
    Weight w(oracle::random_positive(8, 3));
    Sequence h = oracle::random_positive(8, 4);
    CHECK_THROWS_AS(mk::lemma_lstar_check(w, h, Exponent(3.0), Exponent(2.0), RdfConfig{}),
                    mk::ExponentOrder);
    Sequence hz = h;
    hz[3] = 0.0;
    RdfConfig cfg;
    cfg.K = 50.0;
    CHECK_THROWS_AS(mk::lemma_lstar_check(w, hz, Exponent(2.0), Exponent(3.0), cfg),
                    mk::UsageError);
}

TEST_CASE("upward factorization bound holds on random instances") {
    struct Pair { double p0, p; };
    for (Pair pp : {Pair{1.5, 2.0}, Pair{2.0, 3.0}}) {
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            const std::size_t n = 32;
            Weight w(oracle::random_positive(n, seed + 100, 1e-1, 1e1));
            Sequence h = oracle::random_positive(n, seed + 8000);
            RdfConfig cfg;
            const double q = pp.p / (pp.p - 1.0);
            cfg.K = probe_k(true, h, w, q, cfg.max_terms + 1);
            auto rep = mk::lemma_l1star_check(w, h, Exponent(pp.p), Exponent(pp.p0), cfg);
            CAPTURE(pp.p0, pp.p, seed, rep.lhs, rep.rhs);
            CHECK(rep.lemma == "l1star");
            CHECK(rep.holds);
            CHECK(rep.a1_value >= 1.0);
            CHECK(rep.terms_used >= 1);
        }
    }
    Weight w(oracle::random_positive(8, 5));
    Sequence h = oracle::random_positive(8, 6);
    CHECK_THROWS_AS(mk::lemma_l1star_check(w, h, Exponent(2.0), Exponent(3.0), RdfConfig{}),
                    mk::ExponentOrder);
}

TEST_CASE("instance digests identify the inputs") {
    Weight w(oracle::random_positive(16, 9, 1e-1, 1e1));
    Sequence h = oracle::random_positive(16, 10);
    RdfConfig cfg;
    cfg.K = probe_k(false, h, w, 2.0, cfg.max_terms + 1);
    auto a = mk::lemma_lstar_check(w, h, Exponent(2.0), Exponent(3.0), cfg);
    auto b = mk::lemma_lstar_check(w, h, Exponent(2.0), Exponent(3.0), cfg);
    CHECK(a.instance_digest == b.instance_digest);
    CHECK(a.instance_digest.find_first_not_of("0123456789abcdef") == std::string::npos);

    Sequence h2 = h;
    h2[0] *= 1.0000001;
    RdfConfig cfg2 = cfg;
    cfg2.K = probe_k(false, h2, w, 2.0, cfg.max_terms + 1);
    auto c = mk::lemma_lstar_check(w, h2, Exponent(2.0), Exponent(3.0), cfg2);
    CHECK(a.instance_digest != c.instance_digest);
}

TEST_CASE("pair family rescaling") {
    mk::PairFamily fam;
    fam.description = "demo";
    fam.pairs.push_back({Sequence{4.0, 9.0}, Sequence{1.0, 16.0}});

    auto half = mk::corollary_rescale(fam, 0.5);
    REQUIRE(half.pairs.size() == 1);
    CHECK(half.pairs[0].f[0] == Catch::Approx(2.0));
    CHECK(half.pairs[0].f[1] == Catch::Approx(3.0));
    CHECK(half.pairs[0].g[1] == Catch::Approx(4.0));
    CHECK(half.description.rfind("demo", 0) == 0);

    // rescaling by r moves l^{p0} norms to l^{p0/r} norms exactly:
    // ||f^r||_{l^{p0/r}(w)} = ||f||_{l^{p0}(w)}^r
    Weight w(oracle::random_positive(24, 11));
    Sequence f = oracle::random_positive(24, 12);
    const double p0 = 3.0, r = 1.5;
    mk::PairFamily one;
    one.pairs.push_back({f, f});
    auto scaled = mk::corollary_rescale(one, r);
    const double lhs = mk::lp_norm(scaled.pairs[0].f, w, p0 / r);
    const double rhs = std::pow(mk::lp_norm(f, w, p0), r);
    CHECK(oracle::rel_close(lhs, rhs, 1e-12));

    CHECK_THROWS_AS(mk::corollary_rescale(fam, 0.0), mk::BadExponent);
    CHECK_THROWS_AS(mk::corollary_rescale(fam, -1.0), mk::BadExponent);
    mk::PairFamily neg;
    neg.pairs.push_back({Sequence{-1.0}, Sequence{1.0}});
    CHECK_THROWS_AS(mk::corollary_rescale(neg, 2.0), mk::UsageError);

    // the single-exponent reduction is rescaling by p0/r
    auto red = mk::corollary_ainf_reduce(fam, 3.0, Exponent(2.0));
    auto direct = mk::corollary_rescale(fam, 1.5);
    CHECK(red.pairs[0].f[0] == direct.pairs[0].f[0]);
    CHECK(red.pairs[0].g[1] == direct.pairs[0].g[1]);
    CHECK_THROWS_AS(mk::corollary_ainf_reduce(fam, 0.0, Exponent(2.0)), mk::BadExponent);
}

TEST_CASE("transfer operator names") {
    using TO = mk::TransferOperator;
    for (TO t : {TO::Identity, TO::Hardy, TO::Maximal})
        CHECK(mk::parse_transfer_operator(mk::transfer_operator_name(t)) == t);
    CHECK_THROWS_AS(mk::parse_transfer_operator("riesz"), mk::UnsupportedOperator);
}

TEST_CASE("default corpus shape") {
    auto c1 = mk::default_corpus(64, 5);
    auto c2 = mk::default_corpus(64, 5);
    CHECK(c1.size() == 11);
    REQUIRE(c1.size() == c2.size());
    for (std::size_t i = 0; i < c1.size(); ++i) {
        REQUIRE(c1[i].size() == 64);
        for (std::size_t k = 0; k < 64; ++k) {
            CHECK(c1[i][k] == c2[i][k]);
            CHECK(c1[i][k] >= 0.0);
        }
    }
    auto c3 = mk::default_corpus(64, 6);
    bool differs = false;
    for (std::size_t k = 0; k < 64; ++k)
        if (c1.back()[k] != c3.back()[k]) differs = true;
    CHECK(differs); // the seeded draws must react to the seed
    CHECK_THROWS_AS(mk::default_corpus(0, 1), mk::TooShort);
}

namespace {

std::vector<Weight> power_weights(std::size_t n) {
    std::vector<Weight> out;
    for (double lam : {-0.5, 0.0, 0.5}) {
        Sequence v(n);
        for (std::size_t i = 0; i < n; ++i)
            v[i] = std::pow(static_cast<double>(i + 1), lam);
        out.emplace_back(std::move(v));
    }
    return out;
}

} // namespace

TEST_CASE("empirical transfer pipeline bookkeeping is consistent") {
    const std::size_t n = 64;
    auto corpus = mk::default_corpus(n, 3);
    auto weights = power_weights(n);
    mk::VerifyOptions opt;
    opt.budget = 600;
    opt.seed = 1;

    for (mk::TransferOperator op : {mk::TransferOperator::Hardy, mk::TransferOperator::Maximal}) {
        for (auto [a, b] : {std::pair{2.0, 3.0}, std::pair{3.0, 2.0}}) {
            auto rep = mk::extrapolation_verify(op, corpus, weights, weights, Exponent(a),
                                                Exponent(b), opt);
            CAPTURE(mk::transfer_operator_name(op), a, b);
            CHECK(rep.skipped == 0);
            REQUIRE(rep.stage1.size() == weights.size());
            REQUIRE(rep.predictions.size() == weights.size());
            std::vector<std::size_t> over;
            for (std::size_t i = 0; i < rep.predictions.size(); ++i) {
                const auto& pr = rep.predictions[i];
                CHECK(pr.witness_corpus_index >= 0);
                CHECK(pr.K > 0.0);
                CHECK(pr.measured > 0.0);
                if (pr.violated) over.push_back(i);
                CHECK(pr.violated == (pr.measured > pr.predicted * (1 + opt.slack)));
            }
            CHECK(rep.violations == over); // the summary list mirrors the flags
            CHECK(rep.phi0.form == PhiDescriptor::Form::Power);
            CHECK(rep.phi0.c > 0.0);
        }
    }
}

TEST_CASE("transfer predictions hold where the envelope is interpolating") {
    // Raising the exponent keeps the target-side arguments inside the range
    // the stage-1 envelope was fitted on, so no prediction may be exceeded.
    // The opposite direction evaluates the envelope beyond its largest fitted
    // point; at this small length that extrapolation genuinely undershoots,
    // so it is exercised at length 512 by the acceptance gate instead.
    const std::size_t n = 64;
    auto corpus = mk::default_corpus(n, 3);
    auto weights = power_weights(n);
    mk::VerifyOptions opt;
    opt.budget = 600;
    opt.seed = 1;

    for (mk::TransferOperator op : {mk::TransferOperator::Hardy, mk::TransferOperator::Maximal}) {
        auto rep = mk::extrapolation_verify(op, corpus, weights, weights, Exponent(2.0),
                                            Exponent(3.0), opt);
        CAPTURE(mk::transfer_operator_name(op));
        CHECK(rep.violations.empty());
        for (const auto& pr : rep.predictions)
            CHECK(pr.measured <= pr.predicted * (1 + 1e-9));
    }
}

TEST_CASE("identity operator fits a flat envelope") {
    const std::size_t n = 32;
    auto corpus = mk::default_corpus(n, 2);
    auto weights = power_weights(n);
    auto rep = mk::extrapolation_verify(mk::TransferOperator::Identity, corpus, weights, weights,
                                        Exponent(2.0), Exponent(3.0));
    // every ratio is exactly 1, so the envelope is the constant 1
    CHECK(rep.phi0.a == 0.0);
    CHECK(rep.phi0.c == 1.0);
    CHECK(rep.violations.empty());
    for (const auto& pt : rep.stage1) CHECK(pt.ratio == 1.0);
}

TEST_CASE("pipeline input validation") {
    const std::size_t n = 16;
    auto corpus = mk::default_corpus(n, 2);
    auto weights = power_weights(n);

    CHECK_THROWS_AS(mk::extrapolation_verify(mk::TransferOperator::Hardy, {}, weights, weights,
                                             Exponent(2.0), Exponent(3.0)),
                    mk::EmptyCorpus);
    CHECK_THROWS_AS(mk::extrapolation_verify(mk::TransferOperator::Hardy, corpus, {}, weights,
                                             Exponent(2.0), Exponent(3.0)),
                    mk::EmptyCorpus);
    CHECK_THROWS_AS(mk::extrapolation_verify(mk::TransferOperator::Hardy, corpus, weights, {},
                                             Exponent(2.0), Exponent(3.0)),
                    mk::EmptyCorpus);

    mk::VerifyOptions bad;
    bad.safety = 0.5;
    CHECK_THROWS_AS(mk::extrapolation_verify(mk::TransferOperator::Hardy, corpus, weights,
                                             weights, Exponent(2.0), Exponent(3.0), bad),
                    mk::UsageError);
}

TEST_CASE("zero corpus members are skipped and counted") {
    const std::size_t n = 16;
    std::vector<Sequence> corpus;
    corpus.push_back(Sequence(n, 0.0));
    corpus.push_back(Sequence(n, 1.0));
    auto weights = power_weights(n);
    auto rep = mk::extrapolation_verify(mk::TransferOperator::Maximal, corpus, weights, weights,
                                        Exponent(2.0), Exponent(3.0));
    // one zero sequence, measured once per stage-1 weight and once per target weight
    CHECK(rep.skipped == 2 * weights.size());
    CHECK(rep.violations.empty());

    std::vector<Sequence> zeros{Sequence(n, 0.0)};
    CHECK_THROWS_AS(mk::extrapolation_verify(mk::TransferOperator::Maximal, zeros, weights,
                                             weights, Exponent(2.0), Exponent(3.0)),
                    mk::EmptyCorpus);
}
