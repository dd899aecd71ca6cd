#include <catch2/catch_amalgamated.hpp>

#include <mk/operators.hpp>

#include <cmath>

#include "support.hpp"

using mk::Exponent;
using mk::OperatorKind;
using mk::Sequence;
using mk::Weight;

namespace {

// O(N^2) weighted running maximum, straight from the definition
Sequence brute_weighted_maximal(const Sequence& f, const Sequence& w) {
    const std::size_t n = f.size();
    Sequence out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double best = 0.0;
        for (std::size_t m = i; m < n; ++m) {
            long double num = 0.0L, den = 0.0L;
            for (std::size_t k = 0; k <= m; ++k) {
                num += static_cast<long double>(w[k]) * f[k];
                den += w[k];
            }
            best = std::max(best, static_cast<double>(num / den));
        }
        out[i] = best;
    }
    return out;
}

} // namespace

TEST_CASE("running averages, hand-checked") {
    Sequence f{100.0, 1.0, 1.0, 1.0};
    Sequence h = mk::hardy(f);
    REQUIRE(h.size() == 4);
    CHECK(h[0] == Catch::Approx(100.0));
    CHECK(h[1] == Catch::Approx(50.5));
    CHECK(h[2] == Catch::Approx(34.0));
    CHECK(h[3] == Catch::Approx(25.75));
    // averages of a nonincreasing sequence are nonincreasing, so the running
    // maximum coincides with the running average
    Sequence m = mk::maximal(f);
    for (std::size_t i = 0; i < 4; ++i) CHECK(m[i] == h[i]);
    CHECK_THROWS_AS(mk::hardy(Sequence{1.0, -1.0}), mk::UsageError);
}

TEST_CASE("maximal operator matches the quadratic reference") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const std::size_t n = 2 + seed % 30;
        Sequence f = oracle::random_positive(n, seed);
        Sequence got = mk::maximal(f);
        Sequence want = oracle::brute_maximal(f);
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < n; ++i)
            CHECK(got[i] == Catch::Approx(want[i]).epsilon(1e-12));
        // nonincreasing and dominating the plain averages
        Sequence h = mk::hardy(f);
        for (std::size_t i = 0; i + 1 < n; ++i) CHECK(got[i] >= got[i + 1]);
        for (std::size_t i = 0; i < n; ++i) CHECK(got[i] >= h[i]);
    }
}

TEST_CASE("weighted running maximum") {
    for (std::uint64_t seed = 20; seed < 28; ++seed) {
        const std::size_t n = 2 + seed % 12;
        Sequence f = oracle::random_positive(n, seed);
        Weight w(oracle::random_positive(n, seed + 500));
        Sequence got = mk::weighted_maximal(f, w);
        Sequence want = brute_weighted_maximal(f, w.values);
        for (std::size_t i = 0; i < n; ++i)
            CHECK(got[i] == Catch::Approx(want[i]).epsilon(1e-12));
    }
    // constant weight reduces to the unweighted operator
    Sequence f = oracle::random_positive(15, 3);
    Weight ones(Sequence(15, 2.5));
    Sequence a = mk::weighted_maximal(f, ones);
    Sequence b = mk::maximal(f);
    for (std::size_t i = 0; i < 15; ++i) CHECK(a[i] == Catch::Approx(b[i]).epsilon(1e-13));
    CHECK_THROWS_AS(mk::weighted_maximal(f, Weight(Sequence{1.0})), mk::LengthMismatch);
}

TEST_CASE("companion operator is M(wh)/w") {
    for (std::uint64_t seed = 40; seed < 48; ++seed) {
        const std::size_t n = 2 + seed % 20;
        Sequence h = oracle::random_positive(n, seed);
        Weight w(oracle::random_positive(n, seed + 900));
        Sequence got = mk::dual_maximal(h, w);
        Sequence wh(n);
        for (std::size_t i = 0; i < n; ++i) wh[i] = w.values[i] * h[i];
        Sequence mwh = mk::maximal(wh);
        for (std::size_t i = 0; i < n; ++i)
            CHECK(got[i] == Catch::Approx(mwh[i] / w.values[i]).epsilon(1e-13));
    }
    Weight w(Sequence{1.0, 0.0});
    CHECK_THROWS_AS(mk::dual_maximal(Sequence{1.0, 1.0}, w), mk::ZeroWeightEntry);
}

TEST_CASE("gamma family") {
    Sequence g = oracle::random_positive(12, 7);
    Weight w(oracle::random_positive(12, 8));
    // gamma = 1 is exactly the companion operator
    Sequence a = mk::g_operator(g, w, 1.0);
    Sequence b = mk::dual_maximal(g, w);
    for (std::size_t i = 0; i < 12; ++i) CHECK(a[i] == b[i]);
    // gamma = 1/2 agrees with the unrolled formula
    Sequence c = mk::g_operator(g, w, 0.5);
    Sequence lifted(12);
    for (std::size_t i = 0; i < 12; ++i) lifted[i] = g[i] * g[i];
    Sequence d = mk::dual_maximal(lifted, w);
    for (std::size_t i = 0; i < 12; ++i)
        CHECK(c[i] == Catch::Approx(std::sqrt(d[i])).epsilon(1e-13));
    CHECK_THROWS_AS(mk::g_operator(g, w, 0.0), mk::GammaOutOfRange);
    CHECK_THROWS_AS(mk::g_operator(g, w, 1.2), mk::GammaOutOfRange);
}

TEST_CASE("weighted p-norm") {
    Weight w(Sequence{1.0, 2.0, 4.0});
    Sequence f{1.0, 1.0, 0.5};
    // sum = 1 + 2 + 4*0.25 = 4, sqrt = 2
    CHECK(mk::lp_norm(f, w, 2.0) == Catch::Approx(2.0).epsilon(1e-14));
    CHECK(mk::lp_norm(f, w, 1.0) == Catch::Approx(5.0).epsilon(1e-14));
    CHECK(oracle::rel_close(mk::lp_norm(f, w, 2.7), oracle::brute_lp_norm(f, w.values, 2.7), 1e-13));
    CHECK_THROWS_AS(mk::lp_norm(f, w, 0.5), mk::BadExponent);
    CHECK_THROWS_AS(mk::lp_norm(Sequence{1.0}, w, 2.0), mk::LengthMismatch);
}

TEST_CASE("operator names round-trip") {
    for (OperatorKind op : {OperatorKind::Hardy, OperatorKind::Maximal,
                            OperatorKind::WeightedMaximal, OperatorKind::DualMaximal,
                            OperatorKind::GOperator})
        CHECK(mk::parse_operator(mk::operator_name(op)) == op);
    CHECK_THROWS_AS(mk::parse_operator("laplace"), mk::UnsupportedOperator);
}

TEST_CASE("norm search certifies tiny instances") {
    Weight ones2(Sequence(2, 1.0));

    SECTION("single entry: every ratio is 1") {
        Weight w1(Sequence{3.0});
        auto est = mk::estimate_operator_norm(OperatorKind::Hardy, w1, Exponent(2.0), 100, 1);
        CHECK(est.is_certified_upper);
        CHECK(est.value == Catch::Approx(1.0).epsilon(1e-12));
    }

    SECTION("averaging operator, two entries, p = 2") {
        // stationary point of ||Hf||/||f|| on f = (1, t): 1 - 4t - t^2 = 0,
        // t = sqrt(5) - 2, squared ratio (3 + sqrt 5)/4
        auto est = mk::estimate_operator_norm(OperatorKind::Hardy, ones2, Exponent(2.0), 200000, 1);
        CHECK(est.is_certified_upper);
        const double expect = std::sqrt((3.0 + std::sqrt(5.0)) / 4.0);
        CHECK(est.value == Catch::Approx(expect).epsilon(1e-9));
        REQUIRE(est.witness.size() == 2);
        CHECK(est.witness[1] / est.witness[0] == Catch::Approx(std::sqrt(5.0) - 2.0).margin(1e-4));
    }

    SECTION("running maximum, two entries, p = 2") {
        // on two entries the suffix max of the averages equals the averages
        // themselves when f(2) <= f(1), and flattens both entries to the mean
        // otherwise (ratio <= 1 there), so the norm coincides with the
        // averaging operator's
        auto est = mk::estimate_operator_norm(OperatorKind::Maximal, ones2, Exponent(2.0), 200000, 1);
        CHECK(est.is_certified_upper);
        const double expect = std::sqrt((3.0 + std::sqrt(5.0)) / 4.0);
        CHECK(est.value == Catch::Approx(expect).epsilon(1e-9));
    }

    SECTION("random probes never beat a certified value") {
        auto est = mk::estimate_operator_norm(OperatorKind::Maximal, ones2, Exponent(2.0), 200000, 1);
        mk::Rng rng(99);
        for (int trial = 0; trial < 2000; ++trial) {
            Sequence f{rng.loguniform(1e-3, 1e3), rng.loguniform(1e-3, 1e3)};
            const double r = mk::lp_norm(mk::maximal(f), ones2, 2.0) / mk::lp_norm(f, ones2, 2.0);
            CHECK(r <= est.value * (1 + 1e-9));
        }
    }
}

TEST_CASE("norm search bookkeeping") {
    Weight w(oracle::random_positive(12, 5));

    auto est = mk::estimate_operator_norm(OperatorKind::Maximal, w, Exponent(2.0), 3000, 7);
    CHECK_FALSE(est.is_certified_upper);
    CHECK(est.evaluations == 3000);
    CHECK_FALSE(est.strategy.empty());
    CHECK(est.value >= 1.0); // indicators of [1, n] give ratio >= 1 for M
    // the reported value is the ratio of the stored witness
    const double recomputed = mk::lp_norm(mk::maximal(est.witness), w, 2.0) /
                              mk::lp_norm(est.witness, w, 2.0);
    CHECK(est.value == Catch::Approx(recomputed).epsilon(1e-15));

    auto dual = mk::estimate_operator_norm(OperatorKind::DualMaximal, w, Exponent(2.0), 3000, 7);
    const double dual_re = mk::lp_norm(mk::dual_maximal(dual.witness, w), w, 2.0) /
                           mk::lp_norm(dual.witness, w, 2.0);
    CHECK(dual.value == Catch::Approx(dual_re).epsilon(1e-15));

    CHECK_THROWS_AS(mk::estimate_operator_norm(OperatorKind::Maximal, w, Exponent(2.0), 0, 1),
                    mk::BudgetTooSmall);
    CHECK_THROWS_AS(
        mk::estimate_operator_norm(OperatorKind::WeightedMaximal, w, Exponent(2.0), 100, 1),
        mk::UnsupportedOperator);
    CHECK_THROWS_AS(mk::estimate_operator_norm(OperatorKind::GOperator, w, Exponent(2.0), 100, 1),
                    mk::UnsupportedOperator);
}

TEST_CASE("averaging norm never exceeds the running-max norm on tiny instances") {
    // Hf <= Mf pointwise, so the certified norms must be ordered
    for (std::uint64_t seed = 60; seed < 66; ++seed) {
        Weight w(oracle::random_positive(3, seed, 0.2, 5.0));
        auto h = mk::estimate_operator_norm(OperatorKind::Hardy, w, Exponent(2.5), 400000, 1);
        auto m = mk::estimate_operator_norm(OperatorKind::Maximal, w, Exponent(2.5), 400000, 1);
        REQUIRE(h.is_certified_upper);
        REQUIRE(m.is_certified_upper);
        CHECK(h.value <= m.value * (1 + 1e-6));
    }
}
