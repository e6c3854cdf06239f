#include "doctest.h"

#include "test_util.hpp"
#include "virakdv/fock.hpp"
#include "virakdv/presets.hpp"

using namespace virakdv;
using testutil::Rng;

namespace {
Monomial t1(int e) { return Monomial::var(1, 1, e); }
}

TEST_CASE("series arithmetic, exp and log") {
    TruncatedSeries f(1, 8);
    f.set(t1(1), Scalar(1));
    TruncatedSeries e = exp_series(f);
    CHECK(e.coeff(t1(3)) == Scalar(1, 6));
    CHECK(log_series(e) == f);

    CHECK(exp_series(TruncatedSeries(1, 6)) == TruncatedSeries::one(1, 6));

    // exp(-x t_1^3): the t_1^6 coefficient is x^2/2.
    Scalar x(3, 7);
    TruncatedSeries g(1, 7);
    g.set(t1(3), -x);
    CHECK(exp_series(g).coeff(t1(6)) == x * x * Scalar(1, 2));

    TruncatedSeries bad = TruncatedSeries::one(1, 4);
    CHECK_THROWS_AS(exp_series(bad), BadConstantTerm);
    CHECK_THROWS_AS(log_series(TruncatedSeries(1, 4)), BadConstantTerm);
}

TEST_CASE("quantize the canonical lowering operator") {
    Scalar s(-1, 2);
    SL2Data data = wk1d_data(s, 11);
    FockOperator F = quantize(data.F, *data.pairing);
    CHECK(F.lin_d.at({1, 1}) == s);
    CHECK(F.tt.at(VarPair{{1, 1}, {1, 1}}) == Scalar(1, 4));
    CHECK(F.td.at({{3, 1}, {1, 1}}) == Scalar(3, 2));
    CHECK(F.td.at({{7, 1}, {5, 1}}) == Scalar(7, 2));
    CHECK(F.constant.is_zero());

    QuadOperator zero = make_zero(0, data.pairing, 11);
    CHECK(quantize(zero, *data.pairing).is_zero());
}

TEST_CASE("apply: derivative, canonical F on 1, degree-zero balance of L0") {
    FockOperator d1(1, 9, 0);
    d1.lin_d[{1, 1}] = Scalar(1);
    TruncatedSeries f(1, 9);
    f.set(t1(2), Scalar(1, 2));
    TruncatedSeries df = apply(d1, f);
    CHECK(df.coeff(t1(1)) == Scalar(1));

    Scalar s(-1, 2);
    SL2Data data = wk1d_data(s, 11);
    FockOperator Fhat = quantize(data.F, *data.pairing);
    TruncatedSeries one = TruncatedSeries::one(1, 9);
    TruncatedSeries r = apply(Fhat, one);
    CHECK(r.coeff(t1(2)) == Scalar(1, 4));
    CHECK(r.terms().size() == 1);

    // L0 = -(1/2) H quantized; on exp(f01 t_3) the constant term of the image
    // vanishes exactly when s*f01 + 1/16 = 0.
    QuadOperator H = build_H(data.F, data.b, data.B, data.pairing);
    FockOperator L0 = quantize(scale_add(Scalar(-1, 2), H, Scalar(0), H), *data.pairing);
    CHECK(L0.constant == Scalar(1, 16));
    Scalar f01 = Scalar(-1, 16) / s;
    TruncatedSeries expf(1, 9);
    expf.set(Monomial::var(3, 1), f01);
    TruncatedSeries img = apply(L0, exp_series(expf));
    CHECK(img.constant_term().is_zero());
    TruncatedSeries wrong(1, 9);
    wrong.set(Monomial::var(3, 1), f01 + Scalar(1));
    CHECK(!apply(L0, exp_series(wrong)).constant_term().is_zero());
}

TEST_CASE("bracket_fock vanishes on itself and matches the Weyl constants") {
    // [t^2, d^2] = -4 t d - 2.
    FockOperator tsq(1, 9, 2), dsq(1, 9, -2);
    tsq.tt[VarPair{{1, 1}, {1, 1}}] = Scalar(1);
    dsq.dd[VarPair{{1, 1}, {1, 1}}] = Scalar(1);
    FockOperator c = bracket_fock(tsq, dsq);
    CHECK(c.td.at({{1, 1}, {1, 1}}) == Scalar(-4));
    CHECK(c.constant == Scalar(-2));
    CHECK(bracket_fock(tsq, tsq).is_zero());
}

TEST_CASE("quantization is functorial for the bracket, trace constants included") {
    for (uint64_t seed : {3u, 4u, 5u}) {
        Rng rng(seed);
        int n = rng.range(1, 3);
        auto pairing = make_pairing(testutil::random_symmetric_invertible(rng, n));
        int M = 13;
        for (int trial = 0; trial < 5; ++trial) {
            int i = rng.range(-1, 3);
            int j = rng.range(-1, 3);
            if (i + j < -1) continue;
            QuadOperator a = testutil::random_typed(rng, i, pairing, M);
            QuadOperator b = testutil::random_typed(rng, j, pairing, M);
            auto [ab, w] = bracket(a, b);

            FockOperator lhs = quantize(ab, *pairing);
            FockOperator rhs = bracket_fock(quantize(a, *pairing), quantize(b, *pairing));
            // Compare inside the reliable window: drop entries beyond it.
            auto clip = [&](FockOperator op) {
                int wm = w.reliable_mode;
                std::erase_if(op.lin_t, [&](const auto& p) { return p.first.mode > wm; });
                std::erase_if(op.lin_d, [&](const auto& p) { return p.first.mode > wm; });
                std::erase_if(op.tt, [&](const auto& p) { return p.first.b.mode > wm; });
                std::erase_if(op.dd, [&](const auto& p) { return p.first.b.mode > wm; });
                std::erase_if(op.td, [&](const auto& p) {
                    return p.first.first.mode > wm || p.first.second.mode > wm;
                });
                return op;
            };
            CHECK(clip(lhs) == clip(rhs));
        }
    }
}

TEST_CASE("apply is a derivation for first-order operators") {
    Rng rng(17);
    FockOperator op(2, 9, 0);
    op.td[{{3, 1}, {1, 2}}] = Scalar(2, 3);
    op.td[{{5, 2}, {3, 1}}] = Scalar(-1);
    op.lin_d[{1, 1}] = Scalar(1, 2);

    TruncatedSeries f(2, 9), g(2, 9);
    for (int trial = 0; trial < 6; ++trial) {
        f.set(Monomial::var(rng.range(1, 2) * 2 - 1, rng.range(1, 2), rng.range(1, 2)), rng.rational());
        g.set(Monomial::var(rng.range(1, 2) * 2 - 1, rng.range(1, 2), rng.range(1, 2)), rng.rational());
    }
    TruncatedSeries lhs = apply(op, f * g);
    TruncatedSeries rhs = apply(op, f) * g + f * apply(op, g);
    CHECK(lhs.truncated(rhs.degree_cutoff()) == rhs.truncated(lhs.degree_cutoff()));
}

TEST_CASE("grading: type-k operators shift weighted degree by -2k") {
    Rng rng(29);
    auto pairing = make_pairing(testutil::random_symmetric_invertible(rng, 2));
    for (int k : {-1, 0, 1, 2}) {
        QuadOperator t = testutil::random_typed(rng, k, pairing, 13);
        // Strip the linear part: it is the only inhomogeneous piece.
        QuadParts parts;
        parts.const_term = t.const_term();
        if (t.has_qq()) parts.qq = t.qq();
        for (const auto& [j, m] : t.qp()) parts.qp[j] = m;
        for (const auto& [j, m] : t.pp()) parts.pp[j] = m;
        FockOperator op = quantize(make_typed(k, pairing, parts, 13), *pairing);

        TruncatedSeries f(2, 16);
        f.set(Monomial::var(3, 1) * Monomial::var(5, 2), Scalar(1));
        f.set(Monomial::var(1, 2) * Monomial::var(7, 1), Scalar(2, 5));
        TruncatedSeries img = apply(op, f);
        for (const auto& [m, c] : img.terms()) CHECK(m.degree() == 8 - 2 * k);
    }
}
