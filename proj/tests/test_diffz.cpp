#include "doctest.h"

#include "virakdv/diffz.hpp"
#include "virakdv/presets.hpp"
#include "virakdv/virasoro.hpp"

using namespace virakdv;

TEST_CASE("sigma family: explicit low cases and the Witt relations") {
    Scalar s(-1, 2);
    DiffOp1 s0 = sigma_family(0, s, Scalar(1));
    CHECK(s0.vf.at(0) == Scalar(1, 2));
    CHECK(s0.mult.at(-3) == s);
    CHECK(s0.constant.is_zero());

    DiffOp1 sm1 = sigma_family(-1, Scalar(0), Scalar(1));
    CHECK(sm1.vf.at(2) == Scalar(1, 2));
    CHECK(sm1.mult.empty());

    // [sigma(L_i), sigma(L_j)] = (i-j) sigma(L_{i+j}) as operators.
    for (const Scalar& t : {Scalar(1), Scalar(3, 2)}) {
        for (int i = -1; i <= 2; ++i)
            for (int j = -1; j <= 2; ++j) {
                if (i + j < -1) continue;
                DiffOp1 lhs = bracket_diff(sigma_family(i, s, t), sigma_family(j, s, t));
                DiffOp1 rhs = Scalar(i - j) * sigma_family(i + j, s, t);
                CHECK(lhs == rhs);
            }
    }

    // Commutator action on monomials agrees with acting twice.
    DiffOp1 a = sigma_family(-1, s, Scalar(1));
    DiffOp1 b = sigma_family(2, s, Scalar(1));
    DiffOp1 ab = bracket_diff(a, b);
    for (int k = -6; k <= 6; ++k) {
        LaurentPoly direct = ab.act(k);
        LaurentPoly twice;
        LaurentPoly bk = b.act(k), ak = a.act(k);
        for (const auto& [m, c] : bk.coeffs()) {
            LaurentPoly am = a.act(m);
            for (const auto& [m2, c2] : am.coeffs()) twice.add(m2, c * c2);
        }
        for (const auto& [m, c] : ak.coeffs()) {
            LaurentPoly bm = b.act(m);
            for (const auto& [m2, c2] : bm.coeffs()) twice.add(m2, -(c * c2));
        }
        CHECK(direct.coeffs() == twice.coeffs());
    }
}

TEST_CASE("from_triple reproduces the sigma family and simple substitutions") {
    Scalar s(-1, 2), t(1);
    // h = t z^{-2}, c = 1/2, b = -(3/2) z^{-1} - 2 s z^{-4}
    LaurentPoly h = LaurentPoly::term(-2, t);
    LaurentPoly b;
    b.add(-1, Scalar(-3, 2));
    b.add(-4, Scalar(-2) * s);
    for (int i = -1; i <= 3; ++i) {
        DiffOp1 built = from_triple(h, Scalar(1, 2), b, i);
        CHECK(built == sigma_family(i, s, t));
    }

    // triple-vs-family at t != 1
    Scalar t2(2);
    LaurentPoly h2 = LaurentPoly::term(-2, t2);
    for (int i = -1; i <= 3; ++i)
        CHECK(from_triple(h2, Scalar(1, 2), b, i) == sigma_family(i, s, t2));

    // i = 0, h = z, b = 0: -z d_z - c = -V_0 + (1/2 - c).
    Scalar c(7, 3);
    DiffOp1 r = from_triple(LaurentPoly::term(1, Scalar(1)), c, LaurentPoly{}, 0);
    CHECK(r.vf.at(0) == Scalar(-1));
    CHECK(r.constant == Scalar(1, 2) - c);

    CHECK_THROWS_AS(from_triple(LaurentPoly::term(0, Scalar(1)), c, LaurentPoly{}, 1),
                    NonInvertibleDerivative);
}

TEST_CASE("bosonize matches the transport tables on basis elements") {
    const int M = 15;
    // multiplication operators
    DiffOp1 z3;
    z3.add_mult(3, Scalar(1));
    FockOperator b3 = bosonize(z3, M);
    CHECK(b3.lin_t.at({3, 1}) == Scalar(3));
    CHECK(b3.lin_t.size() == 1);
    CHECK(b3.lin_d.empty());

    DiffOp1 z0;
    z0.add_mult(0, Scalar(2));  // folds into the (killed) constant slot
    CHECK(bosonize(z0, M).constant.is_zero());

    DiffOp1 zm5;
    zm5.add_mult(-5, Scalar(1));
    CHECK(bosonize(zm5, M).lin_d.at({5, 1}) == Scalar(1));

    // raising vector field z^4 (z d_z + 5/2)
    DiffOp1 v4;
    v4.add_vf(4, Scalar(1));
    FockOperator b4 = bosonize(v4, M);
    CHECK(b4.tt.at(VarPair{{1, 1}, {3, 1}}) == Scalar(3));          // (1/2)(1*3) twice
    CHECK(b4.td.at({{5, 1}, {1, 1}}) == Scalar(5));
    CHECK(b4.td.at({{7, 1}, {3, 1}}) == Scalar(7));
    CHECK(b4.dd.empty());

    // lowering vector field z^{-4} (z d_z - 3/2)
    DiffOp1 vm4;
    vm4.add_vf(-4, Scalar(1));
    FockOperator bm4 = bosonize(vm4, M);
    CHECK(bm4.dd.at(VarPair{{1, 1}, {3, 1}}) == Scalar(1));
    CHECK(bm4.td.at({{1, 1}, {5, 1}}) == Scalar(1));
    CHECK(bm4.td.at({{3, 1}, {7, 1}}) == Scalar(3));

    // diagonal regularization: z^0-field is the mode-weighted Euler operator
    DiffOp1 v0;
    v0.add_vf(0, Scalar(1));
    FockOperator b0 = bosonize(v0, M);
    for (int j = 1; j <= M; j += 2) CHECK(b0.td.at({{j, 1}, {j, 1}}) == Scalar(j));

    // odd-power vector fields and even-power multiplications leak
    DiffOp1 bad1;
    bad1.add_vf(3, Scalar(1));
    CHECK_THROWS_AS(bosonize(bad1, M), EvenModeLeak);
    DiffOp1 bad2;
    bad2.add_mult(2, Scalar(1));
    CHECK_THROWS_AS(bosonize(bad2, M), EvenModeLeak);
    DiffOp1 bad3;
    bad3.add_mult(-4, Scalar(1));
    CHECK_THROWS_AS(bosonize(bad3, M), EvenModeLeak);
}

TEST_CASE("bosonized sigma family has the stated closed form") {
    Scalar s(5, 4);
    const int M = 13;
    for (int i = 1; i <= 3; ++i) {
        FockOperator op = bosonize(sigma_family(i, s, Scalar(1)), M);
        CHECK(op.lin_d.at({2 * i + 3, 1}) == s);
        for (int j = 1; j <= 2 * i - 1; j += 2) {
            VarPair p{{j, 1}, {2 * i - j, 1}};
            Scalar expect = (j == 2 * i - j) ? Scalar(1, 4) : Scalar(1, 2);
            CHECK(op.dd.at(p) == expect);
        }
        for (int j = 1; j + 2 * i <= M; j += 2) CHECK(op.td.at({{j, 1}, {j + 2 * i, 1}}) == Scalar(j, 2));
        CHECK(op.tt.empty());
    }
    FockOperator fm = bosonize(sigma_family(-1, s, Scalar(1)), M);
    CHECK(fm.lin_d.at({1, 1}) == s);
    CHECK(fm.tt.at(VarPair{{1, 1}, {1, 1}}) == Scalar(1, 4));
    for (int j = 1; j + 2 <= M; j += 2) CHECK(fm.td.at({{j + 2, 1}, {j, 1}}) == Scalar(j + 2, 2));
}

TEST_CASE("cocycle defect is -1/8 for every s") {
    for (const Scalar& s : {Scalar(-1, 2), Scalar(0), Scalar(7, 3)})
        CHECK(cocycle_defect(s) == Scalar(-1, 8));
}

TEST_CASE("lift_to_rep absorbs the defect and matches the quantized extension") {
    Scalar s(-1, 2);
    const int M = 21;
    auto ops = lift_to_rep(s, Scalar(1), 5, M);
    CHECK(ops.at(0).constant == Scalar(1, 16));

    // [lift(L_-1), lift(L_1)] = -2 lift(L_0) exactly.
    FockOperator br = bracket_fock(ops.at(-1), ops.at(1));
    FockOperator tgt = Scalar(-2) * ops.at(0);
    FockOperator diff = br + Scalar(-1) * tgt;
    int safe = M - 4;
    std::erase_if(diff.td,
                  [&](const auto& p) { return p.first.first.mode > safe || p.first.second.mode > safe; });
    CHECK(diff.is_zero());

    // Cross-module comparison with the quantized Heisenberg extension.
    SL2Data data = wk1d_data(s, M);
    VirasoroRep rep = extend_to_W(data, 3, M);
    for (int k = -1; k <= 3; ++k) {
        FockOperator lhs = ops.at(k);
        FockOperator rhs = quantize(rep.gens.at(k), *data.pairing);
        CHECK(lhs == rhs);
    }
}

TEST_CASE("mixed-span elements transport, but not to a single type shape") {
    // z^{-3} alone is the type-0 linear slot; adding z^{-5} (the type-1 slot)
    // produces two derivative-linear entries, which no single type carries.
    DiffOp1 mixed;
    mixed.add_mult(-3, Scalar(1));
    mixed.add_mult(-5, Scalar(1));
    FockOperator op = bosonize(mixed, 11);
    CHECK(op.lin_d.size() == 2);

    // basis elements land in exactly one type shape each
    for (int i = -1; i <= 3; ++i) {
        FockOperator s = bosonize(sigma_family(i, Scalar(2, 3), Scalar(1)), 13);
        CHECK(s.lin_d.size() == 1);
        CHECK(s.lin_d.begin()->first.mode == 2 * i + 3);
        CHECK((i == -1) == !s.tt.empty());
        CHECK((i >= 1) == !s.dd.empty());
    }
}
