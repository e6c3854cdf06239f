#include "doctest.h"

#include "test_util.hpp"
#include "virakdv/fock.hpp"
#include "virakdv/presets.hpp"
#include "virakdv/virasoro.hpp"

using namespace virakdv;
using testutil::Rng;

namespace {

QuadOperator dim1_F(const PairingPtr& pairing, Scalar b, Scalar a, Scalar C, int M) {
    QuadParts parts;
    parts.linear = Matrix(1, 1, {b});
    parts.qq = Matrix(1, 1, {a});
    for (int j = 3; j <= M; j += 2) parts.qp[j] = Matrix(1, 1, {C});
    return make_typed(-1, pairing, parts, M);
}

} // namespace

TEST_CASE("build_H: canonical band with B = -1 gives the degree-type operator") {
    auto pairing = make_pairing(Matrix::identity(1));
    int M = 13;
    Scalar b0(-1, 8), s(2);
    QuadOperator F = dim1_F(pairing, s, Scalar(1, 4), Scalar(1, 2), M);
    QuadOperator H = build_H(F, b0, Matrix(1, 1, {Scalar(-1)}), pairing);
    CHECK(H.linear()(0, 0) == Scalar(-2) * s);
    CHECK(H.const_term() == b0);
    for (int j = 1; j <= M; j += 2) CHECK(H.qp().at(j)(0, 0) == Scalar(-1));
    auto [hf, w] = bracket(H, F);
    CHECK(equal_within(hf, scale_add(Scalar(-2), F, Scalar(0), F), w.reliable_mode));
}

TEST_CASE("build_H: orthonormal basis closed form") {
    // F with unit band: H = (1/3) b (B-2) p_3 + b0 + (1/i) q_i (B-(i-1)) p_i.
    auto pairing = make_pairing(Matrix::identity(2));
    int M = 11;
    Rng rng(41);
    // antisymmetric qq part makes FyieldsH:2 vacuous, so B is free
    QuadParts fp;
    fp.linear = testutil::random_matrix(rng, 1, 2);
    Matrix n(2, 2);
    n(0, 1) = Scalar(3, 2);
    n(1, 0) = Scalar(-3, 2);
    fp.qq = n;
    for (int j = 3; j <= M; j += 2) fp.qp[j] = Matrix::identity(2);
    QuadOperator F = make_typed(-1, pairing, fp, M);
    CHECK(!F.has_qq());  // symmetrized storage drops the antisymmetric part

    Matrix B(2, 2, {Scalar(2), Scalar(1), Scalar(0), Scalar(3)});
    QuadOperator H = build_H(F, Scalar(0), B, pairing);
    for (int i = 1; i <= M; i += 2)
        CHECK(H.qp().at(i) == Scalar(1, i) * (B - Matrix::scalar(2, Scalar(i - 1))));
    CHECK(H.linear() == Scalar(1, 3) * fp.linear * (B - Matrix::scalar(2, Scalar(2))));
    auto [hf, w] = bracket(H, F);
    CHECK(equal_within(hf, scale_add(Scalar(-2), F, Scalar(0), F), w.reliable_mode));
}

TEST_CASE("build_H: dim-1 example with general eta") {
    Scalar eta(5, 3);
    auto pairing = make_pairing(Matrix(1, 1, {eta}));
    int M = 11;
    Scalar b(-2);
    QuadOperator F = dim1_F(pairing, b, eta, eta, M);
    QuadOperator H = build_H(F, Scalar(4), Matrix(1, 1, {-eta}), pairing);
    CHECK(H.linear()(0, 0) == -b);
    for (int j = 1; j <= M; j += 2) CHECK(H.qp().at(j)(0, 0) == -eta);
    CHECK_THROWS_AS(build_H(F, Scalar(4), Matrix(1, 1, {Scalar(1)}), pairing), ConstraintViolation);
}

TEST_CASE("build_E solves the band from the low slot") {
    auto pairing = make_pairing(Matrix::identity(1));
    int M = 13;
    // eta = 1, a = 1, band = 1, B = -1, c = -1/16: the (1,3) slot is (B-4c)/3.
    QuadOperator F = dim1_F(pairing, Scalar(1), Scalar(1), Scalar(1), M);
    Matrix B(1, 1, {Scalar(-1)});
    QuadOperator H = build_H(F, Scalar(-1, 8), B, pairing);
    Matrix c(1, 1, {Scalar(-1, 16)});
    QuadOperator E = build_E(F, H, c, pairing);
    CHECK(E.qp().at(1)(0, 0) == Scalar(-1, 4));
    CHECK(E.pp().at(1)(0, 0) == Scalar(-1, 16));

    auto [ef, w1] = bracket(E, F);
    CHECK(equal_within(ef, H, w1.reliable_mode));
    auto [he, w2] = bracket(H, E);
    CHECK(equal_within(he, scale_add(Scalar(2), E, Scalar(0), E), w2.reliable_mode));

    // Only the symmetric part of c matters.
    auto p2 = make_pairing(Matrix::identity(2));
    Rng rng(7);
    QuadParts fp;
    fp.linear = testutil::random_matrix(rng, 1, 2);
    fp.qq = Matrix::identity(2);
    for (int j = 3; j <= M; j += 2) fp.qp[j] = Matrix::identity(2);
    QuadOperator F2 = make_typed(-1, p2, fp, M);
    Matrix B2 = Matrix::scalar(2, Scalar(-1));
    Matrix c2(2, 2, {Scalar(-1, 16), Scalar(1, 3), Scalar(1, 3), Scalar(-1, 16)});
    Matrix skew(2, 2, {Scalar(0), Scalar(5), Scalar(-5), Scalar(0)});
    Scalar b2 = (c2.sym() * Scalar(2)).trace();
    QuadOperator H2 = build_H(F2, b2, B2, p2);
    CHECK(build_E(F2, H2, c2, p2) == build_E(F2, H2, c2 + skew, p2));

    // Mismatched constant term violates the trace equation.
    QuadOperator Hbad = build_H(F2, b2 + Scalar(1), B2, p2);
    CHECK_THROWS_AS(build_E(F2, Hbad, c2, p2), ConstraintViolation);
}

TEST_CASE("solve_adF: zero input gives zero and the canonical L2 checks out") {
    Scalar s(-1, 2);
    int M = 17;
    SL2Data data = wk1d_data(s, M);
    QuadOperator H = build_H(data.F, data.b, data.B, data.pairing);
    QuadOperator zero = make_zero(1, data.pairing, M);
    CHECK(solve_adF(data.F, H, zero, 2).is_zero());

    QuadOperator E = build_E(data.F, H, data.c, data.pairing);
    QuadOperator L1 = scale_add(Scalar(-1), E, Scalar(0), E);
    QuadOperator T = solve_adF(data.F, H, L1, 2);
    auto [ft, w] = bracket(data.F, T);
    CHECK(equal_within(ft, L1, w.reliable_mode));
    auto [ht, w2] = bracket(H, T);
    CHECK(equal_within(ht, scale_add(Scalar(4), T, Scalar(0), T), w2.reliable_mode));

    // rho(L_2) = -3T quantizes to s d7 + (1/2) d1 d3 + (1/2) sum j t_j d_{j+4}.
    QuadOperator L2 = scale_add(Scalar(-3), T, Scalar(0), T);
    FockOperator L2hat = quantize(L2, *data.pairing);
    CHECK(L2hat.lin_d.at({7, 1}) == s);
    CHECK(L2hat.dd.at(VarPair{{1, 1}, {3, 1}}) == Scalar(1, 2));
    CHECK(L2hat.td.at({{3, 1}, {7, 1}}) == Scalar(3, 2));
    CHECK(L2hat.td.at({{5, 1}, {9, 1}}) == Scalar(5, 2));
    CHECK(L2hat.constant.is_zero());
    CHECK(L2hat.tt.empty());
}

TEST_CASE("extend_to_W base case and bracket relations") {
    Scalar s(-1, 2);
    SL2Data data = wk1d_data(s, 23);

    VirasoroRep sl2 = extend_to_W(data, 1, 23);
    CHECK(sl2.gens.size() == 3);
    CHECK(verify_rep(sl2, 1, 1).all_zero);

    VirasoroRep rep = extend_to_W(data, 5, 23);
    VerifyReport report = verify_rep(rep, 5, 5);
    CHECK(report.all_zero);

    // [L1, L2] = -L3 spelled out.
    auto [b12, w12] = bracket(rep.gens.at(1), rep.gens.at(2));
    CHECK(equal_within(b12, scale_add(Scalar(-1), rep.gens.at(3), Scalar(0), rep.gens.at(3)),
                       pair_window(rep, 1, 2)));

    // Eigenspace property [L0, Lk] = -k Lk.
    for (int k = -1; k <= 5; ++k) {
        if (k == 0) continue;
        auto [br, w] = bracket(rep.gens.at(0), rep.gens.at(k));
        CHECK(equal_within(br, scale_add(Scalar(-k), rep.gens.at(k), Scalar(0), rep.gens.at(k)),
                           pair_window(rep, std::min(0, k), std::max(0, k))));
    }

    CHECK_THROWS_AS(extend_to_W(data, 5, 11), WindowExhausted);
}

TEST_CASE("verify_rep flags a perturbed generator and accepts the trivial rep") {
    Scalar s(1);
    SL2Data data = wk1d_data(s, 15);
    VirasoroRep rep = extend_to_W(data, 4, 15);

    QuadParts bump;
    bump.qp[1] = Matrix(1, 1, {Scalar(1)});
    QuadOperator delta = make_typed(2, data.pairing, bump, 15);
    rep.gens.at(2) = scale_add(Scalar(1), rep.gens.at(2), Scalar(1), delta);
    VerifyReport report = verify_rep(rep, 4, 4);
    CHECK(!report.all_zero);
    bool found = false;
    for (const auto& p : report.pairs)
        if (p.i == -1 && p.j == 3 && p.max_abs_numerator != 0) found = true;
    CHECK(found);

    VirasoroRep trivial;
    trivial.pairing = data.pairing;
    trivial.K = 3;
    trivial.M = 15;
    for (int k = -1; k <= 3; ++k) {
        trivial.gens.emplace(k, make_zero(k, data.pairing, 15));
        trivial.windows[k] = 15;
    }
    CHECK(verify_rep(trivial, 3, 3).all_zero);
}

TEST_CASE("eigenvector property survives products: [H,[Ti,Tj]] = 2(i+j)[Ti,Tj]") {
    SL2Data data = wk1d_data(Scalar(2, 3), 19);
    VirasoroRep rep = extend_to_W(data, 4, 19);
    QuadOperator H = scale_add(Scalar(-2), rep.gens.at(0), Scalar(0), rep.gens.at(0));
    for (auto [i, j] : {std::pair{1, 2}, {1, 3}, {2, 2}}) {
        auto [tij, w1] = bracket(rep.gens.at(i), rep.gens.at(j));
        auto [h_tij, w2] = bracket(H, tij);
        QuadOperator target = scale_add(Scalar(2 * (i + j)), tij, Scalar(0), tij);
        CHECK(equal_within(h_tij, target, std::min(w1.reliable_mode, w2.reliable_mode) - 2));
    }
}

TEST_CASE("extension works for a 2-dim pairing with mixing") {
    // Hyperbolic eta, GW-style data: a = C = eta, B = -eta, c = -eta/16.
    Matrix eta(2, 2);
    eta(0, 1) = Scalar(1);
    eta(1, 0) = Scalar(1);
    auto pairing = make_pairing(eta);
    int M = 23;
    QuadParts fp;
    fp.linear = Matrix(1, 2, {Scalar(0), Scalar(-1)});
    fp.qq = eta;
    for (int j = 3; j <= M; j += 2) fp.qp[j] = eta;
    QuadOperator F = make_typed(-1, pairing, fp, M);
    Matrix c = Scalar(-1, 16) * eta;
    Scalar b = (c * pairing->eta_inv() * (eta * Scalar(2)) * pairing->eta_inv().transpose()).trace();
    SL2Data data = make_sl2_data(pairing, F, b, Scalar(-1) * eta, c);
    VirasoroRep rep = extend_to_W(data, 5, M);
    CHECK(verify_rep(rep, 5, 5).all_zero);
}

TEST_CASE("constraint violations carry the equation label") {
    auto pairing = make_pairing(Matrix::identity(1));
    int M = 11;
    QuadOperator F = dim1_F(pairing, Scalar(1), Scalar(1, 4), Scalar(1, 2), M);
    // wrong B
    try {
        make_sl2_data(pairing, F, Scalar(-1, 8), Matrix(1, 1, {Scalar(2)}),
                      Matrix(1, 1, {Scalar(-1, 4)}));
        CHECK(false);
    } catch (const ConstraintViolation& e) {
        CHECK(e.label == "FyieldsH:2");
        CHECK(std::string(e.what()).find("FyieldsH:2 violated") != std::string::npos);
    }
    // wrong c against B
    try {
        make_sl2_data(pairing, F, Scalar(-1, 8), Matrix(1, 1, {Scalar(-1)}),
                      Matrix(1, 1, {Scalar(0)}));
        CHECK(false);
    } catch (const ConstraintViolation& e) {
        // c = 0 satisfies the pairing equation trivially but breaks the trace
        CHECK(e.label == "EFH:1");
    }
    // wrong b against c
    try {
        make_sl2_data(pairing, F, Scalar(5), Matrix(1, 1, {Scalar(-1)}),
                      Matrix(1, 1, {Scalar(-1, 4)}));
        CHECK(false);
    } catch (const ConstraintViolation& e) {
        CHECK(e.label == "EFH:1");
    }
}

TEST_CASE("window exhaustion is reported") {
    SL2Data small = wk1d_data(Scalar(1), 9);
    CHECK_THROWS_AS(extend_to_W(small, 5, 9), WindowExhausted);
    CHECK_THROWS_AS(extend_to_W(small, 2, 11), WindowExhausted);  // beyond materialized F
    QuadOperator H = build_H(small.F, small.b, small.B, small.pairing);
    QuadOperator E = build_E(small.F, H, small.c, small.pairing);
    QuadOperator L1 = scale_add(Scalar(-1), E, Scalar(0), E);
    // type 4 needs mode 11 > 9
    CHECK_THROWS_AS(solve_adF(small.F, H, make_zero(3, small.pairing, 9), 4), WindowExhausted);
}

TEST_CASE("singular band matrices are rejected eagerly") {
    auto p2 = make_pairing(Matrix::identity(2));
    QuadParts fp;
    fp.linear = Matrix(1, 2, {Scalar(1), Scalar(1)});
    fp.qq = Matrix::identity(2);
    Matrix singular(2, 2, {Scalar(1), Scalar(1), Scalar(1), Scalar(1)});
    for (int j = 3; j <= 9; j += 2) fp.qp[j] = singular;
    QuadOperator F = make_typed(-1, p2, fp, 9);
    CHECK_THROWS_AS(
        make_sl2_data(p2, F, Scalar(-1, 4), Matrix::scalar(2, Scalar(-1)),
                      Scalar(-1, 16) * Matrix::identity(2)),
        SingularMatrix);
}

TEST_CASE("extension from data materialized above the requested cutoff") {
    SL2Data wide = wk1d_data(Scalar(1, 3), 19);
    VirasoroRep rep = extend_to_W(wide, 3, 13);
    CHECK(rep.M == 13);
    CHECK(rep.gens.at(-1).mode_cutoff() == 13);
    CHECK(verify_rep(rep, 3, 3).all_zero);
    VirasoroRep full = extend_to_W(wk1d_data(Scalar(1, 3), 13), 3, 13);
    for (int k = -1; k <= 3; ++k) CHECK(rep.gens.at(k) == full.gens.at(k));
}
