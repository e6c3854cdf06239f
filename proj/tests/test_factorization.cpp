#include "doctest.h"

#include "virakdv/factorization.hpp"
#include "virakdv/gw.hpp"
#include "virakdv/presets.hpp"

using namespace virakdv;

TEST_CASE("simultaneous diagonalization: already diagonal data is fixed") {
    Matrix eta(2, 2);
    eta(0, 0) = Scalar(2);
    eta(1, 1) = Scalar(3);
    auto pairing = make_pairing(eta);
    Matrix B = Scalar(-1) * eta;
    Matrix c = Scalar(-1, 16) * eta;
    Splitting sp = simultaneous_diagonalize(pairing, eta, B, c);
    CHECK(sp.S == Matrix::identity(2));
    CHECK(sp.blocks.size() == 2);
    CHECK(sp.eta_t == eta);
}

TEST_CASE("simultaneous diagonalization: hyperbolic pairing mixes the basis") {
    VarietyData v = gw2dim_variety();
    SL2Data data = derive_sl2_from_variety(v, 11);
    Splitting sp = simultaneous_diagonalize(v.eta, data.F.qq(), data.B, data.c);
    CHECK(!(sp.S == Matrix::identity(2)));
    CHECK(sp.eta_t.is_diagonal());
    CHECK(sp.B_t.is_diagonal());
    CHECK((sp.eta_t.inverse() * sp.B_t).is_diagonal());
    CHECK(sp.a_t.is_diagonal());
}

TEST_CASE("weight-graded pairing with nonzero grading cannot split") {
    // eta antidiagonal, B = -(2 mu + 1) eta with mu = diag(1/2, -1/2): the
    // joint eigenspaces of the pencil are isotropic lines.
    Matrix eta(2, 2);
    eta(0, 1) = Scalar(1);
    eta(1, 0) = Scalar(1);
    auto pairing = make_pairing(eta);
    Matrix mu(2, 2);
    mu(0, 0) = Scalar(1, 2);
    mu(1, 1) = Scalar(-1, 2);
    Matrix B = Scalar(-1) * (Scalar(2) * mu + Matrix::identity(2)) * eta;
    Matrix D = B * pairing->eta_inv();
    Matrix c = Scalar(1, 16) * eta.transpose() * B * pairing->eta_inv() *
               (D + Matrix::scalar(2, Scalar(2)));
    CHECK_THROWS_AS(simultaneous_diagonalize(pairing, eta, B, c),
                    NotSimultaneouslyDiagonalizable);
}

TEST_CASE("complex eigenvalues are reported as irrational") {
    auto pairing = make_pairing(Matrix::identity(2));
    Matrix B(2, 2, {Scalar(-1), Scalar(1), Scalar(-1), Scalar(-1)});
    Matrix a = Matrix::identity(2);
    Matrix c = Scalar(-1, 16) * Matrix::identity(2);
    CHECK_THROWS_AS(simultaneous_diagonalize(pairing, a, B, c), IrrationalEigenvalue);
}

TEST_CASE("split, verify factors, reassemble") {
    VarietyData v = gw2dim_variety();
    int M = 23;
    SL2Data data = derive_sl2_from_variety(v, M);
    VirasoroRep rep = extend_to_W(data, 5, M);
    Splitting sp = simultaneous_diagonalize(v.eta, data.F.qq(), data.B, data.c);
    std::vector<VirasoroRep> factors = split_rep(rep, sp);
    REQUIRE(factors.size() == 2);
    for (const auto& f : factors) CHECK(verify_rep(f, 5, 5).all_zero);
    CHECK(reassembles(factors, transform_rep(rep, sp)));

    // single factor: identity behavior
    SL2Data one = wk1d_data(Scalar(1), 11);
    VirasoroRep rep1 = extend_to_W(one, 2, 11);
    Splitting triv;
    triv.S = Matrix::identity(1);
    triv.S_inv = Matrix::identity(1);
    triv.blocks = {{1}};
    triv.eta_t = Matrix::identity(1);
    triv.a_t = one.F.qq();
    triv.B_t = one.B;
    triv.c_t = one.c;
    auto f1 = split_rep(rep1, triv);
    CHECK(f1.size() == 1);
    CHECK(f1[0].gens.at(-1) == rep1.gens.at(-1));
}

TEST_CASE("block leak is detected") {
    VarietyData v = gw2dim_variety();
    int M = 11;
    SL2Data data = derive_sl2_from_variety(v, M);
    VirasoroRep rep = extend_to_W(data, 2, M);
    Splitting sp = simultaneous_diagonalize(v.eta, data.F.qq(), data.B, data.c);
    // poison one generator with an off-diagonal (in split coordinates) entry
    QuadParts bump;
    Matrix off(2, 2);
    off(0, 0) = Scalar(1);  // diagonal in the original basis mixes blocks after S
    bump.qp[1] = off;
    rep.gens.at(2) = scale_add(Scalar(1), rep.gens.at(2), Scalar(1),
                               make_typed(2, v.eta, bump, M));
    CHECK_THROWS_AS(split_rep(rep, sp), BlockLeak);
}

TEST_CASE("cross-factor brackets vanish") {
    VarietyData v = gw2dim_variety();
    int M = 15;
    SL2Data data = derive_sl2_from_variety(v, M);
    VirasoroRep rep = extend_to_W(data, 3, M);
    Splitting sp = simultaneous_diagonalize(v.eta, data.F.qq(), data.B, data.c);
    std::vector<VirasoroRep> factors = split_rep(rep, sp);
    // embed factor generators back into the 2-dim algebra and bracket
    PairingPtr p2 = make_pairing(sp.eta_t);
    auto embed = [&](const QuadOperator& g, int slot) {
        QuadParts parts;
        if (g.has_linear()) {
            Matrix lin(1, 2);
            lin(0, slot) = g.linear()(0, 0);
            parts.linear = lin;
        }
        parts.const_term = g.const_term();
        if (g.has_qq()) {
            Matrix qq(2, 2);
            qq(slot, slot) = g.qq()(0, 0);
            parts.qq = qq;
        }
        for (const auto& [j, m] : g.qp()) {
            Matrix mm(2, 2);
            mm(slot, slot) = m(0, 0);
            parts.qp[j] = mm;
        }
        for (const auto& [j, m] : g.pp()) {
            Matrix mm(2, 2);
            mm(slot, slot) = m(0, 0);
            parts.pp[j] = mm;
        }
        return make_typed(g.type_index(), p2, parts, g.mode_cutoff());
    };
    for (auto [i, j] : {std::pair{-1, 2}, {0, 1}, {1, 2}}) {
        QuadOperator gi = embed(factors[0].gens.at(i), 0);
        QuadOperator gj = embed(factors[1].gens.at(j), 1);
        auto [br, w] = bracket(gi, gj);
        CHECK(br.is_zero());
    }
}

TEST_CASE("product of factor solutions is annihilated") {
    VarietyData v = gw2dim_variety();
    int M = 21;
    SL2Data data = derive_sl2_from_variety(v, M);
    VirasoroRep rep = extend_to_W(data, 8, M);
    Splitting sp = simultaneous_diagonalize(v.eta, data.F.qq(), data.B, data.c);
    std::vector<VirasoroRep> factors = split_rep(rep, sp);

    const int D = 12;
    std::vector<TruncatedSeries> taus;
    for (const auto& f : factors) {
        std::map<int, FockOperator> ops;
        for (const auto& [k, g] : f.gens) ops.emplace(k, quantize(g, *f.pairing));
        taus.push_back(solve_constraints_1d(ops, f.K, D));
    }

    ProductAnnihilationReport rpt = check_product_annihilation(rep, sp, taus, 2);
    CHECK(rpt.all_zero);
    for (const auto& e : rpt.entries) CHECK(e.reliable_degree >= D - (2 * e.k + 3));

    // the assembled product solves the original constraints
    TruncatedSeries assembled = assemble_product_solution(taus, sp);
    for (int k = -1; k <= 2; ++k) {
        FockOperator op = quantize(rep.gens.at(k), *v.eta);
        CHECK(apply(op, assembled).is_zero());
    }

    // sensitivity: perturbing one factor at degree 3 breaks level -1
    auto taus_bad = taus;
    TruncatedSeries bump(1, D);
    bump.set(Monomial::var(3, 1), Scalar(1, 7));
    taus_bad[0] += bump;
    ProductAnnihilationReport bad = check_product_annihilation(rep, sp, taus_bad, 2);
    CHECK(!bad.all_zero);
    CHECK(!bad.entries.front().residual.is_zero());

    // diagonal sign change of S leaves the residuals zero
    Splitting sp_q = sp;
    Matrix Q(2, 2);
    Q(0, 0) = Scalar(1);
    Q(1, 1) = Scalar(-1);
    sp_q.S = Q * sp.S;
    sp_q.S_inv = sp.S_inv * Q;
    Matrix T = sp_q.S_inv;
    sp_q.eta_t = T.transpose() * v.eta->eta() * T;
    sp_q.a_t = T.transpose() * data.F.qq() * T;
    sp_q.B_t = T.transpose() * data.B * T;
    sp_q.c_t = T.transpose() * data.c * T;
    std::vector<VirasoroRep> factors_q = split_rep(rep, sp_q);
    std::vector<TruncatedSeries> taus_q;
    for (const auto& f : factors_q) {
        std::map<int, FockOperator> ops;
        for (const auto& [k, g] : f.gens) ops.emplace(k, quantize(g, *f.pairing));
        taus_q.push_back(solve_constraints_1d(ops, f.K, D));
    }
    CHECK(check_product_annihilation(rep, sp_q, taus_q, 2).all_zero);
}

TEST_CASE("assemble_product_solution trivial cases and cutoff mismatch") {
    Splitting sp;
    sp.S = Matrix::identity(2);
    sp.S_inv = Matrix::identity(2);
    sp.blocks = {{1}, {2}};
    std::vector<TruncatedSeries> ones = {TruncatedSeries::one(1, 8), TruncatedSeries::one(1, 8)};
    TruncatedSeries p = assemble_product_solution(ones, sp);
    CHECK(p == TruncatedSeries::one(2, 8));

    Splitting sp1;
    sp1.S = Matrix::identity(1);
    sp1.S_inv = Matrix::identity(1);
    sp1.blocks = {{1}};
    TruncatedSeries tau(1, 8);
    tau.set(Monomial{}, Scalar(1));
    tau.set(Monomial::var(1, 1, 3), Scalar(1, 6));
    CHECK(assemble_product_solution({tau}, sp1) == tau);

    std::vector<TruncatedSeries> bad = {TruncatedSeries::one(1, 8), TruncatedSeries::one(1, 6)};
    CHECK_THROWS_AS(assemble_product_solution(bad, sp), CutoffMismatch);
    std::vector<TruncatedSeries> not_unit = {TruncatedSeries(1, 8), TruncatedSeries::one(1, 8)};
    CHECK_THROWS_AS(assemble_product_solution(not_unit, sp), BadConstantTerm);
}

TEST_CASE("three diagonal factors split and solve") {
    Matrix eta(3, 3);
    eta(0, 0) = Scalar(1);
    eta(1, 1) = Scalar(2);
    eta(2, 2) = Scalar(-3);
    auto pairing = make_pairing(eta);
    int M = 15;
    QuadParts fp;
    fp.linear = Matrix(1, 3, {Scalar(1), Scalar(-1), Scalar(1, 2)});
    fp.qq = eta;
    for (int j = 3; j <= M; j += 2) fp.qp[j] = eta;
    QuadOperator F = make_typed(-1, pairing, fp, M);
    Matrix c = Scalar(-1, 16) * eta;
    Scalar b = (c * pairing->eta_inv() * (eta * Scalar(2)) * pairing->eta_inv().transpose()).trace();
    SL2Data data = make_sl2_data(pairing, F, b, Scalar(-1) * eta, c);
    VirasoroRep rep = extend_to_W(data, 6, M);
    Splitting sp = simultaneous_diagonalize(pairing, F.qq(), data.B, data.c);
    auto factors = split_rep(rep, sp);
    REQUIRE(factors.size() == 3);
    for (const auto& f : factors) CHECK(verify_rep(f, 4, 4).all_zero);

    std::vector<TruncatedSeries> taus;
    for (const auto& f : factors) {
        std::map<int, FockOperator> ops;
        for (const auto& [k, g] : f.gens) ops.emplace(k, quantize(g, *f.pairing));
        taus.push_back(solve_constraints_1d(ops, f.K, 9));
    }
    CHECK(check_product_annihilation(rep, sp, taus, 1).all_zero);
}
