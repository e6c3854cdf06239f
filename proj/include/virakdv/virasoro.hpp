#pragma once

#include <functional>
#include <set>
#include <sstream>
#include <vector>

#include "virakdv/heisenberg.hpp"

namespace virakdv {

/// Generating data of an sl(2) triple inside the enveloping algebra: the
/// lowering operator F plus the free choices (b, B, c) that pin down H and E.
struct SL2Data {
    PairingPtr pairing;
    QuadOperator F;  // type -1
    Scalar b{0};     // constant term of H
    Matrix B;        // b_0^{1,1}
    Matrix c;        // c_1^{1,1}, kept as its symmetric part

    int dim() const { return pairing->dim(); }
};

namespace detail {

inline Matrix a_plus_at(const QuadOperator& F) {
    // qq is stored symmetrized, so a + a^T = 2 * stored.
    if (!F.has_qq()) return Matrix(F.dim(), F.dim());
    return F.qq() * Scalar(2);
}

} // namespace detail

/// Checks the solvability constraints on (F, b, B, c) and normalizes c to its
/// symmetric part. Throws ConstraintViolation with the offending equation
/// label, or SingularMatrix when a qp coefficient of F is not invertible.
inline SL2Data make_sl2_data(PairingPtr pairing, QuadOperator F, Scalar b, Matrix B, Matrix c) {
    const int n = pairing->dim();
    if (F.type_index() != -1) throw TypeShapeError("F must have type -1");
    if (B.rows() != n || B.cols() != n || c.rows() != n || c.cols() != n)
        throw DimensionMismatch("B and c must be n x n");
    const Matrix& einv = pairing->eta_inv();
    Matrix aat = detail::a_plus_at(F);

    for (const auto& [j, m] : F.qp()) m.inverse();  // throws SingularMatrix

    Matrix lhs = B * einv * aat + aat * (B * einv).transpose() + Scalar(2) * aat;
    if (!lhs.is_zero()) throw ConstraintViolation("FyieldsH:2");

    Matrix csym = c.sym();
    Matrix cc = csym * Scalar(2);  // c + c^T
    Matrix hf = Scalar(-1) * (cc * einv * B) - (einv * B).transpose() * cc - Scalar(2) * cc;
    if (!hf.is_zero()) throw ConstraintViolation("HF-2F:2");

    Scalar tr = (csym * einv * aat * einv.transpose()).trace();
    if (tr != b) throw ConstraintViolation("EFH:1");

    return SL2Data{std::move(pairing), std::move(F), std::move(b), std::move(B), std::move(csym)};
}

/// The unique H with [H, F] = -2F for the given (b, B): the lowest qp
/// coefficient is B and the rest follow by the band recursion.
inline QuadOperator build_H(const QuadOperator& F, const Scalar& b, const Matrix& B,
                            const PairingPtr& pairing) {
    const int n = pairing->dim();
    const int M = F.mode_cutoff();
    const Matrix& einv = pairing->eta_inv();
    Matrix aat = detail::a_plus_at(F);
    Matrix lhs = B * einv * aat + aat * (B * einv).transpose() + Scalar(2) * aat;
    if (!lhs.is_zero()) throw ConstraintViolation("FyieldsH:2");

    auto F_low = [&](int lower) -> const Matrix& {
        auto it = F.qp().find(lower + 2);
        if (it == F.qp().end())
            throw WindowExhausted("F lacks the qp coefficient at modes (" + std::to_string(lower + 2) +
                                  "," + std::to_string(lower) + ")");
        return it->second;
    };

    QuadParts parts;
    parts.const_term = b;
    parts.qp[1] = B;
    for (int i = 1; i + 2 <= M; i += 2) {
        const Matrix& C = F_low(i);
        parts.qp[i + 2] = Scalar(1, i + 2) * C * (Scalar(i) * einv * parts.qp[i] - Matrix::scalar(n, Scalar(2))) *
                          (einv * C).inverse();
    }
    if (F.has_linear() && M >= 3)
        parts.linear = Scalar(1, 3) * F.linear() * (einv * B - Matrix::scalar(n, Scalar(2))) *
                       (einv * F_low(1)).inverse();
    return make_typed(0, pairing, parts, M);
}

/// The unique E of type 1 with [E, F] = H and [H, E] = 2E for the chosen
/// symmetric c. The qp band is solved upward from the (1,3) slot.
inline QuadOperator build_E(const QuadOperator& F, const QuadOperator& H, const Matrix& c,
                            const PairingPtr& pairing) {
    const int n = pairing->dim();
    const int M = F.mode_cutoff();
    const Matrix& einv = pairing->eta_inv();
    Matrix aat = detail::a_plus_at(F);
    Matrix csym = c.sym();
    Matrix cc = csym * Scalar(2);

    auto B_of = [&](int j) -> const Matrix& {
        auto it = H.qp().find(j);
        if (it == H.qp().end()) throw WindowExhausted("H lacks qp mode " + std::to_string(j));
        return it->second;
    };
    const Matrix& B = B_of(1);

    Matrix hf = Scalar(-1) * (cc * einv * B) - (einv * B).transpose() * cc - Scalar(2) * cc;
    if (!hf.is_zero()) throw ConstraintViolation("HF-2F:2");
    if ((csym * einv * aat * einv.transpose()).trace() != H.const_term())
        throw ConstraintViolation("EFH:1");

    auto F_low = [&](int lower) -> const Matrix& {
        auto it = F.qp().find(lower + 2);
        if (it == F.qp().end())
            throw WindowExhausted("F lacks the qp coefficient at lower mode " + std::to_string(lower));
        return it->second;
    };

    QuadParts parts;
    if (2 * 1 - 1 <= M) parts.pp[1] = csym;

    // EFH:3 gives the (1,3) slot, EFH:4 the rest of the band.
    std::map<int, Matrix> band;
    band[1] = Scalar(1, 3) * (B - aat * einv.transpose() * cc) * (einv * F_low(1)).inverse();
    for (int r = 3; r + 2 <= M; r += 2)
        band[r] = Scalar(1, r + 2) *
                  (B_of(r) + Scalar(r - 2) * F_low(r - 2) * einv * band[r - 2]) *
                  (einv * F_low(r)).inverse();
    parts.qp = band;

    // EFH:2 gives the linear coefficient.
    if (M >= 5 && (F.has_linear() || H.has_linear())) {
        Matrix h03 = H.has_linear() ? H.linear() : Matrix(1, n);
        Matrix f01 = F.has_linear() ? F.linear() : Matrix(1, n);
        parts.linear = Scalar(1, 5) * (h03 + f01 * einv * band[1]) * (einv * F_low(3)).inverse();
    }
    return make_typed(1, pairing, parts, M);
}

namespace detail {

/// Span of {eta, D eta, ..., D^{n-1} eta} with D = B eta^{-1}: the matrix
/// algebra every band coefficient of the uniform families lives in. Returns
/// constraint vectors (a basis of the orthogonal complement) used to gauge an
/// underdetermined ad(F) inversion.
inline std::vector<std::vector<Scalar>> band_algebra_complement(const Matrix& B, const Pairing& pairing) {
    const int n = pairing.dim();
    Matrix D = B * pairing.eta_inv();
    Matrix span(n, n * n);
    Matrix power = pairing.eta();
    for (int k = 0; k < n; ++k) {
        for (int x = 0; x < n; ++x)
            for (int y = 0; y < n; ++y) span(k, x * n + y) = power(x, y);
        power = D * power;
    }
    return kernel_basis(span);
}

} // namespace detail

/// Inverts ad(F) on the eigenspace of [H, .] = 2i(.): given S of type i-1,
/// finds the unique type-i T with [F, T] = S and [H, T] = 2i T. Assembled as
/// one sparse exact linear solve over the unknown coefficient matrices.
///
/// The pair of linear conditions does not always pin T: structured data (all
/// band coefficients proportional to eta) leaves free directions that only
/// the closure relation [L_2, L_3] = -L_5 excludes. Those are resolved by
/// first restricting the coefficients to the band algebra of (eta, B) and
/// then solving the remaining one-parameter closure equation exactly.
inline QuadOperator solve_adF(const QuadOperator& F, const QuadOperator& H, const QuadOperator& S,
                              int i) {
    if (i < 2) throw TypeShapeError("solve_adF needs i >= 2");
    if (S.type_index() != i - 1) throw TypeShapeError("S must have type i-1");
    const int n = F.dim();
    const int M = F.mode_cutoff();
    if (2 * i + 3 > M)
        throw WindowExhausted("mode cutoff too small to hold a type-" + std::to_string(i) + " operator");
    const PairingPtr& pairing = F.pairing();
    const Matrix& einv = pairing->eta_inv();
    const Matrix einv_t = einv.transpose();
    Matrix aat = detail::a_plus_at(F);

    auto F_low = [&](int lower) -> const Matrix& {
        auto it = F.qp().find(lower + 2);
        if (it == F.qp().end())
            throw WindowExhausted("F lacks the qp coefficient at lower mode " + std::to_string(lower));
        return it->second;
    };
    auto H_of = [&](int j) -> const Matrix& {
        auto it = H.qp().find(j);
        if (it == H.qp().end()) throw WindowExhausted("H lacks qp mode " + std::to_string(j));
        return it->second;
    };

    // Unknown layout: tau0 row, then beta_u for storable u, then X_w for odd
    // w <= i (X_{2i-w} enters as the transpose of X_w).
    std::vector<int> betas;
    for (int u = 1; u + 2 * i <= M; u += 2) betas.push_back(u);
    std::vector<int> xs;
    for (int w = 1; w <= i; w += 2) xs.push_back(w);

    const int tau_base = 0;
    std::map<int, int> beta_base, x_base;
    int next = n;
    for (int u : betas) { beta_base[u] = next; next += n * n; }
    for (int w : xs) { x_base[w] = next; next += n * n; }
    const int num_unknowns = next;

    auto beta_idx = [&](int u, int x, int y) { return beta_base.at(u) + x * n + y; };
    // X_w entry (x, y); w > i is stored through its transpose partner.
    auto x_idx = [&](int w, int x, int y) {
        if (w <= i) return x_base.at(w) + x * n + y;
        return x_base.at(2 * i - w) + y * n + x;
    };

    SparseLinearSystem sys(num_unknowns);

    struct Term {
        Matrix left;   // multiplies the unknown from the left
        Matrix right;  // and from the right
        int which;     // beta mode or X mode
        bool is_x;
    };
    // Adds sum_t left_t * U_t * right_t = rhs entrywise, U_t the unknowns.
    auto add_matrix_equation = [&](const std::vector<Term>& terms, const Matrix& rhs) {
        for (int x = 0; x < n; ++x)
            for (int y = 0; y < n; ++y) {
                std::map<int, Scalar> row;
                for (const auto& t : terms)
                    for (int p = 0; p < n; ++p) {
                        if (t.left(x, p).is_zero()) continue;
                        for (int q = 0; q < n; ++q) {
                            Scalar coef = t.left(x, p) * t.right(q, y);
                            if (coef.is_zero()) continue;
                            int idx = t.is_x ? x_idx(t.which, p, q) : beta_idx(t.which, p, q);
                            row[idx] += coef;
                        }
                    }
                sys.add_row(std::move(row), rhs(x, y));
            }
    };

    const Matrix id = Matrix::identity(n);
    auto S_qp = [&](int u) -> Matrix {
        auto it = S.qp().find(u);
        return it == S.qp().end() ? Matrix(n, n) : it->second;
    };
    auto S_pp_pair = [&](int w) { return detail::pp_pair_sum(S.pp(), w, i - 1, n); };

    // [F,T] = S, qp slots (u, u + 2(i-1)).
    for (int u : betas) {
        std::vector<Term> terms;
        // -(u+2i) beta_u einv C_{u+2i-2}
        terms.push_back({Scalar(-(u + 2 * i)) * id, einv * F_low(u + 2 * i - 2), u, false});
        if (u >= 3 && beta_base.count(u - 2))
            terms.push_back({Scalar(u - 2) * F_low(u - 2) * einv, id, u - 2, false});
        if (u == 1 && !aat.is_zero())
            terms.push_back({Scalar(-1) * aat * einv_t, id, 1, true});
        add_matrix_equation(terms, S_qp(u));
    }

    // [F,T] = S, pp slots: -(2i-w) X_w einv C_{2i-2-w} - (w+2) C_w^T einv^T X_{w+2}
    // equals the raw pair sum of S there, which is twice the stored matrix.
    for (int w = 1; w <= 2 * i - 3; w += 2) {
        std::vector<Term> terms;
        terms.push_back({Scalar(-(2 * i - w)) * id, einv * F_low(2 * i - 2 - w), w, true});
        terms.push_back({Scalar(-(w + 2)) * F_low(w).transpose() * einv_t, id, w + 2, true});
        add_matrix_equation(terms, S_pp_pair(w));
    }

    // [H,T] = 2iT, qp slots.
    for (int u : betas) {
        std::vector<Term> terms;
        terms.push_back({Scalar(u) * H_of(u) * einv, id, u, false});
        terms.push_back({Scalar(-(u + 2 * i)) * id, einv * H_of(u + 2 * i), u, false});
        terms.push_back({Scalar(-2 * i) * id, id, u, false});
        add_matrix_equation(terms, Matrix(n, n));
    }

    // [H,T] = 2iT, pp slots: -(2i-w) X_w einv H_{2i-w} - w H_w^T einv^T X_w = 2i X_w.
    for (int w = 1; w <= 2 * i - 1; w += 2) {
        std::vector<Term> terms;
        terms.push_back({Scalar(-(2 * i - w)) * id, einv * H_of(2 * i - w), w, true});
        terms.push_back({Scalar(-w) * H_of(w).transpose() * einv_t, id, w, true});
        terms.push_back({Scalar(-2 * i) * id, id, w, true});
        add_matrix_equation(terms, Matrix(n, n));
    }

    // Linear slots of both conditions, with tau0 as extra unknowns.
    {
        Matrix f01 = F.has_linear() ? F.linear() : Matrix(1, n);
        Matrix s0 = S.has_linear() ? S.linear() : Matrix(1, n);
        const Matrix CtopF = einv * F_low(2 * i + 1);  // for tau0 in [F,T]
        const Matrix CtopH = einv * H_of(2 * i + 3);
        for (int y = 0; y < n; ++y) {
            // [F,T]: f0 einv beta_1 - (2i+3) tau0 (einv C_{2i+1}) = s0
            std::map<int, Scalar> row;
            if (beta_base.count(1)) {
                Matrix fe = f01 * einv;
                for (int p = 0; p < n; ++p)
                    if (!fe(0, p).is_zero())
                        row[beta_idx(1, p, y)] += fe(0, p);
            }
            for (int p = 0; p < n; ++p) {
                Scalar coef = Scalar(-(2 * i + 3)) * CtopF(p, y);
                if (!coef.is_zero()) row[tau_base + p] += coef;
            }
            sys.add_row(std::move(row), s0(0, y));

            // [H,T]: 3 b0^{0,3} einv beta_3 - (2i+3) tau0 (einv H_{2i+3}) = 2i tau0
            std::map<int, Scalar> row2;
            if (H.has_linear() && beta_base.count(3)) {
                Matrix he = Scalar(3) * H.linear() * einv;
                for (int p = 0; p < n; ++p)
                    if (!he(0, p).is_zero()) row2[beta_idx(3, p, y)] += he(0, p);
            }
            for (int p = 0; p < n; ++p) {
                Scalar coef = Scalar(-(2 * i + 3)) * CtopH(p, y);
                if (!coef.is_zero()) row2[tau_base + p] += coef;
            }
            row2[tau_base + y] += Scalar(-2 * i);
            sys.add_row(std::move(row2), Scalar(0));
        }
    }

    // Middle X must come out symmetric when i is odd.
    if (i % 2 == 1) {
        for (int x = 0; x < n; ++x)
            for (int y = x + 1; y < n; ++y) {
                std::map<int, Scalar> row;
                row[x_idx(i, x, y)] += Scalar(1);
                row[x_idx(i, y, x)] += Scalar(-1);
                sys.add_row(std::move(row), Scalar(0));
            }
    }

    auto materialize = [&](const std::vector<Scalar>& sol) {
        QuadParts parts;
        Matrix tau(1, n);
        for (int p = 0; p < n; ++p) tau(0, p) = sol[tau_base + p];
        if (!tau.is_zero()) parts.linear = tau;
        for (int u : betas) {
            Matrix m(n, n);
            for (int x = 0; x < n; ++x)
                for (int y = 0; y < n; ++y) m(x, y) = sol[beta_idx(u, x, y)];
            if (!m.is_zero()) parts.qp[u] = m;
        }
        for (int w : xs) {
            Matrix m(n, n);
            for (int x = 0; x < n; ++x)
                for (int y = 0; y < n; ++y) m(x, y) = sol[x_idx(w, x, y)];
            if (!m.is_zero()) parts.pp[w] = m;  // pair collapse stores X_w / 2
        }
        return make_typed(i, pairing, parts, M);
    };

    SparseLinearSystem::AffineSolution aff = sys.solve_affine("solve_adF");

    if (aff.kernel.size() > 1) {
        // Gauge: restrict every band coefficient to the (eta, B) algebra.
        auto complement = detail::band_algebra_complement(H_of(1), *pairing);
        SparseLinearSystem gauged = sys;
        for (const auto& wvec : complement) {
            auto add_constraint = [&](auto index_of) {
                std::map<int, Scalar> row;
                for (int x = 0; x < n; ++x)
                    for (int y = 0; y < n; ++y) {
                        const Scalar& cv = wvec[x * n + y];
                        if (!cv.is_zero()) row[index_of(x, y)] += cv;
                    }
                gauged.add_row(std::move(row), Scalar(0));
            };
            for (int u : betas) add_constraint([&](int x, int y) { return beta_idx(u, x, y); });
            for (int w : xs) add_constraint([&](int x, int y) { return x_idx(w, x, y); });
        }
        aff = gauged.solve_affine("solve_adF (gauged)");
    }

    if (aff.kernel.empty()) return materialize(aff.particular);

    // One free direction: pin it with the closure relation [L2, L3] = -L5,
    // which is quadratic in the remaining parameter.
    if (aff.kernel.size() != 1 || i != 2)
        throw SingularMatrix("solve_adF: " + std::to_string(aff.kernel.size()) +
                             " free directions remain after gauging");

    auto at_v = [&](const Scalar& v) {
        std::vector<Scalar> sol = aff.particular;
        for (size_t k = 0; k < sol.size(); ++k) sol[k] += v * aff.kernel.front()[k];
        return materialize(sol);
    };
    auto closure_residual = [&](const QuadOperator& T) {
        QuadOperator L2 = scale_add(Scalar(-3), T, Scalar(0), T);
        auto [L3, w3] = bracket(L2, S);
        auto [L4x2, w4] = bracket(L3, S);
        QuadOperator L4 = scale_add(Scalar(1, 2), L4x2, Scalar(0), L4x2);
        auto [L5x3, w5] = bracket(L4, S);
        QuadOperator L5 = scale_add(Scalar(1, 3), L5x3, Scalar(0), L5x3);
        auto [L23, w23] = bracket(L2, L3);
        return scale_add(Scalar(1), L23, Scalar(1), L5);
    };
    QuadOperator r0 = closure_residual(at_v(Scalar(0)));
    QuadOperator rp = closure_residual(at_v(Scalar(1)));
    QuadOperator rm = closure_residual(at_v(Scalar(-1)));
    // R(v) = A v^2 + B v + C entrywise.
    QuadOperator A2 = scale_add(Scalar(1, 2), scale_add(Scalar(1), rp, Scalar(1), rm), Scalar(-1), r0);
    QuadOperator B1 = scale_add(Scalar(1, 2), rp, Scalar(-1, 2), rm);

    auto coeffs_of = [&](const QuadOperator& q, std::map<std::tuple<int, int, int, int>, Scalar>& out,
                         int slot) {
        auto put = [&](int kind, int mode, int x, int y, const Scalar& cv) {
            if (cv.is_zero()) return;
            auto key = std::make_tuple(kind, mode, x, y);
            // slot 0/1/2 -> packs (a, b, c) of one quadratic per key
            (void)slot;
            out[key] = cv;
        };
        if (q.has_linear())
            for (int y = 0; y < n; ++y) put(0, 0, 0, y, q.linear()(0, y));
        put(1, 0, 0, 0, q.const_term());
        for (const auto& [mj, m] : q.qp())
            for (int x = 0; x < n; ++x)
                for (int y = 0; y < n; ++y) put(2, mj, x, y, m(x, y));
        for (const auto& [mj, m] : q.pp())
            for (int x = 0; x < n; ++x)
                for (int y = 0; y < n; ++y) put(3, mj, x, y, m(x, y));
        if (q.has_qq())
            for (int x = 0; x < n; ++x)
                for (int y = 0; y < n; ++y) put(4, 0, x, y, q.qq()(x, y));
    };
    std::map<std::tuple<int, int, int, int>, Scalar> ca, cb, cc;
    coeffs_of(A2, ca, 0);
    coeffs_of(B1, cb, 1);
    coeffs_of(r0, cc, 2);

    std::vector<Scalar> candidates;
    auto add_candidate = [&](const Scalar& v) {
        for (const auto& c : candidates)
            if (c == v) return;
        candidates.push_back(v);
    };
    std::set<std::tuple<int, int, int, int>> keys;
    for (const auto& [k, v] : ca) keys.insert(k);
    for (const auto& [k, v] : cb) keys.insert(k);
    for (const auto& [k, v] : cc) keys.insert(k);
    bool seeded = false;
    for (const auto& key : keys) {
        Scalar a = ca.count(key) ? ca[key] : Scalar(0);
        Scalar b = cb.count(key) ? cb[key] : Scalar(0);
        Scalar c = cc.count(key) ? cc[key] : Scalar(0);
        if (a.is_zero() && b.is_zero()) continue;
        std::vector<Scalar> roots;
        if (a.is_zero()) {
            roots.push_back(-c / b);
        } else {
            Scalar disc = b * b - Scalar(4) * a * c;
            auto root = disc.sqrt_exact();
            if (!root) continue;  // this entry cannot vanish at a rational v
            roots.push_back((-b + *root) / (Scalar(2) * a));
            roots.push_back((-b - *root) / (Scalar(2) * a));
        }
        if (!seeded) {
            for (const auto& r : roots) add_candidate(r);
            seeded = true;
        } else {
            std::vector<Scalar> kept;
            for (const auto& cnd : candidates)
                for (const auto& r : roots)
                    if (cnd == r) { kept.push_back(cnd); break; }
            candidates = kept;
        }
        if (candidates.empty()) break;
    }
    if (!seeded)
        // The closure residual is already identically zero along the line.
        throw SingularMatrix("solve_adF: closure relation does not pin the free direction");
    for (const auto& v : candidates) {
        QuadOperator T = at_v(v);
        if (closure_residual(T).is_zero()) return T;
    }
    throw SingularMatrix("solve_adF: no rational parameter satisfies the closure relation");
}

/// Representation of the positive Witt half: generators indexed -1..K plus
/// their reliable windows.
struct VirasoroRep {
    PairingPtr pairing;
    SL2Data source;
    int K = 1;
    int M = 1;
    std::map<int, QuadOperator> gens;
    std::map<int, int> windows;
};

inline QuadOperator truncate_operator(const QuadOperator& T, int M) {
    if (M == T.mode_cutoff()) return T;
    QuadParts parts;
    if (T.has_linear() && T.linear_mode() <= M) parts.linear = T.linear();
    parts.const_term = T.const_term();
    if (T.has_qq()) parts.qq = T.qq();
    for (const auto& [j, m] : T.qp())
        if (j <= M && j + 2 * T.type_index() <= M) parts.qp[j] = m;
    for (const auto& [j, m] : T.pp())
        if (j <= M && 2 * T.type_index() - j <= M) parts.pp[j] = m;
    return make_typed(T.type_index(), T.pairing(), parts, M);
}

/// Extends the sl(2) triple to all of the positive Witt half: L_2 by
/// inverting ad(F), higher generators by bracketing with L_1.
inline VirasoroRep extend_to_W(const SL2Data& data, int K, int M) {
    if (K < 1) throw ConfigError("extend_to_W needs K >= 1");
    if (M % 2 == 0 || M < 2 * K + 3)
        throw WindowExhausted("extend_to_W needs odd M >= 2K + 3");
    if (M > data.F.mode_cutoff())
        throw WindowExhausted("SL2Data was materialized below the requested cutoff");

    VirasoroRep rep;
    rep.pairing = data.pairing;
    rep.source = data;
    rep.K = K;
    rep.M = M;

    QuadOperator F = truncate_operator(data.F, M);
    QuadOperator H = build_H(F, data.b, data.B, data.pairing);
    QuadOperator E = build_E(F, H, data.c, data.pairing);

    rep.gens.emplace(-1, F);
    rep.gens.emplace(0, scale_add(Scalar(-1, 2), H, Scalar(0), H));
    rep.gens.emplace(1, scale_add(Scalar(-1), E, Scalar(0), E));
    if (K >= 2) {
        QuadOperator T = solve_adF(F, H, rep.gens.at(1), 2);
        rep.gens.emplace(2, scale_add(Scalar(-3), T, Scalar(0), T));
    }
    for (int k = 3; k <= K; ++k) {
        auto [br, win] = bracket(rep.gens.at(k - 1), rep.gens.at(1));
        (void)win;
        rep.gens.emplace(k, scale_add(Scalar(1, k - 2), br, Scalar(0), br));
    }
    // Every stored coefficient of every generator is produced from stored
    // coefficients of F, H, E, so the reliable window is the full cutoff.
    for (const auto& [k, g] : rep.gens) rep.windows[k] = M;
    return rep;
}

/// Window on which the bracket of generators i and j is exactly comparable:
/// each type- -1 operand costs two modes, non-negative types cost none.
inline int pair_window(const VirasoroRep& rep, int i, int j) {
    int w = std::min({rep.windows.at(i), rep.windows.at(j), rep.windows.at(i + j)});
    return w - 2 * ((i < 0 ? 1 : 0) + (j < 0 ? 1 : 0));
}

struct PairResidual {
    int i, j;
    int window;
    mpz_class max_abs_numerator;
};

struct VerifyReport {
    std::vector<PairResidual> pairs;
    bool all_zero = true;

    std::string summary() const {
        std::ostringstream os;
        for (const auto& p : pairs)
            os << "[" << p.i << "," << p.j << "] window=" << p.window
               << " max|num|=" << p.max_abs_numerator.get_str() << "\n";
        return os.str();
    }
};

/// Checks [L_i, L_j] = (i - j) L_{i+j} for all -1 <= i < j <= jmax with
/// i <= imax and i + j <= K, reporting the largest residual numerator inside
/// each pair's window. Failures are reported, not thrown.
inline VerifyReport verify_rep(const VirasoroRep& rep, int imax, int jmax) {
    VerifyReport report;
    for (int i = -1; i <= imax; ++i)
        for (int j = i + 1; j <= jmax; ++j) {
            if (i + j < -1 || i + j > rep.K) continue;
            auto [br, bw] = bracket(rep.gens.at(i), rep.gens.at(j));
            QuadOperator target =
                scale_add(Scalar(i - j), rep.gens.at(i + j), Scalar(0), rep.gens.at(i + j));
            int w = pair_window(rep, i, j);
            mpz_class resid = residual_max_numerator(br, target, w);
            if (resid != 0) report.all_zero = false;
            report.pairs.push_back({i, j, w, resid});
        }
    return report;
}

} // namespace virakdv
