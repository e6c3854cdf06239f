#pragma once

#include <algorithm>
#include <numeric>

#include "virakdv/solver.hpp"
#include "virakdv/virasoro.hpp"

namespace virakdv {

/// Basis change splitting the coefficient space into pairwise orthogonal
/// one-dimensional factors. Transformed data uses M' = (S^{-1})^T M S^{-1};
/// columns of S^{-1} are the new basis vectors.
struct Splitting {
    Matrix S;
    Matrix S_inv;
    std::vector<std::vector<int>> blocks;  // 1-based indices
    Matrix eta_t, a_t, B_t, c_t;           // transformed data, diagonal
};

namespace detail {

/// Exact characteristic polynomial by Faddeev-LeVerrier; index k holds the
/// coefficient of x^k.
inline std::vector<Scalar> char_poly(const Matrix& m) {
    int n = m.rows();
    std::vector<Scalar> c(n + 1);
    c[n] = Scalar(1);
    Matrix mk = Matrix::identity(n);
    for (int k = 1; k <= n; ++k) {
        mk = m * mk;
        Scalar ck = mk.trace() * Scalar(-1, k);
        c[n - k] = ck;
        mk += Matrix::scalar(n, ck);
    }
    return c;
}

inline std::vector<mpz_class> divisors_up_to(const mpz_class& value, long cap) {
    std::vector<mpz_class> out;
    mpz_class v = ::abs(value);
    if (v == 0) return out;
    for (mpz_class d = 1; d * d <= v && d <= cap; ++d) {
        if (v % d == 0) {
            out.push_back(d);
            mpz_class q = v / d;
            if (q <= cap) out.push_back(q);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

/// All rational roots with multiplicity; throws IrrationalEigenvalue when the
/// polynomial does not split over the rationals.
inline std::map<Scalar, int> rational_roots(std::vector<Scalar> poly) {
    // strip leading zeros
    while (!poly.empty() && poly.back().is_zero()) poly.pop_back();
    if (poly.empty()) throw Error("zero polynomial");
    std::map<Scalar, int> roots;
    // factor out x^k
    size_t low = 0;
    while (low < poly.size() && poly[low].is_zero()) ++low;
    if (low > 0) {
        roots[Scalar(0)] += static_cast<int>(low);
        poly.erase(poly.begin(), poly.begin() + low);
    }
    auto evaluate = [&](const std::vector<Scalar>& p, const Scalar& x) {
        Scalar acc(0);
        for (size_t k = p.size(); k-- > 0;) acc = acc * x + p[k];
        return acc;
    };
    auto deflate = [&](std::vector<Scalar>& p, const Scalar& root) {
        std::vector<Scalar> q(p.size() - 1);
        Scalar carry = p.back();
        for (size_t k = p.size() - 1; k-- > 0;) {
            q[k] = carry;
            carry = p[k] + carry * root;
        }
        p = std::move(q);
    };
    while (poly.size() > 1) {
        // clear denominators for the candidate search
        mpz_class lcm = 1;
        for (const auto& c : poly) {
            mpz_class den = c.denominator();
            mpz_class g;
            mpz_gcd(g.get_mpz_t(), lcm.get_mpz_t(), den.get_mpz_t());
            lcm = lcm / g * den;
        }
        mpz_class a0 = Scalar(poly.front() * Scalar(mpq_class(lcm))).numerator();
        mpz_class an = Scalar(poly.back() * Scalar(mpq_class(lcm))).numerator();
        const long cap = 1000000;
        bool found = false;
        for (const auto& p : divisors_up_to(a0, cap)) {
            for (const auto& q : divisors_up_to(an, cap)) {
                for (int sign : {1, -1}) {
                    Scalar cand(mpq_class(sign * p, q));
                    if (evaluate(poly, cand).is_zero()) {
                        roots[cand] += 1;
                        deflate(poly, cand);
                        found = true;
                        break;
                    }
                }
                if (found) break;
            }
            if (found) break;
        }
        if (!found)
            throw IrrationalEigenvalue("characteristic polynomial has no further rational root");
    }
    return roots;
}

/// Orthogonal basis for a symmetric nondegenerate form, by Lagrange pivoting.
inline Matrix lagrange_orthogonalize(const Matrix& g) {
    int n = g.rows();
    std::vector<std::vector<Scalar>> basis;
    for (int i = 0; i < n; ++i) {
        std::vector<Scalar> e(n, Scalar(0));
        e[i] = Scalar(1);
        basis.push_back(std::move(e));
    }
    auto form = [&](const std::vector<Scalar>& x, const std::vector<Scalar>& y) {
        Scalar acc(0);
        for (int i = 0; i < n; ++i) {
            if (x[i].is_zero()) continue;
            for (int j = 0; j < n; ++j)
                if (!y[j].is_zero()) acc += x[i] * g(i, j) * y[j];
        }
        return acc;
    };
    std::vector<std::vector<Scalar>> ortho;
    std::vector<std::vector<Scalar>> pending = basis;
    while (!pending.empty()) {
        // find a vector of nonzero length, fixing isotropic pivots by mixing
        int pick = -1;
        for (size_t i = 0; i < pending.size(); ++i)
            if (!form(pending[i], pending[i]).is_zero()) { pick = static_cast<int>(i); break; }
        if (pick < 0) {
            bool fixed = false;
            for (size_t i = 0; i < pending.size() && !fixed; ++i)
                for (size_t j = i + 1; j < pending.size() && !fixed; ++j)
                    if (!form(pending[i], pending[j]).is_zero()) {
                        for (int t = 0; t < n; ++t) pending[i][t] += pending[j][t];
                        fixed = true;
                    }
            if (!fixed) throw SingularMatrix("form is degenerate on the block");
            continue;
        }
        std::vector<Scalar> p = pending[pick];
        pending.erase(pending.begin() + pick);
        Scalar pp = form(p, p);
        for (auto& v : pending) {
            Scalar f = form(v, p) / pp;
            for (int t = 0; t < n; ++t) v[t] -= f * p[t];
        }
        ortho.push_back(std::move(p));
    }
    Matrix out(n, n);
    for (int c = 0; c < n; ++c)
        for (int r = 0; r < n; ++r) out(r, c) = ortho[c][r];
    return out;
}

} // namespace detail

/// Finds S making eta, a, B and c simultaneously diagonal: refine joint
/// eigenspaces of the three pencils, demand the pairing stays nondegenerate
/// on each piece, and orthogonalize within.
inline Splitting simultaneous_diagonalize(const PairingPtr& pairing, const Matrix& a,
                                          const Matrix& B, const Matrix& c) {
    const int n = pairing->dim();
    const Matrix& eta = pairing->eta();
    const Matrix& einv = pairing->eta_inv();

    // blocks as collections of column vectors
    std::vector<std::vector<std::vector<Scalar>>> blocks;
    {
        std::vector<std::vector<Scalar>> all;
        for (int i = 0; i < n; ++i) {
            std::vector<Scalar> e(n, Scalar(0));
            e[i] = Scalar(1);
            all.push_back(std::move(e));
        }
        blocks.push_back(std::move(all));
    }

    for (const Matrix* form : {&B, &a, &c}) {
        Matrix D = einv * (*form);
        std::vector<std::vector<std::vector<Scalar>>> refined;
        for (const auto& block : blocks) {
            int b = static_cast<int>(block.size());
            Matrix V(n, b);
            for (int j = 0; j < b; ++j)
                for (int i = 0; i < n; ++i) V(i, j) = block[j][i];
            // restriction R with D V = V R: pick pivot rows of V to solve
            Matrix DV = D * V;
            // find b independent rows of V by elimination
            Matrix work = V;
            std::vector<int> rows;
            {
                std::vector<bool> used(n, false);
                for (int col = 0; col < b; ++col) {
                    int piv = -1;
                    for (int r = 0; r < n; ++r)
                        if (!used[r] && !work(r, col).is_zero()) { piv = r; break; }
                    if (piv < 0) throw SingularMatrix("block basis is degenerate");
                    used[piv] = true;
                    rows.push_back(piv);
                    Scalar d = work(piv, col).inv();
                    for (int cc = 0; cc < b; ++cc) work(piv, cc) *= d;
                    for (int r = 0; r < n; ++r) {
                        if (r == piv || work(r, col).is_zero()) continue;
                        Scalar f = work(r, col);
                        for (int cc = 0; cc < b; ++cc) work(r, cc) -= f * work(piv, cc);
                    }
                }
            }
            Matrix Vp(b, b), DVp(b, b);
            for (int r = 0; r < b; ++r)
                for (int cc = 0; cc < b; ++cc) {
                    Vp(r, cc) = V(rows[r], cc);
                    DVp(r, cc) = DV(rows[r], cc);
                }
            Matrix R = Vp.inverse() * DVp;
            // consistency: the block must be D-invariant
            if (!(V * R == DV))
                throw NotSimultaneouslyDiagonalizable("block is not invariant under a pencil");

            auto roots = detail::rational_roots(detail::char_poly(R));
            int total = 0;
            for (const auto& [lam, mult] : roots) {
                Matrix shifted = R - Matrix::scalar(b, lam);
                auto kern = kernel_basis(shifted);
                if (kern.empty()) continue;
                std::vector<std::vector<Scalar>> sub;
                for (const auto& kv : kern) {
                    std::vector<Scalar> vec(n, Scalar(0));
                    for (int j = 0; j < b; ++j)
                        for (int i = 0; i < n; ++i) vec[i] += kv[j] * block[j][i];
                    sub.push_back(std::move(vec));
                }
                total += static_cast<int>(sub.size());
                refined.push_back(std::move(sub));
            }
            if (total != b)
                throw NotSimultaneouslyDiagonalizable("a pencil is not diagonalizable on a block");
        }
        blocks = std::move(refined);
    }

    // The pairing must be nondegenerate on each joint eigenspace; isotropic
    // pieces obstruct any simultaneous diagonalization.
    std::vector<std::vector<Scalar>> final_basis;
    for (const auto& block : blocks) {
        int b = static_cast<int>(block.size());
        Matrix G(b, b);
        for (int x = 0; x < b; ++x)
            for (int y = 0; y < b; ++y) {
                Scalar acc(0);
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) acc += block[x][i] * eta(i, j) * block[y][j];
                G(x, y) = acc;
            }
        try {
            G.inverse();
        } catch (const SingularMatrix&) {
            throw NotSimultaneouslyDiagonalizable(
                "the pairing is degenerate on a joint eigenspace (isotropic pairing of eigenvalues)");
        }
        Matrix W = detail::lagrange_orthogonalize(G);
        for (int col = 0; col < b; ++col) {
            std::vector<Scalar> vec(n, Scalar(0));
            for (int j = 0; j < b; ++j)
                for (int i = 0; i < n; ++i) vec[i] += W(j, col) * block[j][i];
            final_basis.push_back(std::move(vec));
        }
    }

    Splitting sp;
    sp.S_inv = Matrix(n, n);
    for (int col = 0; col < n; ++col)
        for (int row = 0; row < n; ++row) sp.S_inv(row, col) = final_basis[col][row];
    sp.S = sp.S_inv.inverse();
    Matrix T = sp.S_inv;
    Matrix Tt = T.transpose();
    sp.eta_t = Tt * eta * T;
    sp.a_t = Tt * a * T;
    sp.B_t = Tt * B * T;
    sp.c_t = Tt * c * T;
    for (const Matrix* m : {&sp.eta_t, &sp.a_t, &sp.B_t, &sp.c_t})
        if (!m->is_diagonal())
            throw NotSimultaneouslyDiagonalizable("transformed data is not diagonal");
    for (int i = 1; i <= n; ++i) sp.blocks.push_back({i});
    return sp;
}

namespace detail {

inline Matrix conj_form(const Matrix& m, const Matrix& T) { return T.transpose() * m * T; }

} // namespace detail

/// The representation with every coefficient matrix rewritten in the split
/// basis (congruence by S^{-1}, rows by right multiplication).
inline VirasoroRep transform_rep(const VirasoroRep& rep, const Splitting& sp) {
    const Matrix& T = sp.S_inv;
    PairingPtr pairing_t = make_pairing(sp.eta_t);
    VirasoroRep out;
    out.pairing = pairing_t;
    out.K = rep.K;
    out.M = rep.M;
    out.windows = rep.windows;
    for (const auto& [k, g] : rep.gens) {
        QuadParts parts;
        if (g.has_linear()) parts.linear = g.linear() * T;
        parts.const_term = g.const_term();
        if (g.has_qq()) parts.qq = detail::conj_form(g.qq(), T);
        for (const auto& [j, m] : g.qp()) parts.qp[j] = detail::conj_form(m, T);
        for (const auto& [j, m] : g.pp()) parts.pp[j] = detail::conj_form(m, T);
        out.gens.emplace(k, make_typed(g.type_index(), pairing_t, parts, g.mode_cutoff()));
    }
    out.source.pairing = pairing_t;
    out.source.F = out.gens.at(-1);
    out.source.b = rep.source.b;
    out.source.B = detail::conj_form(rep.source.B, T);
    out.source.c = detail::conj_form(rep.source.c, T);
    return out;
}

/// One-dimensional factors of a block-diagonal representation. Throws
/// BlockLeak naming the generator if any cross-block entry survives.
inline std::vector<VirasoroRep> split_rep(const VirasoroRep& rep, const Splitting& sp) {
    VirasoroRep tr = transform_rep(rep, sp);
    const int n = tr.pairing->dim();
    if (static_cast<int>(sp.blocks.size()) != n)
        throw ConfigError("split_rep expects a full splitting into singletons");

    for (const auto& [k, g] : tr.gens) {
        auto check = [&](const Matrix& m) {
            if (!m.is_diagonal())
                throw BlockLeak("generator at level " + std::to_string(k) +
                                " has cross-block entries");
        };
        if (g.has_qq()) check(g.qq());
        for (const auto& [j, m] : g.qp()) check(m);
        for (const auto& [j, m] : g.pp()) check(m);
    }

    // Per-factor constant split via the per-block trace identity.
    const Matrix& etat = sp.eta_t;
    std::vector<VirasoroRep> factors;
    for (int al = 0; al < n; ++al) {
        Scalar ea = etat(al, al);
        PairingPtr p1 = make_pairing(Matrix(1, 1, {ea}));
        Scalar aat = sp.a_t(al, al) * Scalar(2);
        Scalar b_al = sp.c_t(al, al) * aat / (ea * ea);
        VirasoroRep f;
        f.pairing = p1;
        f.K = tr.K;
        f.M = tr.M;
        f.windows = tr.windows;
        for (const auto& [k, g] : tr.gens) {
            QuadParts parts;
            if (g.has_linear()) parts.linear = Matrix(1, 1, {g.linear()(0, al)});
            if (k == 0) parts.const_term = Scalar(-1, 2) * b_al;  // gens[0] = -H/2
            if (g.has_qq()) parts.qq = Matrix(1, 1, {g.qq()(al, al)});
            for (const auto& [j, m] : g.qp())
                if (!m(al, al).is_zero()) parts.qp[j] = Matrix(1, 1, {m(al, al)});
            for (const auto& [j, m] : g.pp())
                if (!m(al, al).is_zero()) parts.pp[j] = Matrix(1, 1, {m(al, al)});
            f.gens.emplace(k, make_typed(g.type_index(), p1, parts, g.mode_cutoff()));
        }
        f.source.pairing = p1;
        f.source.F = f.gens.at(-1);
        f.source.b = b_al;
        f.source.B = Matrix(1, 1, {sp.B_t(al, al)});
        f.source.c = Matrix(1, 1, {sp.c_t(al, al)});
        factors.push_back(std::move(f));
    }
    return factors;
}

/// Sum of re-embedded factors; must reproduce the transformed representation.
inline bool reassembles(const std::vector<VirasoroRep>& factors, const VirasoroRep& transformed) {
    const int n = transformed.pairing->dim();
    for (const auto& [k, g] : transformed.gens) {
        Matrix lin(1, n);
        Scalar cst(0);
        Matrix qq(n, n);
        std::map<int, Matrix> qp, pp;
        for (int al = 0; al < n; ++al) {
            const QuadOperator& f = factors[al].gens.at(k);
            if (f.has_linear()) lin(0, al) = f.linear()(0, 0);
            cst += f.const_term();
            if (f.has_qq()) qq(al, al) = f.qq()(0, 0);
            for (const auto& [j, m] : f.qp()) {
                auto [it, fresh] = qp.emplace(j, Matrix(n, n));
                it->second(al, al) = m(0, 0);
            }
            for (const auto& [j, m] : f.pp()) {
                auto [it, fresh] = pp.emplace(j, Matrix(n, n));
                it->second(al, al) = m(0, 0);
            }
        }
        if (g.has_linear() != !lin.is_zero()) return false;
        if (g.has_linear() && !(g.linear() == lin)) return false;
        if (g.const_term() != cst) return false;
        if (g.has_qq() != !qq.is_zero()) return false;
        if (g.has_qq() && !(g.qq() == qq)) return false;
        if (g.qp() != qp) return false;
        if (g.pp() != pp) return false;
    }
    return true;
}

/// Product of the factor solutions in the split variables, pushed back to the
/// original coordinates by the substitution t_{i,a} -> sum_b S_{ab} t_{i,b}.
inline TruncatedSeries assemble_product_solution(const std::vector<TruncatedSeries>& taus,
                                                 const Splitting& sp) {
    const int n = static_cast<int>(taus.size());
    if (n == 0) throw ConfigError("no factors");
    int D = taus.front().degree_cutoff();
    for (const auto& t : taus) {
        if (t.degree_cutoff() != D) throw CutoffMismatch("factor solutions have different cutoffs");
        if (!t.constant_term().is_one()) throw BadConstantTerm("factor solutions need tau(0) = 1");
    }
    // embed factor alpha's t_i as t_{i,alpha} and multiply
    TruncatedSeries prod = TruncatedSeries::one(n, D);
    for (int al = 0; al < n; ++al) {
        TruncatedSeries emb(n, D);
        for (const auto& [m, c] : taus[al].terms()) {
            Monomial mm;
            for (const auto& [v, e] : m.exps()) mm = mm.times({v.mode, al + 1}, e);
            emb.set(mm, c);
        }
        prod = prod * emb;
    }
    if (n == 1) return prod;

    // substitution t_{i,a} -> sum_b S_{ab} t_{i,b}
    const Matrix& S = sp.S;
    TruncatedSeries out(n, D);
    for (const auto& [m, c] : prod.terms()) {
        TruncatedSeries term = TruncatedSeries::one(n, D);
        for (const auto& [v, e] : m.exps()) {
            TruncatedSeries lin(n, D);
            for (int b = 0; b < n; ++b)
                if (!S(v.alpha - 1, b).is_zero())
                    lin.set(Monomial::var(v.mode, b + 1), S(v.alpha - 1, b));
            for (int rep = 0; rep < e; ++rep) term = term * lin;
        }
        out += c * term;
    }
    return out;
}

struct ProductAnnihilationReport {
    struct Entry {
        int k;
        int reliable_degree;
        TruncatedSeries residual;
    };
    std::vector<Entry> entries;
    bool all_zero = true;
};

/// Applies the quantized transformed generators to the plain product of the
/// factor solutions and reports the residuals.
inline ProductAnnihilationReport check_product_annihilation(const VirasoroRep& rep,
                                                            const Splitting& sp,
                                                            const std::vector<TruncatedSeries>& taus,
                                                            int kmax) {
    VirasoroRep tr = transform_rep(rep, sp);
    const int n = tr.pairing->dim();
    int D = taus.front().degree_cutoff();
    TruncatedSeries prod = TruncatedSeries::one(n, D);
    for (int al = 0; al < n; ++al) {
        TruncatedSeries emb(n, D);
        for (const auto& [m, c] : taus[al].terms()) {
            Monomial mm;
            for (const auto& [v, e] : m.exps()) mm = mm.times({v.mode, al + 1}, e);
            emb.set(mm, c);
        }
        prod = prod * emb;
    }
    ProductAnnihilationReport report;
    for (int k = -1; k <= kmax; ++k) {
        if (!tr.gens.count(k)) break;
        TruncatedSeries r = apply(quantize(tr.gens.at(k), *tr.pairing), prod);
        if (!r.is_zero()) report.all_zero = false;
        report.entries.push_back({k, r.degree_cutoff(), std::move(r)});
    }
    return report;
}

} // namespace virakdv
