#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <vector>

#include "virakdv/fock.hpp"

namespace virakdv {

/// Per-mode scaling t_i -> lambda_i t_i.
struct ScaleVector {
    std::map<int, Scalar> lambdas;

    const Scalar& at(int mode) const {
        auto it = lambdas.find(mode);
        if (it == lambdas.end()) throw MissingScale("no scale for mode " + std::to_string(mode));
        return it->second;
    }
};

/// Monomial-wise multiplication by prod lambda_i^{+-n_i}.
inline TruncatedSeries rescale_series(const TruncatedSeries& f, const ScaleVector& lambda,
                                      bool invert = false) {
    TruncatedSeries r(f.dim(), f.degree_cutoff());
    for (const auto& [m, c] : f.terms()) {
        Scalar factor(1);
        for (const auto& [v, e] : m.exps()) {
            Scalar l = lambda.at(v.mode);
            factor *= invert ? l.pow(-e) : l.pow(e);
        }
        r.set(m, c * factor);
    }
    return r;
}

namespace detail {

/// Checks the family looks like quantized type-k operators: the only
/// derivative-linear slot of op_k sits at mode 2k+3.
inline Scalar top_linear_coeff(const FockOperator& op, int k) {
    Scalar s(0);
    for (const auto& [v, c] : op.lin_d) {
        if (v.mode == 2 * k + 3 && v.alpha == 1 && op.dim() == 1) s = c;
        else if (v.mode != 2 * k + 3)
            throw ConfigError("operator for level " + std::to_string(k) +
                              " has a derivative at mode " + std::to_string(v.mode) +
                              "; not of type " + std::to_string(k));
    }
    return s;
}

/// Degree-d homogeneous part of exp(-F) op exp(F) with the top linear term
/// excluded; everything here only consumes F below the working degree.
inline TruncatedSeries conjugated_known_part(const FockOperator& op, const TruncatedSeries& F,
                                             int degree, int skip_mode) {
    TruncatedSeries r(F.dim(), degree);
    if (degree == 0 && !op.constant.is_zero()) r.add(Monomial{}, op.constant);
    for (const auto& [v, c] : op.lin_t) {
        // c * t_v contributes a bare monomial
        Monomial m = Monomial::var(v.mode, v.alpha);
        if (m.degree() == degree) r.add(m, c);
    }
    for (const auto& [v, c] : op.lin_d) {
        if (v.mode == skip_mode) continue;
        TruncatedSeries df = F.derivative(v);
        for (const auto& [m, cf] : df.terms())
            if (m.degree() == degree) r.add(m, c * cf);
    }
    for (const auto& [p, c] : op.tt) {
        Monomial m = Monomial::var(p.a.mode, p.a.alpha) * Monomial::var(p.b.mode, p.b.alpha);
        if (m.degree() == degree) r.add(m, c);
    }
    for (const auto& [p, c] : op.td) {
        TruncatedSeries df = F.derivative(p.second);
        for (const auto& [m, cf] : df.terms()) {
            Monomial mm = m.times({p.first.mode, p.first.alpha}, 1);
            if (mm.degree() == degree) r.add(mm, c * cf);
        }
    }
    for (const auto& [p, c] : op.dd) {
        TruncatedSeries da = F.derivative(p.a);
        TruncatedSeries dab = da.derivative(p.b);
        for (const auto& [m, cf] : dab.terms())
            if (m.degree() == degree) r.add(m, c * cf);
        TruncatedSeries db = F.derivative(p.b);
        for (const auto& [ma, cfa] : da.terms()) {
            if (ma.degree() > degree) continue;
            for (const auto& [mb, cfb] : db.terms()) {
                if (ma.degree() + mb.degree() != degree) continue;
                r.add(ma * mb, c * cfa * cfb);
            }
        }
    }
    return r;
}

inline std::vector<Monomial> monomials_of_degree(int degree) {
    std::vector<Monomial> out;
    std::function<void(int, int, Monomial)> rec = [&](int remaining, int max_mode, Monomial acc) {
        if (remaining == 0) {
            out.push_back(acc);
            return;
        }
        int start = std::min(max_mode, remaining);
        if (start % 2 == 0) --start;
        for (int mode = start; mode >= 1; mode -= 2)
            rec(remaining - mode, mode, acc.times({mode, 1}, 1));
    };
    rec(degree, degree, Monomial{});
    return out;
}

} // namespace detail

enum class SweepOrder { Ascending, Descending };

/// Recursive solution of the constraint system op_k(tau) = 0, k = -1..kmax,
/// with tau(0) = 1, for a one-dimensional type-graded family. Coefficients of
/// log tau are determined degree by degree; every equation that revisits an
/// already-determined coefficient is checked for consistency.
inline TruncatedSeries solve_constraints_1d(const std::map<int, FockOperator>& ops, int kmax,
                                            int degree_cutoff,
                                            SweepOrder order = SweepOrder::Ascending) {
    if (degree_cutoff < 1) throw ConfigError("degree cutoff must be positive");
    for (const auto& [k, op] : ops)
        if (op.dim() != 1) throw DimensionMismatch("solve_constraints_1d needs 1-dim operators");

    std::vector<int> levels;
    for (int k = -1; k <= kmax; ++k) {
        if (!ops.count(k))
            throw ConfigError("missing operator for level " + std::to_string(k));
        levels.push_back(k);
    }
    if (order == SweepOrder::Descending) std::reverse(levels.begin(), levels.end());

    std::map<int, Scalar> s_of;  // top linear coefficient per level
    for (int k : levels) s_of[k] = detail::top_linear_coeff(ops.at(k), k);

    TruncatedSeries F(1, degree_cutoff);
    for (int d = 1; d <= degree_cutoff; ++d) {
        std::map<Monomial, bool> determined;
        for (int k : levels) {
            int i = d - (2 * k + 3);
            if (i < 0) continue;
            int mode = 2 * k + 3;
            TruncatedSeries known = detail::conjugated_known_part(ops.at(k), F, i, mode);
            const Scalar& s = s_of.at(k);
            // Each degree-i monomial mu pins f at mu * t_mode.
            for (const Monomial& mu : detail::monomials_of_degree(i)) {
                Monomial target = mu.times({mode, 1}, 1);
                Scalar rhs = known.coeff(mu);
                Scalar lead = s * Scalar(mu.exponent({mode, 1}) + 1);
                if (lead.is_zero()) {
                    if (!rhs.is_zero())
                        throw NoSolution("equation (k=" + std::to_string(k) + ", degree " +
                                         std::to_string(i) + ") forces a nonzero constant with s = 0");
                    continue;
                }
                Scalar value = -rhs / lead;
                auto it = determined.find(target);
                if (it != determined.end()) {
                    if (F.coeff(target) != value)
                        throw NoSolution("inconsistent equations at monomial of degree " +
                                         std::to_string(d) + " (level " + std::to_string(k) + ")");
                } else {
                    F.set(target, value);
                    determined.emplace(target, true);
                }
            }
        }
        for (const Monomial& m : detail::monomials_of_degree(d)) {
            if (determined.count(m)) continue;
            // A vanishing linear-derivative coefficient together with a live
            // quadratic term makes the degree-2 equation forced and nonzero.
            if (s_of.at(-1).is_zero() && !ops.at(-1).tt.empty())
                throw NoSolution("the linear-derivative coefficient of the lowering operator "
                                 "vanishes; the quadratic term forces an inconsistency");
            throw UnderdeterminedDegree("no equation determines the coefficient of a degree-" +
                                        std::to_string(d) +
                                        " monomial; raise kmax (first free monomial has top mode " +
                                        std::to_string(m.exps().back().first.mode) + ")");
        }
    }
    return exp_series(F);
}

/// Reads off the scale vector lambda and the parameter s for which this
/// lowering operator is the lambda-conjugate of the canonical form
/// s d_1 + (1/4) t_1^2 + ((j+2)/2) t_{j+2} d_j.
inline std::pair<ScaleVector, Scalar> canonical_rescale(const FockOperator& lowering) {
    if (lowering.dim() != 1) throw DimensionMismatch("canonical_rescale needs a 1-dim operator");
    auto it_tt = lowering.tt.find(VarPair{{1, 1}, {1, 1}});
    if (it_tt == lowering.tt.end() || it_tt->second.is_zero())
        throw ZeroCoefficient("quadratic t_1^2 coefficient vanishes");
    Scalar alpha = it_tt->second;
    auto root = (Scalar(4) * alpha).sqrt_exact();
    if (!root) throw NonRationalScale("4 * " + alpha.str() + " is not a rational square");
    ScaleVector lambda;
    lambda.lambdas[1] = *root;

    int cutoff = lowering.mode_cutoff();
    for (int j = 1; j + 2 <= cutoff; j += 2) {
        auto it = lowering.td.find({{j + 2, 1}, {j, 1}});
        if (it == lowering.td.end() || it->second.is_zero())
            throw ZeroCoefficient("band coefficient t_" + std::to_string(j + 2) + " d_" +
                                  std::to_string(j) + " vanishes");
        // gamma_j = ((j+2)/2) lambda_{j+2} / lambda_j
        lambda.lambdas[j + 2] = lambda.lambdas[j] * it->second * Scalar(2, j + 2);
    }
    auto it_lin = lowering.lin_d.find({1, 1});
    Scalar beta = (it_lin == lowering.lin_d.end()) ? Scalar(0) : it_lin->second;
    Scalar s = beta * lambda.lambdas[1];
    return {lambda, s};
}

/// Conjugates a 1-dim operator by the variable scaling t_i -> lambda_i t_i.
inline FockOperator rescale_operator(const FockOperator& op, const ScaleVector& lambda,
                                     bool invert = false) {
    auto l = [&](int mode, int e) {
        Scalar v = lambda.at(mode).pow(e);
        return invert ? v.inv() : v;
    };
    FockOperator r(op.dim(), op.mode_cutoff(), op.degree_shift());
    r.constant = op.constant;
    for (const auto& [v, c] : op.lin_t) r.lin_t[v] = c * l(v.mode, 1);
    for (const auto& [v, c] : op.lin_d) r.lin_d[v] = c * l(v.mode, -1);
    for (const auto& [p, c] : op.tt) r.tt[p] = c * l(p.a.mode, 1) * l(p.b.mode, 1);
    for (const auto& [p, c] : op.td) r.td[p] = c * l(p.first.mode, 1) * l(p.second.mode, -1);
    for (const auto& [p, c] : op.dd) r.dd[p] = c * l(p.a.mode, -1) * l(p.b.mode, -1);
    return r;
}

/// Multi-index over odd modes for the bilinear derivative monomials.
using HirotaIndex = std::map<int, int>;

/// D^m f.g: sum over splittings with alternating signs.
inline TruncatedSeries hirota_apply(const HirotaIndex& m, const TruncatedSeries& f,
                                    const TruncatedSeries& g) {
    std::vector<std::pair<int, int>> comps(m.begin(), m.end());
    std::vector<int> k(comps.size(), 0);
    int total_order = 0;
    for (const auto& [mode, e] : comps) total_order += mode * e;
    TruncatedSeries result(f.dim(), std::min(f.degree_cutoff(), g.degree_cutoff()) - total_order);
    for (;;) {
        Scalar coef(1);
        int parity = 0;
        TruncatedSeries df = f, dg = g;
        for (size_t c = 0; c < comps.size(); ++c) {
            auto [mode, e] = comps[c];
            coef *= binomial(e, k[c]);
            parity += k[c];
            for (int rep = 0; rep < e - k[c]; ++rep) df = df.derivative({mode, 1});
            for (int rep = 0; rep < k[c]; ++rep) dg = dg.derivative({mode, 1});
        }
        if (parity % 2 == 1) coef = -coef;
        result += coef * (df * dg);
        // odometer
        size_t c = 0;
        for (; c < comps.size(); ++c) {
            if (k[c] < comps[c].second) {
                ++k[c];
                break;
            }
            k[c] = 0;
        }
        if (c == comps.size()) break;
    }
    return result;
}

/// (D_1^4 - 4 D_1 D_3) tau . tau truncated at D - 4; identically zero iff tau
/// satisfies the first bilinear equation of the hierarchy to that order.
inline TruncatedSeries hirota_kdv_residual(const TruncatedSeries& tau) {
    if (!tau.constant_term().is_one()) throw BadConstantTerm("tau(0) must be 1");
    HirotaIndex d14{{1, 4}};
    HirotaIndex d13{{1, 1}, {3, 1}};
    TruncatedSeries r = hirota_apply(d14, tau, tau);
    r -= Scalar(4) * hirota_apply(d13, tau, tau);
    return r;
}

namespace detail {

/// Polynomial in commuting symbols indexed by (kind, mode); kind 0 = y,
/// kind 1 = D. Used to expand the generating bilinear identity.
struct SymPoly {
    // monomial: sorted exponent list over (kind, mode)
    using Mono = std::map<std::pair<int, int>, int>;
    std::map<Mono, Scalar> terms;

    static SymPoly one() {
        SymPoly p;
        p.terms[{}] = Scalar(1);
        return p;
    }
    void add(const Mono& m, const Scalar& c) {
        if (c.is_zero()) return;
        Scalar& t = terms[m];
        t += c;
        if (t.is_zero()) terms.erase(m);
    }
    static int weight(const Mono& m) {
        int w = 0;
        for (const auto& [km, e] : m) w += km.second * e;
        return w;
    }
    SymPoly times(const SymPoly& o, int max_weight) const {
        SymPoly r;
        for (const auto& [ma, ca] : terms) {
            int wa = weight(ma);
            for (const auto& [mb, cb] : o.terms) {
                if (wa + weight(mb) > max_weight) continue;
                Mono m = ma;
                for (const auto& [km, e] : mb) m[km] += e;
                r.add(m, ca * cb);
            }
        }
        return r;
    }
};

/// Elementary Schur polynomials p_j of the substituted variables v_k =
/// coeff(k) * x_k, via j p_j = sum_k k v_k p_{j-k}.
inline std::vector<SymPoly> schur_tower(int jmax, int kind,
                                        const std::function<Scalar(int)>& coeff, int max_weight) {
    std::vector<SymPoly> p(jmax + 1);
    p[0] = SymPoly::one();
    for (int j = 1; j <= jmax; ++j) {
        SymPoly acc;
        for (int k = 1; k <= j; ++k) {
            Scalar ck = coeff(k);
            if (ck.is_zero()) continue;
            SymPoly vk;
            vk.add({{{kind, k}, 1}}, Scalar(k) * ck);
            acc = [&] {
                SymPoly sum = acc;
                SymPoly prod = vk.times(p[j - k], max_weight);
                for (const auto& [m, c] : prod.terms) sum.add(m, c);
                return sum;
            }();
        }
        for (auto& [m, c] : acc.terms) p[j].add(m, c * Scalar(1, j));
    }
    return p;
}

} // namespace detail

/// Bilinear equations of the hierarchy at a given y-weight, from the
/// generating identity sum_j p_j(-2y) p_{j+1}(D~) exp(sum y_l D_l) tau.tau = 0.
/// Returns, per y-monomial of the requested weight, the Hirota polynomial as
/// a map from D-multi-indices to coefficients. Derivative monomials with an
/// odd total degree are dropped (they vanish on tau.tau identically), as are
/// even-mode indices (the odd-time reduction).
inline std::map<std::map<int, int>, std::map<HirotaIndex, Scalar>> kp_bilinear_equations(
    int y_weight) {
    using detail::SymPoly;
    int W = 2 * y_weight + 2;
    auto p_y = detail::schur_tower(y_weight, 0, [](int) { return Scalar(-2); }, y_weight);
    auto p_d = detail::schur_tower(y_weight + 2, 1, [](int k) { return Scalar(1, k); }, W);

    // exp(sum y_l D_l) truncated at y-weight <= y_weight
    SymPoly expo = SymPoly::one();
    {
        SymPoly lin;
        for (int l = 1; l <= y_weight; ++l) {
            SymPoly::Mono m;
            m[{0, l}] = 1;
            m[{1, l}] = 1;
            lin.add(m, Scalar(1));
        }
        SymPoly pow = SymPoly::one();
        Scalar fact(1);
        for (int k = 1; k <= y_weight; ++k) {
            pow = pow.times(lin, 2 * y_weight + W);
            fact *= Scalar(k);
            for (const auto& [m, c] : pow.terms) {
                // y-weight of m must stay within bounds; times() bounded total
                expo.add(m, c / fact);
            }
        }
    }

    SymPoly total;
    for (int j = 0; j <= y_weight; ++j) {
        SymPoly prod = p_y[j].times(p_d[j + 1], 2 * y_weight + W).times(expo, 2 * y_weight + W);
        for (const auto& [m, c] : prod.terms) total.add(m, c);
    }

    std::map<std::map<int, int>, std::map<HirotaIndex, Scalar>> out;
    for (const auto& [m, c] : total.terms) {
        std::map<int, int> ym;
        HirotaIndex dm;
        int yw = 0, dcount = 0;
        bool even_mode = false;
        for (const auto& [km, e] : m) {
            if (km.first == 0) {
                ym[km.second] = e;
                yw += km.second * e;
            } else {
                dm[km.second] = e;
                dcount += e;
                if (km.second % 2 == 0) even_mode = true;
            }
        }
        if (yw != y_weight) continue;
        if (dcount % 2 == 1) continue;  // odd bilinear derivative monomials vanish
        if (even_mode) continue;        // odd-time reduction
        out[ym][dm] += c;
        if (out[ym][dm].is_zero()) out[ym].erase(dm);
    }
    for (auto it = out.begin(); it != out.end();) {
        if (it->second.empty()) it = out.erase(it);
        else ++it;
    }
    return out;
}

/// Evaluates one bilinear combination on tau.tau.
inline TruncatedSeries evaluate_bilinear(const std::map<HirotaIndex, Scalar>& combo,
                                         const TruncatedSeries& tau) {
    int max_order = 0;
    for (const auto& [m, c] : combo) {
        int w = 0;
        for (const auto& [mode, e] : m) w += mode * e;
        max_order = std::max(max_order, w);
    }
    TruncatedSeries r(tau.dim(), tau.degree_cutoff() - max_order);
    for (const auto& [m, c] : combo) r += c * hirota_apply(m, tau, tau);
    return r;
}

/// Residual report of a Fock family applied to a candidate solution.
struct SolutionReport {
    struct Entry {
        int k;
        int reliable_degree;
        TruncatedSeries residual;
    };
    std::vector<Entry> entries;
    bool all_zero = true;
};

inline SolutionReport verify_solution(const std::map<int, FockOperator>& ops,
                                      const TruncatedSeries& tau, int kmax) {
    SolutionReport report;
    for (int k = -1; k <= kmax; ++k) {
        if (!ops.count(k)) continue;
        TruncatedSeries r = apply(ops.at(k), tau);
        if (!r.is_zero()) report.all_zero = false;
        report.entries.push_back({k, r.degree_cutoff(), std::move(r)});
    }
    return report;
}

} // namespace virakdv
