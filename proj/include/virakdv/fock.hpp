#pragma once

#include <algorithm>
#include <map>
#include <vector>

#include "virakdv/heisenberg.hpp"

namespace virakdv {

/// Variable index: odd mode i >= 1 and basis slot alpha in [1, n].
struct VarId {
    int mode = 1;
    int alpha = 1;
    friend auto operator<=>(const VarId&, const VarId&) = default;
};

/// Monomial in the t_{i,alpha}, kept as a sorted exponent list.
class Monomial {
public:
    Monomial() = default;

    static Monomial var(int mode, int alpha, int exp = 1) {
        Monomial m;
        if (exp > 0) m.exps_.push_back({{mode, alpha}, exp});
        return m;
    }

    const std::vector<std::pair<VarId, int>>& exps() const { return exps_; }
    bool is_one() const { return exps_.empty(); }

    int degree() const {
        int d = 0;
        for (const auto& [v, e] : exps_) d += v.mode * e;
        return d;
    }

    int exponent(VarId v) const {
        for (const auto& [w, e] : exps_)
            if (w == v) return e;
        return 0;
    }

    Monomial times(VarId v, int k) const {
        Monomial r = *this;
        for (auto& [w, e] : r.exps_)
            if (w == v) {
                e += k;
                if (e == 0)
                    r.exps_.erase(std::find_if(r.exps_.begin(), r.exps_.end(),
                                               [&](const auto& p) { return p.first == v; }));
                return r;
            }
        if (k != 0) {
            r.exps_.push_back({v, k});
            std::sort(r.exps_.begin(), r.exps_.end());
        }
        return r;
    }

    friend Monomial operator*(const Monomial& a, const Monomial& b) {
        Monomial r;
        auto ia = a.exps_.begin(), ib = b.exps_.begin();
        while (ia != a.exps_.end() || ib != b.exps_.end()) {
            if (ib == b.exps_.end() || (ia != a.exps_.end() && ia->first < ib->first))
                r.exps_.push_back(*ia++);
            else if (ia == a.exps_.end() || ib->first < ia->first)
                r.exps_.push_back(*ib++);
            else {
                r.exps_.push_back({ia->first, ia->second + ib->second});
                ++ia, ++ib;
            }
        }
        return r;
    }

    friend bool operator==(const Monomial& a, const Monomial& b) { return a.exps_ == b.exps_; }

    // Canonical order: weighted degree first, then lexicographic on (i, alpha).
    friend bool operator<(const Monomial& a, const Monomial& b) {
        int da = a.degree(), db = b.degree();
        if (da != db) return da < db;
        return a.exps_ < b.exps_;
    }

private:
    std::vector<std::pair<VarId, int>> exps_;
};

/// Element of the formal power series ring, truncated at weighted degree D.
/// D doubles as the reliability tag: coefficients above it are unknown.
class TruncatedSeries {
public:
    TruncatedSeries() = default;
    TruncatedSeries(int n, int degree_cutoff) : n_(n), d_(degree_cutoff) {}

    static TruncatedSeries one(int n, int degree_cutoff) {
        TruncatedSeries s(n, degree_cutoff);
        s.set(Monomial{}, Scalar(1));
        return s;
    }

    int dim() const { return n_; }
    int degree_cutoff() const { return d_; }
    const std::map<Monomial, Scalar>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    Scalar coeff(const Monomial& m) const {
        auto it = terms_.find(m);
        return it == terms_.end() ? Scalar(0) : it->second;
    }
    Scalar constant_term() const { return coeff(Monomial{}); }

    void set(const Monomial& m, const Scalar& c) {
        if (m.degree() > d_) return;
        if (c.is_zero()) terms_.erase(m);
        else terms_[m] = c;
    }
    void add(const Monomial& m, const Scalar& c) {
        if (m.degree() > d_ || c.is_zero()) return;
        Scalar& t = terms_[m];
        t += c;
        if (t.is_zero()) terms_.erase(m);
    }

    /// Drops terms above the new cutoff and lowers the reliability tag.
    TruncatedSeries truncated(int new_cutoff) const {
        TruncatedSeries r(n_, std::min(d_, new_cutoff));
        for (const auto& [m, c] : terms_)
            if (m.degree() <= r.d_) r.terms_.emplace(m, c);
        return r;
    }

    TruncatedSeries homogeneous_part(int degree) const {
        TruncatedSeries r(n_, d_);
        for (const auto& [m, c] : terms_)
            if (m.degree() == degree) r.terms_.emplace(m, c);
        return r;
    }

    TruncatedSeries operator-() const {
        TruncatedSeries r = *this;
        for (auto& [m, c] : r.terms_) c = -c;
        return r;
    }
    TruncatedSeries& operator+=(const TruncatedSeries& o) {
        check(o);
        d_ = std::min(d_, o.d_);
        std::erase_if(terms_, [this](const auto& p) { return p.first.degree() > d_; });
        for (const auto& [m, c] : o.terms_) add(m, c);
        return *this;
    }
    TruncatedSeries& operator-=(const TruncatedSeries& o) { return *this += -o; }
    TruncatedSeries& operator*=(const Scalar& s) {
        if (s.is_zero()) terms_.clear();
        else
            for (auto& [m, c] : terms_) c *= s;
        return *this;
    }
    friend TruncatedSeries operator+(TruncatedSeries a, const TruncatedSeries& b) { a += b; return a; }
    friend TruncatedSeries operator-(TruncatedSeries a, const TruncatedSeries& b) { a -= b; return a; }
    friend TruncatedSeries operator*(TruncatedSeries a, const Scalar& s) { a *= s; return a; }
    friend TruncatedSeries operator*(const Scalar& s, TruncatedSeries a) { a *= s; return a; }

    friend TruncatedSeries operator*(const TruncatedSeries& a, const TruncatedSeries& b) {
        a.check(b);
        TruncatedSeries r(a.n_, std::min(a.d_, b.d_));
        for (const auto& [ma, ca] : a.terms_) {
            int da = ma.degree();
            if (da > r.d_) continue;
            for (const auto& [mb, cb] : b.terms_) {
                if (da + mb.degree() > r.d_) continue;
                r.add(ma * mb, ca * cb);
            }
        }
        return r;
    }

    TruncatedSeries derivative(VarId v) const {
        TruncatedSeries r(n_, d_ - v.mode);
        for (const auto& [m, c] : terms_) {
            int e = m.exponent(v);
            if (e == 0) continue;
            r.add(m.times(v, -1), Scalar(e) * c);
        }
        return r;
    }

    friend bool operator==(const TruncatedSeries& a, const TruncatedSeries& b) {
        return a.n_ == b.n_ && a.terms_ == b.terms_;
    }

private:
    void check(const TruncatedSeries& o) const {
        if (n_ != o.n_) throw DimensionMismatch("series dimensions differ");
    }

    int n_ = 1;
    int d_ = 0;
    std::map<Monomial, Scalar> terms_;
};

/// exp of a series with zero constant term / log of a series with constant
/// term 1, truncated at the input cutoff.
inline TruncatedSeries exp_series(const TruncatedSeries& f) {
    if (!f.constant_term().is_zero()) throw BadConstantTerm("exp needs f(0) = 0");
    int d = f.degree_cutoff();
    TruncatedSeries r = TruncatedSeries::one(f.dim(), d);
    TruncatedSeries pow = TruncatedSeries::one(f.dim(), d);
    for (int k = 1; k <= d; ++k) {
        pow = pow * f;
        if (pow.is_zero()) break;
        r += pow * factorial(k).inv();
    }
    return r;
}

inline TruncatedSeries log_series(const TruncatedSeries& f) {
    if (!f.constant_term().is_one()) throw BadConstantTerm("log needs f(0) = 1");
    int d = f.degree_cutoff();
    TruncatedSeries g = f;
    g.add(Monomial{}, Scalar(-1));
    TruncatedSeries r(f.dim(), d);
    TruncatedSeries pow = TruncatedSeries::one(f.dim(), d);
    for (int k = 1; k <= d; ++k) {
        pow = pow * g;
        if (pow.is_zero()) break;
        r += pow * Scalar((k % 2 == 1) ? 1 : -1, k);
    }
    return r;
}

enum class ExpLogDirection { Exp, Log };

inline TruncatedSeries exp_log(const TruncatedSeries& f, ExpLogDirection dir) {
    return dir == ExpLogDirection::Exp ? exp_series(f) : log_series(f);
}

/// Unordered variable pair, stored sorted; the coefficient is the full
/// coefficient of the monomial t_u t_v (resp. d_u d_v).
struct VarPair {
    VarId a, b;
    VarPair() = default;
    VarPair(VarId x, VarId y) : a(std::min(x, y)), b(std::max(x, y)) {}
    friend auto operator<=>(const VarPair&, const VarPair&) = default;
};

/// Second-order differential operator with quadratic polynomial coefficients,
/// kept in normal order (multiplications left of derivatives).
class FockOperator {
public:
    FockOperator() = default;
    FockOperator(int n, int mode_cutoff, int degree_shift)
        : n_(n), cutoff_(mode_cutoff), shift_(degree_shift) {}

    int dim() const { return n_; }
    int mode_cutoff() const { return cutoff_; }
    int degree_shift() const { return shift_; }

    Scalar constant{0};
    std::map<VarId, Scalar> lin_t;               // c * t_v
    std::map<VarId, Scalar> lin_d;               // c * d/dt_v
    std::map<VarPair, Scalar> tt;                // c * t_u t_v
    std::map<std::pair<VarId, VarId>, Scalar> td; // c * t_u d/dt_v
    std::map<VarPair, Scalar> dd;                // c * d/dt_u d/dt_v

    bool is_zero() const {
        return constant.is_zero() && lin_t.empty() && lin_d.empty() && tt.empty() && td.empty() &&
               dd.empty();
    }

    void prune() {
        std::erase_if(lin_t, [](const auto& p) { return p.second.is_zero(); });
        std::erase_if(lin_d, [](const auto& p) { return p.second.is_zero(); });
        std::erase_if(tt, [](const auto& p) { return p.second.is_zero(); });
        std::erase_if(td, [](const auto& p) { return p.second.is_zero(); });
        std::erase_if(dd, [](const auto& p) { return p.second.is_zero(); });
    }

    FockOperator& operator+=(const FockOperator& o) {
        if (n_ != o.n_) throw DimensionMismatch("operator dimensions differ");
        constant += o.constant;
        for (const auto& [k, v] : o.lin_t) lin_t[k] += v;
        for (const auto& [k, v] : o.lin_d) lin_d[k] += v;
        for (const auto& [k, v] : o.tt) tt[k] += v;
        for (const auto& [k, v] : o.td) td[k] += v;
        for (const auto& [k, v] : o.dd) dd[k] += v;
        cutoff_ = std::min(cutoff_, o.cutoff_);
        prune();
        return *this;
    }
    FockOperator& operator*=(const Scalar& s) {
        constant *= s;
        for (auto& [k, v] : lin_t) v *= s;
        for (auto& [k, v] : lin_d) v *= s;
        for (auto& [k, v] : tt) v *= s;
        for (auto& [k, v] : td) v *= s;
        for (auto& [k, v] : dd) v *= s;
        prune();
        return *this;
    }
    friend FockOperator operator+(FockOperator a, const FockOperator& b) { a += b; return a; }
    friend FockOperator operator*(FockOperator a, const Scalar& s) { a *= s; return a; }
    friend FockOperator operator*(const Scalar& s, FockOperator a) { a *= s; return a; }

    friend bool operator==(const FockOperator& a, const FockOperator& b) {
        return a.n_ == b.n_ && a.constant == b.constant && a.lin_t == b.lin_t &&
               a.lin_d == b.lin_d && a.tt == b.tt && a.td == b.td && a.dd == b.dd;
    }

    /// Most negative degree shift over the individual terms; bounds how much
    /// reliable degree an application loses.
    int min_term_shift() const {
        int s = 0;
        auto upd = [&s](int x) { s = std::min(s, x); };
        for (const auto& [v, c] : lin_t) upd(v.mode);
        for (const auto& [v, c] : lin_d) upd(-v.mode);
        for (const auto& [p, c] : tt) upd(p.a.mode + p.b.mode);
        for (const auto& [p, c] : td) upd(p.first.mode - p.second.mode);
        for (const auto& [p, c] : dd) upd(-(p.a.mode + p.b.mode));
        return s;
    }

private:
    int n_ = 1;
    int cutoff_ = 1;
    int shift_ = 0;
};

/// Substitution p -> eta^{-1} d/dt, q -> i t, constants pass through.
inline FockOperator quantize(const QuadOperator& T, const Pairing& pairing) {
    const int n = pairing.dim();
    const Matrix& einv = pairing.eta_inv();
    FockOperator op(n, T.mode_cutoff(), -2 * T.type_index());
    op.constant = T.const_term();

    if (T.has_linear()) {
        Matrix row = T.linear() * einv;
        int mode = T.linear_mode();
        for (int b = 0; b < n; ++b)
            if (!row(0, b).is_zero()) op.lin_d[{mode, b + 1}] += row(0, b);
    }
    if (T.has_qq()) {
        const Matrix& a = T.qq();
        for (int x = 0; x < n; ++x)
            for (int y = 0; y < n; ++y) {
                if (a(x, y).is_zero()) continue;
                op.tt[VarPair{{1, x + 1}, {1, y + 1}}] += a(x, y);
            }
    }
    for (const auto& [j, b] : T.qp()) {
        Matrix m = b * einv;
        int pj = j + 2 * T.type_index();
        for (int x = 0; x < n; ++x)
            for (int y = 0; y < n; ++y)
                if (!m(x, y).is_zero())
                    op.td[{{j, x + 1}, {pj, y + 1}}] += Scalar(j) * m(x, y);
    }
    for (const auto& [j, c] : T.pp()) {
        Matrix m = einv.transpose() * c * einv;
        int pj = 2 * T.type_index() - j;
        for (int x = 0; x < n; ++x)
            for (int y = 0; y < n; ++y)
                if (!m(x, y).is_zero()) op.dd[VarPair{{j, x + 1}, {pj, y + 1}}] += m(x, y);
    }
    op.prune();
    return op;
}

/// Applies the operator to a truncated series. The output carries the honest
/// reliable degree: D plus the most degree-lowering term shift.
inline TruncatedSeries apply(const FockOperator& op, const TruncatedSeries& f) {
    if (op.dim() != f.dim()) throw DimensionMismatch("operator/series dimensions differ");
    int out_d = f.degree_cutoff() + std::min(0, op.min_term_shift());
    TruncatedSeries r(f.dim(), out_d);

    if (!op.constant.is_zero())
        for (const auto& [m, c] : f.terms()) r.add(m, op.constant * c);
    for (const auto& [v, cv] : op.lin_t)
        for (const auto& [m, c] : f.terms()) r.add(m.times(v, 1), cv * c);
    for (const auto& [v, cv] : op.lin_d) {
        for (const auto& [m, c] : f.terms()) {
            int e = m.exponent(v);
            if (e) r.add(m.times(v, -1), cv * Scalar(e) * c);
        }
    }
    for (const auto& [p, cv] : op.tt)
        for (const auto& [m, c] : f.terms()) r.add(m.times(p.a, 1).times(p.b, 1), cv * c);
    for (const auto& [p, cv] : op.td) {
        for (const auto& [m, c] : f.terms()) {
            int e = m.exponent(p.second);
            if (e) r.add(m.times(p.second, -1).times(p.first, 1), cv * Scalar(e) * c);
        }
    }
    for (const auto& [p, cv] : op.dd) {
        for (const auto& [m, c] : f.terms()) {
            int ea = m.exponent(p.a);
            if (!ea) continue;
            Monomial m1 = m.times(p.a, -1);
            int eb = m1.exponent(p.b);
            if (!eb) continue;
            r.add(m1.times(p.b, -1), cv * Scalar(ea) * Scalar(eb) * c);
        }
    }
    return r;
}

namespace detail {

// Symbols are t-variables or derivatives; commutator [d_v, t_v] = 1.
struct Sym {
    bool is_d = false;
    VarId v;
};

inline Scalar sym_comm(const Sym& x, const Sym& y) {
    if (x.is_d == y.is_d) return Scalar(0);
    if (!(x.v == y.v)) return Scalar(0);
    return x.is_d ? Scalar(1) : Scalar(-1);
}

/// Accumulate coeff * X * Y (a product of two symbols) into op, normal
/// ordering t's to the left and collecting the swap constant.
inline void add_pair(FockOperator& op, Sym x, Sym y, const Scalar& coeff) {
    if (coeff.is_zero()) return;
    if (x.is_d && !y.is_d) {
        // d t = t d + [d, t]
        op.constant += coeff * sym_comm(x, y);
        std::swap(x, y);
    }
    if (!x.is_d && !y.is_d)
        op.tt[VarPair{x.v, y.v}] += coeff;
    else if (x.is_d && y.is_d)
        op.dd[VarPair{x.v, y.v}] += coeff;
    else
        op.td[{x.v, y.v}] += coeff;
}

inline void add_single(FockOperator& op, const Sym& x, const Scalar& coeff) {
    if (coeff.is_zero()) return;
    if (x.is_d) op.lin_d[x.v] += coeff;
    else op.lin_t[x.v] += coeff;
}

inline std::vector<std::pair<std::pair<Sym, Sym>, Scalar>> quad_terms(const FockOperator& op) {
    std::vector<std::pair<std::pair<Sym, Sym>, Scalar>> r;
    for (const auto& [p, c] : op.tt) r.push_back({{{false, p.a}, {false, p.b}}, c});
    for (const auto& [p, c] : op.td) r.push_back({{{false, p.first}, {true, p.second}}, c});
    for (const auto& [p, c] : op.dd) r.push_back({{{true, p.a}, {true, p.b}}, c});
    return r;
}

inline std::vector<std::pair<Sym, Scalar>> lin_terms(const FockOperator& op) {
    std::vector<std::pair<Sym, Scalar>> r;
    for (const auto& [v, c] : op.lin_t) r.push_back({{false, v}, c});
    for (const auto& [v, c] : op.lin_d) r.push_back({{true, v}, c});
    return r;
}

} // namespace detail

/// Commutator of two normal-ordered operators, exact as an operator identity.
/// The class of at-most-quadratic operators closes under the bracket; the
/// normal-ordering swaps produce the constant terms.
inline FockOperator bracket_fock(const FockOperator& P, const FockOperator& Q) {
    if (P.dim() != Q.dim()) throw DimensionMismatch("operator dimensions differ");
    using detail::Sym;
    FockOperator r(P.dim(), std::min(P.mode_cutoff(), Q.mode_cutoff()),
                   P.degree_shift() + Q.degree_shift());

    auto pq = detail::quad_terms(P);
    auto qq = detail::quad_terms(Q);
    auto pl = detail::lin_terms(P);
    auto ql = detail::lin_terms(Q);

    // [AB, CD] = [B,C] A D + [B,D] A C + [A,C] D B + [A,D] C B, all scalars
    // pulled out, then each remaining pair re-ordered.
    for (const auto& [ab, ca] : pq) {
        const auto& [A, B] = ab;
        for (const auto& [cd, cb] : qq) {
            const auto& [C, D] = cd;
            Scalar f = ca * cb;
            Scalar s;
            s = detail::sym_comm(B, C);
            if (!s.is_zero()) detail::add_pair(r, A, D, f * s);
            s = detail::sym_comm(B, D);
            if (!s.is_zero()) detail::add_pair(r, A, C, f * s);
            s = detail::sym_comm(A, C);
            if (!s.is_zero()) detail::add_pair(r, D, B, f * s);
            s = detail::sym_comm(A, D);
            if (!s.is_zero()) detail::add_pair(r, C, B, f * s);
        }
    }
    // [AB, x] = A [B,x] + [A,x] B
    for (const auto& [ab, ca] : pq) {
        const auto& [A, B] = ab;
        for (const auto& [x, cx] : ql) {
            Scalar f = ca * cx;
            Scalar s = detail::sym_comm(B, x);
            if (!s.is_zero()) detail::add_single(r, A, f * s);
            s = detail::sym_comm(A, x);
            if (!s.is_zero()) detail::add_single(r, B, f * s);
        }
    }
    for (const auto& [cd, cb] : qq) {
        const auto& [C, D] = cd;
        for (const auto& [x, cx] : pl) {
            Scalar f = cb * cx;
            Scalar s = detail::sym_comm(x, D);
            if (!s.is_zero()) detail::add_single(r, C, f * s);
            s = detail::sym_comm(x, C);
            if (!s.is_zero()) detail::add_single(r, D, f * s);
        }
    }
    // [x, y] for linear terms
    for (const auto& [x, cx] : pl)
        for (const auto& [y, cy] : ql) r.constant += cx * cy * detail::sym_comm(x, y);

    r.prune();
    return r;
}

} // namespace virakdv
