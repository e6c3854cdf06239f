#pragma once

#include <map>

#include "virakdv/fock.hpp"

namespace virakdv {

/// Laurent polynomial in z with a finite support window.
class LaurentPoly {
public:
    LaurentPoly() = default;
    static LaurentPoly term(int m, const Scalar& c) {
        LaurentPoly p;
        p.set(m, c);
        return p;
    }

    const std::map<int, Scalar>& coeffs() const { return c_; }
    bool is_zero() const { return c_.empty(); }

    Scalar coeff(int m) const {
        auto it = c_.find(m);
        return it == c_.end() ? Scalar(0) : it->second;
    }
    void set(int m, const Scalar& v) {
        if (v.is_zero()) c_.erase(m);
        else c_[m] = v;
    }
    void add(int m, const Scalar& v) {
        if (v.is_zero()) return;
        Scalar& t = c_[m];
        t += v;
        if (t.is_zero()) c_.erase(m);
    }

    int lowest() const { return c_.begin()->first; }

    friend LaurentPoly operator*(const LaurentPoly& a, const LaurentPoly& b) {
        LaurentPoly r;
        for (const auto& [ma, ca] : a.c_)
            for (const auto& [mb, cb] : b.c_) r.add(ma + mb, ca * cb);
        return r;
    }
    friend LaurentPoly operator+(const LaurentPoly& a, const LaurentPoly& b) {
        LaurentPoly r = a;
        for (const auto& [m, c] : b.c_) r.add(m, c);
        return r;
    }
    friend LaurentPoly operator*(const Scalar& s, const LaurentPoly& a) {
        LaurentPoly r;
        for (const auto& [m, c] : a.c_) r.add(m, s * c);
        return r;
    }

    LaurentPoly pow(int e) const {
        LaurentPoly r = term(0, Scalar(1));
        for (int k = 0; k < e; ++k) r = r * (*this);
        return r;
    }

    LaurentPoly derivative() const {
        LaurentPoly r;
        for (const auto& [m, c] : c_) r.add(m - 1, Scalar(m) * c);
        return r;
    }

    /// Laurent-series division truncated to orders <= max_order; the divisor
    /// must have an invertible lowest term.
    LaurentPoly divided_by(const LaurentPoly& g, int max_order) const {
        if (g.is_zero()) throw NonInvertibleDerivative("division by zero series");
        LaurentPoly num = *this;
        LaurentPoly r;
        int gl = g.lowest();
        Scalar glead = g.coeff(gl);
        while (!num.is_zero()) {
            int nl = num.lowest();
            int out = nl - gl;
            if (out > max_order) break;
            Scalar c = num.coeff(nl) / glead;
            r.add(out, c);
            for (const auto& [m, gv] : g.coeffs()) num.add(out + m, -(c * gv));
        }
        return r;
    }

private:
    std::map<int, Scalar> c_;
};

/// First-order differential operator on C((z)) in the basis
/// { 1, z^m (m != 0), z^m (z d_z + (m+1)/2) }, truncated to |m| <= cutoff.
struct DiffOp1 {
    std::map<int, Scalar> mult;  // z^m, m != 0
    std::map<int, Scalar> vf;    // z^m (z d_z + (m+1)/2)
    Scalar constant{0};          // multiplication by z^0
    int order_cutoff = 32;

    bool is_zero() const { return mult.empty() && vf.empty() && constant.is_zero(); }

    void add_mult(int m, const Scalar& c) {
        if (c.is_zero() || std::abs(m) > order_cutoff) return;
        if (m == 0) {
            constant += c;
            return;
        }
        Scalar& t = mult[m];
        t += c;
        if (t.is_zero()) mult.erase(m);
    }
    void add_vf(int m, const Scalar& c) {
        if (c.is_zero() || std::abs(m) > order_cutoff) return;
        Scalar& t = vf[m];
        t += c;
        if (t.is_zero()) vf.erase(m);
    }

    friend DiffOp1 operator+(const DiffOp1& a, const DiffOp1& b) {
        DiffOp1 r = a;
        r.order_cutoff = std::min(a.order_cutoff, b.order_cutoff);
        for (const auto& [m, c] : b.mult) r.add_mult(m, c);
        for (const auto& [m, c] : b.vf) r.add_vf(m, c);
        r.constant += b.constant;
        return r;
    }
    friend DiffOp1 operator*(const Scalar& s, const DiffOp1& a) {
        DiffOp1 r;
        r.order_cutoff = a.order_cutoff;
        r.constant = s * a.constant;
        for (const auto& [m, c] : a.mult) r.add_mult(m, s * c);
        for (const auto& [m, c] : a.vf) r.add_vf(m, s * c);
        return r;
    }

    friend bool operator==(const DiffOp1& a, const DiffOp1& b) {
        return a.mult == b.mult && a.vf == b.vf && a.constant == b.constant;
    }

    /// Action on the monomial z^k, as a Laurent polynomial.
    LaurentPoly act(int k) const {
        LaurentPoly r;
        if (!constant.is_zero()) r.add(k, constant);
        for (const auto& [m, c] : mult) r.add(k + m, c);
        for (const auto& [m, c] : vf) r.add(k + m, c * (Scalar(k) + Scalar(m + 1, 2)));
        return r;
    }
};

/// Commutator via the structure constants [V_m, V_k] = (k-m) V_{m+k},
/// [V_m, z^k] = k z^{m+k}; multiplications commute.
inline DiffOp1 bracket_diff(const DiffOp1& a, const DiffOp1& b) {
    DiffOp1 r;
    r.order_cutoff = std::min(a.order_cutoff, b.order_cutoff);
    for (const auto& [m, ca] : a.vf) {
        for (const auto& [k, cb] : b.vf) r.add_vf(m + k, Scalar(k - m) * ca * cb);
        for (const auto& [k, cb] : b.mult) r.add_mult(m + k, Scalar(k) * ca * cb);
    }
    for (const auto& [m, ca] : a.mult)
        for (const auto& [k, cb] : b.vf) r.add_mult(m + k, Scalar(-m) * ca * cb);
    return r;
}

/// sigma(L_i) = t^i ((1/2) z^{-2i} (z d_z + (1-2i)/2) + s z^{-2i-3}).
inline DiffOp1 sigma_family(int i, const Scalar& s, const Scalar& t, int order_cutoff = 32) {
    if (t.is_zero()) throw ConfigError("sigma_family needs t != 0");
    DiffOp1 r;
    r.order_cutoff = order_cutoff;
    Scalar ti = t.pow(i);
    r.add_vf(-2 * i, ti * Scalar(1, 2));
    r.add_mult(-2 * i - 3, ti * s);
    return r;
}

/// sigma(L_i) = -h^{i+1}/h' d_z - (i+1) c h^i + (h^{i+1}/h') b, truncated.
inline DiffOp1 from_triple(const LaurentPoly& h, const Scalar& c, const LaurentPoly& b, int i,
                           int order_cutoff = 32) {
    if (i < -1) throw ConfigError("from_triple needs i >= -1");
    LaurentPoly hp = h.derivative();
    if (hp.is_zero()) throw NonInvertibleDerivative("h' = 0");
    LaurentPoly ratio = h.pow(i + 1).divided_by(hp, order_cutoff + 2);

    DiffOp1 r;
    r.order_cutoff = order_cutoff;
    // f(z) d_z with f = -ratio: z^{m+1} d_z = V_m - ((m+1)/2) z^m.
    for (const auto& [mp1, cf] : ratio.coeffs()) {
        int m = mp1 - 1;
        r.add_vf(m, -cf);
        r.add_mult(m, cf * Scalar(m + 1, 2));
    }
    // -(i+1) c h^i: for i = -1 the factor (i+1) kills the negative power.
    if (i + 1 != 0) {
        LaurentPoly hi = (i >= 0) ? h.pow(i) : LaurentPoly::term(0, Scalar(1)).divided_by(h, order_cutoff + 2);
        for (const auto& [m, cv] : hi.coeffs()) r.add_mult(m, Scalar(-(i + 1)) * c * cv);
    }
    LaurentPoly rb = ratio * b;
    for (const auto& [m, cv] : rb.coeffs()) r.add_mult(m, cv);
    return r;
}

/// Boson transport of a first-order operator, restricted to the odd
/// variables. Throws EvenModeLeak when the image involves an even t_j, which
/// happens exactly when the input leaves the odd-shape span.
inline FockOperator bosonize(const DiffOp1& D, int mode_cutoff) {
    FockOperator op(1, mode_cutoff, 0);
    auto odd = [](int m) { return ((m % 2) + 2) % 2 == 1; };
    for (const auto& [m, c] : D.mult) {
        if (!odd(m)) throw EvenModeLeak("multiplication by even power z^" + std::to_string(m));
        if (m > 0) {
            if (m <= mode_cutoff) op.lin_t[{m, 1}] += Scalar(m) * c;
        } else {
            if (-m <= mode_cutoff) op.lin_d[{-m, 1}] += c;
        }
    }
    for (const auto& [m, c] : D.vf) {
        if (odd(m)) throw EvenModeLeak("vector field at odd power z^" + std::to_string(m));
        if (m > 0) {
            for (int j = 1; j <= m - 1; j += 2)
                op.tt[VarPair{{j, 1}, {m - j, 1}}] += c * Scalar(1, 2) * Scalar(j) * Scalar(m - j);
            for (int j = 1; j + m <= mode_cutoff; j += 2)
                op.td[{{m + j, 1}, {j, 1}}] += c * Scalar(j + m);
        } else if (m == 0) {
            for (int j = 1; j <= mode_cutoff; j += 2) op.td[{{j, 1}, {j, 1}}] += c * Scalar(j);
        } else {
            int mm = -m;
            for (int j = 1; j + mm <= mode_cutoff; j += 2)
                op.td[{{j, 1}, {mm + j, 1}}] += c * Scalar(j);
            for (int j = 1; j <= mm - 1; j += 2)
                op.dd[VarPair{{j, 1}, {mm - j, 1}}] += c * Scalar(1, 2);
        }
    }
    op.prune();
    return op;
}

/// [(beta sigma)(L_{-1}), (beta sigma)(L_1)] - beta([sigma(L_{-1}), sigma(L_1)]),
/// a pure constant; the transport fails to be a Lie map by exactly this much.
inline Scalar cocycle_defect(const Scalar& s, int mode_cutoff = 21) {
    DiffOp1 sm = sigma_family(-1, s, Scalar(1));
    DiffOp1 sp = sigma_family(1, s, Scalar(1));
    FockOperator lhs = bracket_fock(bosonize(sm, mode_cutoff), bosonize(sp, mode_cutoff));
    FockOperator rhs = bosonize(bracket_diff(sm, sp), mode_cutoff);
    FockOperator diff = lhs + Scalar(-1) * rhs;
    Scalar defect = diff.constant;
    // Everything except the constant must cancel inside the safe window.
    diff.constant = Scalar(0);
    int safe = mode_cutoff - 4;
    std::erase_if(diff.lin_t, [&](const auto& p) { return p.first.mode > safe; });
    std::erase_if(diff.lin_d, [&](const auto& p) { return p.first.mode > safe; });
    std::erase_if(diff.tt, [&](const auto& p) { return p.first.b.mode > safe; });
    std::erase_if(diff.dd, [&](const auto& p) { return p.first.b.mode > safe; });
    std::erase_if(diff.td,
                  [&](const auto& p) { return p.first.first.mode > safe || p.first.second.mode > safe; });
    if (!diff.is_zero()) throw Error("cocycle defect is not a constant");
    return defect;
}

/// The honest Fock representation: boson transport plus the +1/16 shift on
/// L_0 that absorbs the cocycle.
inline std::map<int, FockOperator> lift_to_rep(const Scalar& s, const Scalar& t, int K,
                                               int mode_cutoff) {
    std::map<int, FockOperator> ops;
    for (int k = -1; k <= K; ++k) {
        FockOperator op = bosonize(sigma_family(k, s, t, 2 * K + mode_cutoff + 4), mode_cutoff);
        if (k == 0) op.constant += Scalar(1, 16);
        ops.emplace(k, op);
    }
    return ops;
}

} // namespace virakdv
