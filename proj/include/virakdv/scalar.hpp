#pragma once

#include <gmpxx.h>

#include <compare>
#include <optional>
#include <string>

#include "virakdv/errors.hpp"

namespace virakdv {

/// Exact rational scalar. Always stored in lowest terms with positive
/// denominator (mpq_class keeps the canonical form for us).
class Scalar {
public:
    Scalar() : v_(0) {}
    Scalar(int n) : v_(n) {}
    Scalar(long n) : v_(n) {}
    Scalar(long num, long den) : v_(num, den) {
        if (den == 0) throw Error("Scalar: zero denominator");
        v_.canonicalize();
    }
    explicit Scalar(const mpq_class& q) : v_(q) {
        if (v_.get_den() == 0) throw Error("Scalar: zero denominator");
        v_.canonicalize();
    }

    static Scalar from_string(const std::string& s) {
        if (s.empty()) throw Error("Scalar: empty string");
        mpq_class q;
        if (q.set_str(s, 10) != 0) throw Error("Scalar: cannot parse '" + s + "'");
        return Scalar(q);
    }

    // Canonical "num/den" rendering; integers keep an explicit /1 so the
    // serialized form round-trips bit-exactly.
    std::string str() const {
        return v_.get_num().get_str() + "/" + v_.get_den().get_str();
    }
    // Human-facing form: drops the /1 on integers.
    std::string pretty() const {
        if (v_.get_den() == 1) return v_.get_num().get_str();
        return str();
    }

    bool is_zero() const { return v_ == 0; }
    bool is_one() const { return v_ == 1; }
    bool is_integer() const { return v_.get_den() == 1; }
    int sign() const { return sgn(v_); }

    mpz_class numerator() const { return v_.get_num(); }
    mpz_class denominator() const { return v_.get_den(); }
    const mpq_class& raw() const { return v_; }

    Scalar operator-() const { return Scalar(mpq_class(-v_)); }
    Scalar& operator+=(const Scalar& o) { v_ += o.v_; return *this; }
    Scalar& operator-=(const Scalar& o) { v_ -= o.v_; return *this; }
    Scalar& operator*=(const Scalar& o) { v_ *= o.v_; return *this; }
    Scalar& operator/=(const Scalar& o) {
        if (o.is_zero()) throw Error("Scalar: division by zero");
        v_ /= o.v_;
        return *this;
    }

    friend Scalar operator+(Scalar a, const Scalar& b) { a += b; return a; }
    friend Scalar operator-(Scalar a, const Scalar& b) { a -= b; return a; }
    friend Scalar operator*(Scalar a, const Scalar& b) { a *= b; return a; }
    friend Scalar operator/(Scalar a, const Scalar& b) { a /= b; return a; }

    friend bool operator==(const Scalar& a, const Scalar& b) { return a.v_ == b.v_; }
    friend bool operator!=(const Scalar& a, const Scalar& b) { return a.v_ != b.v_; }
    friend bool operator<(const Scalar& a, const Scalar& b) { return a.v_ < b.v_; }
    friend bool operator<=(const Scalar& a, const Scalar& b) { return a.v_ <= b.v_; }
    friend bool operator>(const Scalar& a, const Scalar& b) { return a.v_ > b.v_; }
    friend bool operator>=(const Scalar& a, const Scalar& b) { return a.v_ >= b.v_; }

    Scalar abs() const { return Scalar(mpq_class(::abs(v_))); }

    Scalar inv() const {
        if (is_zero()) throw Error("Scalar: inverse of zero");
        return Scalar(mpq_class(1) / v_);
    }

    Scalar pow(long e) const {
        if (e == 0) return Scalar(1);
        if (e < 0) return inv().pow(-e);
        mpq_class r(1), base(v_);
        long k = e;
        while (k > 0) {
            if (k & 1) r *= base;
            base *= base;
            k >>= 1;
        }
        return Scalar(r);
    }

    /// Exact square root when this is the square of a rational, nullopt otherwise.
    std::optional<Scalar> sqrt_exact() const {
        if (sign() < 0) return std::nullopt;
        if (is_zero()) return Scalar(0);
        mpz_class num = v_.get_num(), den = v_.get_den();
        if (mpz_perfect_square_p(num.get_mpz_t()) == 0) return std::nullopt;
        if (mpz_perfect_square_p(den.get_mpz_t()) == 0) return std::nullopt;
        mpz_class rn, rd;
        mpz_sqrt(rn.get_mpz_t(), num.get_mpz_t());
        mpz_sqrt(rd.get_mpz_t(), den.get_mpz_t());
        return Scalar(mpq_class(rn, rd));
    }

private:
    mpq_class v_;
};

inline Scalar operator*(long a, const Scalar& b) { return Scalar(a) * b; }
inline Scalar operator*(const Scalar& a, long b) { return a * Scalar(b); }

/// x(x+1)...(x+k-1), the rising factorial; k = 0 gives the empty product 1.
inline Scalar pochhammer(const Scalar& x, long k) {
    Scalar r(1);
    for (long j = 0; j < k; ++j) r *= (x + Scalar(j));
    return r;
}

/// Double factorial of an odd non-negative integer: (2m+1)!! etc.
inline Scalar double_factorial(long n) {
    Scalar r(1);
    for (long k = n; k >= 2; k -= 2) r *= Scalar(k);
    return r;
}

inline Scalar factorial(long n) {
    Scalar r(1);
    for (long k = 2; k <= n; ++k) r *= Scalar(k);
    return r;
}

inline Scalar binomial(long n, long k) {
    if (k < 0 || k > n) return Scalar(0);
    Scalar r(1);
    for (long j = 0; j < k; ++j) r *= Scalar(n - j, j + 1);
    return r;
}

} // namespace virakdv
