#pragma once

#include <map>
#include <memory>
#include <utility>

#include "virakdv/matrix.hpp"

namespace virakdv {

/// Nondegenerate symmetric bilinear form on the coefficient space, with its
/// inverse cached.
class Pairing {
public:
    explicit Pairing(Matrix eta) : eta_(std::move(eta)) {
        if (eta_.rows() != eta_.cols()) throw DimensionMismatch("pairing matrix must be square");
        if (!eta_.is_symmetric()) throw ConstraintViolation("pairing-symmetry");
        inv_ = eta_.inverse(); // throws SingularMatrix when degenerate
    }

    int dim() const { return eta_.rows(); }
    const Matrix& eta() const { return eta_; }
    const Matrix& eta_inv() const { return inv_; }

    friend bool operator==(const Pairing& a, const Pairing& b) { return a.eta_ == b.eta_; }

private:
    Matrix eta_;
    Matrix inv_;
};

using PairingPtr = std::shared_ptr<const Pairing>;

inline PairingPtr make_pairing(Matrix eta) { return std::make_shared<Pairing>(std::move(eta)); }

/// Largest mode index at which a bracket result is guaranteed exact.
struct BracketWindow {
    int reliable_mode = 0;
    bool empty() const { return reliable_mode < 1; }
};

/// Coefficient maps handed to make_typed. Missing parts mean zero.
struct QuadParts {
    Matrix linear;             // 1 x n row, coefficient of p_{2i+3}
    Scalar const_term{0};      // type 0 only
    Matrix qq;                 // n x n, type -1 only (q_1 a q_1^T)
    std::map<int, Matrix> qp;  // q-mode j -> b^{j, j+2i}
    std::map<int, Matrix> pp;  // first mode j -> c^{j, 2i-j}, type >= 1 only
};

/// A truncated type-i element of the enveloping Heisenberg algebra in normal
/// order: q-factors left of p-factors, quadratic coefficients kept as n x n
/// matrices per mode pair.
class QuadOperator {
public:
    QuadOperator() = default;

    int type_index() const { return type_; }
    int mode_cutoff() const { return cutoff_; }
    const PairingPtr& pairing() const { return pairing_; }
    int dim() const { return pairing_->dim(); }

    const Matrix& linear() const { return lin_; }
    const Scalar& const_term() const { return cst_; }
    const Matrix& qq() const { return qq_; }
    const std::map<int, Matrix>& qp() const { return qp_; }
    const std::map<int, Matrix>& pp() const { return pp_; }

    bool has_linear() const { return !lin_.empty() && !lin_.is_zero(); }
    bool has_qq() const { return !qq_.empty() && !qq_.is_zero(); }

    bool is_zero() const {
        return !has_linear() && cst_.is_zero() && !has_qq() && qp_.empty() && pp_.empty();
    }

    /// p-mode of the linear part.
    int linear_mode() const { return 2 * type_ + 3; }

    friend bool operator==(const QuadOperator& a, const QuadOperator& b) {
        return a.type_ == b.type_ && a.cutoff_ == b.cutoff_ && *a.pairing_ == *b.pairing_ &&
               a.lin_ == b.lin_ && a.cst_ == b.cst_ && a.qq_ == b.qq_ && a.qp_ == b.qp_ &&
               a.pp_ == b.pp_;
    }

    friend QuadOperator make_typed(int i, PairingPtr pairing, const QuadParts& parts, int M);
    friend QuadOperator scale_add(const Scalar& alpha, const QuadOperator& t1, const Scalar& beta,
                                  const QuadOperator& t2);
    friend std::pair<QuadOperator, BracketWindow> bracket(const QuadOperator& t1,
                                                          const QuadOperator& t2);

private:
    int type_ = 0;
    int cutoff_ = 1;
    PairingPtr pairing_;
    Matrix lin_;   // empty when zero
    Scalar cst_{0};
    Matrix qq_;    // empty unless type -1 with content; stored symmetrized
    std::map<int, Matrix> qp_;
    std::map<int, Matrix> pp_;  // both partner keys stored, c^{2i-j,j} = (c^{j,2i-j})^T
};

namespace detail {

inline bool odd(int m) { return (m % 2 + 2) % 2 == 1; }

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw TypeShapeError(msg);
}

} // namespace detail

inline QuadOperator make_typed(int i, PairingPtr pairing, const QuadParts& parts, int M) {
    using detail::odd;
    using detail::require;
    require(i >= -1, "type index must be >= -1");
    require(M >= 1 && odd(M), "mode cutoff must be odd and positive");
    const int n = pairing->dim();

    QuadOperator op;
    op.type_ = i;
    op.cutoff_ = M;
    op.pairing_ = std::move(pairing);
    op.cst_ = parts.const_term;
    require(parts.const_term.is_zero() || i == 0, "constant term only allowed for type 0");

    if (!parts.linear.empty() && !parts.linear.is_zero()) {
        require(parts.linear.rows() == 1 && parts.linear.cols() == n, "linear part must be a 1 x n row");
        require(2 * i + 3 <= M, "linear mode exceeds cutoff");
        op.lin_ = parts.linear;
    }

    if (!parts.qq.empty() && !parts.qq.is_zero()) {
        require(i == -1, "qq part only allowed for type -1");
        require(parts.qq.rows() == n && parts.qq.cols() == n, "qq matrix must be n x n");
        op.qq_ = parts.qq.sym();
        if (op.qq_.is_zero()) op.qq_ = Matrix();
    }

    for (const auto& [j, b] : parts.qp) {
        if (b.is_zero()) continue;
        require(odd(j) && odd(j + 2 * i), "qp mode indices must be odd");
        require(j >= 1 && j + 2 * i >= 1, "qp mode indices must be positive");
        require(j <= M && j + 2 * i <= M, "qp mode exceeds cutoff");
        require(b.rows() == n && b.cols() == n, "qp matrix must be n x n");
        op.qp_[j] = b;
    }

    if (!parts.pp.empty()) {
        bool any = false;
        for (const auto& [j, c] : parts.pp)
            if (!c.is_zero()) any = true;
        if (any) {
            require(i >= 1, "pp part only allowed for type >= 1");
            // Collapse raw input into the consistent transpose pairs, keeping
            // the operator sum_j p_j^T c^{j,2i-j} p_{2i-j} unchanged.
            for (const auto& [j, c] : parts.pp) {
                require(odd(j), "pp mode indices must be odd");
                require(j >= 1 && j <= 2 * i - 1, "pp mode out of range");
                if (!c.is_zero()) require(j <= M && 2 * i - j <= M, "pp mode exceeds cutoff");
            }
            for (int j = 1; j <= i; j += 2) {
                int jp = 2 * i - j;
                Matrix cj(n, n), cjp(n, n);
                bool present = false;
                if (auto it = parts.pp.find(j); it != parts.pp.end()) {
                    require(it->second.rows() == n && it->second.cols() == n, "pp matrix must be n x n");
                    cj = it->second;
                    present = true;
                }
                if (auto it = parts.pp.find(jp); jp != j && it != parts.pp.end()) {
                    require(it->second.rows() == n && it->second.cols() == n, "pp matrix must be n x n");
                    cjp = it->second;
                    present = true;
                }
                if (!present) continue;
                Matrix x = (j == jp) ? (cj + cj.transpose()) : (cj + cjp.transpose());
                if (x.is_zero()) continue;
                op.pp_[j] = x * Scalar(1, 2);
                if (jp != j) op.pp_[jp] = op.pp_[j].transpose();
            }
        }
    }
    return op;
}

inline QuadOperator make_zero(int i, PairingPtr pairing, int M) {
    return make_typed(i, std::move(pairing), QuadParts{}, M);
}

inline void check_compatible(const QuadOperator& a, const QuadOperator& b) {
    if (!(*a.pairing() == *b.pairing())) throw IncompatibleOperands("pairings differ");
    if (a.mode_cutoff() != b.mode_cutoff()) throw IncompatibleOperands("mode cutoffs differ");
}

inline QuadOperator scale_add(const Scalar& alpha, const QuadOperator& t1, const Scalar& beta,
                              const QuadOperator& t2) {
    check_compatible(t1, t2);
    if (t1.type_index() != t2.type_index()) throw IncompatibleOperands("type indices differ");
    const int n = t1.dim();
    QuadParts parts;
    Matrix lin(1, n);
    if (t1.has_linear()) lin += alpha * t1.linear();
    if (t2.has_linear()) lin += beta * t2.linear();
    parts.linear = lin;
    parts.const_term = alpha * t1.const_term() + beta * t2.const_term();
    Matrix qq(n, n);
    if (t1.has_qq()) qq += alpha * t1.qq();
    if (t2.has_qq()) qq += beta * t2.qq();
    if (!qq.is_zero()) parts.qq = qq;
    for (const auto& [j, m] : t1.qp()) {
        auto [it, fresh] = parts.qp.emplace(j, alpha * m);
        if (!fresh) it->second += alpha * m;
    }
    for (const auto& [j, m] : t2.qp()) {
        auto [it, fresh] = parts.qp.emplace(j, beta * m);
        if (!fresh) it->second += beta * m;
    }
    for (const auto& [j, m] : t1.pp()) {
        auto [it, fresh] = parts.pp.emplace(j, alpha * m);
        if (!fresh) it->second += alpha * m;
    }
    for (const auto& [j, m] : t2.pp()) {
        auto [it, fresh] = parts.pp.emplace(j, beta * m);
        if (!fresh) it->second += beta * m;
    }
    // pp maps fed back through make_typed get halved by pair-canonicalization;
    // both partner keys above already carry the full coefficient, so this is
    // exactly the entrywise combination.
    return make_typed(t1.type_index(), t1.pairing(), parts, t1.mode_cutoff());
}

namespace detail {

/// Accumulates the raw bracket before classification, including shapes that
/// no type- i>= -1 operator can hold (q-linear terms, off-shape qq).
struct RawBracket {
    std::map<int, Matrix> lin;                    // p-mode -> row
    std::map<int, Matrix> qlin;                   // q-mode -> row
    std::map<std::pair<int, int>, Matrix> qq;     // (u,v) -> q_u M q_v^T
    std::map<std::pair<int, int>, Matrix> qp;     // (u,v) -> q_u M p_v
    std::map<std::pair<int, int>, Matrix> pp;     // (u,v) -> p_u^T M p_v
    Scalar cst{0};

    void add(std::map<std::pair<int, int>, Matrix>& slot, int u, int v, const Matrix& m) {
        auto [it, fresh] = slot.emplace(std::make_pair(u, v), m);
        if (!fresh) it->second += m;
    }
    void add_lin(int mode, const Matrix& row) {
        auto [it, fresh] = lin.emplace(mode, row);
        if (!fresh) it->second += row;
    }
    void add_qlin(int mode, const Matrix& row) {
        auto [it, fresh] = qlin.emplace(mode, row);
        if (!fresh) it->second += row;
    }

    bool is_zero() const {
        auto allz = [](const auto& m) {
            for (const auto& [k, v] : m)
                if (!v.is_zero()) return false;
            return true;
        };
        return allz(lin) && allz(qlin) && allz(qq) && allz(qp) && allz(pp) && cst.is_zero();
    }
};

/// c^{r,2j-r} + (c^{2j-r,r})^T read from a stored pp map (zero if absent).
inline Matrix pp_pair_sum(const std::map<int, Matrix>& pp, int r, int j, int n) {
    Matrix x(n, n);
    if (auto it = pp.find(r); it != pp.end()) x += it->second;
    if (auto it = pp.find(2 * j - r); it != pp.end()) x += it->second.transpose();
    return x;
}

} // namespace detail

/// Lie bracket of two typed operators by the closed commutator formulas.
/// The result is of type i+j; the window tells how far the truncated inputs
/// determine it exactly.
inline std::pair<QuadOperator, BracketWindow> bracket(const QuadOperator& A, const QuadOperator& B) {
    check_compatible(A, B);
    const int i = A.type_index(), j = B.type_index();
    const int k = i + j;
    const int n = A.dim();
    const int M = A.mode_cutoff();
    const Matrix& etinv = A.pairing()->eta_inv();
    const Matrix etinv_t = etinv.transpose();

    detail::RawBracket raw;

    // lin x qp and qp x lin
    if (A.has_linear()) {
        int r = 2 * i + 3;
        if (auto it = B.qp().find(r); it != B.qp().end())
            raw.add_lin(r + 2 * j, Scalar(r) * (A.linear() * etinv * it->second));
    }
    if (B.has_linear()) {
        int r = 2 * j + 3;
        if (auto it = A.qp().find(r); it != A.qp().end())
            raw.add_lin(r + 2 * i, Scalar(-r) * (B.linear() * etinv * it->second));
    }

    // lin x qq (only reachable when both operands are type -1)
    if (A.has_linear() && B.has_qq() && 2 * i + 3 == 1)
        raw.add_qlin(1, A.linear() * etinv * (B.qq() + B.qq().transpose()));
    if (B.has_linear() && A.has_qq() && 2 * j + 3 == 1)
        raw.add_qlin(1, Scalar(-1) * (B.linear() * etinv * (A.qq() + A.qq().transpose())));

    // qp x qp
    for (const auto& [r, bA] : A.qp()) {
        if (auto it = B.qp().find(r + 2 * i); it != B.qp().end())
            raw.add(raw.qp, r, r + 2 * i + 2 * j, Scalar(r + 2 * i) * (bA * etinv * it->second));
        int s = r - 2 * j;
        if (s >= 1)
            if (auto it = B.qp().find(s); it != B.qp().end())
                raw.add(raw.qp, s, r + 2 * i, Scalar(-r) * (it->second * etinv * bA));
    }

    // qq x qp and qp x qq
    if (A.has_qq()) {
        int s = 1 - 2 * j;
        if (s >= 1)
            if (auto it = B.qp().find(s); it != B.qp().end())
                raw.add(raw.qq, s, 1, Scalar(-1) * (it->second * etinv * (A.qq() + A.qq().transpose())));
    }
    if (B.has_qq()) {
        int r = 1 - 2 * i;
        if (r >= 1)
            if (auto it = A.qp().find(r); it != A.qp().end())
                raw.add(raw.qq, r, 1, it->second * etinv * (B.qq() + B.qq().transpose()));
    }

    // qq x pp and pp x qq: a q_1 (...) p_{2j-1} term plus the trace constant
    if (A.has_qq() && !B.pp().empty()) {
        Matrix aa = A.qq() + A.qq().transpose();
        Matrix x = detail::pp_pair_sum(B.pp(), 1, j, n);
        if (!x.is_zero()) raw.add(raw.qp, 1, 2 * j - 1, Scalar(-1) * (aa * etinv_t * x));
        if (j == 1)
            if (auto it = B.pp().find(1); it != B.pp().end())
                raw.cst -= (it->second * etinv * aa * etinv_t).trace();
    }
    if (B.has_qq() && !A.pp().empty()) {
        Matrix aa = B.qq() + B.qq().transpose();
        Matrix x = detail::pp_pair_sum(A.pp(), 1, i, n);
        if (!x.is_zero()) raw.add(raw.qp, 1, 2 * i - 1, aa * etinv_t * x);
        if (i == 1)
            if (auto it = A.pp().find(1); it != A.pp().end())
                raw.cst += (it->second * etinv * aa * etinv_t).trace();
    }

    // qp x pp and pp x qp
    for (const auto& [r, bA] : A.qp()) {
        if (r > 2 * j - 1 || B.pp().empty()) continue;
        Matrix x = detail::pp_pair_sum(B.pp(), r, j, n).transpose();
        // (c^{r,2j-r})^T + c^{2j-r,r} = (c^{r,2j-r} + (c^{2j-r,r})^T)^T
        if (!x.is_zero()) raw.add(raw.pp, 2 * j - r, r + 2 * i, Scalar(-r) * (x * etinv * bA));
    }
    for (const auto& [s, bB] : B.qp()) {
        if (s > 2 * i - 1 || A.pp().empty()) continue;
        Matrix x = detail::pp_pair_sum(A.pp(), s, i, n).transpose();
        if (!x.is_zero()) raw.add(raw.pp, 2 * i - s, s + 2 * j, Scalar(s) * (x * etinv * bB));
    }

    BracketWindow window{M - 2 * (std::abs(i) + std::abs(j))};
    if (window.reliable_mode < 0) window.reliable_mode = 0;

    if (k < -1) {
        if (raw.is_zero()) return {make_zero(-1, A.pairing(), M), window};
        throw TypeShapeError("bracket of types " + std::to_string(i) + " and " + std::to_string(j) +
                             " does not vanish and is not representable");
    }

    // Classify the raw sum as a type-k operator.
    QuadParts parts;
    parts.const_term = raw.cst;
    for (const auto& [mode, row] : raw.lin) {
        if (row.is_zero()) continue;
        if (mode != 2 * k + 3) throw TypeShapeError("unexpected linear mode in bracket");
        if (mode <= M) parts.linear = row;
    }
    for (const auto& [uv, row] : raw.qlin)
        if (!row.is_zero()) throw TypeShapeError("unexpected q-linear term in bracket");
    Matrix qqsum;
    for (const auto& [uv, m] : raw.qq) {
        if (m.is_zero()) continue;
        if (uv.first != 1 || uv.second != 1 || k != -1)
            throw TypeShapeError("unexpected qq term in bracket");
        if (qqsum.empty()) qqsum = Matrix(n, n);
        qqsum += m;
    }
    if (!qqsum.empty()) parts.qq = qqsum;
    for (const auto& [uv, m] : raw.qp) {
        if (m.is_zero()) continue;
        auto [u, v] = uv;
        if (v - u != 2 * k) throw TypeShapeError("unexpected qp band in bracket");
        if (u <= M && v <= M) {
            auto [it, fresh] = parts.qp.emplace(u, m);
            if (!fresh) it->second += m;
        }
    }
    for (const auto& [uv, m] : raw.pp) {
        if (m.is_zero()) continue;
        auto [u, v] = uv;
        if (u + v != 2 * k) throw TypeShapeError("unexpected pp band in bracket");
        if (u > M || v > M) continue;
        // Feed the raw p_u^T m p_v into one slot only; the pair-collapse in
        // make_typed reconstructs the consistent transpose partner from it.
        auto [it, fresh] = parts.pp.emplace(u, m);
        if (!fresh) it->second += m;
    }
    return {make_typed(k, A.pairing(), parts, M), window};
}

/// True when every mode index of the entry lies within the window.
namespace detail {
inline bool lin_in_window(int type, int w) { return 2 * type + 3 <= w; }
}

/// Maximal absolute numerator over entries of (T1 - T2) whose mode indices all
/// lie within the window. The two operators must share type/pairing/cutoff.
inline mpz_class residual_max_numerator(const QuadOperator& t1, const QuadOperator& t2, int window) {
    QuadOperator d = scale_add(Scalar(1), t1, Scalar(-1), t2);
    mpz_class m = 0;
    auto upd = [&m](const mpz_class& x) {
        if (x > m) m = x;
    };
    if (d.has_linear() && detail::lin_in_window(d.type_index(), window)) upd(d.linear().max_abs_numerator());
    if (window >= 0) upd(::abs(d.const_term().numerator()));
    if (d.has_qq() && window >= 1) upd(d.qq().max_abs_numerator());
    for (const auto& [j, mat] : d.qp())
        if (j <= window && j + 2 * d.type_index() <= window) upd(mat.max_abs_numerator());
    for (const auto& [j, mat] : d.pp())
        if (j <= window && 2 * d.type_index() - j <= window) upd(mat.max_abs_numerator());
    return m;
}

inline bool equal_within(const QuadOperator& t1, const QuadOperator& t2, int window) {
    return residual_max_numerator(t1, t2, window) == 0;
}

} // namespace virakdv
