#pragma once

#include <initializer_list>
#include <map>
#include <vector>

#include "virakdv/scalar.hpp"

namespace virakdv {

/// Dense matrix over Scalar. Row vectors are 1 x n matrices, column vectors
/// n x 1. Sizes here are the cohomology dimension, so tiny.
class Matrix {
public:
    Matrix() : rows_(0), cols_(0) {}
    Matrix(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols) {}
    Matrix(int rows, int cols, std::initializer_list<Scalar> entries)
        : rows_(rows), cols_(cols), a_(entries) {
        if (a_.size() != static_cast<size_t>(rows) * cols) throw Error("Matrix: bad initializer size");
    }

    static Matrix identity(int n) {
        Matrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = Scalar(1);
        return m;
    }
    static Matrix scalar(int n, const Scalar& s) {
        Matrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = s;
        return m;
    }
    static Matrix row(std::initializer_list<Scalar> entries) {
        Matrix m(1, static_cast<int>(entries.size()));
        int j = 0;
        for (const auto& e : entries) m(0, j++) = e;
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool empty() const { return rows_ == 0 || cols_ == 0; }

    Scalar& operator()(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
    const Scalar& operator()(int i, int j) const { return a_[static_cast<size_t>(i) * cols_ + j]; }

    bool is_zero() const {
        for (const auto& x : a_)
            if (!x.is_zero()) return false;
        return true;
    }
    bool is_symmetric() const {
        if (rows_ != cols_) return false;
        for (int i = 0; i < rows_; ++i)
            for (int j = i + 1; j < cols_; ++j)
                if ((*this)(i, j) != (*this)(j, i)) return false;
        return true;
    }
    bool is_diagonal() const {
        if (rows_ != cols_) return false;
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j)
                if (i != j && !(*this)(i, j).is_zero()) return false;
        return true;
    }

    Matrix transpose() const {
        Matrix t(cols_, rows_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    Matrix operator-() const {
        Matrix r = *this;
        for (auto& x : r.a_) x = -x;
        return r;
    }
    Matrix& operator+=(const Matrix& o) {
        check_same_shape(o);
        for (size_t k = 0; k < a_.size(); ++k) a_[k] += o.a_[k];
        return *this;
    }
    Matrix& operator-=(const Matrix& o) {
        check_same_shape(o);
        for (size_t k = 0; k < a_.size(); ++k) a_[k] -= o.a_[k];
        return *this;
    }
    Matrix& operator*=(const Scalar& s) {
        for (auto& x : a_) x *= s;
        return *this;
    }

    friend Matrix operator+(Matrix a, const Matrix& b) { a += b; return a; }
    friend Matrix operator-(Matrix a, const Matrix& b) { a -= b; return a; }
    friend Matrix operator*(Matrix a, const Scalar& s) { a *= s; return a; }
    friend Matrix operator*(const Scalar& s, Matrix a) { a *= s; return a; }

    friend Matrix operator*(const Matrix& a, const Matrix& b) {
        if (a.cols_ != b.rows_) throw DimensionMismatch("matrix product shapes");
        Matrix r(a.rows_, b.cols_);
        for (int i = 0; i < a.rows_; ++i)
            for (int k = 0; k < a.cols_; ++k) {
                const Scalar& aik = a(i, k);
                if (aik.is_zero()) continue;
                for (int j = 0; j < b.cols_; ++j) {
                    const Scalar& bkj = b(k, j);
                    if (!bkj.is_zero()) r(i, j) += aik * bkj;
                }
            }
        return r;
    }

    friend bool operator==(const Matrix& a, const Matrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.a_ == b.a_;
    }
    friend bool operator!=(const Matrix& a, const Matrix& b) { return !(a == b); }

    /// Gauss-Jordan inverse; throws SingularMatrix.
    Matrix inverse() const {
        if (rows_ != cols_) throw DimensionMismatch("inverse of non-square matrix");
        int n = rows_;
        Matrix aug = *this;
        Matrix inv = identity(n);
        for (int col = 0; col < n; ++col) {
            int piv = -1;
            for (int r = col; r < n; ++r)
                if (!aug(r, col).is_zero()) { piv = r; break; }
            if (piv < 0) throw SingularMatrix("matrix has no inverse");
            if (piv != col) { swap_rows(aug, piv, col); swap_rows(inv, piv, col); }
            Scalar d = aug(col, col).inv();
            for (int j = 0; j < n; ++j) { aug(col, j) *= d; inv(col, j) *= d; }
            for (int r = 0; r < n; ++r) {
                if (r == col || aug(r, col).is_zero()) continue;
                Scalar f = aug(r, col);
                for (int j = 0; j < n; ++j) {
                    aug(r, j) -= f * aug(col, j);
                    inv(r, j) -= f * inv(col, j);
                }
            }
        }
        return inv;
    }

    Scalar trace() const {
        if (rows_ != cols_) throw DimensionMismatch("trace of non-square matrix");
        Scalar t(0);
        for (int i = 0; i < rows_; ++i) t += (*this)(i, i);
        return t;
    }

    Matrix sym() const { return ((*this) + transpose()) * Scalar(1, 2); }

    /// Largest absolute numerator over all entries; 0 for the zero matrix.
    mpz_class max_abs_numerator() const {
        mpz_class m = 0;
        for (const auto& x : a_) {
            mpz_class n = ::abs(x.numerator());
            if (n > m) m = n;
        }
        return m;
    }

private:
    void check_same_shape(const Matrix& o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_) throw DimensionMismatch("matrix shapes differ");
    }
    static void swap_rows(Matrix& m, int r1, int r2) {
        for (int j = 0; j < m.cols_; ++j) std::swap(m(r1, j), m(r2, j));
    }

    int rows_, cols_;
    std::vector<Scalar> a_;
};

/// Kernel basis of a square matrix, as columns (used by the eigensplitting).
inline std::vector<std::vector<Scalar>> kernel_basis(Matrix m) {
    int nr = m.rows(), nc = m.cols();
    std::vector<int> pivot_col_of_row;
    int row = 0;
    for (int col = 0; col < nc && row < nr; ++col) {
        int piv = -1;
        for (int r = row; r < nr; ++r)
            if (!m(r, col).is_zero()) { piv = r; break; }
        if (piv < 0) continue;
        if (piv != row)
            for (int j = 0; j < nc; ++j) std::swap(m(piv, j), m(row, j));
        Scalar d = m(row, col).inv();
        for (int j = 0; j < nc; ++j) m(row, j) *= d;
        for (int r = 0; r < nr; ++r) {
            if (r == row || m(r, col).is_zero()) continue;
            Scalar f = m(r, col);
            for (int j = 0; j < nc; ++j) m(r, j) -= f * m(row, j);
        }
        pivot_col_of_row.push_back(col);
        ++row;
    }
    std::vector<bool> is_pivot(nc, false);
    for (int c : pivot_col_of_row) is_pivot[c] = true;
    std::vector<std::vector<Scalar>> basis;
    for (int free = 0; free < nc; ++free) {
        if (is_pivot[free]) continue;
        std::vector<Scalar> v(nc, Scalar(0));
        v[free] = Scalar(1);
        for (size_t r = 0; r < pivot_col_of_row.size(); ++r)
            v[pivot_col_of_row[r]] = -m(static_cast<int>(r), free);
        basis.push_back(std::move(v));
    }
    return basis;
}

/// Sparse exact linear system solver for the triangular-but-coupled solves in
/// the representation extension. Rows are built incrementally; solve() runs
/// Gaussian elimination, demands a unique solution and checks consistency of
/// redundant rows.
class SparseLinearSystem {
public:
    explicit SparseLinearSystem(int num_unknowns) : n_(num_unknowns) {}

    void add_row(std::map<int, Scalar> coeffs, Scalar rhs) {
        for (auto it = coeffs.begin(); it != coeffs.end();) {
            if (it->second.is_zero()) it = coeffs.erase(it);
            else ++it;
        }
        rows_.push_back(std::move(coeffs));
        rhs_.push_back(std::move(rhs));
    }

    struct AffineSolution {
        std::vector<Scalar> particular;
        std::vector<std::vector<Scalar>> kernel;  // basis of the solution space direction
    };

    /// Gaussian elimination; throws the given label on inconsistency. The
    /// solution set is particular + span(kernel).
    AffineSolution solve_affine(const std::string& what) const {
        std::vector<std::map<int, Scalar>> rows = rows_;
        std::vector<Scalar> rhs = rhs_;
        std::vector<int> pivot_row_of_col(n_, -1);
        std::vector<bool> used(rows.size(), false);

        for (int col = 0; col < n_; ++col) {
            int best = -1;
            size_t best_len = 0;
            for (size_t r = 0; r < rows.size(); ++r) {
                if (used[r]) continue;
                auto it = rows[r].find(col);
                if (it == rows[r].end()) continue;
                if (best < 0 || rows[r].size() < best_len) { best = static_cast<int>(r); best_len = rows[r].size(); }
            }
            if (best < 0) continue;
            used[best] = true;
            pivot_row_of_col[col] = best;
            Scalar d = rows[best][col].inv();
            for (auto& [c, v] : rows[best]) v *= d;
            rhs[best] *= d;
            for (size_t r = 0; r < rows.size(); ++r) {
                if (static_cast<int>(r) == best) continue;
                auto it = rows[r].find(col);
                if (it == rows[r].end()) continue;
                Scalar f = it->second;
                for (const auto& [c, v] : rows[best]) {
                    Scalar& t = rows[r][c];
                    t -= f * v;
                    if (t.is_zero()) rows[r].erase(c);
                }
                rhs[r] -= f * rhs[best];
            }
        }

        for (size_t r = 0; r < rows.size(); ++r) {
            if (used[r]) continue;
            if (!rows[r].empty() || !rhs[r].is_zero())
                throw SingularMatrix(what + ": inconsistent redundant equation");
        }

        AffineSolution sol;
        sol.particular.assign(n_, Scalar(0));
        for (int col = 0; col < n_; ++col)
            if (pivot_row_of_col[col] >= 0) sol.particular[col] = rhs[pivot_row_of_col[col]];
        for (int free = 0; free < n_; ++free) {
            if (pivot_row_of_col[free] >= 0) continue;
            std::vector<Scalar> v(n_, Scalar(0));
            v[free] = Scalar(1);
            for (int col = 0; col < n_; ++col) {
                int pr = pivot_row_of_col[col];
                if (pr < 0) continue;
                auto it = rows[pr].find(free);
                if (it != rows[pr].end()) v[col] = -it->second;
            }
            sol.kernel.push_back(std::move(v));
        }
        return sol;
    }

    /// Unique solution or SingularMatrix.
    std::vector<Scalar> solve(const std::string& what) const {
        AffineSolution sol = solve_affine(what);
        if (!sol.kernel.empty())
            throw SingularMatrix(what + ": underdetermined (" + std::to_string(sol.kernel.size()) +
                                 " free directions)");
        return sol.particular;
    }

private:
    int n_;
    std::vector<std::map<int, Scalar>> rows_;
    std::vector<Scalar> rhs_;
};

} // namespace virakdv
