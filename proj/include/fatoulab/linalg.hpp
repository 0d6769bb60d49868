#pragma once

#include <cmath>
#include <vector>

#include "fatoulab/scalar.hpp"

namespace fatou {

/// Dense row-major matrix over any scalar with ScalarTraits.
template <class S>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), a_(rows * cols, scalar<S>(0)) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    S& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
    const S& operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

    std::vector<S> col(std::size_t j) const {
        std::vector<S> c(rows_);
        for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
        return c;
    }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<S> a_;
};

template <class S>
std::vector<S> operator*(const Matrix<S>& a, const std::vector<S>& x) {
    std::vector<S> y(a.rows(), scalar<S>(0));
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) y[i] += a(i, j) * x[j];
    return y;
}

/// Reduced row echelon form in place; returns pivot columns. For float
/// scalars, entries below rel_tol * (largest entry) count as zero.
template <class S>
std::vector<std::size_t> rref(Matrix<S>& a, double rel_tol = 0.0) {
    double big = 0;
    if constexpr (!ScalarTraits<S>::exact)
        for (std::size_t i = 0; i < a.rows(); ++i)
            for (std::size_t j = 0; j < a.cols(); ++j) big = std::max(big, magnitude(a(i, j)));
    const double thresh = rel_tol * big;
    std::vector<std::size_t> pivots;
    std::size_t row = 0;
    for (std::size_t c = 0; c < a.cols() && row < a.rows(); ++c) {
        std::size_t best = a.rows();
        double best_mag = thresh;
        for (std::size_t i = row; i < a.rows(); ++i) {
            if constexpr (ScalarTraits<S>::exact) {
                if (!is_zero(a(i, c))) {
                    best = i;
                    break;
                }
            } else {
                const double m = magnitude(a(i, c));
                if (m > best_mag) {
                    best_mag = m;
                    best = i;
                }
            }
        }
        if (best == a.rows()) continue;
        for (std::size_t j = 0; j < a.cols(); ++j) std::swap(a(row, j), a(best, j));
        const S inv = scalar<S>(1) / a(row, c);
        for (std::size_t j = c; j < a.cols(); ++j) a(row, j) *= inv;
        for (std::size_t i = 0; i < a.rows(); ++i) {
            if (i == row || is_zero(a(i, c))) continue;
            const S f = a(i, c);
            for (std::size_t j = c; j < a.cols(); ++j) a(i, j) -= f * a(row, j);
        }
        pivots.push_back(c);
        ++row;
    }
    return pivots;
}

/// Basis of the null space of a.
template <class S>
std::vector<std::vector<S>> kernel(Matrix<S> a, double rel_tol = 0.0) {
    const auto pivots = rref(a, rel_tol);
    std::vector<bool> is_pivot(a.cols(), false);
    for (auto p : pivots) is_pivot[p] = true;
    std::vector<std::vector<S>> basis;
    for (std::size_t free = 0; free < a.cols(); ++free) {
        if (is_pivot[free]) continue;
        std::vector<S> v(a.cols(), scalar<S>(0));
        v[free] = scalar<S>(1);
        for (std::size_t r = 0; r < pivots.size(); ++r) v[pivots[r]] = -a(r, free);
        basis.push_back(std::move(v));
    }
    return basis;
}

/// Solve a square or overdetermined consistent system by elimination.
/// Returns false if a is rank deficient.
template <class S>
bool solve(const Matrix<S>& a, const std::vector<S>& b, std::vector<S>& x, double rel_tol = 0.0) {
    Matrix<S> aug(a.rows(), a.cols() + 1);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) aug(i, j) = a(i, j);
        aug(i, a.cols()) = b[i];
    }
    const auto pivots = rref(aug, rel_tol);
    if (pivots.size() < a.cols() || pivots.back() >= a.cols()) return false;
    x.assign(a.cols(), scalar<S>(0));
    for (std::size_t r = 0; r < pivots.size(); ++r) x[pivots[r]] = aug(r, a.cols());
    return true;
}

/// Householder QR of a tall complex matrix: least-squares solves and
/// orthonormal bases of the column span.
template <class C>
class HouseholderQR {
public:
    using R = typename C::value_type;

    explicit HouseholderQR(Matrix<C> a) : qr_(std::move(a)), beta_(qr_.cols()), vs_(qr_.cols()) {
        const std::size_t m = qr_.rows(), n = qr_.cols();
        for (std::size_t k = 0; k < n && k < m; ++k) {
            R norm2(0);
            for (std::size_t i = k; i < m; ++i) norm2 += std::norm(qr_(i, k));
            const R norm = sqrt(norm2);
            std::vector<C> v(m - k);
            for (std::size_t i = k; i < m; ++i) v[i - k] = qr_(i, k);
            if (norm == 0) {
                beta_[k] = R(0);
                vs_[k] = std::move(v);
                continue;
            }
            const R a0 = abs(v[0]);
            const C phase = a0 == 0 ? C(R(1)) : v[0] / a0;
            v[0] += phase * norm;
            R vnorm2(0);
            for (const auto& x : v) vnorm2 += std::norm(x);
            beta_[k] = R(2) / vnorm2;
            for (std::size_t j = k; j < n; ++j) {
                C dot{};
                for (std::size_t i = k; i < m; ++i) dot += std::conj(v[i - k]) * qr_(i, j);
                dot *= beta_[k];
                for (std::size_t i = k; i < m; ++i) qr_(i, j) -= v[i - k] * dot;
            }
            vs_[k] = std::move(v);
        }
    }

    /// Q^H b
    std::vector<C> apply_qh(std::vector<C> b) const {
        const std::size_t m = qr_.rows();
        for (std::size_t k = 0; k < vs_.size() && k < m; ++k) {
            if (beta_[k] == 0) continue;
            const auto& v = vs_[k];
            C dot{};
            for (std::size_t i = k; i < m; ++i) dot += std::conj(v[i - k]) * b[i];
            dot *= beta_[k];
            for (std::size_t i = k; i < m; ++i) b[i] -= v[i - k] * dot;
        }
        return b;
    }

    /// Q e_j for the thin factor (j < cols).
    std::vector<C> q_column(std::size_t j) const {
        const std::size_t m = qr_.rows();
        std::vector<C> e(m, C{});
        e[j] = C(R(1));
        for (std::size_t k = std::min(vs_.size(), m); k-- > 0;) {
            if (beta_[k] == 0) continue;
            const auto& v = vs_[k];
            C dot{};
            for (std::size_t i = k; i < m; ++i) dot += std::conj(v[i - k]) * e[i];
            dot *= beta_[k];
            for (std::size_t i = k; i < m; ++i) e[i] -= v[i - k] * dot;
        }
        return e;
    }

    const C& r(std::size_t i, std::size_t j) const { return qr_(i, j); }

    /// Least-squares solution of a x = b; residual_norm receives ||a x - b||.
    std::vector<C> solve(const std::vector<C>& b, R* residual_norm = nullptr) const {
        const std::size_t n = qr_.cols();
        std::vector<C> y = apply_qh(b);
        std::vector<C> x(n, C{});
        for (std::size_t k = n; k-- > 0;) {
            C acc = y[k];
            for (std::size_t j = k + 1; j < n; ++j) acc -= qr_(k, j) * x[j];
            if (qr_(k, k) == C{}) throw Error(ErrorKind::VerificationFailed, "rank-deficient least-squares system");
            x[k] = acc / qr_(k, k);
        }
        if (residual_norm) {
            R acc(0);
            for (std::size_t i = n; i < y.size(); ++i) acc += std::norm(y[i]);
            *residual_norm = sqrt(acc);
        }
        return x;
    }

    /// |R_kk| ratio, a cheap conditioning indicator.
    R diagonal_ratio() const {
        R lo(-1), hi(0);
        for (std::size_t k = 0; k < qr_.cols() && k < qr_.rows(); ++k) {
            const R a = abs(qr_(k, k));
            if (lo < 0 || a < lo) lo = a;
            if (a > hi) hi = a;
        }
        return hi == 0 ? R(0) : lo / hi;
    }

private:
    Matrix<C> qr_;
    std::vector<R> beta_;
    std::vector<std::vector<C>> vs_;
};

}  // namespace fatou
