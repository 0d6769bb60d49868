#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "fatoulab/poly.hpp"

namespace fatou {

/// Power series c_0 + c_1 s + ... known exactly through s^order.
///
/// Every operation propagates the order through which its result is
/// determined by the inputs; reading past it throws InsufficientOrder.
template <class S>
class TruncatedSeries {
public:
    TruncatedSeries() = default;
    TruncatedSeries(std::vector<S> coeffs, int order) : order_(order), c_(std::move(coeffs)) {
        c_.resize(static_cast<std::size_t>(order + 1), scalar<S>(0));
    }
    static TruncatedSeries from_poly(const Poly<S>& p, int order) { return TruncatedSeries(p.coeffs(), order); }
    /// The identity germ s, known to all orders up to `order`.
    static TruncatedSeries identity(int order) {
        std::vector<S> c{scalar<S>(0), scalar<S>(1)};
        return TruncatedSeries(std::move(c), order);
    }

    int order() const { return order_; }
    const std::vector<S>& coeffs() const { return c_; }

    const S& operator[](int k) const {
        if (k < 0 || k > order_)
            throw Error(ErrorKind::InsufficientOrder,
                        "coefficient " + std::to_string(k) + " beyond valid order " + std::to_string(order_));
        return c_[static_cast<std::size_t>(k)];
    }
    S& coeff(int k) { return c_.at(static_cast<std::size_t>(k)); }

    /// Index of the first nonzero coefficient, or order()+1 if none is known.
    int valuation() const {
        for (int k = 0; k <= order_; ++k)
            if (!is_zero(c_[static_cast<std::size_t>(k)])) return k;
        return order_ + 1;
    }

    TruncatedSeries truncated(int order) const {
        return TruncatedSeries(c_, std::min(order, order_));
    }

    /// Set coefficients with magnitude <= tol (absolute) to exact zero.
    TruncatedSeries chopped(double tol) const {
        TruncatedSeries r = *this;
        for (auto& x : r.c_)
            if (magnitude(x) <= tol) x = scalar<S>(0);
        return r;
    }

    friend TruncatedSeries operator+(const TruncatedSeries& a, const TruncatedSeries& b) {
        const int order = std::min(a.order_, b.order_);
        std::vector<S> c(static_cast<std::size_t>(order + 1));
        for (int k = 0; k <= order; ++k) c[k] = a.c_[k] + b.c_[k];
        return TruncatedSeries(std::move(c), order);
    }
    friend TruncatedSeries operator-(const TruncatedSeries& a, const TruncatedSeries& b) {
        const int order = std::min(a.order_, b.order_);
        std::vector<S> c(static_cast<std::size_t>(order + 1));
        for (int k = 0; k <= order; ++k) c[k] = a.c_[k] - b.c_[k];
        return TruncatedSeries(std::move(c), order);
    }
    friend TruncatedSeries operator*(const S& s, TruncatedSeries a) {
        for (auto& x : a.c_) x *= s;
        return a;
    }
    friend TruncatedSeries operator*(const TruncatedSeries& a, const TruncatedSeries& b) {
        const int va = a.valuation(), vb = b.valuation();
        const int order = std::min(a.order_ + vb, b.order_ + va);
        std::vector<S> c(static_cast<std::size_t>(std::max(order, 0) + 1), scalar<S>(0));
        for (int i = va; i <= a.order_ && i <= order; ++i) {
            if (is_zero(a.c_[i])) continue;
            for (int j = vb; j <= b.order_ && i + j <= order; ++j) c[i + j] += a.c_[i] * b.c_[j];
        }
        return TruncatedSeries(std::move(c), order);
    }

    TruncatedSeries derivative() const {
        std::vector<S> c(static_cast<std::size_t>(std::max(order_, 1)), scalar<S>(0));
        for (int k = 1; k <= order_; ++k) c[k - 1] = c_[k] * scalar<S>(k);
        return TruncatedSeries(std::move(c), order_ - 1);
    }

    template <class T>
    TruncatedSeries<T> cast() const {
        std::vector<T> r;
        for (const auto& x : c_) r.push_back(convert_scalar<T>(x));
        return TruncatedSeries<T>(std::move(r), order_);
    }

private:
    int order_ = -1;
    std::vector<S> c_;
};

/// outer(inner(s)); inner must have zero constant term.
template <class S>
TruncatedSeries<S> series_compose(const TruncatedSeries<S>& outer, const TruncatedSeries<S>& inner) {
    if (inner.order() >= 0 && !is_zero(inner[0]))
        throw Error(ErrorKind::NonzeroConstantTerm, "inner series must vanish at 0");
    const int v = std::max(inner.valuation(), 1);
    const int vo = outer.valuation();
    const int from_outer = v * (outer.order() + 1) - 1;
    const int from_inner = inner.order() + (std::max(1, vo) - 1) * v;
    const int order = std::min(from_outer, from_inner);
    // Horner with truncation to `order`.
    TruncatedSeries<S> inner_t(inner.coeffs(), std::max(order, inner.order()));
    std::vector<S> acc(static_cast<std::size_t>(order + 1), scalar<S>(0));
    for (int k = std::min(outer.order(), order); k >= 0; --k) {
        std::vector<S> next(static_cast<std::size_t>(order + 1), scalar<S>(0));
        for (int i = 0; i <= order; ++i) {
            if (is_zero(acc[i])) continue;
            for (int j = 1; i + j <= order && j <= inner.order(); ++j) next[i + j] += acc[i] * inner.coeffs()[j];
        }
        next[0] += outer.coeffs()[k];
        acc = std::move(next);
    }
    return TruncatedSeries<S>(std::move(acc), order);
}

/// 1/u for a unit series u (u_0 != 0).
template <class S>
TruncatedSeries<S> series_inverse_unit(const TruncatedSeries<S>& u) {
    if (u.order() < 0 || is_zero(u[0])) throw Error(ErrorKind::ZeroPolynomial, "series is not a unit");
    const int order = u.order();
    std::vector<S> t(static_cast<std::size_t>(order + 1), scalar<S>(0));
    const S inv0 = scalar<S>(1) / u[0];
    t[0] = inv0;
    for (int k = 1; k <= order; ++k) {
        S acc = scalar<S>(0);
        for (int j = 1; j <= k; ++j) acc += u[j] * t[k - j];
        t[k] = -acc * inv0;
    }
    return TruncatedSeries<S>(std::move(t), order);
}

/// Compositional inverse of g = a s + ... with a != 0.
template <class S>
TruncatedSeries<S> series_revert(const TruncatedSeries<S>& g) {
    if (g.order() < 1 || !is_zero(g[0]) || is_zero(g[1]))
        throw Error(ErrorKind::NonzeroConstantTerm, "reversion needs g(0) = 0 and g'(0) != 0");
    const int order = g.order();
    // Newton-free fixed point: h <- h - (g(h) - s)/a, one new coefficient per sweep.
    const S a_inv = scalar<S>(1) / g[1];
    std::vector<S> h(static_cast<std::size_t>(order + 1), scalar<S>(0));
    h[1] = a_inv;
    for (int k = 2; k <= order; ++k) {
        TruncatedSeries<S> hs(h, k);
        TruncatedSeries<S> gh = series_compose(g.truncated(k), hs);
        h[k] = -gh[k] * a_inv;
    }
    return TruncatedSeries<S>(std::move(h), order);
}

template <class S>
TruncatedSeries<S> series_pow(const TruncatedSeries<S>& base, unsigned e) {
    if (e == 0) return TruncatedSeries<S>(std::vector<S>{scalar<S>(1)}, base.order());
    TruncatedSeries<S> r = base;
    for (unsigned i = 1; i < e; ++i) r = r * base;
    return r;
}

/// sum_{k >= low} c_k s^k, determined through exponent valid_through().
template <class S>
class LaurentSeries {
public:
    LaurentSeries() = default;
    LaurentSeries(int low, std::vector<S> coeffs, int valid_through)
        : low_(low), valid_(valid_through), c_(std::move(coeffs)) {
        c_.resize(static_cast<std::size_t>(std::max(valid_ - low_ + 1, 0)), scalar<S>(0));
        normalize();
    }
    static LaurentSeries from_series(const TruncatedSeries<S>& s) { return LaurentSeries(0, s.coeffs(), s.order()); }

    /// Exponent of the first stored coefficient; nonzero unless the series is 0 through its valid range.
    int leading_exponent() const { return low_; }
    int valid_through() const { return valid_; }

    S operator[](int e) const {
        if (e > valid_)
            throw Error(ErrorKind::InsufficientOrder,
                        "exponent " + std::to_string(e) + " beyond valid range " + std::to_string(valid_));
        if (e < low_) return scalar<S>(0);
        return c_[static_cast<std::size_t>(e - low_)];
    }
    S residue() const { return (*this)[-1]; }

    /// Coefficients with exponent <= max_exponent (the polar part when max_exponent = -1).
    std::vector<std::pair<int, S>> terms_through(int max_exponent) const {
        std::vector<std::pair<int, S>> r;
        for (int e = low_; e <= std::min(max_exponent, valid_); ++e) r.emplace_back(e, (*this)[e]);
        return r;
    }

    friend LaurentSeries operator*(const LaurentSeries& a, const LaurentSeries& b) {
        const int low = a.low_ + b.low_;
        const int valid = std::min(a.valid_ + b.low_, b.valid_ + a.low_);
        std::vector<S> c(static_cast<std::size_t>(std::max(valid - low + 1, 0)), scalar<S>(0));
        for (std::size_t i = 0; i < a.c_.size(); ++i)
            for (std::size_t j = 0; j < b.c_.size() && static_cast<int>(i + j) < static_cast<int>(c.size()); ++j)
                c[i + j] += a.c_[i] * b.c_[j];
        return LaurentSeries(low, std::move(c), valid);
    }
    friend LaurentSeries operator+(const LaurentSeries& a, const LaurentSeries& b) {
        const int low = std::min(a.low_, b.low_);
        const int valid = std::min(a.valid_, b.valid_);
        std::vector<S> c;
        for (int e = low; e <= valid; ++e) c.push_back(a[e] + b[e]);
        return LaurentSeries(low, std::move(c), valid);
    }
    friend LaurentSeries operator*(const S& s, LaurentSeries a) {
        for (auto& x : a.c_) x *= s;
        a.normalize();
        return a;
    }

private:
    void normalize() {
        std::size_t skip = 0;
        while (skip < c_.size() && is_zero(c_[skip])) ++skip;
        if (skip == c_.size()) {
            low_ = valid_ + 1;
            c_.clear();
            return;
        }
        c_.erase(c_.begin(), c_.begin() + static_cast<std::ptrdiff_t>(skip));
        low_ += static_cast<int>(skip);
    }

    int low_ = 0;
    int valid_ = -1;
    std::vector<S> c_;
};

/// 1/s for s = s_m z^m + ... (m >= 0); the residue is available when
/// s.order() >= 2m - 1.
template <class S>
LaurentSeries<S> laurent_reciprocal(const TruncatedSeries<S>& s) {
    const int m = s.valuation();
    if (m > s.order()) throw Error(ErrorKind::ZeroPolynomial, "reciprocal of a series that vanishes to its order");
    const int valid = s.order() - 2 * m;
    if (valid < -1)
        throw Error(ErrorKind::InsufficientOrder,
                    "residue of 1/s undetermined: order " + std::to_string(s.order()) + " < 2*" +
                        std::to_string(m) + "-1");
    std::vector<S> unit(s.coeffs().begin() + m, s.coeffs().end());
    auto inv = series_inverse_unit(TruncatedSeries<S>(std::move(unit), s.order() - m));
    return LaurentSeries<S>(-m, inv.coeffs(), valid);
}

/// Laurent series of a power series raised to a (possibly negative) integer power.
template <class S>
LaurentSeries<S> laurent_power(const TruncatedSeries<S>& s, int e) {
    const int m = s.valuation();
    if (m > s.order()) throw Error(ErrorKind::ZeroPolynomial, "power of a series that vanishes to its order");
    std::vector<S> unit_c(s.coeffs().begin() + m, s.coeffs().end());
    TruncatedSeries<S> unit(std::move(unit_c), s.order() - m);
    TruncatedSeries<S> base = e >= 0 ? unit : series_inverse_unit(unit);
    TruncatedSeries<S> acc(std::vector<S>{scalar<S>(1)}, unit.order());
    for (int i = 0; i < std::abs(e); ++i) acc = acc * base;
    return LaurentSeries<S>(m * e, acc.coeffs(), m * e + unit.order());
}

}  // namespace fatou
