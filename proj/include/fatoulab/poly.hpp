#pragma once

#include <algorithm>
#include <initializer_list>
#include <utility>
#include <vector>

#include "fatoulab/scalar.hpp"

namespace fatou {

/// Dense univariate polynomial, coefficients ascending by power.
///
/// Trailing coefficients that are exactly zero are trimmed, so degree() is the
/// index of the last stored entry; the zero polynomial has degree kZeroDegree.
template <class S>
class Poly {
public:
    static constexpr int kZeroDegree = -1;

    Poly() = default;
    explicit Poly(std::vector<S> coeffs) : c_(std::move(coeffs)) { trim(); }
    Poly(std::initializer_list<S> coeffs) : c_(coeffs) { trim(); }

    static Poly constant(const S& v) { return Poly(std::vector<S>{v}); }
    static Poly monomial(const S& v, int power) {
        std::vector<S> c(static_cast<std::size_t>(power) + 1, scalar<S>(0));
        c.back() = v;
        return Poly(std::move(c));
    }
    /// z - root
    static Poly linear_factor(const S& root) { return Poly({-root, scalar<S>(1)}); }

    int degree() const { return static_cast<int>(c_.size()) - 1; }
    bool is_zero() const { return c_.empty(); }
    const std::vector<S>& coeffs() const { return c_; }

    /// Coefficient of z^k, zero outside the stored range.
    S operator[](int k) const {
        if (k < 0 || k > degree()) return scalar<S>(0);
        return c_[static_cast<std::size_t>(k)];
    }
    const S& leading() const { return c_.back(); }

    template <class T>
    T operator()(const T& z) const {
        T acc = convert_scalar<T>(scalar<S>(0));
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * z + convert_scalar<T>(*it);
        return acc;
    }
    S operator()(const S& z) const {
        S acc = scalar<S>(0);
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * z + *it;
        return acc;
    }

    Poly derivative() const {
        if (degree() < 1) return {};
        std::vector<S> d(c_.size() - 1);
        for (std::size_t k = 1; k < c_.size(); ++k) d[k - 1] = c_[k] * scalar<S>(static_cast<long>(k));
        return Poly(std::move(d));
    }

    Poly& operator+=(const Poly& o) {
        if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), scalar<S>(0));
        for (std::size_t k = 0; k < o.c_.size(); ++k) c_[k] += o.c_[k];
        trim();
        return *this;
    }
    Poly& operator-=(const Poly& o) {
        if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), scalar<S>(0));
        for (std::size_t k = 0; k < o.c_.size(); ++k) c_[k] -= o.c_[k];
        trim();
        return *this;
    }
    Poly& operator*=(const S& s) {
        for (auto& x : c_) x *= s;
        trim();
        return *this;
    }

    friend Poly operator+(Poly a, const Poly& b) { return a += b; }
    friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
    friend Poly operator-(Poly a) {
        for (auto& x : a.c_) x = -x;
        return a;
    }
    friend Poly operator*(Poly a, const S& s) { return a *= s; }
    friend Poly operator*(const S& s, Poly a) { return a *= s; }
    friend Poly operator*(const Poly& a, const Poly& b) {
        if (a.is_zero() || b.is_zero()) return {};
        std::vector<S> r(a.c_.size() + b.c_.size() - 1, scalar<S>(0));
        for (std::size_t i = 0; i < a.c_.size(); ++i) {
            if (fatou::is_zero(a.c_[i])) continue;
            for (std::size_t j = 0; j < b.c_.size(); ++j) r[i + j] += a.c_[i] * b.c_[j];
        }
        return Poly(std::move(r));
    }
    friend bool operator==(const Poly& a, const Poly& b) { return a.c_ == b.c_; }

    /// Drop coefficients whose magnitude is below rel_tol times the largest.
    Poly chopped(double rel_tol) const {
        double big = 0;
        for (const auto& x : c_) big = std::max(big, magnitude(x));
        std::vector<S> r = c_;
        for (auto& x : r)
            if (magnitude(x) <= rel_tol * big) x = scalar<S>(0);
        return Poly(std::move(r));
    }

    double max_abs_coeff() const {
        double big = 0;
        for (const auto& x : c_) big = std::max(big, magnitude(x));
        return big;
    }

    template <class T>
    Poly<T> cast() const {
        std::vector<T> r;
        r.reserve(c_.size());
        for (const auto& x : c_) r.push_back(convert_scalar<T>(x));
        return Poly<T>(std::move(r));
    }

private:
    void trim() {
        while (!c_.empty() && fatou::is_zero(c_.back())) c_.pop_back();
    }

    std::vector<S> c_;
};

template <class S>
Poly<S> pow(const Poly<S>& p, unsigned e) {
    Poly<S> result = Poly<S>::constant(scalar<S>(1)), base = p;
    while (e) {
        if (e & 1u) result = result * base;
        e >>= 1u;
        if (e) base = base * base;
    }
    return result;
}

/// p(q(z))
template <class S>
Poly<S> compose(const Poly<S>& p, const Poly<S>& q) {
    Poly<S> acc;
    for (int k = p.degree(); k >= 0; --k) acc = acc * q + Poly<S>::constant(p[k]);
    return acc;
}

/// Quotient and remainder over a field.
template <class S>
std::pair<Poly<S>, Poly<S>> divmod(const Poly<S>& num, const Poly<S>& den) {
    if (den.is_zero()) throw Error(ErrorKind::ZeroPolynomial, "polynomial division by zero");
    std::vector<S> r = num.coeffs();
    const int dd = den.degree();
    if (num.degree() < dd) return {Poly<S>{}, num};
    std::vector<S> q(static_cast<std::size_t>(num.degree() - dd + 1), scalar<S>(0));
    const S lead = den.leading();
    for (int k = num.degree(); k >= dd; --k) {
        S coef = r[static_cast<std::size_t>(k)] / lead;
        q[static_cast<std::size_t>(k - dd)] = coef;
        for (int j = 0; j <= dd; ++j) r[static_cast<std::size_t>(k - dd + j)] -= coef * den[j];
        r[static_cast<std::size_t>(k)] = scalar<S>(0);
    }
    r.resize(static_cast<std::size_t>(dd));
    return {Poly<S>(std::move(q)), Poly<S>(std::move(r))};
}

template <class S>
Poly<S> monic(const Poly<S>& p) {
    if (p.is_zero()) return p;
    return p * (scalar<S>(1) / p.leading());
}

/// Monic gcd by the Euclidean algorithm. Meaningful for exact scalars only.
template <class S>
Poly<S> gcd(Poly<S> a, Poly<S> b) {
    while (!b.is_zero()) {
        auto r = divmod(a, b).second;
        a = std::move(b);
        b = std::move(r);
    }
    return monic(a);
}

/// p(z + shift): coefficients are the Taylor coefficients of p at `shift`.
template <class S>
Poly<S> taylor_shift(const Poly<S>& p, const S& shift) {
    std::vector<S> c = p.coeffs();
    const int n = p.degree();
    for (int i = 0; i < n; ++i)
        for (int k = n - 1; k >= i; --k) c[static_cast<std::size_t>(k)] += shift * c[static_cast<std::size_t>(k + 1)];
    return Poly<S>(std::move(c));
}

/// z^d p(1/z): the coefficient reversal used for the chart at infinity.
template <class S>
Poly<S> reversed(const Poly<S>& p, int d) {
    std::vector<S> c(static_cast<std::size_t>(d) + 1, scalar<S>(0));
    for (int k = 0; k <= p.degree(); ++k) c[static_cast<std::size_t>(d - k)] = p[k];
    return Poly<S>(std::move(c));
}

/// Homogeneous substitution sum_k p_k A^k B^{d-k} with d >= deg p.
template <class S>
Poly<S> homogeneous_substitute(const Poly<S>& p, int d, const Poly<S>& a, const Poly<S>& b) {
    std::vector<Poly<S>> a_pows{Poly<S>::constant(scalar<S>(1))}, b_pows{Poly<S>::constant(scalar<S>(1))};
    for (int k = 1; k <= d; ++k) {
        a_pows.push_back(a_pows.back() * a);
        b_pows.push_back(b_pows.back() * b);
    }
    Poly<S> acc;
    for (int k = 0; k <= p.degree(); ++k) {
        if (is_zero(p[k])) continue;
        acc += (a_pows[static_cast<std::size_t>(k)] * b_pows[static_cast<std::size_t>(d - k)]) * p[k];
    }
    return acc;
}

/// Multiplicity of `root` as a zero of p: the number of leading Taylor
/// coefficients at `root` that vanish (exactly, or below rel_tol * scale).
template <class S>
int root_multiplicity(const Poly<S>& p, const S& root, double rel_tol = 0.0) {
    if (p.is_zero()) return 0;
    Poly<S> shifted = taylor_shift(p, root);
    double scale = 0;
    if constexpr (!ScalarTraits<S>::exact) {
        // Size of the terms that produced the Taylor coefficients.
        const double r = magnitude(root);
        double rk = 1;
        for (const auto& c : p.coeffs()) {
            scale += magnitude(c) * rk;
            rk *= std::max(r, 1.0);
        }
        scale = std::max(scale, shifted.max_abs_coeff());
    }
    int m = 0;
    for (int k = 0; k <= shifted.degree(); ++k) {
        bool vanish = ScalarTraits<S>::exact ? is_zero(shifted[k]) : magnitude(shifted[k]) <= rel_tol * scale;
        if (!vanish) break;
        ++m;
    }
    return m;
}

}  // namespace fatou
