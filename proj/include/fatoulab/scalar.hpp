#pragma once

// Scalar types shared by every module.
//
//   Real / Complex     mpfr-backed floats, precision set at runtime (default 256 bits)
//   GaussianRational   exact a/b + (c/d) i over arbitrary-size integers
//   Cd                 std::complex<double>, used by quadrature only
//
// Generic code (Poly, series, rational functions) is written against
// ScalarTraits<S> so the same template serves the exact and floating paths.

#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include <cmath>
#include <complex>
#include <optional>
#include <string>

#include "fatoulab/errors.hpp"

namespace fatou {

namespace bmp = boost::multiprecision;

using Real = bmp::number<bmp::mpfr_float_backend<0>, bmp::et_off>;
using Complex = std::complex<Real>;
using Rational = bmp::mpq_rational;
using BigInt = bmp::mpz_int;
using Cd = std::complex<double>;

inline constexpr unsigned kDefaultPrecisionBits = 256;

unsigned current_precision_bits();
void set_precision_bits(unsigned bits);

/// Sets the working precision for the lifetime of the scope.
class PrecisionScope {
public:
    explicit PrecisionScope(unsigned bits) : saved_(current_precision_bits()) { set_precision_bits(bits); }
    ~PrecisionScope() { set_precision_bits(saved_); }
    PrecisionScope(const PrecisionScope&) = delete;
    PrecisionScope& operator=(const PrecisionScope&) = delete;

private:
    unsigned saved_;
};

class GaussianRational {
public:
    GaussianRational() = default;
    GaussianRational(long v) : re_(v) {}  // NOLINT(google-explicit-constructor)
    GaussianRational(Rational re) : re_(std::move(re)) {}  // NOLINT
    GaussianRational(Rational re, Rational im) : re_(std::move(re)), im_(std::move(im)) {}

    const Rational& re() const { return re_; }
    const Rational& im() const { return im_; }

    bool is_zero() const { return re_ == 0 && im_ == 0; }
    bool is_real() const { return im_ == 0; }
    Rational norm() const { return re_ * re_ + im_ * im_; }
    GaussianRational conj() const { return {re_, -im_}; }

    GaussianRational operator-() const { return {-re_, -im_}; }
    GaussianRational& operator+=(const GaussianRational& o) { re_ += o.re_; im_ += o.im_; return *this; }
    GaussianRational& operator-=(const GaussianRational& o) { re_ -= o.re_; im_ -= o.im_; return *this; }
    GaussianRational& operator*=(const GaussianRational& o) {
        Rational r = re_ * o.re_ - im_ * o.im_;
        im_ = re_ * o.im_ + im_ * o.re_;
        re_ = std::move(r);
        return *this;
    }
    GaussianRational& operator/=(const GaussianRational& o) {
        Rational n = o.norm();
        if (n == 0) throw Error(ErrorKind::IndeterminatePoint, "division by exact zero");
        Rational r = (re_ * o.re_ + im_ * o.im_) / n;
        im_ = (im_ * o.re_ - re_ * o.im_) / n;
        re_ = std::move(r);
        return *this;
    }
    friend GaussianRational operator+(GaussianRational a, const GaussianRational& b) { return a += b; }
    friend GaussianRational operator-(GaussianRational a, const GaussianRational& b) { return a -= b; }
    friend GaussianRational operator*(GaussianRational a, const GaussianRational& b) { return a *= b; }
    friend GaussianRational operator/(GaussianRational a, const GaussianRational& b) { return a /= b; }
    friend bool operator==(const GaussianRational& a, const GaussianRational& b) {
        return a.re_ == b.re_ && a.im_ == b.im_;
    }

    Complex to_complex() const { return {Real(re_), Real(im_)}; }
    Cd to_cd() const { return {re_.convert_to<double>(), im_.convert_to<double>()}; }

    /// Literal syntax "a/b + c/d*i" (omitting zero parts).
    std::string str() const;

private:
    Rational re_{0};
    Rational im_{0};
};

GaussianRational pow(const GaussianRational& base, unsigned exponent);

template <class S>
struct ScalarTraits;

template <>
struct ScalarTraits<GaussianRational> {
    static constexpr bool exact = true;
    static GaussianRational from_int(long v) { return GaussianRational(v); }
    static bool is_zero(const GaussianRational& x) { return x.is_zero(); }
    static double magnitude(const GaussianRational& x) {
        return std::sqrt(x.norm().convert_to<double>());
    }
    static Complex to_complex(const GaussianRational& x) { return x.to_complex(); }
    static Cd to_cd(const GaussianRational& x) { return x.to_cd(); }
};

template <>
struct ScalarTraits<Complex> {
    static constexpr bool exact = false;
    static Complex from_int(long v) { return {Real(v), Real(0)}; }
    static bool is_zero(const Complex& x) { return x.real() == 0 && x.imag() == 0; }
    static double magnitude(const Complex& x) { return static_cast<double>(std::abs(x)); }
    static Complex to_complex(const Complex& x) { return x; }
    static Cd to_cd(const Complex& x) { return {static_cast<double>(x.real()), static_cast<double>(x.imag())}; }
};

template <>
struct ScalarTraits<Cd> {
    static constexpr bool exact = false;
    static Cd from_int(long v) { return {static_cast<double>(v), 0.0}; }
    static bool is_zero(const Cd& x) { return x == Cd{}; }
    static double magnitude(const Cd& x) { return std::abs(x); }
    static Complex to_complex(const Cd& x) { return {Real(x.real()), Real(x.imag())}; }
    static Cd to_cd(const Cd& x) { return x; }
};

template <class S>
S scalar(long v) {
    return ScalarTraits<S>::from_int(v);
}

template <class S>
bool is_zero(const S& x) {
    return ScalarTraits<S>::is_zero(x);
}

template <class S>
double magnitude(const S& x) {
    return ScalarTraits<S>::magnitude(x);
}

inline Cd to_cd(const Complex& z) { return ScalarTraits<Complex>::to_cd(z); }
inline Complex to_complex(const Cd& z) { return ScalarTraits<Cd>::to_complex(z); }

/// Convert between scalar types (exact -> float is rounding, float -> float is a cast).
template <class To, class From>
To convert_scalar(const From& x) {
    if constexpr (std::is_same_v<To, From>) {
        return x;
    } else if constexpr (std::is_same_v<To, Complex>) {
        return ScalarTraits<From>::to_complex(x);
    } else if constexpr (std::is_same_v<To, Cd>) {
        return ScalarTraits<From>::to_cd(x);
    } else {
        static_assert(std::is_same_v<To, From>, "no conversion into an exact scalar");
    }
}

/// Smallest Gaussian rational with bounded denominators near z, or nothing.
std::optional<GaussianRational> rationalize(const Complex& z, const BigInt& max_den);

/// Full-precision decimal rendering of a real.
std::string to_decimal(const Real& x);
std::string to_decimal(const Complex& z);

/// Exact parse of a decimal literal ("0.125", "3", "2.5e-3") into a rational.
Rational parse_decimal(const std::string& text);

Real pi_real();

/// Precision-linked thresholds. All are relative unless noted; each may be
/// overridden after construction.
struct Tolerances {
    unsigned bits = kDefaultPrecisionBits;
    int k_root = 64;
    unsigned degree_cap = 4096;
    double eps_rank = 1e-10;
    double eps_cluster = 0;   // 2^{-p/4}
    double eps_orbit = 0;     // 2^{-p/3}, chordal
    double eps_super = 0;     // 2^{-p/2}
    double eps_ind = 0;       // 2^{-p/4}
    double eps_unity = 0;     // 2^{-p/3}
    double eps_beta = 0;      // 2^{-p/4}
    double eps_push = 0;      // 2^{-p/2}
    double eps_series = 0;    // 2^{-p/4}
    double eps_coprime = 0;   // 2^{-p/2}

    static Tolerances for_bits(unsigned bits);
    static Tolerances for_current_precision() { return for_bits(current_precision_bits()); }
};

}  // namespace fatou
