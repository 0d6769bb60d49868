#include "fatoulab/scalar.hpp"

#include <boost/math/constants/constants.hpp>

#include <cctype>

namespace fatou {

namespace {

unsigned digits10_for_bits(unsigned bits) {
    return static_cast<unsigned>(std::ceil(bits * 0.30102999566398120)) + 1;
}

thread_local unsigned g_precision_bits = [] {
    Real::default_precision(digits10_for_bits(kDefaultPrecisionBits));
    return kDefaultPrecisionBits;
}();

std::optional<Rational> best_rational(const Real& x, const BigInt& max_den, const Real& tol) {
    Real frac = x;
    // Convergents p_k / q_k.
    BigInt p_prev = 1, q_prev = 0;
    BigInt p = static_cast<BigInt>(floor(frac)), q = 1;
    frac -= floor(frac);
    for (int iter = 0; iter < 200; ++iter) {
        Rational cand(p, q);
        if (abs(Real(cand) - x) <= tol) return cand;
        if (frac == 0) break;
        frac = 1 / frac;
        BigInt a = static_cast<BigInt>(floor(frac));
        frac -= floor(frac);
        BigInt pn = a * p + p_prev;
        BigInt qn = a * q + q_prev;
        if (qn > max_den) break;
        p_prev = p; q_prev = q;
        p = pn; q = qn;
    }
    return std::nullopt;
}

}  // namespace

unsigned current_precision_bits() { return g_precision_bits; }

namespace {
// Touch the thread-local once at load so Reals built before any explicit
// precision call on the main thread still get the default.
[[maybe_unused]] const unsigned g_boot_bits = current_precision_bits();
}  // namespace

void set_precision_bits(unsigned bits) {
    if (bits < 64) throw Error(ErrorKind::Usage, "precision must be at least 64 bits");
    g_precision_bits = bits;
    Real::default_precision(digits10_for_bits(bits));
}

Tolerances Tolerances::for_bits(unsigned bits) {
    Tolerances t;
    t.bits = bits;
    const double p = bits;
    t.eps_cluster = std::exp2(-p / 4);
    t.eps_orbit = std::exp2(-p / 3);
    t.eps_super = std::exp2(-p / 2);
    t.eps_ind = std::exp2(-p / 4);
    t.eps_unity = std::exp2(-p / 3);
    t.eps_beta = std::exp2(-p / 4);
    t.eps_push = std::exp2(-p / 2);
    t.eps_series = std::exp2(-p / 4);
    t.eps_coprime = std::exp2(-p / 2);
    return t;
}

std::string GaussianRational::str() const {
    auto rat = [](const Rational& r) {
        std::string s = r.str();
        return s;
    };
    if (im_ == 0) return rat(re_);
    std::string imag;
    if (im_ == 1) imag = "i";
    else if (im_ == -1) imag = "-i";
    else imag = rat(im_) + "*i";
    if (re_ == 0) return imag;
    if (im_ > 0) return rat(re_) + " + " + imag;
    std::string positive = (im_ == -1) ? "i" : rat(Rational(-im_)) + "*i";
    return rat(re_) + " - " + positive;
}

GaussianRational pow(const GaussianRational& base, unsigned exponent) {
    GaussianRational result(1), b = base;
    while (exponent) {
        if (exponent & 1u) result *= b;
        b *= b;
        exponent >>= 1u;
    }
    return result;
}

std::optional<GaussianRational> rationalize(const Complex& z, const BigInt& max_den) {
    Real scale = std::max<Real>(Real(1), abs(z));
    Real tol = scale * ldexp(Real(1), -static_cast<int>(current_precision_bits() / 2));
    auto re = best_rational(z.real(), max_den, tol);
    auto im = best_rational(z.imag(), max_den, tol);
    if (!re || !im) return std::nullopt;
    return GaussianRational(*re, *im);
}

std::string to_decimal(const Real& x) {
    if (x == 0) return "0";
    return x.str(0, std::ios_base::scientific);
}

std::string to_decimal(const Complex& z) {
    return to_decimal(z.real()) + (z.imag() < 0 ? " - " : " + ") + to_decimal(abs(z.imag())) + "*i";
}

Rational parse_decimal(const std::string& text) {
    std::size_t pos = 0;
    BigInt mantissa = 0;
    long exponent10 = 0;
    bool any = false;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
        mantissa = mantissa * 10 + (text[pos] - '0');
        ++pos;
        any = true;
    }
    if (pos < text.size() && text[pos] == '.') {
        ++pos;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
            mantissa = mantissa * 10 + (text[pos] - '0');
            --exponent10;
            ++pos;
            any = true;
        }
    }
    if (!any) throw Error(ErrorKind::SyntaxError, "malformed number '" + text + "'");
    if (pos < text.size() && (text[pos] == 'e' || text[pos] == 'E')) {
        ++pos;
        exponent10 += std::stol(text.substr(pos));
        pos = text.size();
    }
    if (pos != text.size()) throw Error(ErrorKind::SyntaxError, "malformed number '" + text + "'");
    BigInt ten_pow = pow(BigInt(10), static_cast<unsigned>(std::labs(exponent10)));
    return exponent10 >= 0 ? Rational(mantissa * ten_pow) : Rational(mantissa, ten_pow);
}

Real pi_real() { return boost::math::constants::pi<Real>(); }

}  // namespace fatou
