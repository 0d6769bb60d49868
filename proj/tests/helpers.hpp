#pragma once

#include <random>
#include <vector>

#include "fatoulab/ratmap.hpp"

namespace testing_helpers {

using fatou::Complex;
using fatou::G;
using fatou::Poly;
using fatou::Rational;
using fatou::Real;

inline G q(long a, long b = 1) { return G(Rational(a, b)); }
inline G gi(long re, long im) { return G(Rational(re), Rational(im)); }
inline Complex cx(double re, double im = 0) { return {Real(re), Real(im)}; }

inline Poly<G> poly(std::initializer_list<G> c) { return Poly<G>(std::vector<G>(c)); }

inline fatou::RationalMap exact_map(std::initializer_list<G> p, std::initializer_list<G> d = {G(1)}) {
    return fatou::RationalMap::exact(poly(p), poly(d));
}

/// Random exact map of degree d with small Gaussian-integer/rational coefficients.
inline fatou::RationalMap random_exact_map(std::mt19937& rng, int d, bool polynomial_allowed = true) {
    std::uniform_int_distribution<long> coef(-4, 4);
    for (;;) {
        std::vector<G> p, den;
        for (int k = 0; k <= d; ++k) p.push_back(G(Rational(coef(rng), 1 + (coef(rng) + 4) % 3), Rational(coef(rng), 2)));
        const bool poly_case = polynomial_allowed && coef(rng) > 2;
        if (poly_case) {
            den = {G(1)};
        } else {
            for (int k = 0; k <= d; ++k) den.push_back(G(Rational(coef(rng)), Rational(coef(rng), 3)));
        }
        try {
            auto f = fatou::RationalMap::exact(Poly<G>(p), Poly<G>(den));
            if (f.degree() == d) return f;
        } catch (const fatou::Error&) {
        }
    }
}

inline Complex random_complex(std::mt19937& rng, double scale = 1.0) {
    std::normal_distribution<double> nd(0.0, scale);
    return cx(nd(rng), nd(rng));
}

}  // namespace testing_helpers
