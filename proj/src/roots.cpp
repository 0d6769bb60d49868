#include "fatoulab/roots.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fatou {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Starting points on circles read off the upper convex hull of
/// (k, log|a_k|), one circle per hull edge.
std::vector<Cd> initial_guesses(const std::vector<double>& log_abs) {
    const int n = static_cast<int>(log_abs.size()) - 1;
    std::vector<int> hull;
    for (int k = 0; k <= n; ++k) {
        if (!std::isfinite(log_abs[k])) continue;
        while (hull.size() >= 2) {
            const int a = hull[hull.size() - 2], b = hull.back();
            const double cross = (b - a) * (log_abs[k] - log_abs[a]) - (k - a) * (log_abs[b] - log_abs[a]);
            if (cross >= 0) hull.pop_back();
            else break;
        }
        hull.push_back(k);
    }
    std::vector<Cd> z;
    z.reserve(static_cast<std::size_t>(n));
    if (!hull.empty() && hull.front() > 0) {
        // Zero low-order coefficients: roots at the origin.
        for (int k = 0; k < hull.front(); ++k) z.emplace_back(0.0, 0.0);
    }
    const double sigma = 0.7;
    for (std::size_t e = 0; e + 1 < hull.size(); ++e) {
        const int i = hull[e], j = hull[e + 1];
        const int count = j - i;
        const double log_r = (log_abs[i] - log_abs[j]) / count;
        const double r = std::exp(std::clamp(log_r, -600.0, 600.0));
        for (int m = 0; m < count; ++m) {
            const double theta = kTwoPi * m / count + kTwoPi * i / n + sigma;
            z.push_back(std::polar(r, theta));
        }
    }
    return z;
}

template <class C>
struct Horner {
    C value;
    C deriv;
};

template <class C>
Horner<C> eval_with_derivative(const std::vector<C>& a, const C& z) {
    C p = a.back(), dp{};
    for (std::size_t k = a.size() - 1; k-- > 0;) {
        dp = dp * z + p;
        p = p * z + a[k];
    }
    return {p, dp};
}

/// Rounding-noise level of a Horner evaluation at z.
template <class C, class R>
R evaluation_noise(const std::vector<R>& abs_coeffs, const R& abs_z) {
    R acc = abs_coeffs.back();
    for (std::size_t k = abs_coeffs.size() - 1; k-- > 0;) acc = acc * abs_z + abs_coeffs[k];
    return acc;
}

template <class C, class R>
int aberth(const std::vector<C>& a, std::vector<C>& z, const R& unit_roundoff, int max_iter, bool& converged) {
    const std::size_t n = z.size();
    std::vector<R> abs_a(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) abs_a[k] = abs(a[k]);
    std::vector<bool> frozen(n, false);
    const R noise_factor = unit_roundoff * R(8 * static_cast<double>(a.size()));
    int iter = 0;
    for (; iter < max_iter; ++iter) {
        bool all_frozen = true;
        for (std::size_t k = 0; k < n; ++k) {
            if (frozen[k]) continue;
            auto [p, dp] = eval_with_derivative(a, z[k]);
            const R abs_z = abs(z[k]);
            const R noise = noise_factor * evaluation_noise<C, R>(abs_a, abs_z);
            if (abs(p) <= noise) {
                frozen[k] = true;
                continue;
            }
            all_frozen = false;
            C sum{};
            for (std::size_t j = 0; j < n; ++j)
                if (j != k) sum += C(R(1)) / (z[k] - z[j]);
            const C w = p / dp;
            const C step = w / (C(R(1)) - w * sum);
            z[k] -= step;
            const R scale = abs_z > R(1) ? abs_z : R(1);
            if (abs(step) <= unit_roundoff * scale * R(4)) frozen[k] = true;
        }
        if (all_frozen) break;
    }
    converged = std::all_of(frozen.begin(), frozen.end(), [](bool b) { return b; });
    return iter;
}

/// Single-linkage clusters of points within rel_radius * max(1, |z|).
std::vector<std::vector<std::size_t>> cluster(const std::vector<Complex>& z, double rel_radius) {
    const std::size_t n = z.size();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const Real scale = std::max<Real>(Real(1), std::max<Real>(abs(z[i]), abs(z[j])));
            if (abs(z[i] - z[j]) <= Real(rel_radius) * scale) parent[find(i)] = find(j);
        }
    std::vector<std::vector<std::size_t>> groups;
    std::vector<long> slot(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t r = find(i);
        if (slot[r] < 0) {
            slot[r] = static_cast<long>(groups.size());
            groups.emplace_back();
        }
        groups[static_cast<std::size_t>(slot[r])].push_back(i);
    }
    return groups;
}

/// Newton on p^{(m-1)}, which has a simple root at an m-fold root of p.
Complex polish_multiple(const Poly<Complex>& p, int m, Complex z, double radius) {
    Poly<Complex> g = p;
    for (int k = 1; k < m; ++k) g = g.derivative();
    const Poly<Complex> dg = g.derivative();
    const Complex start = z;
    const Real eps = ldexp(Real(1), -static_cast<int>(current_precision_bits()));
    for (int it = 0; it < 60; ++it) {
        const Complex d = dg(z);
        if (d == Complex{}) break;
        const Complex step = g(z) / d;
        z -= step;
        if (abs(step) <= eps * std::max<Real>(Real(1), abs(z))) break;
    }
    if (abs(z - start) > Real(radius) * std::max<Real>(Real(1), abs(start))) return start;
    return z;
}

}  // namespace

RootSet poly_roots(const Poly<Complex>& p, const Tolerances& tol) {
    if (p.is_zero()) throw Error(ErrorKind::ZeroPolynomial, "root of the zero polynomial");
    RootSet result;
    const int n = p.degree();
    if (n < 1) return result;

    // Strip roots at the origin exactly.
    int zeros = 0;
    while (is_zero(p[zeros])) ++zeros;
    std::vector<Complex> a(p.coeffs().begin() + zeros, p.coeffs().end());
    const int m = n - zeros;

    std::vector<Complex> z;
    if (m > 0) {
        std::vector<double> log_abs(a.size());
        bool fits_double = true;
        for (std::size_t k = 0; k < a.size(); ++k) {
            const Real mag = abs(a[k]);
            log_abs[k] = mag == 0 ? -std::numeric_limits<double>::infinity() : static_cast<double>(log(mag));
            if (mag != 0 && std::abs(log_abs[k]) > 600) fits_double = false;
        }
        std::vector<Cd> z0 = initial_guesses(log_abs);
        if (fits_double) {
            std::vector<Cd> ad(a.size());
            for (std::size_t k = 0; k < a.size(); ++k) ad[k] = to_cd(a[k]);
            bool ok = false;
            aberth<Cd, double>(ad, z0, 1.1e-16, 500, ok);
        }
        z.reserve(z0.size());
        for (const auto& w : z0) z.push_back(to_complex(w));
        const Real unit = ldexp(Real(1), -static_cast<int>(current_precision_bits()));
        bool ok = false;
        result.iterations = aberth<Complex, Real>(a, z, unit, 400, ok);
        result.converged = ok;
    }
    for (int k = 0; k < zeros; ++k) z.push_back(Complex{});

    const Poly<Complex> monic_p(std::vector<Complex>(a.begin(), a.end()));
    for (const auto& g : cluster(z, tol.eps_cluster)) {
        Complex centre{};
        for (auto i : g) centre += z[i];
        centre /= Real(static_cast<long>(g.size()));
        const int mult = static_cast<int>(g.size());
        if (is_zero(centre) && zeros > 0) {
            result.roots.push_back({Complex{}, mult});
            continue;
        }
        if (mult > 1) centre = polish_multiple(monic_p, mult, centre, tol.eps_cluster);
        result.roots.push_back({centre, mult});
    }
    return result;
}

RootSet poly_roots(const Poly<GaussianRational>& p, const Tolerances& tol) {
    return poly_roots(p.cast<Complex>(), tol);
}

RootSet poly_roots_checked(const Poly<Complex>& p, const Tolerances& tol) {
    RootSet r = poly_roots(p, tol);
    if (!r.converged)
        throw Error(ErrorKind::NonConvergence,
                    "root finder hit its iteration cap on a degree " + std::to_string(p.degree()) + " polynomial");
    return r;
}

std::vector<Complex> flatten(const RootSet& rs) {
    std::vector<Complex> out;
    for (const auto& r : rs.roots)
        for (int k = 0; k < r.multiplicity; ++k) out.push_back(r.value);
    return out;
}

std::vector<Cd> poly_roots_double(const std::vector<Cd>& coeffs) {
    std::vector<Cd> a = coeffs;
    while (!a.empty() && a.back() == Cd{}) a.pop_back();
    if (a.size() < 2) return {};
    int zeros = 0;
    while (a[static_cast<std::size_t>(zeros)] == Cd{}) ++zeros;
    std::vector<Cd> b(a.begin() + zeros, a.end());
    std::vector<double> log_abs(b.size());
    for (std::size_t k = 0; k < b.size(); ++k)
        log_abs[k] = b[k] == Cd{} ? -std::numeric_limits<double>::infinity() : std::log(std::abs(b[k]));
    std::vector<Cd> z = initial_guesses(log_abs);
    bool ok = false;
    if (b.size() > 1) aberth<Cd, double>(b, z, 1.1e-16, 500, ok);
    for (int k = 0; k < zeros; ++k) z.emplace_back(0.0, 0.0);
    return z;
}

}  // namespace fatou
