#include "fatoulab/cycles.hpp"

#include <algorithm>

namespace fatou {

namespace {

const BigInt& rationalize_bound() {
    static const BigInt bound("1000000000000");
    return bound;
}

std::vector<int> divisors(int k) {
    std::vector<int> d;
    for (int j = 1; j <= k; ++j)
        if (k % j == 0) d.push_back(j);
    return d;
}

/// Newton on f^kappa(z) - z evaluated along the orbit, which is far better
/// conditioned than the expanded period equation. Returns z unchanged when the
/// orbit leaves the affine chart or the iteration wanders off the root.
Complex polish_on_orbit(const RationalMap& f, const Complex& z0, int kappa, double radius) {
    const Poly<Complex> dp = f.num().derivative(), dq = f.den().derivative();
    const Real eps = ldexp(Real(1), -static_cast<int>(current_precision_bits()));
    Complex z = z0;
    for (int it = 0; it < 12; ++it) {
        Complex w = z, dw(1);
        for (int j = 0; j < kappa; ++j) {
            const Complex p = f.num()(w), q = f.den()(w);
            if (abs(q) <= Real(1e-30) * (abs(p) + 1)) return z0;
            dw *= (dp(w) * q - p * dq(w)) / (q * q);
            w = p / q;
        }
        const Complex d = dw - Complex(1);
        if (d == Complex{}) return z0;
        const Complex step = (w - z) / d;
        z -= step;
        if (abs(step) <= eps * std::max<Real>(Real(1), abs(z))) break;
    }
    if (abs(z - z0) > Real(radius) * std::max<Real>(Real(1), abs(z0))) return z0;
    return z;
}

/// Smallest j | kappa with f^j(x) = x.
int exact_period(const RationalMap& f, const SpherePoint& x, int kappa, const Tolerances& tol) {
    if (f.is_exact() && x.is_exact()) {
        std::optional<G> start = x.exact, y = x.exact;
        for (int j = 1; j <= kappa; ++j) {
            y = f.eval_exact(y);
            if (kappa % j == 0 && y == start) return j;
        }
        return -1;
    }
    std::vector<SpherePoint> orbit{x};
    for (int j = 1; j <= kappa; ++j) orbit.push_back(f(orbit.back()));
    for (double eps : {tol.eps_orbit, tol.eps_cluster})
        for (int j : divisors(kappa))
            if (chordal_distance(orbit[static_cast<std::size_t>(j)], x) <= Real(eps)) return j;
    return -1;
}

/// Index of the point matching y, or -1.
int match_point(const SpherePoint& y, const std::vector<PeriodicPoint>& pts, const std::vector<bool>& taken,
                const Tolerances& tol) {
    int best = -1;
    Real best_d(2);
    for (std::size_t j = 0; j < pts.size(); ++j) {
        if (taken[j]) continue;
        const SpherePoint& p = pts[j].point;
        if (y.is_exact() && p.is_exact()) {
            if (same_point(y, p, 0)) return static_cast<int>(j);
            continue;
        }
        const Real d = chordal_distance(y, p);
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(j);
        }
    }
    if (best >= 0 && best_d <= Real(tol.eps_cluster)) return best;
    return -1;
}

}  // namespace

std::string_view to_string(CycleClass c) {
    switch (c) {
    case CycleClass::Superattracting: return "superattracting";
    case CycleClass::Attracting: return "attracting";
    case CycleClass::IrrationallyIndifferent: return "irrationally-indifferent";
    case CycleClass::Parabolic: return "parabolic";
    case CycleClass::Repelling: return "repelling";
    }
    return "unknown";
}

std::string_view to_string(ParabolicSubtype s) {
    switch (s) {
    case ParabolicSubtype::Repelling: return "parabolic-repelling";
    case ParabolicSubtype::Attracting: return "parabolic-attracting";
    case ParabolicSubtype::Indifferent: return "parabolic-indifferent";
    }
    return "unknown";
}

bool lex_less(const SpherePoint& a, const SpherePoint& b) {
    if (a.is_infinity()) return false;
    if (b.is_infinity()) return true;
    if (a.exact && b.exact) {
        if (a.exact->re() != b.exact->re()) return a.exact->re() < b.exact->re();
        return a.exact->im() < b.exact->im();
    }
    const Complex x = a.value(), y = b.value();
    if (x.real() != y.real()) return x.real() < y.real();
    return x.imag() < y.imag();
}

std::vector<PeriodicPoint> periodic_points(const RationalMap& f, int kappa, const Tolerances& tol) {
    const RationalMap F = f.iterate(kappa, tol.degree_cap);
    const int d = F.degree();
    std::vector<PeriodicPoint> candidates;
    int deg_n = 0;
    if (f.is_exact()) {
        const Poly<G> n = F.exact_num() - Poly<G>({G(0), G(1)}) * F.exact_den();
        deg_n = n.degree();
        const RootSet roots = poly_roots(n, tol);
        if (!roots.converged) throw Error(ErrorKind::NonConvergence, "period equation did not converge");
        for (const auto& r : roots.roots) {
            PeriodicPoint pp{SpherePoint::affine(r.value), r.multiplicity};
            if (auto cand = rationalize(r.value, rationalize_bound()); cand && n(*cand).is_zero()) {
                pp.point = SpherePoint::from_exact(*cand);
                pp.multiplicity = root_multiplicity(n, *cand);
            }
            candidates.push_back(pp);
        }
    } else {
        Poly<Complex> n = F.num() - Poly<Complex>({Complex{}, Complex(1)}) * F.den();
        n = n.chopped(tol.eps_super);
        deg_n = n.degree();
        const RootSet roots = poly_roots(n, tol);
        if (!roots.converged) throw Error(ErrorKind::NonConvergence, "period equation did not converge");
        for (const auto& r : roots.roots) candidates.push_back({SpherePoint::affine(r.value), r.multiplicity});
    }
    const int at_inf = d + 1 - deg_n;
    if (at_inf > 0) {
        PeriodicPoint pp{SpherePoint::infinity(), at_inf};
        if (!f.is_exact()) pp.point.exact_infinity = false;
        candidates.push_back(pp);
    }

    std::vector<PeriodicPoint> out;
    for (auto& c : candidates) {
        if (c.multiplicity == 1 && !c.point.is_infinity() && !c.point.is_exact())
            c.point = SpherePoint::affine(polish_on_orbit(f, c.point.value(), kappa, tol.eps_cluster));
        const int period = exact_period(f, c.point, kappa, tol);
        if (period < 0)
            throw Error(ErrorKind::OrbitMismatch, "root of the period-" + std::to_string(kappa) +
                                                      " equation does not return: " + c.point.str());
        if (period == kappa) out.push_back(std::move(c));
    }
    return out;
}

std::vector<Cycle> group_cycles(const RationalMap& f, const std::vector<PeriodicPoint>& points, int kappa,
                                const Tolerances& tol) {
    std::vector<Cycle> cycles;
    std::vector<bool> taken(points.size(), false);
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (taken[i]) continue;
        taken[i] = true;
        Cycle c;
        c.period = kappa;
        c.points.push_back(points[i].point);
        SpherePoint x = points[i].point;
        for (int step = 1; step < kappa; ++step) {
            const SpherePoint y = f(x);
            const int j = match_point(y, points, taken, tol);
            if (j < 0)
                throw Error(ErrorKind::OrbitMismatch, "image of " + x.str() + " is not among the period-" +
                                                          std::to_string(kappa) + " points");
            taken[static_cast<std::size_t>(j)] = true;
            c.points.push_back(points[static_cast<std::size_t>(j)].point);
            x = c.points.back();
        }
        const SpherePoint back = f(x);
        if (!(back.is_exact() && c.points[0].is_exact() ? same_point(back, c.points[0], 0)
                                                         : chordal_distance(back, c.points[0]) <= Real(tol.eps_cluster)))
            throw Error(ErrorKind::OrbitMismatch, "orbit of " + c.points[0].str() + " does not close");
        const auto first = std::min_element(c.points.begin(), c.points.end(), lex_less);
        std::rotate(c.points.begin(), first, c.points.end());
        compute_multiplier(f, c);
        cycles.push_back(std::move(c));
    }
    return cycles;
}

void compute_multiplier(const RationalMap& f, Cycle& c) {
    const std::size_t k = c.points.size();
    const bool exact = f.is_exact() &&
                       std::all_of(c.points.begin(), c.points.end(), [](const SpherePoint& p) { return p.is_exact(); });
    if (exact) {
        G rho(1);
        for (const auto& p : c.points) rho *= *f.local_derivative_exact(p.exact);
        c.multiplier_exact = rho;
        c.multiplier = rho.to_complex();
        return;
    }
    Complex rho(1);
    for (std::size_t j = 0; j < k; ++j) {
        const SpherePoint& x = c.points[j];
        const SpherePoint& y = c.points[(j + 1) % k];
        rho *= f.local_derivative(x, uses_infinity_chart(x), uses_infinity_chart(y));
    }
    c.multiplier = rho;
    c.multiplier_exact.reset();
}

CycleClass classify(const RationalMap& /*f*/, Cycle& c, const Tolerances& tol) {
    c.rotation_order = 0;
    c.annotation.clear();
    if (c.multiplier_exact) {
        const G& rho = *c.multiplier_exact;
        const Rational n2 = rho.norm();
        if (rho.is_zero()) c.cls = CycleClass::Superattracting;
        else if (n2 < 1) c.cls = CycleClass::Attracting;
        else if (n2 > 1) c.cls = CycleClass::Repelling;
        else {
            c.cls = CycleClass::IrrationallyIndifferent;
            c.annotation = "exact multiplier on the unit circle is not a root of unity";
            G power(1);
            for (int k = 1; k <= tol.k_root; ++k) {
                power *= rho;
                if (power == G(1)) {
                    c.cls = CycleClass::Parabolic;
                    c.rotation_order = k;
                    c.annotation.clear();
                    break;
                }
            }
        }
        return c.cls;
    }
    const Real m = abs(c.multiplier);
    if (m < Real(tol.eps_super)) c.cls = CycleClass::Superattracting;
    else if (m <= Real(1) - Real(tol.eps_ind)) c.cls = CycleClass::Attracting;
    else if (m >= Real(1) + Real(tol.eps_ind)) c.cls = CycleClass::Repelling;
    else {
        c.cls = CycleClass::IrrationallyIndifferent;
        c.annotation = "numerically indifferent, root-of-unity test inconclusive up to K_root = " +
                       std::to_string(tol.k_root);
        Complex power(1);
        for (int k = 1; k <= tol.k_root; ++k) {
            power *= c.multiplier;
            if (abs(power - Complex(1)) < Real(tol.eps_unity)) {
                c.cls = CycleClass::Parabolic;
                c.rotation_order = k;
                c.annotation.clear();
                break;
            }
        }
    }
    return c.cls;
}

std::vector<Cycle> enumerate_cycles(const RationalMap& f, int pmax, const Tolerances& tol) {
    std::vector<Cycle> all;
    for (int kappa = 1; kappa <= pmax; ++kappa) {
        auto pts = periodic_points(f, kappa, tol);
        for (auto& c : group_cycles(f, pts, kappa, tol)) {
            classify(f, c, tol);
            all.push_back(std::move(c));
        }
    }
    return all;
}

}  // namespace fatou
