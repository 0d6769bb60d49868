#include "fatoulab/residues.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fatoulab/linalg.hpp"
#include "fatoulab/quadrature.hpp"

namespace fatou {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

Complex ipow(const Complex& x, int k) {
    Complex r(1);
    for (int i = 0; i < k; ++i) r *= x;
    return r;
}

Complex mobius_apply(const Mobius<Complex>& m, const Complex& z) { return (m.a * z + m.b) / (m.c * z + m.d); }

// Numerator and denominator of q read in the coordinate w with z = inv(w):
// q = N(w)/D(w) dw^2.
std::pair<Poly<Complex>, Poly<Complex>> in_coordinate(const RationalQD& q, const Mobius<Complex>& inv) {
    const Poly<Complex> z0({inv.b, inv.a}), z1({inv.d, inv.c});
    const int dn = q.num().degree(), dd = q.den().degree();
    Poly<Complex> n = homogeneous_substitute(q.num(), dn, z0, z1) * Poly<Complex>::constant(inv.det() * inv.det());
    Poly<Complex> d = homogeneous_substitute(q.den(), dd, z0, z1);
    const int e = dd - dn - 4;
    if (e >= 0)
        n = n * fatou::pow(z1, static_cast<unsigned>(e));
    else
        d = d * fatou::pow(z1, static_cast<unsigned>(-e));
    return {n, d};
}

int numeric_valuation(const Poly<Complex>& p, double rel) {
    Real scale(0);
    for (const auto& c : p.coeffs()) scale = std::max(scale, abs(c));
    for (int k = 0; k <= p.degree(); ++k)
        if (abs(p[k]) > Real(rel) * scale) return k;
    return p.degree() + 1;
}

Poly<Complex> shift_down(const Poly<Complex>& p, int v) {
    std::vector<Complex> c;
    for (int k = v; k <= p.degree(); ++k) c.push_back(p[k]);
    return Poly<Complex>(std::move(c));
}

// Laurent series of a pole of order m given as s^{-m} T(s); returns T through order m.
TruncatedSeries<Complex> local_unit_ratio(const Poly<Complex>& n, const Poly<Complex>& d, int m, double rel) {
    const int vn = numeric_valuation(n, rel);
    const int vd = vn + m;
    const auto ns = TruncatedSeries<Complex>::from_poly(shift_down(n, vn), m);
    const auto ds = TruncatedSeries<Complex>::from_poly(shift_down(d, vd), m);
    return ns * series_inverse_unit(ds);
}

// Series of h(x + s) - h(x) for a chart h with h(x) = 0.
TruncatedSeries<Complex> chart_series_at(const Mobius<Complex>& h, const Complex& x, int T) {
    const Poly<Complex> num({h.a * x + h.b, h.a}), den({h.c * x + h.d, h.c});
    auto s = TruncatedSeries<Complex>::from_poly(num, T) * series_inverse_unit(TruncatedSeries<Complex>::from_poly(den, T));
    s.coeff(0) = Complex(0);
    return s;
}

std::vector<Complex> trimmed(std::vector<Complex> c, double eps) {
    double scale = 0;
    for (const auto& x : c) scale = std::max(scale, magnitude(x));
    while (!c.empty() && magnitude(c.back()) <= eps * std::max(scale, 1.0)) c.pop_back();
    return c;
}

double binomial(int n, int k) {
    double r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// Polar parts along the cycle, transported from points[0] by the local inverse branches.
std::vector<std::vector<Complex>> transport_polar(const RationalMap& f, const Cycle& c, const std::vector<Complex>& polar) {
    std::vector<std::vector<Complex>> out{polar};
    const int T = static_cast<int>(polar.size()) + 2;
    for (std::size_t i = 0; i + 1 < c.points.size(); ++i) {
        const auto g = step_germ(f, c.points[i], c.points[i + 1], T);
        out.push_back(pullback_polar(series_revert(g), out.back()));
    }
    return out;
}

Complex coefficient_from(const Cycle& c, const DivergenceBasis& basis, const std::vector<Complex>& coords) {
    if (coords.empty()) return Complex(0);
    if (c.cls == CycleClass::Parabolic) return coords[static_cast<std::size_t>(basis.qf_index)];
    return coords.front();
}

double polar_tolerance(const Tolerances& tol) { return std::max(tol.eps_series, 1e-40); }

}  // namespace

std::vector<Complex> polar_part(const RationalQD& q, const SpherePoint& x, const Tolerances& tol) {
    const int ord = q.order_at(x, tol);
    if (q.is_zero() || ord >= -1) return {};
    const int m = -ord;
    const auto [n, d] = in_coordinate(q, chart_at(x).inverse());
    const auto t = local_unit_ratio(n, d, m, tol.eps_super);
    std::vector<Complex> c(static_cast<std::size_t>(m - 1));
    for (int j = 0; j <= m - 2; ++j) c[static_cast<std::size_t>(j)] = t[m - j - 2];
    return c;
}

double residue_closed(const Cycle& c, const Complex& coefficient) {
    const double mod = magnitude(coefficient);
    if (mod == 0) return 0;
    if (c.cls == CycleClass::Parabolic) {
        if (!c.parabolic) throw Error(ErrorKind::MissingParabolicData, "parabolic cycle without invariants");
        return mod * static_cast<double>(c.parabolic->beta.real());
    }
    if (c.cls == CycleClass::Superattracting)
        throw Error(ErrorKind::UnsupportedDivergence, "superattracting cycles carry no invariant divergence");
    return mod * static_cast<double>(log(abs(c.multiplier)));
}

double residue_closed(const Cycle& c, const DivergenceBasis& basis, const std::vector<Complex>& polar, double tol) {
    if (trimmed(polar, 0).empty()) return 0;
    const auto coords = decompose(basis, polar, tol);
    return residue_closed(c, coefficient_from(c, basis, coords));
}

Completion complete_divergence(const RationalMap& f, const Cycle& c, const std::vector<Complex>& polar_in,
                               const Tolerances& tol, const std::vector<SpherePoint>& avoid_in) {
    Completion out;
    const std::vector<Complex> polar = trimmed(polar_in, 0);
    out.polar = polar.empty() ? std::vector<std::vector<Complex>>(c.points.size())
                              : transport_polar(f, c, polar);

    // z-coordinate data: finite polar terms d_j / (z - x)^{j+2}, polynomial part, and
    // targets for the z^-1, z^-2, z^-3 coefficients at infinity.
    struct Finite {
        Complex x;
        std::vector<Complex> d;
    };
    std::vector<Finite> finite;
    std::vector<Complex> poly_part;
    Complex target[3] = {Complex(0), Complex(0), Complex(0)};
    for (std::size_t i = 0; i < c.points.size(); ++i) {
        const auto& p = out.polar[i];
        if (p.empty()) continue;
        const SpherePoint& x = c.points[i];
        if (x.is_infinity()) {
            for (std::size_t j = 2; j < p.size(); ++j) {
                poly_part.resize(j - 1, Complex(0));
                poly_part[j - 2] = p[j];
            }
            target[0] = p.size() > 1 ? p[1] : Complex(0);
            target[1] = p[0];
            continue;
        }
        const Complex xv = x.value();
        const auto g = chart_series_at(chart_at(x), xv, static_cast<int>(p.size()) + 2);
        Finite fin{xv, pullback_polar(g, p)};
        finite.push_back(std::move(fin));
    }

    std::vector<SpherePoint> avoid = avoid_in;
    for (const auto& p : c.points) avoid.push_back(p);
    for (const auto& v : critical_values(f, tol)) avoid.push_back(v);
    std::vector<Complex> aux;
    for (int shift = 0;; ++shift) {
        const Real t(3 + shift);
        aux = {Complex(t, Real(0)), Complex(t, Real(1)), Complex(t, Real(-1))};
        bool ok = true;
        for (const auto& a : aux)
            for (const auto& v : avoid)
                if (!v.is_infinity() && abs(v.value() - a) < Real(0.5)) ok = false;
        if (ok) break;
    }

    // Known z^{-(l+1)} coefficients at infinity from the finite polar terms.
    Complex known[3] = {Complex(0), Complex(0), Complex(0)};
    for (const auto& fin : finite)
        for (std::size_t j = 0; j < fin.d.size(); ++j) {
            const int m = static_cast<int>(j) + 2;
            for (int k = m; k <= 3; ++k)
                known[k - 1] += fin.d[j] * Complex(Real(binomial(k - 1, m - 1))) * ipow(fin.x, k - m);
        }
    Matrix<Complex> vm(3, 3);
    std::vector<Complex> rhs(3);
    for (int l = 0; l < 3; ++l) {
        for (int k = 0; k < 3; ++k) vm(l, k) = ipow(aux[static_cast<std::size_t>(k)], l);
        rhs[static_cast<std::size_t>(l)] = target[l] - known[l];
    }
    std::vector<Complex> a;
    if (!solve(vm, rhs, a)) throw Error(ErrorKind::DegeneratePoints, "auxiliary points are not distinct");

    Poly<Complex> den = Poly<Complex>::constant(Complex(1));
    for (const auto& fin : finite)
        den = den * fatou::pow(Poly<Complex>::linear_factor(fin.x), static_cast<unsigned>(fin.d.size() + 1));
    for (const auto& p : aux) den = den * Poly<Complex>::linear_factor(p);

    auto cofactor = [&](const Complex& x, int m) {
        Poly<Complex> r = den;
        for (int k = 0; k < m; ++k) r = divmod(r, Poly<Complex>::linear_factor(x)).first;
        return r;
    };
    Poly<Complex> num = Poly<Complex>(poly_part) * den;
    for (const auto& fin : finite)
        for (std::size_t j = 0; j < fin.d.size(); ++j)
            num = num + cofactor(fin.x, static_cast<int>(j) + 2) * Poly<Complex>::constant(fin.d[j]);
    for (std::size_t k = 0; k < aux.size(); ++k)
        num = num + cofactor(aux[k], 1) * Poly<Complex>::constant(a[k]);

    // Regular at infinity by construction; higher coefficients are rounding noise.
    std::vector<Complex> nc = num.coeffs();
    nc.resize(static_cast<std::size_t>(std::max(0, den.degree() - 3)), Complex(0));
    out.q = RationalQD::floating(Poly<Complex>(std::move(nc)), den, tol);
    for (const auto& p : aux) out.auxiliary.push_back(SpherePoint::affine(p));
    return out;
}

Cycle cycle_through(const RationalMap& f, const SpherePoint& x, const Tolerances& tol, int max_period) {
    // Period found in float arithmetic; exact orbits grow in height too fast to search with.
    const SpherePoint xf = x.is_infinity() ? SpherePoint::infinity() : SpherePoint::affine(x.value());
    SpherePoint y = xf;
    int period = 0;
    for (int k = 1; k <= max_period && period == 0; ++k) {
        y = f(SpherePoint{y.z0, y.z1, std::nullopt, false});
        if (same_point(y, xf, tol.eps_cluster)) period = k;
    }
    if (period == 0) throw Error(ErrorKind::UnsupportedDivergence, "point " + x.str() + " is not periodic");
    Cycle c;
    c.points.push_back(x);
    for (int k = 1; k < period; ++k) c.points.push_back(f(c.points.back()));
    if (x.is_exact() && f.is_exact() && !same_point(f(c.points.back()), x, 0))
        throw Error(ErrorKind::UnsupportedDivergence, "point " + x.str() + " is not periodic");
    c.period = static_cast<int>(c.points.size());
    compute_multiplier(f, c);
    classify(f, c, tol);
    if (c.cls == CycleClass::Parabolic) parabolic_invariants(f, c, tol);
    c.gamma = gamma_of_cycle(c);
    return c;
}

// ---------------------------------------------------------------- flux

namespace {

struct ChartView {
    Mobius<Complex> h, inv;
};

ChartView chart_view(const SpherePoint& x) {
    ChartView v;
    v.h = chart_at(x);
    v.inv = v.h.inverse();
    return v;
}

// q read in a chart, as a density |q| against area in the chart coordinate.
Complex q_in_chart(const RationalQD& q, const ChartView& v, const Complex& s) {
    const Complex den = v.inv.c * s + v.inv.d;
    const Complex dz = v.inv.det() / (den * den);
    return q(mobius_apply(v.inv, s)) * dz * dz;
}

struct StepMap {
    Poly<Complex> p, q, pd, qd;
    ChartView from, to;

    // F(w) and F'(w) with F = h_to o f o h_from^{-1}.
    std::pair<Complex, Complex> operator()(const Complex& w) const {
        const Complex den = from.inv.c * w + from.inv.d;
        const Complex z = (from.inv.a * w + from.inv.b) / den;
        const Complex dz = from.inv.det() / (den * den);
        const Complex P = p(z), Q = q(z), Pd = pd(z), Qd = qd(z);
        const Complex top = to.h.a * P + to.h.b * Q, bot = to.h.c * P + to.h.d * Q;
        const Complex der = to.h.det() * (Pd * Q - P * Qd) / (bot * bot) * dz;
        return {top / bot, der};
    }
};

Cd cd(const Complex& z) { return to_cd(z); }
Complex mp(const Cd& z) { return {Real(z.real()), Real(z.imag())}; }

}  // namespace

ResidueReport residue_flux(const RationalMap& f_in, Cycle c, const RationalQD& q, const FluxOptions& opts,
                           const Tolerances& tol) {
    const RationalMap f = f_in.at_current_precision();
    ResidueReport rep;
    rep.polar = polar_part(q, c.points.front(), tol);
    const DivergenceBasis basis = invariant_divergence_basis(f, c, tol);
    const auto coords = trimmed(rep.polar, 0).empty() ? std::vector<Complex>{}
                                                       : decompose(basis, rep.polar, polar_tolerance(tol));
    rep.coefficient = coefficient_from(c, basis, coords);
    rep.closed_form = residue_closed(c, rep.coefficient);

    const std::size_t k = c.points.size();
    std::vector<ChartView> views;
    for (const auto& p : c.points) views.push_back(chart_view(p));
    std::vector<StepMap> steps;
    for (std::size_t i = 0; i < k; ++i)
        steps.push_back({f.num(), f.den(), f.num().derivative(), f.den().derivative(), views[i], views[(i + 1) % k]});

    // Obstacles per target chart: other cycle points, other poles of q, critical points (source chart).
    std::vector<std::vector<Cd>> obstacles(k), critical(k);
    const auto poles = q.poles(tol);
    const auto crit = critical_points(f, tol);
    auto in_chart = [](const ChartView& v, const SpherePoint& y, Cd& out) {
        const Complex top = v.h.a * y.z0 + v.h.b * y.z1, bot = v.h.c * y.z0 + v.h.d * y.z1;
        if (abs(bot) <= Real(1e-300) * abs(top)) return false;
        out = cd(top / bot);
        return true;
    };
    for (std::size_t i = 0; i < k; ++i) {
        Cd s;
        for (std::size_t j = 0; j < k; ++j)
            if (j != i && in_chart(views[i], c.points[j], s)) obstacles[i].push_back(s);
        for (const auto& p : poles)
            if (!same_point(p.point, c.points[i], tol.eps_cluster) && in_chart(views[i], p.point, s))
                obstacles[i].push_back(s);
        for (const auto& cp : crit)
            if (in_chart(views[i], cp.point, s)) critical[i].push_back(s);
    }

    Quadrature quad(opts.budget);
    for (int lvl = 0; lvl <= opts.levels; ++lvl) {
        const double r = opts.r0 * std::ldexp(1.0, -lvl);
        double total = 0;
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t j = (i + 1) % k;
            const StepMap& F = steps[i];
            const ChartView& target = views[j];
            for (const Cd& cp : critical[i])
                if (std::abs(cp) <= 1.25 * r)
                    throw Error(ErrorKind::RadiusTooLarge, "critical point inside the disk about " + c.points[i].str());
            // Image circle in polar form about 0: angle theta(psi), radius t(psi).
            auto image = [&](double psi, double& theta, double& t, double& dtheta) {
                const Complex w(Real(r * std::cos(psi)), Real(r * std::sin(psi)));
                const auto [Fw, dF] = F(w);
                const Cd fw = cd(Fw);
                theta = std::arg(fw);
                t = std::abs(fw);
                dtheta = static_cast<double>((w * dF / Fw).real());
            };
            double tmax = r;
            for (int s = 0; s < 128; ++s) {
                double th, t, dth;
                image(kTwoPi * s / 128, th, t, dth);
                if (!(dth > 0) || !std::isfinite(t))
                    throw Error(ErrorKind::RadiusTooLarge,
                                "image of the circle of radius " + std::to_string(r) + " is not star-shaped");
                tmax = std::max(tmax, t);
            }
            const double reach = 1.25 * tmax;
            for (const Cd& o : obstacles[j])
                if (std::abs(o) <= reach)
                    throw Error(ErrorKind::RadiusTooLarge, "disk about " + c.points[j].str() + " meets another pole or cycle point");

            const double scale =
                static_cast<double>(abs(q_in_chart(q, target, Complex(Real(r), Real(0))))) * r * r + 1e-300;
            auto radial = [&](double theta, double t) {
                if (t == r) return 0.0;
                const double lo = std::min(r, t), hi = std::max(r, t);
                const Cd dir = std::polar(1.0, theta);
                auto g = [&](double s) { return static_cast<double>(abs(q_in_chart(q, target, mp(s * dir)))) * s; };
                const double v = quad.integrate(g, lo, hi, opts.quad_tol * scale * (hi - lo) / r + 1e-300);
                return t > r ? v : -v;
            };
            auto outer = [&](double psi) {
                double th, t, dth;
                image(psi, th, t, dth);
                return dth * radial(th, t);
            };
            total += quad.integrate(outer, 0.0, kTwoPi, opts.quad_tol * scale * kTwoPi);
        }
        rep.radii.push_back(r);
        rep.flux.push_back(total / kTwoPi);
    }

    const auto& v = rep.flux;
    const std::size_t n = v.size();
    rep.limit = v.back();
    rep.extrapolation = "last value";
    if (n >= 3) {
        const double d1 = v[n - 2] - v[n - 3], d2 = v[n - 1] - v[n - 2];
        if (std::abs(d2) <= 1e-13 * std::max(1.0, std::abs(v.back()))) {
            rep.extrapolation = "converged";
        } else if (d1 / d2 > 1.05) {
            rep.exponent = std::clamp(std::log2(d1 / d2), 0.5, 4.0);
            rep.limit = v.back() + d2 / (std::exp2(rep.exponent) - 1);
            rep.extrapolation = "Richardson, fitted exponent";
        } else {
            rep.exponent = 1;
            rep.limit = v.back() + d2;
            rep.extrapolation = "Richardson, exponent 1 (sequence not monotone)";
        }
    }
    rep.gap = std::abs(rep.closed_form - rep.limit);
    rep.cycle = std::move(c);
    return rep;
}

// ---------------------------------------------------------------- divergent cycles

std::vector<DivergentCycle> divergent_cycles(const RationalMap& f, const RationalQD& q, const Tolerances& tol) {
    std::vector<DivergentCycle> out;
    if (q.is_zero()) return out;
    std::vector<SpherePoint> multiple;
    for (const auto& p : q.poles(tol))
        if (p.order >= 2) multiple.push_back(p.point);
    std::vector<bool> done(multiple.size(), false);
    for (std::size_t i = 0; i < multiple.size(); ++i) {
        if (done[i]) continue;
        Cycle c = cycle_through(f, multiple[i], tol);
        // Snap cycle points to the poles of q so the polar parts are read at the same points.
        for (auto& p : c.points) {
            bool found = false;
            for (std::size_t j = 0; j < multiple.size(); ++j)
                if (same_point(p, multiple[j], tol.eps_cluster)) {
                    p = multiple[j];
                    done[j] = true;
                    found = true;
                }
            if (!found)
                throw Error(ErrorKind::UnsupportedDivergence,
                            "cycle point " + p.str() + " carries no polar part while " + multiple[i].str() + " does");
        }
        DivergentCycle dc;
        dc.polar = polar_part(q, c.points.front(), tol);
        const DivergenceBasis basis = invariant_divergence_basis(f, c, tol);
        const auto coords = decompose(basis, dc.polar, polar_tolerance(tol));
        const auto expected = transport_polar(f, c, dc.polar);
        for (std::size_t j = 1; j < c.points.size(); ++j) {
            const auto got = polar_part(q, c.points[j], tol);
            const auto& want = expected[j];
            double scale = 1, diff = 0;
            for (std::size_t t = 0; t < std::max(got.size(), want.size()); ++t) {
                const Complex a = t < got.size() ? got[t] : Complex(0), b = t < want.size() ? want[t] : Complex(0);
                scale = std::max(scale, magnitude(b));
                diff = std::max(diff, magnitude(a - b));
            }
            if (diff > 1e-12 * scale)
                throw Error(ErrorKind::UnsupportedDivergence,
                            "polar part at " + c.points[j].str() + " is not the transport of the one at " +
                                c.points.front().str());
        }
        dc.coefficient = coefficient_from(c, basis, coords);
        dc.residue = residue_closed(c, dc.coefficient);
        dc.cycle = std::move(c);
        out.push_back(std::move(dc));
    }
    return out;
}

// ---------------------------------------------------------------- integrals

namespace {

std::vector<SpherePoint> singular_points(const RationalMap& f, const RationalQD& q, const Tolerances& tol) {
    std::vector<SpherePoint> s;
    for (const auto& p : q.poles(tol)) {
        s.push_back(p.point);
        s.push_back(f(p.point));
    }
    for (const auto& v : critical_values(f, tol)) s.push_back(v);
    return s;
}

IntegralValue from(const QuadResult& r) { return {r.value, r.error, r.evaluations}; }

}  // namespace

IntegralValue mass_decrease(const RationalMap& f_in, const RationalQD& q, double tol, long budget) {
    const Tolerances t = Tolerances::for_current_precision();
    if (q.is_zero()) return {};
    const RationalMap f = f_in.at_current_precision();
    divergent_cycles(f, q, t);
    const FibreSampler fs(f, q);
    SphereDensity dens{[&](Cd z) { return fs.at(z).deficit; }, [&](Cd u) { return fs.at_inverse(u).deficit; }};
    IntegralValue out = from(integrate_sphere(dens, singular_points(f, q, t), tol, budget));
    if (out.value < -tol)
        throw Error(ErrorKind::VerificationFailed, "mass decrease " + std::to_string(out.value) + " is negative");
    if (out.value < 0) out.value = 0;
    return out;
}

IntegralValue nabla_norm(const RationalMap& f_in, const RationalQD& q, double tol, long budget) {
    const Tolerances t = Tolerances::for_current_precision();
    if (q.is_zero()) return {};
    const RationalMap f = f_in.at_current_precision();
    const FibreSampler fs(f, q);

    // Near a multiple pole both terms are large and nearly equal; there the
    // difference is formed at working precision.
    struct Near {
        bool u_chart;
        Cd centre;
    };
    std::vector<Near> near;
    for (const auto& p : q.poles(t))
        if (p.order >= 2) {
            const bool u = p.point.is_infinity() || uses_infinity_chart(p.point);
            near.push_back({u, p.point.is_infinity() ? Cd{} : (u ? 1.0 / p.point.value_cd() : p.point.value_cd())});
        }
    constexpr double kNear = 0.15;
    auto close = [&](Cd s, bool u) {
        for (const auto& n : near) {
            Cd x = s;
            if (n.u_chart != u) {
                if (std::abs(s) < 1e-300) continue;
                x = 1.0 / s;
            }
            if (std::abs(x - n.centre) < kNear) return true;
        }
        return false;
    };
    auto precise = [&](const Complex& z) { return q(z) - fibre_sum(f, q, z, t); };

    SphereDensity dens{
        [&](Cd z) {
            if (close(z, false)) return static_cast<double>(abs(precise(mp(z))));
            return std::abs(q.eval_cd(z) - fs.at(z).sum);
        },
        [&](Cd u) {
            const Cd u2 = u * u;
            if (close(u, true)) {
                const Complex um = mp(u), um2 = um * um;
                return static_cast<double>(abs(precise(Complex(1) / um) / (um2 * um2)));
            }
            return std::abs(q.eval_cd(1.0 / u) / (u2 * u2) - fs.at_inverse(u).sum);
        }};
    return from(integrate_sphere(dens, singular_points(f, q, t), tol, budget));
}

BalanceReport balance_check(const RationalMap& f, const RationalQD& q, double tol, const Tolerances& t, long budget) {
    BalanceReport rep;
    rep.cycles = divergent_cycles(f, q, t);
    for (const auto& c : rep.cycles) rep.res_total += c.residue;
    rep.dec = mass_decrease(f, q, tol, budget);
    rep.nabla = nabla_norm(f, q, tol, budget);
    rep.slack = rep.nabla.value - std::abs(rep.dec.value - kTwoPi * rep.res_total);
    return rep;
}

}  // namespace fatou
