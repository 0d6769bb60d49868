#include "fatoulab/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fatoulab/qd.hpp"

namespace fatou {

namespace {

constexpr std::size_t kMaxPieces = 400;
constexpr double kRingRelTol = 1e-7;

// 1 on [0, 1/2], 0 on [1, inf), smooth in between.
double bump(double t) {
    if (t <= 0.5) return 1.0;
    if (t >= 1.0) return 0.0;
    const double x = 2.0 * t - 1.0;
    const double a = std::exp(-1.0 / x), b = std::exp(-1.0 / (1.0 - x));
    return b / (a + b);
}

struct Bump {
    bool u_chart = false;
    Cd centre;
    double radius = 0.5;
};

// Chart coordinate of the point given as z (or as u when from_u).
bool to_chart(const Cd& s, bool from_u, bool want_u, Cd& out) {
    if (from_u == want_u) {
        out = s;
        return true;
    }
    if (s == Cd{}) return false;
    out = 1.0 / s;
    return true;
}

}  // namespace

Quadrature::Piece Quadrature::rule(const Integrand& f, double a, double b) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    using GL = boost::math::quadrature::gauss<double, 7>;
    const auto& xk = GK::abscissa();
    const auto& wk = GK::weights();
    const auto& wg = GL::weights();
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double kron = 0, gauss = 0, mass = 0, carried = 0;
    // Kronrod nodes at even positions of the abscissa list are the Gauss nodes.
    for (std::size_t i = 0; i < xk.size(); ++i) {
        const Sample l = f(c - h * xk[i]);
        const Sample r = i == 0 ? Sample{0, 0} : f(c + h * xk[i]);
        const double fx = l.first + r.first;
        kron += wk[i] * fx;
        mass += wk[i] * (std::abs(l.first) + std::abs(r.first));
        carried += wk[i] * (l.second + r.second);
        if (i % 2 == 0) gauss += wg[i / 2] * fx;
    }
    used_ += 15;
    if (used_ > budget_)
        throw Error(ErrorKind::QuadratureBudgetExceeded, "quadrature used more than " + std::to_string(budget_) +
                                                             " evaluations");
    const double w = std::abs(h);
    // Below floor the Gauss-Kronrod difference is rounding in the node values.
    return Piece{a, b, kron * h, std::abs(kron - gauss) * w, carried * w, 1e-14 * w * mass};
}

double Quadrature::adapt(const Integrand& f, double a, double b, double abs_tol, double rel_tol, double* error) {
    auto worse = [](const Piece& x, const Piece& y) { return x.error < y.error; };
    std::vector<Piece> heap{rule(f, a, b)};
    double value = 0, err = 0, carried = 0;
    double open_err = heap.front().error, open_value = heap.front().value;
    auto done = [&] { return err + open_err <= std::max(abs_tol, rel_tol * std::abs(value + open_value)); };
    while (!heap.empty() && !done()) {
        std::pop_heap(heap.begin(), heap.end(), worse);
        const Piece p = heap.back();
        heap.pop_back();
        open_err -= p.error;
        open_value -= p.value;
        const double c = 0.5 * (p.a + p.b);
        const bool tiny = !(std::abs(p.b - p.a) > 1e-15 * (1 + std::abs(c)));
        if (p.error <= p.floor || tiny || heap.size() >= kMaxPieces) {
            value += p.value;
            err += p.error;
            carried += p.carried;
            continue;
        }
        for (const Piece& q : {rule(f, p.a, c), rule(f, c, p.b)}) {
            open_err += q.error;
            open_value += q.value;
            heap.push_back(q);
            std::push_heap(heap.begin(), heap.end(), worse);
        }
    }
    for (const auto& p : heap) {
        value += p.value;
        err += p.error;
        carried += p.carried;
    }
    if (error) *error = err + carried;
    return value;
}

double Quadrature::integrate(const std::function<double(double)>& f, double a, double b, double abs_tol,
                             double* error, double rel_tol) {
    return adapt([&](double x) { return Sample{f(x), 0.0}; }, a, b, abs_tol, rel_tol, error);
}

double Quadrature::disk(const std::function<double(Cd)>& g, Cd centre, double radius, double abs_tol, double* error) {
    constexpr double two_pi = 2 * std::numbers::pi;
    // A ring at radius r enters with weight r, so the inner errors add up to about abs_tol / 2.
    const double inner_scale = abs_tol / std::max(2 * radius, 1e-300);
    auto ring = [&](double r) {
        double e = 0;
        const double v = integrate([&](double t) { return g(centre + std::polar(r, t)); }, 0.0, two_pi,
                                   inner_scale / std::max(r, 1e-300), &e, kRingRelTol);
        return Sample{r * v, r * e};
    };
    return adapt(ring, 0.0, radius, 0.5 * abs_tol, 0, error);
}

QuadResult integrate_sphere(const SphereDensity& density, const std::vector<SpherePoint>& singular, double abs_tol,
                            long budget) {
    std::vector<Bump> bumps;
    for (const auto& p : singular) {
        Bump b;
        b.u_chart = p.is_infinity() || uses_infinity_chart(p);
        b.centre = p.is_infinity() ? Cd{} : (b.u_chart ? 1.0 / p.value_cd() : p.value_cd());
        bool dup = false;
        for (const auto& o : bumps)
            if (o.u_chart == b.u_chart && std::abs(o.centre - b.centre) < 1e-12) dup = true;
        if (!dup) bumps.push_back(b);
    }
    for (auto& b : bumps) {
        double nearest = 1.25;
        for (const auto& o : bumps) {
            if (&o == &b) continue;
            Cd s;
            if (!to_chart(o.centre, o.u_chart, b.u_chart, s)) continue;
            nearest = std::min(nearest, std::abs(s - b.centre));
        }
        b.radius = 0.4 * nearest;
    }
    auto weight = [&](const Cd& s, bool from_u) {
        double acc = 0;
        for (const auto& b : bumps) {
            Cd t;
            if (!to_chart(s, from_u, b.u_chart, t)) continue;
            acc += bump(std::abs(t - b.centre) / b.radius);
        }
        return acc;
    };

    Quadrature quad(budget);
    const double piece_tol = abs_tol / static_cast<double>(bumps.size() + 2);
    QuadResult res;
    for (const auto& b : bumps) {
        const auto& dens = b.u_chart ? density.u_chart : density.z_chart;
        auto g = [&](Cd s) {
            const double w = bump(std::abs(s - b.centre) / b.radius);
            return w == 0 ? 0.0 : w * dens(s);
        };
        double e = 0;
        res.value += quad.disk(g, b.centre, b.radius, piece_tol, &e);
        res.error += e;
    }
    for (bool u : {false, true}) {
        const auto& dens = u ? density.u_chart : density.z_chart;
        auto g = [&](Cd s) {
            const double w = 1.0 - weight(s, u);
            return w <= 0 ? 0.0 : w * dens(s);
        };
        double e = 0;
        res.value += quad.disk(g, Cd{}, 1.0, piece_tol, &e);
        res.error += e;
    }
    res.evaluations = quad.evaluations();
    return res;
}

QDNorm qd_norm(const RationalQD& q, double tol, long budget) {
    QDNorm out;
    const Tolerances t = Tolerances::for_current_precision();
    if (q.is_zero()) return out;
    std::vector<SpherePoint> poles;
    for (const auto& p : q.poles(t)) {
        if (p.order >= 2) {
            out.infinite = true;
            return out;
        }
        poles.push_back(p.point);
    }
    // R(1/u) u^-4 as a ratio of polynomials in u.
    const int dn = q.num().degree(), dd = q.den().degree();
    Poly<Complex> nu = reversed(q.num(), dn), du = reversed(q.den(), dd);
    const int shift = dd - dn - 4;
    if (shift >= 0)
        nu = nu * Poly<Complex>::monomial(Complex(1), shift);
    else
        du = du * Poly<Complex>::monomial(Complex(1), -shift);
    const RationalQD in_u = RationalQD::from_reduced(nu, du);

    SphereDensity dens{[&](Cd z) { return std::abs(q.eval_cd(z)); }, [&](Cd u) { return std::abs(in_u.eval_cd(u)); }};
    const QuadResult r = integrate_sphere(dens, poles, tol, budget);
    out.value = r.value;
    out.error = r.error;
    out.evaluations = r.evaluations;
    return out;
}

}  // namespace fatou
