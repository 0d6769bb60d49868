#include "fatoulab/qd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fatou {

namespace {

constexpr int kNoPole = std::numeric_limits<int>::max();

const BigInt& root_rationalize_bound() {
    static const BigInt bound("1000000000000");
    return bound;
}

// Dyadic grid point nearest to z.
G snap_to_grid(const Complex& z) {
    static constexpr long kGrid = 4096;
    auto snap = [](const Real& x) { return Rational(lround(static_cast<double>(x) * kGrid), kGrid); };
    return G(snap(z.real()), snap(z.imag()));
}

int ceil_div(int a, int m) { return a >= 0 ? (a + m - 1) / m : -((-a) / m); }

template <class S>
Poly<S> deflate(Poly<S> p, const S& root, int times) {
    for (int k = 0; k < times; ++k) p = divmod(p, Poly<S>::linear_factor(root)).first;
    return p;
}

struct RootMult {
    SpherePoint point;
    int mult = 1;
};

// The solver spreads a multiple root into a small cluster; the mean of the
// cluster is a symmetric function of it and stays accurate.
std::vector<RootMult> roots_with_multiplicity(const Poly<Complex>& p, const Tolerances& tol) {
    std::vector<RootMult> out;
    if (p.degree() < 1) return out;
    const RootSet rs = poly_roots(p, tol);
    if (!rs.converged) throw Error(ErrorKind::NonConvergence, "root finder did not converge");
    const std::vector<Complex> z = flatten(rs);
    std::vector<bool> used(z.size(), false);
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (used[i]) continue;
        std::vector<std::size_t> group{i};
        used[i] = true;
        for (std::size_t g = 0; g < group.size(); ++g) {
            const Complex& a = z[group[g]];
            const Real radius = Real(1e-8) * std::max<Real>(Real(1), abs(a));
            for (std::size_t j = 0; j < z.size(); ++j)
                if (!used[j] && abs(z[j] - a) <= radius) {
                    used[j] = true;
                    group.push_back(j);
                }
        }
        Complex c{};
        for (auto k : group) c += z[k];
        c /= Real(static_cast<long>(group.size()));
        if (group.size() > 1) {
            // A root of multiplicity m is a simple root of the (m-1)-th derivative.
            Poly<Complex> d = p;
            for (std::size_t k = 1; k < group.size(); ++k) d = d.derivative();
            const Poly<Complex> dd = d.derivative();
            const Real stop = ldexp(Real(1), -static_cast<int>(tol.bits) + 8);
            for (int it = 0; it < 60; ++it) {
                const Complex den = dd(c);
                if (abs(den) == 0) break;
                const Complex step = d(c) / den;
                c -= step;
                if (abs(step) <= stop * std::max<Real>(Real(1), abs(c))) break;
            }
        }
        out.push_back({SpherePoint::affine(c), static_cast<int>(group.size())});
    }
    return out;
}

void add_squarefree_roots(const Poly<G>& a, int mult, const Tolerances& tol, std::vector<RootMult>& out) {
    if (a.degree() < 1) return;
    const RootSet rs = poly_roots(a, tol);
    if (!rs.converged) throw Error(ErrorKind::NonConvergence, "root finder did not converge");
    for (const Complex& z : flatten(rs)) {
        SpherePoint pt = SpherePoint::affine(z);
        if (auto cand = rationalize(z, root_rationalize_bound()); cand && a(*cand).is_zero())
            pt = SpherePoint::from_exact(*cand);
        out.push_back({pt, mult});
    }
}

// Yun's squarefree decomposition, then roots of each factor.
std::vector<RootMult> roots_with_multiplicity(const Poly<G>& p, const Tolerances& tol) {
    std::vector<RootMult> out;
    if (p.degree() < 1) return out;
    const Poly<G> dp = p.derivative();
    const Poly<G> a0 = gcd(p, dp);
    Poly<G> b = divmod(p, a0).first;
    Poly<G> c = divmod(dp, a0).first;
    Poly<G> d = c - b.derivative();
    for (int i = 1; b.degree() > 0; ++i) {
        const Poly<G> a = gcd(b, d);
        add_squarefree_roots(a, i, tol, out);
        b = divmod(b, a).first;
        c = divmod(d, a).first;
        d = c - b.derivative();
    }
    return out;
}

// Numerator and denominator of (A/B)(P/Q) (P'Q - PQ')^2 / Q^4.
template <class S>
std::pair<Poly<S>, Poly<S>> pullback_polys(const Poly<S>& p, const Poly<S>& q, const Poly<S>& a,
                                           const Poly<S>& b) {
    const int da = a.degree(), db = b.degree();
    const Poly<S> at = homogeneous_substitute(a, da, p, q);
    const Poly<S> bt = homogeneous_substitute(b, db, p, q);
    const Poly<S> w = p.derivative() * q - p * q.derivative();
    Poly<S> num = at * w * w, den = bt;
    const int e = db - da - 4;
    if (e >= 0)
        num = num * fatou::pow(q, static_cast<unsigned>(e));
    else
        den = den * fatou::pow(q, static_cast<unsigned>(-e));
    return {num, den};
}

Complex pow4(const Complex& x) {
    const Complex x2 = x * x;
    return x2 * x2;
}

// Sum of R(w) Q(w)^4 / W(w)^2 over the roots of P - z Q.
Complex fibre_sum_impl(const Poly<Complex>& p, const Poly<Complex>& q, const Poly<Complex>& w,
                       const RationalQD& qd, const Complex& z, int degree, const Tolerances& tol,
                       Real* abs_sum = nullptr) {
    const Poly<Complex> fz = p - q * z;
    if (fz.degree() < degree)
        throw Error(ErrorKind::IndeterminatePoint, "fibre has a point at infinity");
    const RootSet rs = poly_roots(fz, tol);
    if (!rs.converged) throw Error(ErrorKind::NonConvergence, "fibre: root finder did not converge");
    Complex acc{};
    Real abs_acc(0);
    for (const auto& r : rs.roots) {
        if (r.multiplicity > 1) throw Error(ErrorKind::IndeterminatePoint, "fibre over a critical value");
        const Complex wv = w(r.value);
        const Complex term = qd(r.value) * pow4(q(r.value)) / (wv * wv);
        acc += term;
        abs_acc += abs(term);
    }
    if (abs_sum) *abs_sum = abs_acc;
    return acc;
}

// Trace of A Q^4 / (B W^2) over the roots of P - z Q, computed in Q(i)[w]/(P - z Q).
class ExactTrace {
public:
    ExactTrace(const RationalMap& f, const RationalQD& q) : p_(f.exact_num()), q_(f.exact_den()), d_(f.degree()) {
        const Poly<G> w = p_.derivative() * q_ - p_ * q_.derivative();
        hn_ = q.exact_num() * fatou::pow(q_, 4u);
        hd_ = q.exact_den() * w * w;
    }

    G operator()(const G& z) const {
        Poly<G> fz = p_ - q_ * z;
        if (fz.degree() != d_) throw Error(ErrorKind::IndeterminatePoint, "fibre has a point at infinity");
        fz = monic(fz);
        const Poly<G> a = divmod(hn_, fz).second;
        const Poly<G> b = divmod(hd_, fz).second;
        const Poly<G> h = divmod(a * inverse_mod(b, fz), fz).second;
        const std::vector<G> ps = power_sums(fz);
        G tr(0);
        for (int j = 0; j <= h.degree(); ++j) tr += h[j] * ps[static_cast<std::size_t>(j)];
        return tr;
    }

private:
    static Poly<G> inverse_mod(const Poly<G>& b, const Poly<G>& m) {
        Poly<G> r0 = m, r1 = b, s0, s1 = Poly<G>::constant(G(1));
        while (!r1.is_zero()) {
            auto [qt, r] = divmod(r0, r1);
            r0 = std::move(r1);
            r1 = std::move(r);
            Poly<G> s = s0 - qt * s1;
            s0 = std::move(s1);
            s1 = std::move(s);
        }
        if (r0.degree() != 0)
            throw Error(ErrorKind::IndeterminatePoint, "sample point is a critical value or an image of a pole");
        return s0 * (G(1) / r0[0]);
    }

    // Newton's identities for a monic polynomial.
    static std::vector<G> power_sums(const Poly<G>& f) {
        const int n = f.degree();
        std::vector<G> ps(static_cast<std::size_t>(n), G(0));
        ps[0] = G(n);
        for (int k = 1; k < n; ++k) {
            G acc = G(k) * f[n - k];
            for (int i = 1; i < k; ++i) acc += f[n - i] * ps[static_cast<std::size_t>(k - i)];
            ps[static_cast<std::size_t>(k)] = -acc;
        }
        return ps;
    }

    Poly<G> p_, q_, hn_, hd_;
    int d_;
};

std::vector<SpherePoint> dedupe(const std::vector<SpherePoint>& pts, double tol) {
    std::vector<SpherePoint> out;
    for (const auto& x : pts) {
        bool dup = false;
        for (const auto& y : out)
            if (same_point(x, y, tol)) dup = true;
        if (!dup) out.push_back(x);
    }
    return out;
}

int order_bound(const RationalMap& f, const RationalQD& q, const SpherePoint& x, const Tolerances& tol) {
    int best = kNoPole;
    for (const auto& fp : fibre(f, x, tol)) {
        const int o = q.order_at(fp.point, tol);
        if (o == kNoPole) continue;
        best = std::min(best, ceil_div(o + 2, fp.multiplicity) - 2);
    }
    return best;
}

// An irrational pole can have a Gaussian-rational image; confirmed by a common
// factor of the pole polynomial and the fibre polynomial.
SpherePoint exact_pole_image(const RationalMap& f, const RationalQD& q, const SpherePoint& y, const Tolerances& tol) {
    if (abs(y.z1) <= Real(tol.eps_cluster) * abs(y.z0)) {
        if (gcd(q.exact_den(), f.exact_den()).degree() > 0) return SpherePoint::infinity();
        return y;
    }
    auto cand = rationalize(y.value(), root_rationalize_bound());
    if (cand && gcd(q.exact_den(), f.exact_num() - f.exact_den() * *cand).degree() > 0)
        return SpherePoint::from_exact(*cand);
    return y;
}

struct Reconstruction {
    std::vector<SpherePoint> cand;
    std::vector<int> bounds;
    int bound_inf = 0;
    std::vector<SpherePoint> avoid;
};

std::optional<RationalQD> reconstruct_float(const RationalMap& f, const RationalQD& q, const Reconstruction& rc,
                                            const Tolerances& tol, PushforwardInfo& info) {
    std::vector<int> poles(rc.cand.size(), 0);
    Poly<Complex> e = Poly<Complex>::constant(Complex(1));
    for (std::size_t i = 0; i < rc.cand.size(); ++i) {
        if (rc.cand[i].is_infinity() || rc.bounds[i] >= 0) continue;
        poles[i] = -rc.bounds[i];
        e = e * fatou::pow(Poly<Complex>::linear_factor(rc.cand[i].value()), static_cast<unsigned>(poles[i]));
    }
    const int unknowns = std::max(0, e.degree() - 4 - rc.bound_inf + 1);
    const int k = std::max(2 * unknowns, 8);
    const auto zs = sample_points(k, rc.avoid, 0);
    const auto fresh = sample_points(k, rc.avoid, k);
    info.samples = 2 * k;

    const Poly<Complex>&p = f.num(), &qf = f.den();
    const Poly<Complex> w = p.derivative() * qf - p * qf.derivative();
    std::vector<Complex> v(zs.size()), vf(fresh.size());
    Real scale(0), big(0), scale_f(0), big_f(0);
    for (std::size_t i = 0; i < zs.size(); ++i) {
        Real a;
        v[i] = fibre_sum_impl(p, qf, w, q, zs[i], f.degree(), tol, &a);
        scale = std::max(scale, a);
        big = std::max<Real>(big, abs(v[i]));
    }
    for (std::size_t i = 0; i < fresh.size(); ++i) {
        Real a;
        vf[i] = fibre_sum_impl(p, qf, w, q, fresh[i], f.degree(), tol, &a);
        scale_f = std::max(scale_f, a);
        big_f = std::max<Real>(big_f, abs(vf[i]));
    }
    const Real eps(tol.eps_push);
    if (big <= eps * scale && big_f <= eps * scale_f) {
        info.residual = static_cast<double>(std::max(big / scale, big_f / scale_f));
        return RationalQD::from_reduced({}, Poly<Complex>::constant(Complex(1)));
    }
    if (unknowns == 0) return std::nullopt;

    Matrix<Complex> m(zs.size(), static_cast<std::size_t>(unknowns));
    for (std::size_t i = 0; i < zs.size(); ++i) {
        const Complex inv_e = Complex(1) / e(zs[i]);
        Complex zp(1);
        for (int j = 0; j < unknowns; ++j) {
            m(i, static_cast<std::size_t>(j)) = zp * inv_e;
            zp *= zs[i];
        }
    }
    Poly<Complex> n(HouseholderQR<Complex>(m).solve(v));
    Real worst(0);
    for (std::size_t i = 0; i < fresh.size(); ++i)
        worst = std::max<Real>(worst, abs(n(fresh[i]) / e(fresh[i]) - vf[i]));
    info.residual = static_cast<double>(worst / scale_f);
    if (worst > eps * scale_f) return std::nullopt;

    n = n.chopped(tol.eps_super);
    for (std::size_t i = 0; i < rc.cand.size(); ++i) {
        if (poles[i] == 0) continue;
        const Complex x = rc.cand[i].value();
        const int c = std::min(poles[i], root_multiplicity(n, x, tol.eps_cluster));
        if (c > 0) {
            n = deflate(n, x, c);
            e = deflate(e, x, c);
        }
    }
    return RationalQD::from_reduced(std::move(n), std::move(e));
}

std::optional<RationalQD> reconstruct_exact(const RationalMap& f, const RationalQD& q, const Reconstruction& rc,
                                            PushforwardInfo& info) {
    std::vector<int> poles(rc.cand.size(), 0);
    Poly<G> e = Poly<G>::constant(G(1));
    for (std::size_t i = 0; i < rc.cand.size(); ++i) {
        if (rc.cand[i].is_infinity() || rc.bounds[i] >= 0) continue;
        poles[i] = -rc.bounds[i];
        e = e * fatou::pow(Poly<G>::linear_factor(*rc.cand[i].exact), static_cast<unsigned>(poles[i]));
    }
    const int unknowns = std::max(0, e.degree() - 4 - rc.bound_inf + 1);
    const int k = std::max(2 * unknowns, 8);

    // Gaussian-rational sample points near the float sequence, all distinct.
    std::vector<G> pts;
    for (const Complex& z : sample_points(2 * k + 32, rc.avoid, 0)) {
        const G g = snap_to_grid(z);
        if (std::find(pts.begin(), pts.end(), g) != pts.end()) continue;
        pts.push_back(g);
        if (static_cast<int>(pts.size()) == 2 * k) break;
    }
    if (static_cast<int>(pts.size()) < 2 * k) return std::nullopt;
    info.samples = 2 * k;

    const ExactTrace trace(f, q);
    std::vector<G> v(pts.size());
    bool all_zero = true;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        v[i] = trace(pts[i]);
        all_zero = all_zero && v[i].is_zero();
    }
    if (all_zero) {
        info.residual = 0;
        return RationalQD::exact({}, Poly<G>::constant(G(1)));
    }
    if (unknowns == 0) return std::nullopt;

    const std::size_t half = static_cast<std::size_t>(k);
    Matrix<G> m(half, static_cast<std::size_t>(unknowns));
    std::vector<G> rhs(v.begin(), v.begin() + static_cast<long>(half));
    for (std::size_t i = 0; i < half; ++i) {
        const G inv_e = G(1) / e(pts[i]);
        G zp(1);
        for (int j = 0; j < unknowns; ++j) {
            m(i, static_cast<std::size_t>(j)) = zp * inv_e;
            zp *= pts[i];
        }
    }
    std::vector<G> x;
    if (!solve(m, rhs, x)) return std::nullopt;
    Poly<G> n(std::move(x));
    for (std::size_t i = half; i < pts.size(); ++i)
        if (!(n(pts[i]) / e(pts[i]) == v[i])) {
            info.residual = 1;
            return std::nullopt;
        }
    info.residual = 0;
    for (std::size_t i = 0; i < rc.cand.size(); ++i) {
        if (poles[i] == 0) continue;
        const G& xv = *rc.cand[i].exact;
        while (poles[i] > 0 && !n.is_zero() && n(xv).is_zero()) {
            n = deflate(n, xv, 1);
            e = deflate(e, xv, 1);
            --poles[i];
        }
    }
    return RationalQD::exact(std::move(n), std::move(e));
}

Poly<Complex> poly_from_points(const std::vector<SpherePoint>& pts) {
    Poly<Complex> p = Poly<Complex>::constant(Complex(1));
    for (const auto& a : pts)
        if (!a.is_infinity()) p = p * Poly<Complex>::linear_factor(a.value());
    return p;
}

}  // namespace

// ---------------------------------------------------------------- RationalQD

RationalQD RationalQD::exact(Poly<G> num, Poly<G> den) {
    if (den.is_zero()) throw Error(ErrorKind::ZeroPolynomial, "quadratic differential with zero denominator");
    RationalQD q;
    q.exact_ = true;
    if (num.is_zero()) {
        q.eden_ = Poly<G>::constant(G(1));
    } else {
        const Poly<G> g = gcd(num, den);
        num = divmod(num, g).first;
        den = divmod(den, g).first;
        const G inv = G(1) / den.leading();
        q.enum_ = num * inv;
        q.eden_ = den * inv;
    }
    q.num_ = q.enum_.cast<Complex>();
    q.den_ = q.eden_.cast<Complex>();
    q.refresh_cd();
    return q;
}

RationalQD RationalQD::floating(Poly<Complex> num, Poly<Complex> den, const Tolerances& tol) {
    if (den.is_zero()) throw Error(ErrorKind::ZeroPolynomial, "quadratic differential with zero denominator");
    if (!num.is_zero()) {
        for (const auto& r : roots_with_multiplicity(den, tol)) {
            const Complex x = r.point.value();
            const int c = std::min(r.mult, root_multiplicity(num, x, tol.eps_cluster));
            if (c > 0) {
                num = deflate(num, x, c);
                den = deflate(den, x, c);
            }
        }
    }
    return from_reduced(std::move(num), std::move(den));
}

RationalQD RationalQD::from_reduced(Poly<Complex> num, Poly<Complex> den) {
    if (den.is_zero()) throw Error(ErrorKind::ZeroPolynomial, "quadratic differential with zero denominator");
    RationalQD q;
    if (num.is_zero()) {
        q.den_ = Poly<Complex>::constant(Complex(1));
    } else {
        const Complex inv = Complex(1) / den.leading();
        q.num_ = num * inv;
        q.den_ = den * inv;
    }
    q.refresh_cd();
    return q;
}

RationalQD RationalQD::simple_poles(const std::vector<SpherePoint>& a) {
    bool all_exact = true;
    for (const auto& x : a) all_exact = all_exact && x.is_exact();
    if (all_exact) {
        Poly<G> den = Poly<G>::constant(G(1));
        for (const auto& x : a)
            if (!x.is_infinity()) den = den * Poly<G>::linear_factor(*x.exact);
        return exact(Poly<G>::constant(G(1)), den);
    }
    return from_reduced(Poly<Complex>::constant(Complex(1)), poly_from_points(a));
}

const Poly<G>& RationalQD::exact_num() const {
    if (!exact_) throw Error(ErrorKind::Usage, "quadratic differential has no exact coefficients");
    return enum_;
}

const Poly<G>& RationalQD::exact_den() const {
    if (!exact_) throw Error(ErrorKind::Usage, "quadratic differential has no exact coefficients");
    return eden_;
}

void RationalQD::refresh_cd() {
    ncd_.clear();
    dcd_.clear();
    for (const auto& c : num_.coeffs()) ncd_.push_back(to_cd(c));
    for (const auto& c : den_.coeffs()) dcd_.push_back(to_cd(c));
}

int RationalQD::order_at_infinity() const {
    if (is_zero()) return kNoPole;
    return den_.degree() - num_.degree() - 4;
}

int RationalQD::order_at(const SpherePoint& x, const Tolerances& tol) const {
    if (is_zero()) return kNoPole;
    if (x.is_infinity()) return order_at_infinity();
    if (exact_ && x.exact) return root_multiplicity(enum_, *x.exact) - root_multiplicity(eden_, *x.exact);
    const Complex v = x.value();
    return root_multiplicity(num_, v, tol.eps_cluster) - root_multiplicity(den_, v, tol.eps_cluster);
}

std::vector<RationalQD::Pole> RationalQD::poles(const Tolerances& tol) const {
    std::vector<Pole> out;
    if (is_zero()) return out;
    const auto roots = exact_ ? roots_with_multiplicity(eden_, tol) : roots_with_multiplicity(den_, tol);
    for (const auto& r : roots) out.push_back({r.point, r.mult});
    if (order_at_infinity() < 0) out.push_back({SpherePoint::infinity(), -order_at_infinity()});
    return out;
}

bool RationalQD::integrable(const Tolerances& tol) const {
    for (const auto& p : poles(tol))
        if (p.order > 1) return false;
    return true;
}

Complex RationalQD::operator()(const Complex& z) const { return num_(z) / den_(z); }

std::optional<G> RationalQD::eval_exact(const G& z) const {
    const G d = exact_den()(z);
    if (d.is_zero()) return std::nullopt;
    return exact_num()(z) / d;
}

Cd RationalQD::eval_cd(const Cd& z) const {
    Cd n{}, d{};
    for (auto it = ncd_.rbegin(); it != ncd_.rend(); ++it) n = n * z + *it;
    for (auto it = dcd_.rbegin(); it != dcd_.rend(); ++it) d = d * z + *it;
    return n / d;
}

RationalQD RationalQD::scaled(const Complex& s) const { return from_reduced(num_ * s, den_); }

RationalQD RationalQD::scaled_exact(const G& s) const { return exact(exact_num() * s, exact_den()); }

RationalQD RationalQD::to_float() const {
    RationalQD q = *this;
    q.exact_ = false;
    q.enum_ = {};
    q.eden_ = {};
    return q;
}

double coefficient_distance(const RationalQD& a, const RationalQD& b) {
    if (a.den().degree() != b.den().degree()) return std::numeric_limits<double>::infinity();
    double worst = 0;
    for (int k = 0; k <= std::max(a.num().degree(), b.num().degree()); ++k)
        worst = std::max(worst, magnitude(Complex(a.num()[k] - b.num()[k])));
    for (int k = 0; k <= a.den().degree(); ++k)
        worst = std::max(worst, magnitude(Complex(a.den()[k] - b.den()[k])));
    return worst;
}

// ---------------------------------------------------------------- pullback

RationalQD pullback(const RationalMap& f, const RationalQD& q, const Tolerances& tol) {
    if (q.is_zero()) return q;
    RationalQD out;
    std::vector<CriticalPoint> crit;
    if (f.degree() >= 2) crit = critical_points(f, tol);
    if (f.is_exact() && q.is_exact()) {
        auto [n, d] = pullback_polys(f.exact_num(), f.exact_den(), q.exact_num(), q.exact_den());
        out = RationalQD::exact(std::move(n), std::move(d));
    } else {
        auto [n, d] = pullback_polys(f.num(), f.den(), q.num(), q.den());
        // Common factors can only sit at critical points.
        for (const auto& cp : crit) {
            if (cp.point.is_infinity()) continue;
            const Complex c = cp.point.value();
            const int k = std::min(root_multiplicity(n, c, tol.eps_cluster), root_multiplicity(d, c, tol.eps_cluster));
            if (k > 0) {
                n = deflate(n, c, k);
                d = deflate(d, c, k);
            }
        }
        out = RationalQD::from_reduced(std::move(n), std::move(d));
    }
    for (const auto& cp : crit) {
        const int inner = q.order_at(f(cp.point), tol);
        const int expect = inner == kNoPole ? kNoPole : cp.local_degree * (inner + 2) - 2;
        const int got = out.order_at(cp.point, tol);
        if (got != expect)
            throw Error(ErrorKind::VerificationFailed, "pullback order at critical point " + cp.point.str() + " is " +
                                                           std::to_string(got) + ", expected " +
                                                           std::to_string(expect));
    }
    return out;
}

// ---------------------------------------------------------------- fibres

std::vector<FibrePoint> fibre(const RationalMap& f, const SpherePoint& x, const Tolerances& tol) {
    const int d = f.degree();
    std::vector<FibrePoint> out;
    int finite_degree = 0;
    if (f.is_exact() && x.is_exact()) {
        const Poly<G> fx = x.is_infinity() ? f.exact_den() : f.exact_num() - f.exact_den() * *x.exact;
        finite_degree = fx.degree();
        for (const auto& r : roots_with_multiplicity(fx, tol)) out.push_back({r.point, r.mult});
    } else {
        Poly<Complex> fx;
        if (x.is_infinity())
            fx = f.den();
        else if (uses_infinity_chart(x))
            fx = f.num() * (x.z1 / x.z0) - f.den();
        else
            fx = f.num() - f.den() * x.value();
        fx = fx.chopped(tol.eps_super);
        finite_degree = fx.degree();
        for (const auto& r : roots_with_multiplicity(fx, tol)) out.push_back({r.point, r.mult});
    }
    if (d > finite_degree) out.push_back({SpherePoint::infinity(), d - finite_degree});
    int total = 0;
    for (const auto& p : out) total += p.multiplicity;
    if (total != d) throw Error(ErrorKind::NonConvergence, "fibre multiplicities do not add up to the degree");
    return out;
}

Complex fibre_sum(const RationalMap& f, const RationalQD& q, const Complex& z, const Tolerances& tol) {
    const Poly<Complex>&p = f.num(), &qf = f.den();
    const Poly<Complex> w = p.derivative() * qf - p * qf.derivative();
    return fibre_sum_impl(p, qf, w, q, z, f.degree(), tol);
}

FibreSampler::FibreSampler(const RationalMap& f, const RationalQD& q) : q_copy_(q) {
    const Poly<Complex> w = f.num().derivative() * f.den() - f.num() * f.den().derivative();
    const int d = f.degree();
    p_.assign(static_cast<std::size_t>(d) + 1, Cd{});
    q_.assign(static_cast<std::size_t>(d) + 1, Cd{});
    for (int k = 0; k <= d; ++k) {
        p_[static_cast<std::size_t>(k)] = to_cd(f.num()[k]);
        q_[static_cast<std::size_t>(k)] = to_cd(f.den()[k]);
    }
    for (const auto& c : w.coeffs()) w_.push_back(to_cd(c));
    for (const auto& c : q.num().coeffs()) num_.push_back(to_cd(c));
    const Tolerances tol = Tolerances::for_current_precision();
    for (const auto& pole : q.poles(tol)) {
        if (pole.order < 2 || pole.point.is_infinity()) continue;
        const Complex x = pole.point.value();
        Factored fac{to_cd(x), pole.order, {}};
        const Poly<Complex> rest = deflate(q.den(), x, pole.order);
        for (const auto& c : rest.coeffs()) fac.rest.push_back(to_cd(c));
        factored_.push_back(std::move(fac));
    }
}

Cd FibreSampler::density(const Cd& w) const {
    for (const auto& f : factored_) {
        const Cd s = w - f.x;
        if (std::abs(s) > 0.25) continue;
        Cd n{}, d{};
        for (auto it = num_.rbegin(); it != num_.rend(); ++it) n = n * w + *it;
        for (auto it = f.rest.rbegin(); it != f.rest.rend(); ++it) d = d * w + *it;
        Cd sm(1);
        for (int k = 0; k < f.m; ++k) sm *= s;
        return n / (d * sm);
    }
    return q_copy_.eval_cd(w);
}

FibreSampler::Value FibreSampler::sum_over(const std::vector<Cd>& roots) const {
    auto horner = [](const std::vector<Cd>& c, const Cd& z) {
        Cd acc{};
        for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * z + *it;
        return acc;
    };
    Value v{Cd{}, 0.0, 0.0};
    std::vector<Cd> terms;
    std::size_t big = 0;
    for (const Cd& w : roots) {
        const Cd qw = horner(q_, w), ww = horner(w_, w);
        const Cd q2 = qw * qw;
        const Cd term = density(w) * q2 * q2 / (ww * ww);
        if (!terms.empty() && std::abs(term) > std::abs(terms[big])) big = terms.size();
        terms.push_back(term);
        v.sum += term;
        v.abs += std::abs(term);
    }
    if (terms.empty()) return v;
    // |t| - |t + s| without subtracting two large numbers when t dominates.
    Cd rest{};
    for (std::size_t i = 0; i < terms.size(); ++i)
        if (i != big) {
            rest += terms[i];
            v.deficit += std::abs(terms[i]);
        }
    const Cd t = terms[big];
    const double denom = std::abs(t) + std::abs(t + rest);
    if (denom > 0) v.deficit -= (2 * (std::conj(t) * rest).real() + std::norm(rest)) / denom;
    return v;
}

FibreSampler::Value FibreSampler::at(const Cd& z) const {
    std::vector<Cd> c(p_.size());
    for (std::size_t k = 0; k < c.size(); ++k) c[k] = p_[k] - z * q_[k];
    return sum_over(poly_roots_double(c));
}

FibreSampler::Value FibreSampler::at_inverse(const Cd& u) const {
    std::vector<Cd> c(p_.size());
    for (std::size_t k = 0; k < c.size(); ++k) c[k] = u * p_[k] - q_[k];
    Value v = sum_over(poly_roots_double(c));
    const Cd u2 = u * u;
    v.sum /= u2 * u2;
    v.abs /= std::norm(u2);
    v.deficit /= std::norm(u2);
    return v;
}

// ---------------------------------------------------------------- pushforward

std::vector<Complex> sample_points(int count, const std::vector<SpherePoint>& avoid, int skip) {
    std::vector<Complex> out;
    const Real golden = (sqrt(Real(5)) - 1) / 2;
    const Real two_pi = 2 * pi_real();
    std::vector<Complex> bad;
    for (const auto& a : avoid)
        if (!a.is_infinity()) bad.push_back(a.value());
    int produced = 0;
    for (long j = 1; static_cast<int>(out.size()) < count; ++j) {
        Real t = Real(j) * golden;
        t -= floor(t);
        const Complex z(Real(1.5) * cos(two_pi * t), Real(1.5) * sin(two_pi * t));
        bool ok = true;
        for (const auto& b : bad)
            if (abs(z - b) < Real(1e-6)) ok = false;
        if (!ok) continue;
        if (produced++ < skip) continue;
        out.push_back(z);
    }
    return out;
}

RationalQD pushforward(const RationalMap& f, const RationalQD& q, const Tolerances& tol, PushforwardInfo* info) {
    PushforwardInfo local;
    PushforwardInfo& inf = info ? *info : local;
    inf = {};
    if (q.is_zero()) return q;

    if (f.degree() == 1) {
        // The single branch is the inverse map.
        if (f.is_exact() && q.is_exact()) {
            const Poly<G>&p = f.exact_num(), &r = f.exact_den();
            const Poly<G> ip({-p[0], r[0]}), ir({p[1], -r[1]});
            auto [n, d] = pullback_polys(ip, ir, q.exact_num(), q.exact_den());
            inf.exact = true;
            return RationalQD::exact(std::move(n), std::move(d));
        }
        const Poly<Complex>&p = f.num(), &r = f.den();
        const Poly<Complex> ip({-p[0], r[0]}), ir({p[1], -r[1]});
        auto [n, d] = pullback_polys(ip, ir, q.num(), q.den());
        return RationalQD::from_reduced(std::move(n), std::move(d));
    }

    Reconstruction rc;
    std::vector<SpherePoint> cand;
    for (const auto& pole : q.poles(tol)) {
        SpherePoint y = f(pole.point);
        if (f.is_exact() && q.is_exact() && !y.is_exact()) y = exact_pole_image(f, q, y, tol);
        cand.push_back(y);
    }
    for (const auto& v : critical_values(f, tol)) cand.push_back(v);
    rc.cand = dedupe(cand, tol.eps_orbit);
    bool exact = f.is_exact() && q.is_exact();
    for (const auto& x : rc.cand) {
        const int b = order_bound(f, q, x, tol);
        rc.bounds.push_back(b);
        if (x.is_infinity()) rc.bound_inf = b;
        exact = exact && x.is_exact();
    }
    rc.avoid = rc.cand;
    rc.avoid.push_back(f(SpherePoint::infinity()));
    inf.candidate_poles = rc.cand;
    inf.order_bounds = rc.bounds;
    inf.order_bound_infinity = rc.bound_inf;
    inf.exact = exact;

    for (int attempt = 0; attempt < 2; ++attempt) {
        Reconstruction used = rc;
        if (attempt == 1) {
            for (auto& b : used.bounds) --b;
            --used.bound_inf;
            inf.bumped = true;
        }
        std::optional<RationalQD> out =
            exact ? reconstruct_exact(f, q, used, inf) : reconstruct_float(f, q, used, tol, inf);
        if (!out) continue;
        for (std::size_t i = 0; i < used.cand.size(); ++i) {
            const int o = out->order_at(used.cand[i], tol);
            if (o < used.bounds[i])
                throw Error(ErrorKind::VerificationFailed, "pushforward order " + std::to_string(o) + " at " +
                                                               used.cand[i].str() + " violates the bound " +
                                                               std::to_string(used.bounds[i]));
        }
        if (out->order_at_infinity() < used.bound_inf)
            throw Error(ErrorKind::VerificationFailed, "pushforward order at infinity violates the bound");
        return *out;
    }
    throw Error(ErrorKind::ReconstructionResidualTooLarge,
                "pushforward reconstruction residual " + std::to_string(inf.residual));
}

// ---------------------------------------------------------------- Q(P^1, A)

QDSpaceBasis basis_Q(const std::vector<SpherePoint>& a, const Tolerances& tol) {
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = i + 1; j < a.size(); ++j)
            if (same_point(a[i], a[j], tol.eps_orbit))
                throw Error(ErrorKind::DegeneratePoints, "marked points " + a[i].str() + " and " + a[j].str() +
                                                             " coincide");
    QDSpaceBasis basis;
    basis.points = a;
    if (a.size() <= 3) return basis;

    // a0 -> 0, a1 -> 1, a2 -> infinity, with infinity taken as a2 when present.
    std::vector<SpherePoint> order = a;
    for (std::size_t i = 0; i < order.size(); ++i)
        if (order[i].is_infinity()) {
            std::swap(order[i], order[2]);
            break;
        }
    bool all_exact = true;
    for (const auto& x : order) all_exact = all_exact && x.is_exact();

    auto build = [&](auto zero) {
        using S = decltype(zero);
        auto val = [&](const SpherePoint& x) {
            if constexpr (std::is_same_v<S, G>)
                return *x.exact;
            else
                return x.value();
        };
        const S one = scalar<S>(1);
        const S a0 = val(order[0]), a1 = val(order[1]);
        Poly<S> p, q;
        std::optional<S> a2;
        if (!order[2].is_infinity()) a2 = val(order[2]);
        if (!a2) {
            p = Poly<S>({-a0, one});
            q = Poly<S>::constant(a1 - a0);
        } else {
            p = Poly<S>({-a0 * (a1 - *a2), a1 - *a2});
            q = Poly<S>({-*a2 * (a1 - a0), a1 - a0});
        }
        for (std::size_t i = 3; i < order.size(); ++i) {
            const S ai = val(order[i]);
            const S b = a2 ? (ai - a0) * (a1 - *a2) / ((ai - *a2) * (a1 - a0)) : (ai - a0) / (a1 - a0);
            const Poly<S> den = Poly<S>({zero, one}) * Poly<S>({-one, one}) * Poly<S>({-b, one});
            auto [n, d] = pullback_polys(p, q, Poly<S>::constant(one), den);
            if constexpr (std::is_same_v<S, G>)
                basis.elements.push_back(RationalQD::exact(std::move(n), std::move(d)));
            else
                basis.elements.push_back(RationalQD::from_reduced(std::move(n), std::move(d)));
        }
    };
    if (all_exact)
        build(G(0));
    else
        build(Complex{});

    const auto zs = sample_points(std::max(2 * basis.dimension(), 16), a, 0);
    basis.gram_condition = sampled_gram_condition(basis.elements, zs);
    return basis;
}

std::vector<Complex> coordinates_in_basis(const QDSpaceBasis& basis, const std::vector<Complex>& zs,
                                          const std::vector<Complex>& values, double* residual) {
    const std::size_t n = basis.elements.size();
    if (n == 0) {
        Real big(0);
        for (const auto& v : values) big = std::max<Real>(big, abs(v));
        if (residual) *residual = big == 0 ? 0.0 : 1.0;
        return {};
    }
    Matrix<Complex> m(zs.size(), n);
    for (std::size_t i = 0; i < zs.size(); ++i)
        for (std::size_t j = 0; j < n; ++j) m(i, j) = basis.elements[j](zs[i]);
    const std::vector<Complex> x = HouseholderQR<Complex>(m).solve(values);
    if (residual) {
        const std::vector<Complex> fit = m * x;
        Real worst(0), big(0);
        for (std::size_t i = 0; i < values.size(); ++i) {
            worst = std::max<Real>(worst, abs(fit[i] - values[i]));
            big = std::max<Real>(big, abs(values[i]));
        }
        *residual = big == 0 ? static_cast<double>(worst) : static_cast<double>(worst / big);
    }
    return x;
}

OperatorMatrix nabla_matrix(const RationalMap& f, const std::vector<SpherePoint>& a, const Tolerances& tol) {
    OperatorMatrix op;
    op.domain = basis_Q(a, tol);
    std::vector<SpherePoint> plus = a;
    auto contains = [&](const SpherePoint& x) {
        for (const auto& y : plus)
            if (same_point(x, y, tol.eps_orbit)) return true;
        return false;
    };
    for (const auto& x : a) {
        const SpherePoint y = f(x);
        if (!contains(y)) plus.push_back(y);
    }
    for (const auto& v : critical_values(f, tol))
        if (!contains(v)) {
            plus.push_back(v);
            op.added_critical_values.push_back(v);
        }
    op.codomain = basis_Q(plus, tol);
    if (!op.added_critical_values.empty())
        op.warnings.push_back("A does not contain the critical values; " +
                              std::to_string(op.added_critical_values.size()) + " added to A+");
    if (op.domain.gram_condition > 1e12 || op.codomain.gram_condition > 1e12)
        op.warnings.push_back("IllConditionedBasis");

    const std::size_t rows = static_cast<std::size_t>(op.codomain.dimension());
    const std::size_t cols = static_cast<std::size_t>(op.domain.dimension());
    op.matrix = Matrix<Complex>(rows, cols);
    const auto zs = sample_points(std::max<int>(3 * static_cast<int>(rows), 16), plus, 0);
    for (std::size_t j = 0; j < cols; ++j) {
        const RationalQD& qj = op.domain.elements[j];
        const RationalQD pushed = pushforward(f, qj, tol);
        std::vector<Complex> values(zs.size());
        for (std::size_t i = 0; i < zs.size(); ++i) values[i] = qj(zs[i]) - pushed(zs[i]);
        double res = 0;
        const auto coords = coordinates_in_basis(op.codomain, zs, values, &res);
        op.solve_residual = std::max(op.solve_residual, res);
        for (std::size_t i = 0; i < rows; ++i) op.matrix(i, j) = coords[i];
    }
    if (op.solve_residual > tol.eps_push)
        op.warnings.push_back("coordinate residual " + std::to_string(op.solve_residual) + " above tolerance");

    op.singular_values = singular_values(op.matrix);
    const double smax = op.singular_values.empty() ? 0.0 : op.singular_values.front();
    for (double s : op.singular_values)
        if (s > tol.eps_rank * smax) ++op.rank;
    op.injective = op.rank == static_cast<int>(cols);
    if (cols == 0)
        op.sigma_ratio = 1;
    else if (smax > 0 && op.singular_values.size() >= cols)
        op.sigma_ratio = op.singular_values[cols - 1] / smax;
    return op;
}

// ---------------------------------------------------------------- Lattes

LattesVerdict lattes_test(const RationalMap& f, const Tolerances& tol) {
    if (f.degree() < 2) throw Error(ErrorKind::DegreeTooSmall, "Lattes test needs degree >= 2");
    constexpr int kOrbitCap = 64;
    LattesVerdict out;
    std::vector<SpherePoint> post;
    for (const auto& o : postcritical_prefix(f, kOrbitCap, tol)) {
        if (o.revisit_step < 0 && o.merge_orbit < 0) {
            out.evidence = "critical orbit of " + o.points.front().str() + " does not close within " +
                           std::to_string(kOrbitCap) + " steps";
            return out;
        }
        post.insert(post.end(), o.points.begin(), o.points.end());
    }
    post = dedupe(post, tol.eps_orbit);
    out.pole_set = post;
    if (post.size() != 4) {
        out.evidence = "postcritical set has " + std::to_string(post.size()) + " points, not 4";
        return out;
    }
    auto in_post = [&](const SpherePoint& x) {
        for (const auto& y : post)
            if (same_point(x, y, tol.eps_orbit)) return true;
        return false;
    };
    for (const auto& cp : critical_points(f, tol))
        if (in_post(cp.point)) {
            out.evidence = "critical point " + cp.point.str() + " is a pole";
            return out;
        }
    for (const auto& p : post)
        for (const auto& w : fibre(f, p, tol))
            if (!in_post(w.point) && w.multiplicity != 2) {
                out.evidence = "preimage " + w.point.str() + " of the pole " + p.str() +
                               " is neither a pole nor a simple critical point";
                return out;
            }
    const RationalQD q = RationalQD::simple_poles(post);
    const RationalQD pb = pullback(f, q, tol);
    bool holds = false;
    if (pb.is_exact() && q.is_exact()) {
        const RationalQD dq = q.scaled_exact(G(f.degree()));
        holds = pb.exact_num() == dq.exact_num() && pb.exact_den() == dq.exact_den();
        out.evidence = holds ? "f*q = D q holds exactly" : "f*q differs from D q";
    } else {
        const double dist = coefficient_distance(pb, q.scaled(Complex(f.degree())));
        holds = dist <= 1e-25;
        out.evidence = "coefficient distance between f*q and D q is " + std::to_string(dist);
    }
    if (holds) {
        out.lattes = true;
        out.witness = q;
    }
    return out;
}

}  // namespace fatou
