#include "fatoulab/ratmap.hpp"

#include <array>
#include <cmath>
#include <map>
#include <sstream>
#include <unordered_map>

namespace fatou {

namespace {

const BigInt& rationalize_bound() {
    static const BigInt bound("1000000000000");
    return bound;
}

Complex cx(long re) { return {Real(re), Real(0)}; }

Complex normalize_pair(Complex& a, Complex& b) {
    const Real m = std::max<Real>(abs(a), abs(b));
    if (m == 0) throw Error(ErrorKind::IndeterminatePoint, "both homogeneous coordinates vanish");
    a /= m;
    b /= m;
    return {m, Real(0)};
}

template <class S>
struct HomogeneousPair {
    Poly<S> num, den;
};

/// f o M^{-1} followed by M, for f = p/q of degree d.
template <class S>
HomogeneousPair<S> conjugate_polys(const Poly<S>& p, const Poly<S>& q, int d, const Mobius<S>& m) {
    const Poly<S> a({-m.b, m.d});   // d z - b
    const Poly<S> b({m.a, -m.c});   // -c z + a
    const Poly<S> n = homogeneous_substitute(p, d, a, b);
    const Poly<S> dn = homogeneous_substitute(q, d, a, b);
    return {n * m.a + dn * m.b, n * m.c + dn * m.d};
}

/// Derivative of num/den at s, with num/den swapped for the chart at infinity.
template <class S>
S chart_derivative(const Poly<S>& num, const Poly<S>& den, const S& s, bool out_inf) {
    S a = num(s), b = den(s);
    S da = num.derivative()(s), db = den.derivative()(s);
    if (out_inf) {
        std::swap(a, b);
        std::swap(da, db);
    }
    if (is_zero(b)) throw Error(ErrorKind::IndeterminatePoint, "chart mismatch in local derivative");
    return (da * b - a * db) / (b * b);
}

unsigned bit_size(const Rational& r) {
    unsigned bits = 0;
    const BigInt n = bmp::numerator(r), d = bmp::denominator(r);
    if (n != 0) bits += static_cast<unsigned>(bmp::msb(bmp::abs(n)));
    if (d != 0) bits += static_cast<unsigned>(bmp::msb(d));
    return bits;
}

unsigned bit_size(const G& z) { return bit_size(z.re()) + bit_size(z.im()); }

/// Exact test that w (nullopt = infinity) is a critical value.
bool is_exact_critical_value(const RationalMap& f, const std::optional<G>& w) {
    const int d = f.degree();
    Poly<G> fibre = w ? f.exact_num() - f.exact_den() * *w : f.exact_den();
    if (fibre.is_zero()) return false;
    if (d - fibre.degree() >= 2) return true;
    return gcd(fibre, fibre.derivative()).degree() >= 1;
}

std::array<double, 3> sphere_coords(const SpherePoint& x) {
    const Cd a = to_cd(x.z0), b = to_cd(x.z1);
    const double n = std::norm(a) + std::norm(b);
    const Cd cross = a * std::conj(b);
    return {2 * cross.real() / n, 2 * cross.imag() / n, (std::norm(a) - std::norm(b)) / n};
}

struct CellKey {
    long x, y, z;
    bool operator==(const CellKey&) const = default;
};

struct CellHash {
    std::size_t operator()(const CellKey& k) const {
        return std::hash<long>()(k.x * 73856093L ^ k.y * 19349663L ^ k.z * 83492791L);
    }
};

/// Points of several orbits bucketed on the unit sphere.
class SpatialIndex {
public:
    explicit SpatialIndex(double cell) : cell_(cell) {}

    void insert(const SpherePoint& x, int orbit, int step) {
        buckets_[key(sphere_coords(x))].push_back({orbit, step});
    }

    template <class Fn>
    void for_neighbours(const SpherePoint& x, Fn&& fn) const {
        const auto c = sphere_coords(x);
        const CellKey k = key(c);
        for (long dx = -1; dx <= 1; ++dx)
            for (long dy = -1; dy <= 1; ++dy)
                for (long dz = -1; dz <= 1; ++dz) {
                    auto it = buckets_.find({k.x + dx, k.y + dy, k.z + dz});
                    if (it == buckets_.end()) continue;
                    for (const auto& e : it->second) fn(e.first, e.second);
                }
    }

private:
    CellKey key(const std::array<double, 3>& c) const {
        return {static_cast<long>(std::floor(c[0] / cell_)), static_cast<long>(std::floor(c[1] / cell_)),
                static_cast<long>(std::floor(c[2] / cell_))};
    }

    double cell_;
    std::unordered_map<CellKey, std::vector<std::pair<int, int>>, CellHash> buckets_;
};

/// Index into an orbit that ends in a detected cycle, wrapping past the end.
int wrapped_index(const OrbitRecord& o, int idx) {
    const int len = static_cast<int>(o.points.size());
    if (idx < len) return idx;
    if (o.revisit_step < 0) return -1;
    const int start = o.revisit_target, period = o.revisit_step - o.revisit_target;
    // points[revisit_step] coincides with points[revisit_target]
    return start + (idx - start) % period;
}

}  // namespace

// ---------------------------------------------------------------- SpherePoint

SpherePoint SpherePoint::infinity() {
    SpherePoint p;
    p.exact_infinity = true;
    return p;
}

SpherePoint SpherePoint::affine(const Complex& z) {
    SpherePoint p;
    if (abs(z) <= 1) {
        p.z0 = z;
        p.z1 = cx(1);
    } else {
        p.z0 = cx(1);
        p.z1 = cx(1) / z;
    }
    return p;
}

SpherePoint SpherePoint::from_exact(const G& z) {
    SpherePoint p = affine(z.to_complex());
    p.exact = z;
    return p;
}

SpherePoint SpherePoint::from_exact(const std::optional<G>& z) { return z ? from_exact(*z) : infinity(); }

Complex SpherePoint::value() const {
    if (is_infinity()) throw Error(ErrorKind::IndeterminatePoint, "affine coordinate of infinity");
    if (exact) return exact->to_complex();
    return z0 / z1;
}

Cd SpherePoint::value_cd() const {
    if (is_infinity()) return {HUGE_VAL, 0.0};
    return to_cd(value());
}

std::string SpherePoint::str() const {
    if (is_infinity()) return "inf";
    if (exact) return exact->str();
    return to_decimal(value());
}

Real chordal_distance(const SpherePoint& a, const SpherePoint& b) {
    const Real na = sqrt(std::norm(a.z0) + std::norm(a.z1));
    const Real nb = sqrt(std::norm(b.z0) + std::norm(b.z1));
    return abs(a.z0 * b.z1 - a.z1 * b.z0) / (na * nb);
}

bool same_point(const SpherePoint& a, const SpherePoint& b, double tol) {
    if (a.is_exact() && b.is_exact()) {
        if (a.exact_infinity || b.exact_infinity) return a.exact_infinity && b.exact_infinity;
        return *a.exact == *b.exact;
    }
    return chordal_distance(a, b) <= tol;
}

bool uses_infinity_chart(const SpherePoint& x) { return abs(x.z0) > abs(x.z1); }

bool uses_infinity_chart(const std::optional<G>& x) { return !x || x->norm() > 1; }

Mobius<Complex> normalized(const Mobius<Complex>& m) {
    const Complex det = m.det();
    if (det == Complex{}) throw Error(ErrorKind::DegeneratePoints, "singular Mobius matrix");
    const Complex s = Complex(1) / sqrt(det);
    return {m.a * s, m.b * s, m.c * s, m.d * s};
}

SpherePoint apply(const Mobius<Complex>& m, const SpherePoint& x) {
    SpherePoint y;
    y.z0 = m.a * x.z0 + m.b * x.z1;
    y.z1 = m.c * x.z0 + m.d * x.z1;
    normalize_pair(y.z0, y.z1);
    return y;
}

Mobius<Complex> to_complex(const Mobius<G>& m) {
    return {m.a.to_complex(), m.b.to_complex(), m.c.to_complex(), m.d.to_complex()};
}

// ---------------------------------------------------------------- RationalMap

RationalMap RationalMap::exact(Poly<G> p, Poly<G> q) {
    if (q.is_zero()) throw Error(ErrorKind::ZeroPolynomial, "zero denominator");
    const Poly<G> g = gcd(p, q);
    if (g.degree() > 0) {
        p = divmod(p, g).first;
        q = divmod(q, g).first;
    }
    RationalMap f;
    f.degree_ = std::max(p.degree(), q.degree());
    if (f.degree_ < 1) throw Error(ErrorKind::DegreeTooSmall, "map is constant");
    f.mode_ = CoefficientMode::Exact;
    f.has_exact_ = true;
    f.pe_ = std::move(p);
    f.qe_ = std::move(q);
    f.normalize();
    return f;
}

RationalMap RationalMap::exact_coefficients_float_mode(Poly<G> p, Poly<G> q) {
    RationalMap f = exact(std::move(p), std::move(q));
    f.mode_ = CoefficientMode::Float;
    return f;
}

RationalMap RationalMap::floating(Poly<Complex> p, Poly<Complex> q, const Tolerances& tol) {
    if (q.is_zero()) throw Error(ErrorKind::ZeroPolynomial, "zero denominator");
    RationalMap f;
    f.degree_ = std::max(p.degree(), q.degree());
    if (f.degree_ < 1) throw Error(ErrorKind::DegreeTooSmall, "map is constant");
    if (!numerically_coprime(p, q, f.degree_, tol.eps_coprime))
        throw Error(ErrorKind::NotCoprime, "numerator and denominator share a root");
    f.mode_ = CoefficientMode::Float;
    f.p_ = std::move(p);
    f.q_ = std::move(q);
    f.normalize();
    return f;
}

void RationalMap::set_float_from_exact() {
    p_ = pe_.cast<Complex>();
    q_ = qe_.cast<Complex>();
}

void RationalMap::normalize() {
    if (has_exact_) {
        const G inv = G(1) / qe_.leading();
        pe_ *= inv;
        qe_ *= inv;
        set_float_from_exact();
    } else {
        // Rounding residue in cancelled top coefficients would otherwise
        // become the leading term.
        const double big = std::max(p_.max_abs_coeff(), q_.max_abs_coeff());
        const double eps = Tolerances::for_current_precision().eps_super;
        auto chop = [&](const Poly<Complex>& x) {
            std::vector<Complex> c = x.coeffs();
            for (auto& v : c)
                if (magnitude(v) <= eps * big) v = Complex{};
            return Poly<Complex>(std::move(c));
        };
        p_ = chop(p_);
        q_ = chop(q_);
        if (q_.is_zero()) throw Error(ErrorKind::ZeroPolynomial, "zero denominator");
        degree_ = std::max(p_.degree(), q_.degree());
        const Complex inv = Complex(1) / q_.leading();
        p_ *= inv;
        q_ *= inv;
    }
    rp_ = reversed(p_, degree_);
    rq_ = reversed(q_, degree_);
    pcd_.clear();
    qcd_.clear();
    for (const auto& c : p_.coeffs()) pcd_.push_back(to_cd(c));
    for (const auto& c : q_.coeffs()) qcd_.push_back(to_cd(c));
}

RationalMap RationalMap::at_current_precision() const {
    RationalMap f = *this;
    if (has_exact_) {
        f.set_float_from_exact();
    } else {
        auto refresh = [](const Poly<Complex>& p) {
            std::vector<Complex> c;
            for (const auto& x : p.coeffs()) {
                Real re(0), im(0);
                re += x.real();
                im += x.imag();
                c.emplace_back(re, im);
            }
            return Poly<Complex>(std::move(c));
        };
        f.p_ = refresh(p_);
        f.q_ = refresh(q_);
    }
    f.rp_ = reversed(f.p_, degree_);
    f.rq_ = reversed(f.q_, degree_);
    return f;
}

const Poly<G>& RationalMap::exact_num() const {
    if (!has_exact_) throw Error(ErrorKind::NotRational, "map has no exact coefficients");
    return pe_;
}

const Poly<G>& RationalMap::exact_den() const {
    if (!has_exact_) throw Error(ErrorKind::NotRational, "map has no exact coefficients");
    return qe_;
}

std::optional<G> RationalMap::eval_exact(const std::optional<G>& x) const {
    const Poly<G>& p = exact_num();
    const Poly<G>& q = exact_den();
    if (!x) {
        const G qd = q[degree_];
        if (qd.is_zero()) return std::nullopt;
        return p[degree_] / qd;
    }
    const G qv = q(*x);
    if (qv.is_zero()) return std::nullopt;
    return p(*x) / qv;
}

SpherePoint RationalMap::operator()(const SpherePoint& x) const {
    if (is_exact() && x.is_exact()) return SpherePoint::from_exact(eval_exact(x.exact));
    SpherePoint y;
    if (abs(x.z1) >= abs(x.z0)) {
        const Complex t = x.z0 / x.z1;
        y.z0 = p_(t);
        y.z1 = q_(t);
    } else {
        const Complex u = x.z1 / x.z0;
        y.z0 = rp_(u);
        y.z1 = rq_(u);
    }
    normalize_pair(y.z0, y.z1);
    return y;
}

Cd RationalMap::eval_cd(const Cd& z) const {
    Cd a{}, b{};
    for (auto it = pcd_.rbegin(); it != pcd_.rend(); ++it) a = a * z + *it;
    for (auto it = qcd_.rbegin(); it != qcd_.rend(); ++it) b = b * z + *it;
    if (b == Cd{}) return {HUGE_VAL, 0.0};
    return a / b;
}

Complex RationalMap::local_derivative(const SpherePoint& x, bool in_inf, bool out_inf) const {
    if (in_inf) {
        const Complex s = x.is_infinity() ? Complex{} : x.z1 / x.z0;
        return chart_derivative(rp_, rq_, s, out_inf);
    }
    return chart_derivative(p_, q_, x.z0 / x.z1, out_inf);
}

Complex RationalMap::local_derivative(const SpherePoint& x) const {
    return local_derivative(x, uses_infinity_chart(x), uses_infinity_chart((*this)(x)));
}

std::optional<G> RationalMap::local_derivative_exact(const std::optional<G>& x) const {
    const bool in_inf = uses_infinity_chart(x);
    const bool out_inf = uses_infinity_chart(eval_exact(x));
    if (in_inf) {
        const G s = x ? G(1) / *x : G(0);
        return chart_derivative(reversed(pe_, degree_), reversed(qe_, degree_), s, out_inf);
    }
    return chart_derivative(pe_, qe_, *x, out_inf);
}

RationalMap RationalMap::compose(const RationalMap& g) const {
    RationalMap r;
    r.degree_ = degree_ * g.degree_;
    if (has_exact_ && g.has_exact_) {
        r.has_exact_ = true;
        r.mode_ = (is_exact() && g.is_exact()) ? CoefficientMode::Exact : CoefficientMode::Float;
        r.pe_ = homogeneous_substitute(pe_, degree_, g.pe_, g.qe_);
        r.qe_ = homogeneous_substitute(qe_, degree_, g.pe_, g.qe_);
    } else {
        r.mode_ = CoefficientMode::Float;
        r.p_ = homogeneous_substitute(p_, degree_, g.p_, g.q_);
        r.q_ = homogeneous_substitute(q_, degree_, g.p_, g.q_);
    }
    r.normalize();
    return r;
}

RationalMap RationalMap::iterate(int k, unsigned degree_cap) const {
    if (k < 1) throw Error(ErrorKind::Usage, "iterate count must be positive");
    double deg = 1;
    for (int i = 0; i < k; ++i) deg *= degree_;
    if (deg > degree_cap)
        throw Error(ErrorKind::DegreeCapExceeded,
                    "degree " + std::to_string(degree_) + "^" + std::to_string(k) + " exceeds cap " +
                        std::to_string(degree_cap));
    RationalMap r = *this;
    for (int i = 1; i < k; ++i) r = compose(r);
    return r;
}

RationalMap RationalMap::conjugate(const Mobius<Complex>& m) const {
    if (m.det() == Complex{}) throw Error(ErrorKind::DegeneratePoints, "singular Mobius matrix");
    auto h = conjugate_polys(p_, q_, degree_, m);
    RationalMap r;
    r.degree_ = degree_;
    r.mode_ = CoefficientMode::Float;
    r.p_ = std::move(h.num);
    r.q_ = std::move(h.den);
    r.normalize();
    return r;
}

RationalMap RationalMap::conjugate(const Mobius<G>& m) const {
    if (m.det().is_zero()) throw Error(ErrorKind::DegeneratePoints, "singular Mobius matrix");
    if (!has_exact_) return conjugate(to_complex(m));
    auto h = conjugate_polys(pe_, qe_, degree_, m);
    RationalMap r;
    r.degree_ = degree_;
    r.mode_ = mode_;
    r.has_exact_ = true;
    r.pe_ = std::move(h.num);
    r.qe_ = std::move(h.den);
    r.normalize();
    return r;
}

RationalMap RationalMap::to_float() const {
    RationalMap r = *this;
    r.mode_ = CoefficientMode::Float;
    return r;
}

bool operator==(const RationalMap& a, const RationalMap& b) {
    if (a.degree_ != b.degree_) return false;
    if (a.has_exact_ && b.has_exact_) return a.pe_ == b.pe_ && a.qe_ == b.qe_;
    return coefficient_distance(a, b) == 0;
}

double coefficient_distance(const RationalMap& a, const RationalMap& b) {
    double worst = 0;
    for (int k = 0; k <= std::max(a.degree(), b.degree()); ++k) {
        worst = std::max(worst, magnitude(Complex(a.num()[k] - b.num()[k])));
        worst = std::max(worst, magnitude(Complex(a.den()[k] - b.den()[k])));
    }
    return worst;
}

bool numerically_coprime(const Poly<Complex>& p, const Poly<Complex>& q, int degree, double eps) {
    if (p.is_zero() || q.is_zero()) return !(p.is_zero() && q.is_zero()) && std::max(p.degree(), q.degree()) == 0;
    if (p.degree() < degree && q.degree() < degree) return false;
    const int m = p.degree(), n = q.degree();
    if (m == 0 || n == 0) return true;
    const std::size_t size = static_cast<std::size_t>(m + n);
    std::vector<std::vector<Complex>> s(size, std::vector<Complex>(size, Complex{}));
    for (int r = 0; r < n; ++r)
        for (int k = 0; k <= m; ++k) s[r][r + k] = p[m - k];
    for (int r = 0; r < m; ++r)
        for (int k = 0; k <= n; ++k) s[n + r][r + k] = q[n - k];
    Complex det(1);
    for (std::size_t c = 0; c < size; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < size; ++r)
            if (abs(s[r][c]) > abs(s[piv][c])) piv = r;
        if (s[piv][c] == Complex{}) return false;
        if (piv != c) {
            std::swap(s[piv], s[c]);
            det = -det;
        }
        det *= s[c][c];
        for (std::size_t r = c + 1; r < size; ++r) {
            const Complex f = s[r][c] / s[c][c];
            for (std::size_t j = c; j < size; ++j) s[r][j] -= f * s[c][j];
        }
    }
    auto norm2 = [](const Poly<Complex>& x) {
        Real acc(0);
        for (const auto& c : x.coeffs()) acc += std::norm(c);
        return sqrt(acc);
    };
    const Real scale = pow(norm2(p), n) * pow(norm2(q), m);
    return abs(det) > Real(eps) * scale;
}

// ---------------------------------------------------------------- critical data

std::vector<CriticalPoint> critical_points(const RationalMap& f, const Tolerances& tol) {
    const int d = f.degree();
    if (d < 2) throw Error(ErrorKind::DegreeTooSmall, "critical points need degree >= 2");
    std::vector<CriticalPoint> out;
    int deg_w = 0;
    RootSet roots;
    std::optional<Poly<G>> w_exact;
    if (f.is_exact()) {
        w_exact = f.exact_num().derivative() * f.exact_den() - f.exact_num() * f.exact_den().derivative();
        deg_w = w_exact->degree();
        roots = poly_roots(*w_exact, tol);
    } else {
        Poly<Complex> w = f.num().derivative() * f.den() - f.num() * f.den().derivative();
        w = w.chopped(tol.eps_super);
        deg_w = w.degree();
        roots = poly_roots(w, tol);
    }
    if (!roots.converged) throw Error(ErrorKind::NonConvergence, "critical points: root finder did not converge");
    for (const auto& r : roots.roots) {
        CriticalPoint cp;
        cp.local_degree = r.multiplicity + 1;
        cp.point = SpherePoint::affine(r.value);
        if (w_exact) {
            if (auto cand = rationalize(r.value, rationalize_bound()); cand && (*w_exact)(*cand).is_zero()) {
                cp.point = SpherePoint::from_exact(*cand);
                cp.local_degree = root_multiplicity(*w_exact, *cand) + 1;
            }
        }
        out.push_back(cp);
    }
    const int at_inf = 2 * d - 2 - deg_w;
    if (at_inf > 0) {
        CriticalPoint cp;
        cp.point = SpherePoint::infinity();
        if (!f.is_exact()) cp.point.exact_infinity = false;
        cp.local_degree = at_inf + 1;
        out.push_back(cp);
    }
    int total = 0;
    for (const auto& cp : out) total += cp.local_degree - 1;
    if (total != 2 * d - 2)
        throw Error(ErrorKind::NonConvergence,
                    "critical multiplicities sum to " + std::to_string(total) + ", expected " + std::to_string(2 * d - 2));
    return out;
}

std::vector<SpherePoint> critical_values(const RationalMap& f, const Tolerances& tol) {
    std::vector<SpherePoint> out;
    for (const auto& cp : critical_points(f, tol)) {
        SpherePoint v = f(cp.point);
        if (f.is_exact() && !v.is_exact()) {
            const bool near_inf = abs(v.z1) <= Real(tol.eps_cluster) * abs(v.z0);
            if (near_inf && is_exact_critical_value(f, std::nullopt)) {
                v = SpherePoint::infinity();
            } else if (!v.is_infinity()) {
                auto cand = rationalize(v.value(), rationalize_bound());
                if (cand && is_exact_critical_value(f, cand)) v = SpherePoint::from_exact(*cand);
            }
        }
        bool dup = false;
        for (const auto& u : out)
            if (same_point(u, v, tol.eps_orbit)) dup = true;
        if (!dup) out.push_back(v);
    }
    return out;
}

std::vector<OrbitRecord> postcritical_prefix(const RationalMap& f_in, int T, const Tolerances& tol,
                                             const CoincidenceCheck& confirm) {
    constexpr unsigned kExactBitLimit = 2048;
    const RationalMap f = f_in.at_current_precision();
    const RationalMap f_float = f.to_float();
    std::vector<OrbitRecord> orbits;
    SpatialIndex index(1e-9);
    const double eps = tol.eps_orbit;

    auto close = [&](const SpherePoint& a, const SpherePoint& b) { return same_point(a, b, eps); };
    auto both_exact = [](const SpherePoint& a, const SpherePoint& b) { return a.is_exact() && b.is_exact(); };

    for (const SpherePoint& start : critical_values(f, tol)) {
        const int me = static_cast<int>(orbits.size());
        orbits.emplace_back();
        OrbitRecord& rec = orbits.back();
        rec.points.push_back(start);

        // Pending float candidates, confirmed by later steps.
        int pending_revisit = -1, pending_revisit_target = -1;
        int pending_merge_orbit = -1, pending_merge_step = -1, pending_merge_target = -1;
        std::vector<int> rejected;  // orbits whose float coincidence failed the check
        auto accept = [&](int o1, int s1, int o2, int s2) { return !confirm || confirm(orbits, o1, s1, o2, s2); };

        for (int step = 0; step <= T; ++step) {
            const SpherePoint& x = rec.points[static_cast<std::size_t>(step)];

            // Confirm pending candidates.
            if (pending_revisit >= 0) {
                const int lag = step - pending_revisit;
                if (close(x, rec.points[static_cast<std::size_t>(pending_revisit_target + lag)])) {
                    if (lag >= 1) {
                        if (!accept(me, pending_revisit, me, pending_revisit_target)) {
                            rec.converging = true;
                            break;
                        }
                        rec.revisit_step = pending_revisit;
                        rec.revisit_target = pending_revisit_target;
                        rec.points.resize(static_cast<std::size_t>(pending_revisit + 1));
                        break;
                    }
                } else {
                    pending_revisit = -1;
                }
            }
            if (pending_merge_orbit >= 0) {
                const int lag = step - pending_merge_step;
                const OrbitRecord& other = orbits[static_cast<std::size_t>(pending_merge_orbit)];
                const int idx = wrapped_index(other, pending_merge_target + lag);
                if (idx >= 0 && close(x, other.points[static_cast<std::size_t>(idx)])) {
                    if (lag >= 2 && !accept(me, pending_merge_step, pending_merge_orbit, pending_merge_target)) {
                        rejected.push_back(pending_merge_orbit);
                        pending_merge_orbit = -1;
                    } else if (lag >= 2) {
                        rec.merge_orbit = pending_merge_orbit;
                        rec.merge_step = pending_merge_step;
                        rec.merge_target_step = pending_merge_target;
                        rec.points.resize(static_cast<std::size_t>(pending_merge_step + 1));
                        break;
                    }
                } else {
                    pending_merge_orbit = -1;
                }
            }

            // New coincidences at this step.
            if (pending_revisit < 0 && pending_merge_orbit < 0) {
                int hit_orbit = -1, hit_step = -1;
                bool hit_exact = false;
                // Exact coincidences first, then the orbit's own points.
                int best = -1;
                index.for_neighbours(x, [&](int o, int s) {
                    if (std::find(rejected.begin(), rejected.end(), o) != rejected.end()) return;
                    const OrbitRecord& other = orbits[static_cast<std::size_t>(o)];
                    const SpherePoint& y = other.points[static_cast<std::size_t>(s)];
                    if (!close(x, y)) return;
                    const bool exact = both_exact(x, y);
                    const int rank = 2 * exact + (o == me);
                    if (rank <= best) return;
                    best = rank;
                    hit_orbit = o;
                    hit_step = s;
                    hit_exact = exact;
                });
                if (hit_orbit == me) {
                    if (hit_exact) {
                        rec.revisit_step = step;
                        rec.revisit_target = hit_step;
                        break;
                    }
                    pending_revisit = step;
                    pending_revisit_target = hit_step;
                } else if (hit_orbit >= 0) {
                    if (hit_exact) {
                        rec.merge_orbit = hit_orbit;
                        rec.merge_step = step;
                        rec.merge_target_step = hit_step;
                        break;
                    }
                    pending_merge_orbit = hit_orbit;
                    pending_merge_step = step;
                    pending_merge_target = hit_step;
                }
            }
            index.insert(x, me, step);

            if (step == T) break;
            SpherePoint next;
            if (x.is_exact() && f.is_exact()) {
                next = f(x);
                const bool too_big = next.exact && bit_size(*next.exact) > kExactBitLimit;
                if (too_big) next.exact.reset();
            } else {
                next = f_float(x);
            }
            rec.points.push_back(std::move(next));
        }
    }
    return orbits;
}

}  // namespace fatou
