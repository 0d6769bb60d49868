#include "fatoulab/parabolic.hpp"

#include <algorithm>

namespace fatou {

namespace {

template <class S>
S half_of(int k) {
    if constexpr (ScalarTraits<S>::exact)
        return G(Rational(k, 2));
    else
        return Complex(Real(k) / 2, Real(0));
}

template <class S>
S power(const S& x, int k) {
    S r = scalar<S>(1);
    for (int i = 0; i < k; ++i) r *= x;
    return r;
}

template <class S>
bool negligible(const S& x, double eps) {
    if constexpr (ScalarTraits<S>::exact)
        return is_zero(x);
    else
        return magnitude(x) <= eps;
}

/// Germ of f from the chart `in` (at x) to the chart `out` (at f(x)).
template <class S>
TruncatedSeries<S> local_germ(const Poly<S>& P, const Poly<S>& Q, int D, const Mobius<S>& in, const Mobius<S>& out,
                              int T) {
    const Mobius<S> inv = in.inverse();
    const Poly<S> z0({inv.b, inv.a}), z1({inv.d, inv.c});
    const Poly<S> p = homogeneous_substitute(P, D, z0, z1);
    const Poly<S> q = homogeneous_substitute(Q, D, z0, z1);
    const Poly<S> num = p * out.a + q * out.b;
    const Poly<S> den = p * out.c + q * out.d;
    std::vector<S> nc = num.coeffs();
    nc.resize(static_cast<std::size_t>(T + 1), scalar<S>(0));
    if constexpr (!ScalarTraits<S>::exact) nc[0] = scalar<S>(0);
    else if (!is_zero(nc[0])) throw Error(ErrorKind::OrbitMismatch, "cycle point does not map to its successor");
    const TruncatedSeries<S> ds = TruncatedSeries<S>::from_poly(den, T);
    if (negligible(ds[0], 0.0)) throw Error(ErrorKind::IndeterminatePoint, "chart germ has a pole at 0");
    return (TruncatedSeries<S>(std::move(nc), T) * series_inverse_unit(ds)).truncated(T);
}

template <class S>
ParabolicData invariants_impl(const TruncatedSeries<S>& g1, int n, const Tolerances& tol) {
    if (n < 1) throw Error(ErrorKind::NotParabolic, "rotation order must be positive");
    const TruncatedSeries<S> g = germ_iterate(g1, n);
    const int order = g.order();
    if (order < 2) throw Error(ErrorKind::InsufficientOrder, "germ order below 2");
    std::vector<S> c = g.coeffs();
    if constexpr (ScalarTraits<S>::exact) {
        if (!is_zero(c[0]) || !(c[1] == scalar<S>(1)))
            throw Error(ErrorKind::NotParabolic, "first return is not tangent to the identity");
    } else {
        if (magnitude(c[1] - scalar<S>(1)) > tol.eps_unity)
            throw Error(ErrorKind::NotParabolic, "first return is not tangent to the identity");
        c[0] = scalar<S>(0);
        c[1] = scalar<S>(1);
    }
    int N = 0;
    for (int k = 2; k <= order; ++k) {
        if (!negligible(c[static_cast<std::size_t>(k)], tol.eps_series)) {
            N = k - 1;
            break;
        }
        c[static_cast<std::size_t>(k)] = scalar<S>(0);
    }
    if (N == 0)
        throw Error(ErrorKind::InsufficientOrder,
                    "iterate agrees with the identity through order " + std::to_string(order));
    if (N % n != 0)
        throw Error(ErrorKind::NonDivisible,
                    "N = " + std::to_string(N) + " is not a multiple of n = " + std::to_string(n));
    if (order < 2 * N + 2)
        throw Error(ErrorKind::InsufficientOrder,
                    "order " + std::to_string(order) + " below 2N+2 = " + std::to_string(2 * N + 2));

    std::vector<S> diff(static_cast<std::size_t>(2 * N + 2), scalar<S>(0));
    for (int k = 2; k <= 2 * N + 1; ++k) diff[static_cast<std::size_t>(k)] = -c[static_cast<std::size_t>(k)];
    const S iota = laurent_reciprocal(TruncatedSeries<S>(std::move(diff), 2 * N + 1)).residue();
    const S beta = scalar<S>(n) * (half_of<S>(N + 1) - iota);

    ParabolicData d;
    d.n = n;
    d.N = N;
    d.nu = N / n;
    d.iota = convert_scalar<Complex>(iota);
    d.beta = convert_scalar<Complex>(beta);
    d.truncation_order = g1.order();
    if constexpr (ScalarTraits<S>::exact) {
        d.iota_exact = iota;
        d.beta_exact = beta;
        const Rational& re = beta.re();
        d.subtype = re > 0 ? ParabolicSubtype::Repelling
                           : (re < 0 ? ParabolicSubtype::Attracting : ParabolicSubtype::Indifferent);
    } else {
        const Real re = beta.real();
        if (re > Real(tol.eps_beta)) d.subtype = ParabolicSubtype::Repelling;
        else if (re < -Real(tol.eps_beta)) d.subtype = ParabolicSubtype::Attracting;
        else {
            d.subtype = ParabolicSubtype::Indifferent;
            d.within_tolerance = true;
        }
    }
    return d;
}

/// Order N + 1 of g^n - id, read off without cleaning.
template <class S>
int tangency_order(const TruncatedSeries<S>& g1, int n, double eps) {
    const TruncatedSeries<S> g = germ_iterate(g1, n);
    for (int k = 2; k <= g.order(); ++k)
        if (!negligible(g[k], eps)) return k - 1;
    throw Error(ErrorKind::InsufficientOrder, "iterate agrees with the identity through order " +
                                                  std::to_string(g.order()));
}

template <class S>
NormalFormReduction<S> reduce_impl(const TruncatedSeries<S>& g_in, int n, const Tolerances& tol) {
    if (g_in.order() < 2 || !negligible(g_in[0], tol.eps_series))
        throw Error(ErrorKind::NonzeroConstantTerm, "germ must fix 0");
    const int N_iter = tangency_order(g_in, n, tol.eps_series);
    const int O = 2 * N_iter + 1;
    if (g_in.order() < O) throw Error(ErrorKind::InsufficientOrder, "germ order below 2N+1");

    std::vector<S> gc = g_in.coeffs();
    gc[0] = scalar<S>(0);
    TruncatedSeries<S> h(gc, O);
    TruncatedSeries<S> psi = TruncatedSeries<S>::identity(O);
    const S rho = h[1];

    auto conjugated = [&](int k, const S& cc) {
        std::vector<S> pc(static_cast<std::size_t>(k + 1), scalar<S>(0));
        pc[1] = scalar<S>(1);
        pc[static_cast<std::size_t>(k)] = cc;
        const TruncatedSeries<S> p(std::move(pc), O);
        const TruncatedSeries<S> pinv = series_revert(p);
        return std::make_pair(series_compose(p, series_compose(h, pinv)).truncated(O),
                              series_compose(p, psi).truncated(O));
    };
    auto apply = [&](int k, const S& cc) {
        auto [h2, p2] = conjugated(k, cc);
        h = std::move(h2);
        psi = std::move(p2);
    };

    int N = 0;
    for (int k = 2; k <= O; ++k) {
        if (N > 0 && k == 2 * N + 1) break;
        const S hk = h[k];
        if (negligible(hk, tol.eps_series)) {
            h.coeff(k) = scalar<S>(0);
            continue;
        }
        if ((k - 1) % n != 0) {
            apply(k, hk / (rho - power(rho, k)));
        } else if (N == 0) {
            N = k - 1;
            continue;
        } else {
            // The coefficient at k is affine in c for the substitution zeta + c zeta^{k-N}.
            const int m = k - N;
            const S slope = conjugated(m, scalar<S>(1)).first[k] - hk;
            apply(m, -hk / slope);
        }
        h.coeff(k) = scalar<S>(0);
    }
    if (N == 0 || N != N_iter)
        throw Error(ErrorKind::VerificationFailed, "reduction and iterate disagree on N");

    NormalFormReduction<S> r;
    r.N = N;
    r.rho = rho;
    r.a = h[N + 1] / rho;
    r.b = h[2 * N + 1] / rho;
    r.alpha = r.b / (r.a * r.a);
    r.beta = half_of<S>(N + 1) - r.alpha;
    r.coordinate = psi;
    return r;
}

Complex nth_root(const Complex& a, int N) {
    const Real r = pow(abs(a), Real(1) / Real(N));
    const Real th = atan2(a.imag(), a.real()) / Real(N);
    return {r * cos(th), r * sin(th)};
}

LaurentSeries<Complex> derivative_squared(const TruncatedSeries<Complex>& phi) {
    const TruncatedSeries<Complex> d = phi.derivative();
    return LaurentSeries<Complex>::from_series(d * d);
}

std::vector<Complex> polar_coefficients(const LaurentSeries<Complex>& L, int J) {
    std::vector<Complex> c(static_cast<std::size_t>(J + 1));
    for (int j = 0; j <= J; ++j) c[static_cast<std::size_t>(j)] = L[-(j + 2)];
    return c;
}

void verify(const TruncatedSeries<Complex>& g, const Divergence& d, const Tolerances& tol) {
    const std::vector<Complex> back = pullback_polar(g, d.c);
    double scale = 1.0;
    for (const auto& x : d.c) scale = std::max(scale, magnitude(x));
    for (std::size_t j = 0; j < d.c.size(); ++j)
        if (magnitude(back[j] - d.c[j]) > tol.eps_series * scale)
            throw Error(ErrorKind::VerificationFailed,
                        "pullback of " + d.label + " misses at order " + std::to_string(-static_cast<int>(j) - 2));
}

}  // namespace

Mobius<Complex> chart_at(const SpherePoint& x) {
    const Complex one(1), zero(0);
    if (uses_infinity_chart(x)) return {-(x.z1 / x.z0), one, one, zero};
    return {one, -(x.z0 / x.z1), zero, one};
}

std::optional<Mobius<G>> exact_chart_at(const SpherePoint& x) {
    if (x.exact_infinity) return Mobius<G>::inversion();
    if (!x.exact) return std::nullopt;
    if (uses_infinity_chart(x.exact)) return Mobius<G>{-(G(1) / *x.exact), G(1), G(1), G(0)};
    return Mobius<G>{G(1), -*x.exact, G(0), G(1)};
}

TruncatedSeries<Complex> step_germ(const RationalMap& f_in, const SpherePoint& x, const SpherePoint& y, int T) {
    const RationalMap f = f_in.at_current_precision();
    return local_germ(f.num(), f.den(), f.degree(), chart_at(x), chart_at(y), T);
}

TruncatedSeries<Complex> germ_at(const RationalMap& f_in, const Cycle& c, int T) {
    const RationalMap f = f_in.at_current_precision();
    const std::size_t k = c.points.size();
    TruncatedSeries<Complex> acc;
    for (std::size_t j = 0; j < k; ++j) {
        const auto g = local_germ(f.num(), f.den(), f.degree(), chart_at(c.points[j]),
                                  chart_at(c.points[(j + 1) % k]), T);
        acc = j == 0 ? g : series_compose(g, acc).truncated(T);
    }
    return acc;
}

std::optional<TruncatedSeries<G>> germ_at_exact(const RationalMap& f, const Cycle& c, int T) {
    if (!f.is_exact()) return std::nullopt;
    std::vector<Mobius<G>> charts;
    for (const auto& p : c.points) {
        auto m = exact_chart_at(p);
        if (!m) return std::nullopt;
        charts.push_back(*m);
    }
    const std::size_t k = charts.size();
    TruncatedSeries<G> acc;
    for (std::size_t j = 0; j < k; ++j) {
        const auto g = local_germ(f.exact_num(), f.exact_den(), f.degree(), charts[j], charts[(j + 1) % k], T);
        acc = j == 0 ? g : series_compose(g, acc).truncated(T);
    }
    return acc;
}

ParabolicData germ_invariants(const TruncatedSeries<Complex>& g, int n, const Tolerances& tol) {
    return invariants_impl(g, n, tol);
}

ParabolicData germ_invariants(const TruncatedSeries<G>& g, int n, const Tolerances& tol) {
    return invariants_impl(g, n, tol);
}

NormalFormReduction<Complex> reduce_normal_form(const TruncatedSeries<Complex>& g, int n, const Tolerances& tol) {
    return reduce_impl(g, n, tol);
}

NormalFormReduction<G> reduce_normal_form(const TruncatedSeries<G>& g, int n, const Tolerances& tol) {
    return reduce_impl(g, n, tol);
}

ParabolicData parabolic_invariants(const RationalMap& f, Cycle& c, const Tolerances& tol) {
    if (c.cls != CycleClass::Parabolic || c.rotation_order < 1)
        throw Error(ErrorKind::NotParabolic, "cycle is classified " + std::string(to_string(c.cls)));
    const int n = c.rotation_order;
    constexpr int kMaxOrder = 512;
    int T = std::min(2 * c.period * f.degree() + 4, kMaxOrder);
    for (;;) {
        try {
            ParabolicData d;
            if (auto ge = germ_at_exact(f, c, T)) d = germ_invariants(*ge, n, tol);
            else d = germ_invariants(germ_at(f, c, T), n, tol);
            c.parabolic = d;
            c.gamma = gamma_of_cycle(c);
            return d;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::InsufficientOrder || T >= kMaxOrder) throw;
            T = std::min(2 * T, kMaxOrder);
        }
    }
}

int gamma_of_cycle(const Cycle& c) {
    switch (c.cls) {
    case CycleClass::Repelling:
    case CycleClass::Superattracting: return 0;
    case CycleClass::Attracting:
    case CycleClass::IrrationallyIndifferent: return 1;
    case CycleClass::Parabolic: break;
    }
    if (!c.parabolic) throw Error(ErrorKind::MissingParabolicData, "parabolic cycle without invariants");
    return c.parabolic->nu + (c.parabolic->subtype == ParabolicSubtype::Repelling ? 0 : 1);
}

int DivergenceBasis::flat_dimension() const {
    return static_cast<int>(std::count_if(elements.begin(), elements.end(), [](const Divergence& d) { return d.flat; }));
}

std::vector<Complex> pullback_polar(const TruncatedSeries<Complex>& g_in, const std::vector<Complex>& c) {
    const int J = static_cast<int>(c.size()) - 1;
    std::vector<Complex> out(c.size());
    if (J < 0) return out;
    const TruncatedSeries<Complex> g = g_in.truncated(J + 2);
    const LaurentSeries<Complex> dg2 = derivative_squared(g);
    for (int j = 0; j <= J; ++j) {
        if (is_zero(c[static_cast<std::size_t>(j)])) continue;
        const LaurentSeries<Complex> term = laurent_power(g, -(j + 2)) * dg2;
        for (int i = 0; i <= J; ++i) {
            if (-(i + 2) < term.leading_exponent()) continue;
            out[static_cast<std::size_t>(i)] += c[static_cast<std::size_t>(j)] * term[-(i + 2)];
        }
    }
    return out;
}

DivergenceBasis divergence_basis_for_germ(const TruncatedSeries<Complex>& g, CycleClass cls,
                                          const std::optional<ParabolicData>& data, const Tolerances& tol) {
    DivergenceBasis basis;
    if (cls == CycleClass::Superattracting) return basis;
    if (cls != CycleClass::Parabolic) {
        Divergence d;
        d.c = {Complex(1)};
        d.flat = cls != CycleClass::Repelling;
        d.label = "dw2/w2";
        verify(g, d, tol);
        basis.elements.push_back(std::move(d));
        return basis;
    }
    if (!data) throw Error(ErrorKind::MissingParabolicData, "parabolic germ without invariants");
    const int n = data->n, N = data->N;
    const auto red = reduce_normal_form(g, n, tol);
    const TruncatedSeries<Complex> phi = nth_root(red.a, N) * red.coordinate;
    const LaurentSeries<Complex> dphi2 = derivative_squared(phi);

    for (int l = 0; l < data->nu; ++l) {
        Divergence d;
        const int j = l * n;
        d.c = polar_coefficients(laurent_power(phi, -(j + 2)) * dphi2, j);
        d.flat = true;
        d.label = "D0:" + std::to_string(l);
        verify(g, d, tol);
        basis.elements.push_back(std::move(d));
    }
    const TruncatedSeries<Complex> s = series_pow(phi, static_cast<unsigned>(N + 1)) -
                                       data->beta * series_pow(phi, static_cast<unsigned>(2 * N + 1));
    Divergence qf;
    qf.c = polar_coefficients(laurent_power(s, -2) * dphi2, 2 * N);
    qf.flat = data->subtype != ParabolicSubtype::Repelling;
    qf.label = "q_f";
    verify(g, qf, tol);
    basis.qf_index = static_cast<int>(basis.elements.size());
    basis.elements.push_back(std::move(qf));
    return basis;
}

DivergenceBasis invariant_divergence_basis(const RationalMap& f, Cycle& c, const Tolerances& tol) {
    if (c.cls == CycleClass::Parabolic && !c.parabolic) parabolic_invariants(f, c, tol);
    const int T = c.parabolic ? std::max(c.parabolic->truncation_order, 2 * c.parabolic->N + 2) : 4;
    DivergenceBasis basis = divergence_basis_for_germ(germ_at(f, c, T), c.cls, c.parabolic, tol);
    const Mobius<Complex> chart = chart_at(c.points.front());
    for (auto& d : basis.elements) d.chart = chart;
    return basis;
}

std::vector<Complex> decompose(const DivergenceBasis& basis, const std::vector<Complex>& polar, double tol) {
    std::size_t width = polar.size();
    for (const auto& d : basis.elements) width = std::max(width, d.c.size());
    std::vector<Complex> r(width);
    std::copy(polar.begin(), polar.end(), r.begin());
    double scale = 1.0;
    for (const auto& x : polar) scale = std::max(scale, magnitude(x));

    std::vector<std::size_t> order(basis.elements.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return basis.elements[a].c.size() > basis.elements[b].c.size(); });

    std::vector<Complex> coords(basis.elements.size());
    for (std::size_t i : order) {
        const auto& e = basis.elements[i].c;
        const std::size_t lead = e.size() - 1;
        const Complex k = r[lead] / e[lead];
        coords[i] = k;
        for (std::size_t j = 0; j <= lead; ++j) r[j] -= k * e[j];
    }
    for (std::size_t j = 0; j < r.size(); ++j)
        if (magnitude(r[j]) > tol * scale)
            throw Error(ErrorKind::UnsupportedDivergence,
                        "polar term of order " + std::to_string(-static_cast<int>(j) - 2) + " is not invariant");
    return coords;
}

}  // namespace fatou
