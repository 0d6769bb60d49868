// One PASS/FAIL line per acceptance criterion. Exit status is the number of failures.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>

#include "fatoulab/expr.hpp"
#include "fatoulab/fscount.hpp"
#include "fatoulab/residues.hpp"
#include "helpers.hpp"

using namespace fatou;
using namespace testing_helpers;

namespace {

// Pinned thresholds.
constexpr double kCrit1Seconds = 1.0;
constexpr double kCrit3Agreement = 1e-25;
constexpr double kCrit3Seconds = 30.0;
constexpr int kCrit3Germs = 24;
constexpr double kCrit4Float = 1e-10;
constexpr double kCrit5Coeff = 1e-20;
constexpr int kCrit5Pairs = 20;
constexpr double kCrit6Gram = 1e12;
constexpr double kCrit7Sigma = 1e-8;
constexpr int kCrit7Maps = 10;
constexpr double kCrit8Limit = 1e-2;
constexpr double kCrit8Law = 2e-2;
constexpr double kCrit8Seconds = 60.0;
constexpr double kCrit9Tol = 1e-3;
constexpr int kCrit10Maps = 50;
constexpr int kCrit10Pmax = 4;
constexpr int kCrit10IterCap = 1000;
constexpr double kCrit10Seconds = 600.0;

const Tolerances kTol = Tolerances::for_bits(256);

struct Outcome {
    bool pass = true;
    std::ostringstream detail;
    void require(bool ok, const std::string& what) {
        if (ok) return;
        if (!pass) detail << "; ";
        pass = false;
        detail << what;
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double dist(const Complex& a, const Complex& b) { return static_cast<double>(abs(a - b)); }

SpherePoint pt(const G& z) { return SpherePoint::from_exact(z); }

RationalQD exact_qd(std::initializer_list<G> num, std::initializer_list<G> den) {
    return RationalQD::exact(poly(num), poly(den));
}

Poly<G> from_roots(const std::vector<G>& roots) {
    Poly<G> p = Poly<G>::constant(G(1));
    for (const auto& r : roots) p = p * Poly<G>::linear_factor(r);
    return p;
}

RationalQD random_simple_qd(std::mt19937& rng, int count) {
    std::uniform_int_distribution<long> c(-6, 6);
    std::vector<G> roots;
    while (static_cast<int>(roots.size()) < count) {
        G r(Rational(c(rng), 3), Rational(c(rng), 4));
        if (std::find(roots.begin(), roots.end(), r) == roots.end()) roots.push_back(r);
    }
    std::vector<G> num;
    for (int k = 0; k <= std::max(0, count - 4); ++k) num.push_back(G(Rational(c(rng) == 0 ? 1 : c(rng)), Rational(c(rng), 5)));
    if (num.back().is_zero()) num.back() = G(1);
    return RationalQD::exact(Poly<G>(num), from_roots(roots));
}

Cycle parabolic_fixed(const RationalMap& f, const G& x) {
    Cycle c = cycle_through(f, pt(x), kTol);
    if (c.cls != CycleClass::Parabolic) throw Error(ErrorKind::NotParabolic, "not parabolic");
    return c;
}

Completion completion_of(const RationalMap& f, Cycle& c, const std::string& label) {
    const auto basis = invariant_divergence_basis(f, c, kTol);
    for (const auto& d : basis.elements)
        if (d.label == label) return complete_divergence(f, c, d.c, kTol);
    throw Error(ErrorKind::UnsupportedDivergence, "no " + label + " direction");
}

const RationalMap& lattes_map() {
    static const RationalMap f = RationalMap::exact(poly({1, 0, 2, 0, 1}), poly({0, -4, 0, 4}));
    return f;
}

void criterion1(Outcome& o) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto f = exact_map({q(1, 4), 0, 1});
    const FSReport r = check_fs(f, 2, 1000, kTol);
    const double t = seconds_since(t0);
    const Cycle* half = nullptr;
    for (const auto& c : r.gamma.cycles)
        if (c.period == 1 && c.points[0].exact && *c.points[0].exact == q(1, 2)) half = &c;
    o.require(half && half->cls == CycleClass::Parabolic && half->parabolic, "1/2 not reported parabolic");
    if (half && half->parabolic) {
        const auto& d = *half->parabolic;
        o.require(d.n == 1 && d.N == 1 && d.nu == 1, "n, N, nu differ from 1, 1, 1");
        o.require(d.beta_exact && *d.beta_exact == G(1), "beta is not exactly 1");
        o.require(half->gamma && *half->gamma == 1, "gamma of the cycle is not 1");
    }
    o.require(r.gamma.gamma_partial == 1 && r.delta.count == 1, "gamma_partial or delta differs from 1");
    o.require(r.pass, "verdict FAIL");
    o.require(t < kCrit1Seconds, "runtime " + std::to_string(t) + " s");
    o.detail << (o.pass ? "" : "; ") << "gamma " << r.gamma.gamma_partial << ", delta " << r.delta.count << ", "
             << t << " s";
}

void criterion2(Outcome& o) {
    const auto f = exact_map({0, -1, 1});
    Cycle c = cycle_through(f, pt(G(0)), kTol);
    o.require(c.cls == CycleClass::Parabolic, "0 is not parabolic");
    if (c.cls != CycleClass::Parabolic) return;
    const ParabolicData d = parabolic_invariants(f, c, kTol);
    o.require(d.n == 2 && d.N == 2 && d.nu == 1, "n, N, nu differ from 2, 2, 1");
    o.require(d.iota_exact && *d.iota_exact == q(1, 8), "iota is not exactly 1/8");
    o.require(d.beta_exact && *d.beta_exact == q(11, 2),
              "beta = " + (d.beta_exact ? d.beta_exact->str() : to_decimal(d.beta)) + ", expected 11/2");
    o.require(d.subtype == ParabolicSubtype::Repelling, "not parabolic-repelling");
    o.require(c.gamma && *c.gamma == 1, "gamma is not 1");
}

Complex root_of_unity(int k, int n) {
    const Real t = 2 * pi_real() * k / n;
    return {cos(t), sin(t)};
}

// psi^{-1} o h o psi with h = rho(w + w^{N+1} + alpha w^{2N+1}) + random higher terms.
TruncatedSeries<Complex> planted_germ(std::mt19937& rng, const Complex& rho, int N, const Complex& alpha, int T) {
    std::vector<Complex> h(static_cast<std::size_t>(T + 1)), p(static_cast<std::size_t>(T + 1));
    h[1] = rho;
    h[static_cast<std::size_t>(N + 1)] = rho;
    h[static_cast<std::size_t>(2 * N + 1)] = rho * alpha;
    for (int k = 2 * N + 2; k <= T; ++k) h[static_cast<std::size_t>(k)] = random_complex(rng, 0.3);
    p[1] = random_complex(rng, 0.5) + cx(1.0);
    for (int k = 2; k <= T; ++k) p[static_cast<std::size_t>(k)] = random_complex(rng, 0.3);
    const TruncatedSeries<Complex> hs(h, T), ps(p, T);
    return series_compose(series_revert(ps), series_compose(hs, ps));
}

void criterion3(Outcome& o) {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937 rng(3);
    int germs = 0;
    double worst = 0;
    const std::vector<std::pair<int, int>> rotations{{1, 1}, {1, 2}, {1, 3}, {2, 3}, {1, 4}, {3, 4}};
    for (int i = 0; germs < kCrit3Germs; ++i) {
        const auto [p, n] = rotations[static_cast<std::size_t>(i) % rotations.size()];
        const int nu = 1 + (i / 6) % 2;
        const int N = nu * n;
        const Complex rho = n == 1 ? cx(1) : root_of_unity(p, n);
        const Complex alpha = random_complex(rng, 1.0);
        const Complex beta = Complex(Real(N + 1) / 2) - alpha;
        const auto g = planted_germ(rng, rho, N, alpha, 2 * N + 4);
        const ParabolicData d = germ_invariants(g, n, kTol);
        const auto red = reduce_normal_form(g, n, kTol);
        o.require(d.N == N && d.nu == nu && red.N == N, "germ " + std::to_string(germs) + ": N or nu wrong");
        worst = std::max({worst, dist(d.beta, red.beta), dist(d.beta, beta), dist(red.beta, beta)});
        ++germs;
    }
    const double t = seconds_since(t0);
    o.require(worst < kCrit3Agreement, "disagreement " + std::to_string(worst));
    o.require(t < kCrit3Seconds, "runtime " + std::to_string(t) + " s");
    o.detail << (o.pass ? "" : "; ") << germs << " germs, worst |dbeta| " << worst << ", " << t << " s";
}

void criterion4(Outcome& o) {
    const auto f = exact_map({0, 0, 1});
    const auto q0 = RationalQD::exact(poly({1}), poly({-1, 0, 1}) * poly({-4, 0, 1}));
    const auto expected = RationalQD::exact(poly({1}), poly({0, 2}) * poly({-1, 1}) * poly({-4, 1}));
    const auto exact = pushforward(f, q0, kTol);
    o.require(exact.is_exact() && exact.exact_num() == expected.exact_num() && exact.exact_den() == expected.exact_den(),
              "exact pushforward differs");
    const double d = coefficient_distance(pushforward(f.to_float(), q0.to_float(), kTol), expected);
    o.require(d < kCrit4Float, "float distance " + std::to_string(d));
    o.detail << (o.pass ? "" : "; ") << "float distance " << d;
}

void criterion5(Outcome& o) {
    std::mt19937 rng(55);
    double worst = 0;
    for (int k = 0; k < kCrit5Pairs; ++k) {
        const int d = 2 + k % 2;
        const auto f = random_exact_map(rng, d).to_float();
        const auto qd = random_simple_qd(rng, 4 + k % 3).to_float();
        worst = std::max(worst, coefficient_distance(pushforward(f, pullback(f, qd, kTol), kTol), qd.scaled(Complex(d))));
    }
    o.require(worst < kCrit5Coeff, "worst distance " + std::to_string(worst));
    o.detail << (o.pass ? "" : "; ") << kCrit5Pairs << " pairs, worst " << worst;
}

void criterion6(Outcome& o) {
    std::mt19937 rng(6);
    double worst = 0;
    for (int n = 4; n <= 8; ++n) {
        std::vector<SpherePoint> a;
        while (static_cast<int>(a.size()) < n) {
            const auto z = SpherePoint::affine(random_complex(rng, 2.0));
            bool far = true;
            for (const auto& y : a)
                if (static_cast<double>(chordal_distance(y, z)) < 0.05) far = false;
            if (far) a.push_back(z);
        }
        const auto b = basis_Q(a, kTol);
        o.require(b.dimension() == n - 3, "#A = " + std::to_string(n) + ": dimension " + std::to_string(b.dimension()));
        worst = std::max(worst, b.gram_condition);
    }
    o.require(worst < kCrit6Gram, "Gram condition " + std::to_string(worst));
    o.detail << (o.pass ? "" : "; ") << "worst Gram condition " << worst;
}

// Nonrepelling cycles plus the first three points of every critical orbit.
std::vector<SpherePoint> recipe_points(const RationalMap& f) {
    std::vector<SpherePoint> a;
    auto add = [&](const SpherePoint& x) {
        for (const auto& y : a)
            if (same_point(x, y, 1e-12)) return;
        a.push_back(x);
    };
    for (const auto& c : enumerate_cycles(f, 2, kTol))
        if (c.cls != CycleClass::Repelling)
            for (const auto& p : c.points) add(p);
    for (const auto& cv : critical_values(f, kTol)) {
        SpherePoint x = cv;
        for (int k = 0; k < 3; ++k) {
            add(x);
            x = f(x);
        }
    }
    return a;
}

void criterion7(Outcome& o) {
    std::mt19937 rng(77);
    int maps = 0;
    double worst = 1;
    while (maps < kCrit7Maps) {
        const auto f = random_exact_map(rng, 2);
        if (lattes_test(f, kTol).lattes) continue;
        const auto a = recipe_points(f);
        if (a.size() < 4) continue;
        const auto op = nabla_matrix(f, a, kTol);
        o.require(op.injective && op.sigma_ratio > kCrit7Sigma, "map " + print_map(f) + ": sigma ratio " +
                                                                     std::to_string(op.sigma_ratio));
        worst = std::min(worst, op.sigma_ratio);
        ++maps;
    }
    const auto v = lattes_test(lattes_map(), kTol);
    o.require(v.lattes && v.witness, "Lattes map not detected");
    if (v.witness) {
        const auto pulled = pullback(lattes_map(), *v.witness, kTol);
        const auto four = v.witness->scaled_exact(G(4));
        o.require(pulled.is_exact() && pulled.exact_num() == four.exact_num() && pulled.exact_den() == four.exact_den(),
                  "f*q != 4 q");
    }
    o.detail << (o.pass ? "" : "; ") << maps << " maps, smallest sigma ratio " << worst << "; Lattes witness exact";
}

void criterion8(Outcome& o) {
    FluxOptions opts;
    opts.r0 = 0.05;
    double slowest = 0;
    auto timed = [&](const RationalMap& f, const Cycle& c, const RationalQD& qd) {
        const auto t0 = std::chrono::steady_clock::now();
        const double v = residue_flux(f, c, qd, opts, kTol).limit;
        slowest = std::max(slowest, seconds_since(t0));
        return v;
    };
    const auto att = exact_map({0, q(1, 2), 1});
    Cycle ca = cycle_through(att, pt(G(0)), kTol);
    const auto qa = completion_of(att, ca, "dw2/w2").q;
    const double ra = timed(att, ca, qa);
    o.require(std::abs(ra + std::log(2.0)) < kCrit8Limit, "attracting flux " + std::to_string(ra));

    const auto par = exact_map({q(1, 4), 0, 1});
    Cycle cp = parabolic_fixed(par, q(1, 2));
    const auto qp = completion_of(par, cp, "q_f").q;
    const double rp = timed(par, cp, qp);
    o.require(std::abs(rp - 1.0) < kCrit8Limit, "parabolic flux " + std::to_string(rp));

    double worst_law = 0;
    for (int m : {2, 3}) {
        const auto am = att.iterate(m);
        worst_law = std::max(worst_law, std::abs(timed(am, cycle_through(am, pt(G(0)), kTol), qa) - m * ra));
        const auto pm = par.iterate(m);
        worst_law = std::max(worst_law, std::abs(timed(pm, parabolic_fixed(pm, q(1, 2)), qp) - m * rp));
    }
    o.require(worst_law < kCrit8Law, "iteration law off by " + std::to_string(worst_law));
    o.require(slowest < kCrit8Seconds, "slowest flux " + std::to_string(slowest) + " s");
    o.detail << (o.pass ? "" : "; ") << "attracting " << ra << ", parabolic " << rp << ", law " << worst_law
             << ", slowest " << slowest << " s";
}

void criterion9(Outcome& o) {
    std::vector<std::pair<RationalMap, RationalQD>> corpus;
    {
        const auto att = exact_map({0, q(1, 2), 1});
        Cycle c = cycle_through(att, pt(G(0)), kTol);
        corpus.emplace_back(att, completion_of(att, c, "dw2/w2").q);
        const auto par = exact_map({q(1, 4), 0, 1});
        Cycle p = parabolic_fixed(par, q(1, 2));
        corpus.emplace_back(par, completion_of(par, p, "q_f").q);
        corpus.emplace_back(par, completion_of(par, p, "D0:0").q);
        const auto sq = exact_map({0, 0, 1});
        Cycle r = cycle_through(sq, pt(G(1)), kTol);
        corpus.emplace_back(sq, complete_divergence(sq, r, {cx(1)}, kTol).q);
    }
    corpus.emplace_back(exact_map({gi(0, 1), 0, 1}), exact_qd({1}, {0, -1, 0, 1}));
    corpus.emplace_back(exact_map({0, 0, 1}), exact_qd({1}, {0, -1, 0, 1}));
    corpus.emplace_back(exact_map({-1, 0, 1}), exact_qd({1}, {0, -1, 0, 1}));
    std::mt19937 rng(9);
    while (corpus.size() < 10) {
        const auto f = random_exact_map(rng, 2);
        corpus.emplace_back(f, exact_qd({q(static_cast<long>(corpus.size()), 3)}, {0, gi(-1, 1), gi(1, -1), 1}));
    }
    double worst = 1e300;
    for (const auto& [f, qd] : corpus) {
        const auto rep = balance_check(f, qd, kCrit9Tol, kTol);
        worst = std::min(worst, rep.slack);
        o.require(rep.slack >= -2 * kCrit9Tol, print_map(f) + ": slack " + std::to_string(rep.slack));
    }
    const auto v = lattes_test(lattes_map(), kTol);
    o.require(v.witness.has_value(), "no Lattes witness");
    if (v.witness) {
        const auto rep = balance_check(lattes_map(), *v.witness, kCrit9Tol, kTol);
        o.require(std::abs(rep.nabla.value) < kCrit9Tol, "Lattes ||nabla q|| = " + std::to_string(rep.nabla.value));
        o.require(std::abs(rep.dec.value) < kCrit9Tol, "Lattes Dec = " + std::to_string(rep.dec.value));
        o.require(std::abs(rep.res_total) < kCrit9Tol, "Lattes Res = " + std::to_string(rep.res_total));
    }
    o.detail << (o.pass ? "" : "; ") << corpus.size() << " pairs, smallest slack " << worst;
}

void criterion10(Outcome& o) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<RationalMap> maps{exact_map({0, 0, 1}), exact_map({-1, 0, 1}), exact_map({gi(0, 1), 0, 1}),
                                  exact_map({q(1, 4), 0, 1}),
                                  parse_map("z^2 + 0.1").map};
    std::mt19937 rng(1010);
    while (static_cast<int>(maps.size()) < kCrit10Maps) maps.push_back(random_exact_map(rng, 2 + maps.size() % 2));
    int equal = 0;
    for (const auto& f : maps) {
        const FSReport r = check_fs(f, kCrit10Pmax, kCrit10IterCap, kTol);
        o.require(r.pass, print_map(f) + ": gamma " + std::to_string(r.gamma.gamma_partial) + " > delta " +
                              std::to_string(r.delta.count));
        o.require(r.classical_pass, print_map(f) + ": classical count " + std::to_string(r.classical_count));
        equal += r.gamma.gamma_partial == r.delta.count;
    }
    const double t = seconds_since(t0);
    o.require(t < kCrit10Seconds, "runtime " + std::to_string(t) + " s");
    o.detail << (o.pass ? "" : "; ") << maps.size() << " maps, " << equal << " with equality, " << t << " s";
}

}  // namespace

int main() {
    PrecisionScope scope(256);
    const std::vector<std::pair<int, std::function<void(Outcome&)>>> criteria{
        {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4}, {5, criterion5},
        {6, criterion6}, {7, criterion7}, {8, criterion8}, {9, criterion9}, {10, criterion10}};
    int failures = 0;
    for (const auto& [k, run] : criteria) {
        Outcome o;
        try {
            run(o);
        } catch (const std::exception& e) {
            o.require(false, std::string("exception: ") + e.what());
        }
        failures += !o.pass;
        std::printf("CRITERION %d: %s (%s)\n", k, o.pass ? "PASS" : "FAIL", o.detail.str().c_str());
        std::fflush(stdout);
    }
    return failures;
}
