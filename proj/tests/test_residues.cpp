#include <doctest.h>

#include <cmath>
#include <random>

#include "fatoulab/residues.hpp"
#include "helpers.hpp"

using namespace fatou;
using namespace testing_helpers;

namespace {

const Tolerances kTol = Tolerances::for_bits(256);

Cycle fixed_cycle(const RationalMap& f, const G& x) { return cycle_through(f, SpherePoint::from_exact(x), kTol); }

// Completion of the basis element with the given label at a fixed point.
Completion completion_of(const RationalMap& f, Cycle& c, const std::string& label) {
    const auto basis = invariant_divergence_basis(f, c, kTol);
    for (const auto& d : basis.elements)
        if (d.label == label) return complete_divergence(f, c, d.c, kTol);
    FAIL("no basis element " << label);
    return {};
}

const RationalMap& attracting_map() {
    static const RationalMap f = exact_map({0, q(1, 2), 1});
    return f;
}

const RationalMap& parabolic_map() {
    static const RationalMap f = exact_map({q(1, 4), 0, 1});
    return f;
}

}  // namespace

TEST_CASE("polar part in charts") {
    SUBCASE("affine chart") {
        // 1/(z (z-1)^3) = s^-3 (1 - s + s^2 - ...) in s = z - 1
        const auto qd = RationalQD::exact(poly({1}), poly({0, 1}) * pow(poly({-1, 1}), 3u));
        const auto p = polar_part(qd, SpherePoint::from_exact(G(1)), kTol);
        REQUIRE(p.size() == 2);
        CHECK(magnitude(p[0] - cx(-1)) < 1e-60);
        CHECK(magnitude(p[1] - cx(1)) < 1e-60);
    }
    SUBCASE("chart at infinity") {
        // z^2 dz^2 reads w^-6 dw^2 in w = 1/z
        const auto p = polar_part(RationalQD::exact(poly({0, 0, 1}), poly({1})), SpherePoint::infinity(), kTol);
        REQUIRE(p.size() == 5);
        CHECK(magnitude(p[4] - cx(1)) < 1e-60);
        CHECK(magnitude(p[0]) < 1e-60);
    }
    SUBCASE("simple pole has no polar part") {
        CHECK(polar_part(RationalQD::exact(poly({1}), poly({0, 1})), SpherePoint::from_exact(G(0)), kTol).empty());
    }
}

TEST_CASE("closed-form residues") {
    SUBCASE("attracting, c = 1") {
        Cycle c;
        c.multiplier = cx(0.5);
        c.cls = CycleClass::Attracting;
        CHECK(residue_closed(c, cx(1)) == doctest::Approx(-std::log(2.0)).epsilon(1e-15));
        CHECK(residue_closed(c, cx(0)) == 0);
    }
    SUBCASE("c = 0 on a parabolic cycle") {
        Cycle c = fixed_cycle(parabolic_map(), q(1, 2));
        CHECK(residue_closed(c, cx(0)) == 0);
    }
    SUBCASE("z^2 + 1/4 with q_f") {
        Cycle c = fixed_cycle(parabolic_map(), q(1, 2));
        REQUIRE(c.cls == CycleClass::Parabolic);
        const auto basis = invariant_divergence_basis(parabolic_map(), c, kTol);
        const auto& qf = basis.elements[static_cast<std::size_t>(basis.qf_index)];
        CHECK(residue_closed(c, basis, qf.c, 1e-30) == doctest::Approx(1.0).epsilon(1e-15));
        for (const auto& d : basis.elements)
            if (d.label.rfind("D0", 0) == 0) CHECK(residue_closed(c, basis, d.c, 1e-30) == 0);
    }
    SUBCASE("non-invariant divergence") {
        Cycle c = fixed_cycle(parabolic_map(), q(1, 2));
        const auto basis = invariant_divergence_basis(parabolic_map(), c, kTol);
        CHECK_THROWS_AS(residue_closed(c, basis, {cx(0), cx(1)}, 1e-30), Error);
    }
}

TEST_CASE("completion has the prescribed polar part") {
    Cycle c = fixed_cycle(parabolic_map(), q(1, 2));
    const Completion comp = completion_of(parabolic_map(), c, "q_f");
    const auto basis = invariant_divergence_basis(parabolic_map(), c, kTol);
    const auto& want = basis.elements[static_cast<std::size_t>(basis.qf_index)].c;
    const auto got = polar_part(comp.q, c.points[0], kTol);
    REQUIRE(got.size() == want.size());
    for (std::size_t j = 0; j < got.size(); ++j) CHECK(magnitude(got[j] - want[j]) < 1e-50);
    int simple = 0;
    for (const auto& p : comp.q.poles(kTol)) {
        if (p.order == 1) ++simple;
        else CHECK(same_point(p.point, c.points[0], 1e-30));
    }
    CHECK(simple == 3);
    CHECK(comp.q.order_at_infinity() >= 0);
}

TEST_CASE("flux residues") {
    FluxOptions opts;
    SUBCASE("attracting fixed point of z/2 + z^2") {
        Cycle c = fixed_cycle(attracting_map(), G(0));
        const auto comp = completion_of(attracting_map(), c, "dw2/w2");
        const auto rep = residue_flux(attracting_map(), c, comp.q, opts, kTol);
        CHECK(rep.closed_form == doctest::Approx(-std::log(2.0)));
        CHECK(std::abs(rep.limit + std::log(2.0)) < 1e-2);
        CHECK(rep.radii.size() == rep.flux.size());
    }
    SUBCASE("parabolic fixed point of z^2 + 1/4 with q_f") {
        Cycle c = fixed_cycle(parabolic_map(), q(1, 2));
        const auto comp = completion_of(parabolic_map(), c, "q_f");
        const auto rep = residue_flux(parabolic_map(), c, comp.q, opts, kTol);
        CHECK(std::abs(rep.limit - 1.0) < 1e-2);
    }
    SUBCASE("repelling fixed point of z^2 at 1") {
        const auto f = exact_map({0, 0, 1});
        Cycle c = fixed_cycle(f, G(1));
        REQUIRE(c.cls == CycleClass::Repelling);
        const auto comp = complete_divergence(f, c, {cx(1)}, kTol);
        const auto rep = residue_flux(f, c, comp.q, opts, kTol);
        CHECK(std::abs(rep.limit - std::log(2.0)) < 1e-2);
    }
    SUBCASE("D0 direction carries no residue") {
        Cycle c = fixed_cycle(parabolic_map(), q(1, 2));
        const auto comp = completion_of(parabolic_map(), c, "D0:0");
        const auto rep = residue_flux(parabolic_map(), c, comp.q, opts, kTol);
        CHECK(rep.closed_form == 0);
        CHECK(std::abs(rep.limit) < 1e-2);
    }
    SUBCASE("independent of the starting radius") {
        Cycle c = fixed_cycle(attracting_map(), G(0));
        const auto comp = completion_of(attracting_map(), c, "dw2/w2");
        FluxOptions other = opts;
        other.r0 = 0.05;
        const double a = residue_flux(attracting_map(), c, comp.q, opts, kTol).limit;
        const double b = residue_flux(attracting_map(), c, comp.q, other, kTol).limit;
        CHECK(std::abs(a - b) < 1e-2);
    }
    SUBCASE("radius too large") {
        Cycle c = fixed_cycle(attracting_map(), G(0));
        const auto comp = completion_of(attracting_map(), c, "dw2/w2");
        FluxOptions big = opts;
        big.r0 = 2.0;
        CHECK_THROWS_AS(residue_flux(attracting_map(), c, comp.q, big, kTol), Error);
    }
    SUBCASE("non-invariant polar part is rejected") {
        Cycle c = fixed_cycle(parabolic_map(), q(1, 2));
        const auto qd = RationalQD::exact(poly({1}), poly({q(-1, 8), q(3, 4), q(-3, 2), 1}) * poly({-3, 1}));
        CHECK_THROWS_AS(residue_flux(parabolic_map(), c, qd, opts, kTol), Error);
    }
}

TEST_CASE("flux iteration law") {
    FluxOptions opts;
    opts.r0 = 0.05;
    for (int m : {2, 3}) {
        CAPTURE(m);
        SUBCASE("attracting") {
            Cycle c = fixed_cycle(attracting_map(), G(0));
            const auto comp = completion_of(attracting_map(), c, "dw2/w2");
            const RationalMap fm = attracting_map().iterate(m);
            Cycle cm = fixed_cycle(fm, G(0));
            const double one = residue_flux(attracting_map(), c, comp.q, opts, kTol).limit;
            const double many = residue_flux(fm, cm, comp.q, opts, kTol).limit;
            CHECK(std::abs(many - m * one) < 2e-2);
        }
        SUBCASE("parabolic") {
            Cycle c = fixed_cycle(parabolic_map(), q(1, 2));
            const auto comp = completion_of(parabolic_map(), c, "q_f");
            const RationalMap fm = parabolic_map().iterate(m);
            Cycle cm = fixed_cycle(fm, q(1, 2));
            const double one = residue_flux(parabolic_map(), c, comp.q, opts, kTol).limit;
            const double many = residue_flux(fm, cm, comp.q, opts, kTol).limit;
            CHECK(std::abs(many - m * one) < 2e-2);
        }
    }
}

TEST_CASE("sign law on parabolic cycles") {
    // parabolic-repelling: D0 directions have residue 0, q_f positive
    Cycle c = fixed_cycle(parabolic_map(), q(1, 2));
    const auto basis = invariant_divergence_basis(parabolic_map(), c, kTol);
    for (const auto& d : basis.elements) {
        const double r = residue_closed(c, basis, d.c, 1e-30);
        if (d.label == "q_f") CHECK(r > 0);
        else CHECK(r <= 0);
        CHECK(d.flat == (r <= 0));
    }
}

TEST_CASE("divergent cycles of a differential") {
    SUBCASE("double pole at a non-periodic point") {
        const auto qd = RationalQD::exact(poly({1}), poly({0, 0, 1}) * poly({-3, 1}));
        CHECK_THROWS_AS(divergent_cycles(exact_map({q(1, 4), 0, 1}), qd, kTol), Error);
    }
    SUBCASE("completion on the attracting point") {
        Cycle c = fixed_cycle(attracting_map(), G(0));
        const auto comp = completion_of(attracting_map(), c, "dw2/w2");
        const auto cs = divergent_cycles(attracting_map(), comp.q, kTol);
        REQUIRE(cs.size() == 1);
        CHECK(cs[0].residue == doctest::Approx(-std::log(2.0)));
    }
    SUBCASE("period two") {
        const auto g = exact_map({-2, 0, 1});
        const auto pts = periodic_points(g, 2, kTol);
        REQUIRE(!pts.empty());
        Cycle c = cycle_through(g, pts[0].point, kTol);
        REQUIRE(c.period == 2);
        const auto comp = complete_divergence(g, c, {cx(1)}, kTol);
        const auto cs = divergent_cycles(g, comp.q, kTol);
        REQUIRE(cs.size() == 1);
        CHECK(cs[0].residue == doctest::Approx(static_cast<double>(log(abs(c.multiplier)))));
        const auto rep = residue_flux(g, c, comp.q, FluxOptions{0.05}, kTol);
        CHECK(std::abs(rep.limit - rep.closed_form) < 1e-2);
    }
}

TEST_CASE("mass decrease") {
    const auto sq = exact_map({0, 0, 1});
    SUBCASE("complete cancellation under z^2") {
        const auto odd = RationalQD::exact(poly({1}), poly({0, -1, 0, 1}));
        const auto dec = mass_decrease(sq, odd, 1e-4);
        const auto norm = qd_norm(odd, 1e-4);
        CHECK(dec.value > 0.1);
        // f_*q = 0, so Dec is the whole mass of f_*|q|, which is ||q||
        CHECK(std::abs(dec.value - norm.value) < 1e-3);
    }
    SUBCASE("Lattes witness") {
        const auto f = RationalMap::exact(poly({1, 0, 2, 0, 1}), poly({0, -4, 0, 4}));
        const auto v = lattes_test(f, kTol);
        REQUIRE(v.witness);
        CHECK(mass_decrease(f, *v.witness, 1e-4).value < 1e-4);
    }
    SUBCASE("nonnegative on random integrable differentials") {
        std::mt19937 rng(11);
        for (int trial = 0; trial < 3; ++trial) {
            const auto f = random_exact_map(rng, 2);
            std::vector<G> roots{G(0), G(1), gi(0, 1), gi(-1, 1)};
            Poly<G> den = Poly<G>::constant(G(1));
            for (const auto& r : roots) den = den * Poly<G>::linear_factor(r);
            const auto qd = RationalQD::exact(poly({1, q(trial, 2)}), den);
            CHECK(mass_decrease(f, qd, 1e-4).value >= 0);
        }
    }
}

TEST_CASE("balance inequality") {
    const double tol = 1e-3;
    SUBCASE("Lattes witness") {
        const auto f = RationalMap::exact(poly({1, 0, 2, 0, 1}), poly({0, -4, 0, 4}));
        const auto v = lattes_test(f, kTol);
        REQUIRE(v.witness);
        const auto rep = balance_check(f, *v.witness, tol, kTol);
        CHECK(rep.nabla.value < tol);
        CHECK(rep.dec.value < tol);
        CHECK(rep.res_total == 0);
        CHECK(std::abs(rep.slack) < 2 * tol);
    }
    SUBCASE("q_f completion on z^2 + 1/4") {
        Cycle c = fixed_cycle(parabolic_map(), q(1, 2));
        const auto comp = completion_of(parabolic_map(), c, "q_f");
        const auto rep = balance_check(parabolic_map(), comp.q, tol, kTol);
        CHECK(rep.res_total == doctest::Approx(1.0));
        CHECK(rep.slack >= -2 * tol);
    }
    SUBCASE("integrable q: Dec equals the drop in mass") {
        const auto f = exact_map({gi(0, 1), 0, 1});
        const auto qd = RationalQD::exact(poly({1}), poly({0, -1, 0, 1}));
        const auto rep = balance_check(f, qd, tol, kTol);
        const double before = qd_norm(qd, tol).value;
        const double after = qd_norm(pushforward(f, qd, kTol), tol).value;
        CHECK(std::abs(rep.dec.value - (before - after)) < 4 * tol);
        CHECK(rep.slack >= -2 * tol);
    }
}
