#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "fatoulab/fscount.hpp"
#include "helpers.hpp"

using namespace fatou;
using namespace testing_helpers;

namespace {

const Tolerances kTol = Tolerances::for_bits(256);

const CriticalOrbit* orbit_from(const DeltaReport& d, const SpherePoint& v, double eps = 1e-30) {
    for (const auto& o : d.orbits)
        if (same_point(o.value, v, eps)) return &o;
    return nullptr;
}

}  // namespace

TEST_CASE("delta") {
    SUBCASE("z^2: both critical points fixed") {
        const auto d = delta(exact_map({G(0), G(0), G(1)}), 100, kTol);
        CHECK(d.count == 0);
        REQUIRE(d.orbits.size() == 2);
        for (const auto& o : d.orbits) {
            CHECK(o.fate == OrbitFate::Periodic);
            CHECK(o.cycle_length == 1);
            CHECK(o.exact);
        }
    }
    SUBCASE("z^2 + i is preperiodic") {
        // i -> -1+i -> -i -> -1+i by direct Gaussian-integer arithmetic
        const G c = gi(0, 1);
        std::vector<G> orbit{c};
        for (int k = 0; k < 3; ++k) orbit.push_back(orbit.back() * orbit.back() + c);
        REQUIRE(orbit[3] == orbit[1]);
        REQUIRE(orbit[2] != orbit[0]);

        const auto d = delta(exact_map({c, G(0), G(1)}), 1000, kTol);
        CHECK(d.count == 0);
        const auto* o = orbit_from(d, SpherePoint::from_exact(c));
        REQUIRE(o);
        CHECK(o->fate == OrbitFate::Preperiodic);
        CHECK(o->cycle_entry == 1);
        CHECK(o->cycle_length == 2);
        CHECK(o->exact);
    }
    SUBCASE("z^2 + 1/4 has one tail") {
        // x -> x^2 + 1/4 is increasing on [0, 1/2) and stays below 1/2
        double x = 0.25;
        for (int k = 0; k < 1000; ++k) {
            const double y = x * x + 0.25;
            REQUIRE(y > x);
            REQUIRE(y < 0.5);
            x = y;
        }
        const auto d = delta(exact_map({q(1, 4), G(0), G(1)}), 1000, kTol);
        CHECK(d.count == 1);
        const auto* o = orbit_from(d, SpherePoint::from_exact(q(1, 4)));
        REQUIRE(o);
        CHECK(o->fate == OrbitFate::InfiniteTail);
        CHECK(o->heuristic);
        const auto* inf = orbit_from(d, SpherePoint::infinity());
        REQUIRE(inf);
        CHECK(inf->fate == OrbitFate::Periodic);
    }
    SUBCASE("convergence to an attracting point is a tail") {
        for (auto f : {exact_map({q(1, 10), G(0), G(1)}),
                       RationalMap::exact_coefficients_float_mode(poly({q(1, 10), G(0), G(1)}), poly({G(1)}))}) {
            const auto d = delta(f, 1000, kTol);
            CHECK(d.count == 1);
            const auto* o = orbit_from(d, SpherePoint::affine(cx(0.1)), 1e-15);
            REQUIRE(o);
            CHECK(o->fate == OrbitFate::InfiniteTail);
        }
    }
    SUBCASE("critical orbit relations") {
        // 2z^3 - 3z^2 + 1 swaps its critical points 0 and 1
        const auto swap = delta(exact_map({G(1), G(0), q(-3), q(2)}), 200, kTol);
        CHECK(swap.count == 0);
        int merged = 0;
        for (const auto& o : swap.orbits) merged += o.fate == OrbitFate::Merged;
        CHECK(merged == 1);

        // z^4 + 4z^2 + 2 has critical values 2 and -2 with f(2) = f(-2) = 34;
        // the common orbit escapes to infinity without landing there.
        const auto even = delta(exact_map({q(2), G(0), q(4), G(0), G(1)}), 200, kTol);
        CHECK(even.count == 1);
        const auto* o = orbit_from(even, SpherePoint::from_exact(q(-2)));
        const auto* p = orbit_from(even, SpherePoint::from_exact(q(2)));
        REQUIRE(o);
        REQUIRE(p);
        CHECK(((o->fate == OrbitFate::Merged) != (p->fate == OrbitFate::Merged)));
    }
    SUBCASE("escape to a superattracting infinity is a tail") {
        // z^3 + 3: the orbit of 3 grows like 3^(3^k)
        const auto d = delta(exact_map({q(3), G(0), G(0), G(1)}), 300, kTol);
        CHECK(d.count == 1);
    }
    SUBCASE("critical points of an iterate") {
        // f^2 for f = z^2 + 1/4 has critical values 1/4 and 5/16 = f(1/4),
        // whose f^2-orbits are the even and odd halves of one f-orbit.
        const auto f2 = exact_map({q(1, 4), G(0), G(1)}).iterate(2);
        CHECK(delta(f2, 500, kTol).count == 2);
    }
}

TEST_CASE("gamma") {
    SUBCASE("z^2 up to period 3") {
        const auto g = gamma(exact_map({G(0), G(0), G(1)}), 3, kTol);
        CHECK(g.gamma_partial == 0);
        // 0 and infinity are superattracting; the cycles on the unit circle
        // have multiplier 2^k by the chain rule.
        for (const auto& c : g.cycles) {
            const bool super = c.period == 1 && (c.points[0].is_infinity() || abs(c.points[0].value()) < Real(1e-60));
            if (super) {
                CHECK(c.cls == CycleClass::Superattracting);
            } else {
                CHECK(c.cls == CycleClass::Repelling);
                CHECK(abs(abs(c.multiplier) - Real(std::ldexp(1.0, c.period))) < Real(1e-50));
            }
        }
    }
    SUBCASE("z^2 + 1/4 at period 1") {
        const auto g = gamma(exact_map({q(1, 4), G(0), G(1)}), 1, kTol);
        CHECK(g.gamma_partial == 1);
        int parabolic = 0;
        for (const auto& c : g.cycles)
            if (c.cls == CycleClass::Parabolic) {
                ++parabolic;
                REQUIRE(c.parabolic);
                CHECK(c.parabolic->nu == 1);
                CHECK(c.parabolic->subtype == ParabolicSubtype::Repelling);
                CHECK(c.gamma == 1);
            }
        CHECK(parabolic == 1);
    }
    SUBCASE("z^2 + 0.1 at period 1") {
        // fixed points (1 -+ sqrt(0.6))/2; the smaller has |2z| < 1
        const double z = (1 - std::sqrt(0.6)) / 2;
        REQUIRE(2 * z < 1);
        const auto f = RationalMap::exact_coefficients_float_mode(poly({q(1, 10), G(0), G(1)}), poly({G(1)}));
        const auto g = gamma(f, 1, kTol);
        CHECK(g.gamma_partial == 1);
        int attracting = 0;
        for (const auto& c : g.cycles)
            if (c.cls == CycleClass::Attracting) {
                ++attracting;
                CHECK(std::abs(c.points[0].value_cd() - Cd(z)) < 1e-14);
            }
        CHECK(attracting == 1);
    }
    SUBCASE("degree cap") {
        Tolerances t = kTol;
        t.degree_cap = 8;
        CHECK_THROWS_AS(gamma(exact_map({G(0), G(0), G(1)}), 4, t), Error);
    }
}

TEST_CASE("check_fs") {
    SUBCASE("z^2 + 1/4 is tight") {
        const auto r = check_fs(exact_map({q(1, 4), G(0), G(1)}), 2, 1000, kTol, true);
        CHECK(r.gamma.gamma_partial == 1);
        CHECK(r.delta.count == 1);
        CHECK(r.pass);
        REQUIRE(r.dimension);
        CHECK(r.dimension->flat_dimension == r.gamma.gamma_partial);
        CHECK(r.dimension->new_points == r.delta.count);
        CHECK(r.dimension->injective);
    }
    SUBCASE("z^2 + i") {
        const auto r = check_fs(exact_map({gi(0, 1), G(0), G(1)}), 3, 1000, kTol);
        CHECK(r.gamma.gamma_partial == 0);
        CHECK(r.delta.count == 0);
        CHECK(r.pass);
    }
    SUBCASE("z^2 - 1") {
        const auto r = check_fs(exact_map({q(-1), G(0), G(1)}), 2, 1000, kTol);
        CHECK(r.gamma.gamma_partial == 0);
        CHECK(r.delta.count == 0);
        CHECK(r.pass);
        // the superattracting 2-cycle {0, -1} and the superattracting point at infinity
        CHECK(r.classical_count == 2);
        CHECK(r.classical_bound == 2);
        CHECK(r.classical_pass);
    }
}

TEST_CASE("Fatou-Shishikura on random maps") {
    std::mt19937 rng(4242);
    for (int trial = 0; trial < 8; ++trial) {
        const int d = trial < 6 ? 2 : 3;
        const auto f = random_exact_map(rng, d);
        CAPTURE(trial);
        const auto r = check_fs(f, d == 2 ? 3 : 2, 500, kTol, true);
        CHECK(r.pass);
        CHECK(r.classical_pass);
        CHECK(r.delta.count <= 2 * d - 2);
        REQUIRE(r.dimension);
        CHECK(r.dimension->failure.empty());
        CHECK(r.dimension->flat_dimension == r.gamma.gamma_partial);
        CHECK(r.dimension->new_points == r.delta.count);
        CHECK(r.dimension->injective);
    }
}
