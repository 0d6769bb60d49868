#include <doctest.h>

#include <random>

#include "fatoulab/cycles.hpp"
#include "helpers.hpp"

using namespace fatou;
using namespace testing_helpers;

namespace {

const Tolerances kTol = Tolerances::for_bits(256);

bool contains(const std::vector<PeriodicPoint>& pts, const Complex& z, int mult = -1) {
    for (const auto& p : pts)
        if (!p.point.is_infinity() && abs(p.point.value() - z) < Real(1e-50) && (mult < 0 || p.multiplicity == mult))
            return true;
    return false;
}

bool contains_inf(const std::vector<PeriodicPoint>& pts) {
    for (const auto& p : pts)
        if (p.point.is_infinity()) return true;
    return false;
}

Complex root_of_unity(int k, int n) {
    const Real t = 2 * pi_real() * k / n;
    return {cos(t), sin(t)};
}

}  // namespace

TEST_CASE("periodic points of z^2") {
    auto sq = exact_map({G(0), G(0), G(1)});
    auto p1 = periodic_points(sq, 1, kTol);
    CHECK(p1.size() == 3);
    CHECK(contains(p1, cx(0)));
    CHECK(contains(p1, cx(1)));
    CHECK(contains_inf(p1));

    auto p2 = periodic_points(sq, 2, kTol);
    CHECK(p2.size() == 2);
    CHECK(contains(p2, root_of_unity(1, 3)));
    CHECK(contains(p2, root_of_unity(2, 3)));

    auto cyc = group_cycles(sq, p2, 2, kTol);
    REQUIRE(cyc.size() == 1);
    CHECK(cyc[0].points.size() == 2);
    CHECK(cyc[0].points[0].value().real() < 0);
    CHECK(cyc[0].points[0].value().imag() < 0);  // lexicographically smallest: e^{4 pi i/3}
}

TEST_CASE("periodic points of z^2 + 1/4: double root at 1/2") {
    auto f = exact_map({q(1, 4), G(0), G(1)});
    auto p1 = periodic_points(f, 1, kTol);
    CHECK(p1.size() == 2);
    CHECK(contains(p1, cx(0.5), 2));
    CHECK(contains_inf(p1));
    for (const auto& p : p1)
        if (!p.point.is_infinity()) CHECK(p.point.exact);
}

TEST_CASE("group cycles: basilica") {
    auto f = exact_map({G(-1), G(0), G(1)});
    auto p2 = periodic_points(f, 2, kTol);
    auto cyc = group_cycles(f, p2, 2, kTol);
    REQUIRE(cyc.size() == 1);
    REQUIRE(cyc[0].points[0].exact);
    CHECK(*cyc[0].points[0].exact == G(-1));
    CHECK(*cyc[0].points[1].exact == G(0));
    REQUIRE(cyc[0].multiplier_exact);
    CHECK(cyc[0].multiplier_exact->is_zero());
    CHECK(classify(f, cyc[0], kTol) == CycleClass::Superattracting);

    CHECK(group_cycles(f, {}, 3, kTol).empty());
}

TEST_CASE("classify fixed points") {
    auto sq = exact_map({G(0), G(0), G(1)});
    for (auto& c : enumerate_cycles(sq, 1, kTol)) {
        if (c.points[0].is_infinity() || c.points[0].exact->is_zero()) {
            CHECK(c.cls == CycleClass::Superattracting);
        } else {
            CHECK(*c.multiplier_exact == G(2));
            CHECK(c.cls == CycleClass::Repelling);
        }
    }
    auto f = exact_map({q(1, 4), G(0), G(1)});
    int parabolic = 0;
    for (auto& c : enumerate_cycles(f, 1, kTol))
        if (c.cls == CycleClass::Parabolic) {
            ++parabolic;
            CHECK(*c.multiplier_exact == G(1));
            CHECK(c.rotation_order == 1);
        }
    CHECK(parabolic == 1);

    // float path: same verdicts
    for (auto& c : enumerate_cycles(f.to_float(), 1, kTol))
        if (!c.points[0].is_infinity()) CHECK(c.cls == CycleClass::Parabolic);
}

TEST_CASE("classify from multiplier thresholds") {
    Cycle c;
    c.multiplier = cx(0.5);
    auto sq = exact_map({G(0), G(0), G(1)});
    CHECK(classify(sq, c, kTol) == CycleClass::Attracting);
    c.multiplier = cx(1e-80);
    CHECK(classify(sq, c, kTol) == CycleClass::Superattracting);
    c.multiplier = root_of_unity(1, 5);
    CHECK(classify(sq, c, kTol) == CycleClass::Parabolic);
    CHECK(c.rotation_order == 5);
    c.multiplier = root_of_unity(1, 97);
    CHECK(classify(sq, c, kTol) == CycleClass::IrrationallyIndifferent);
    CHECK(!c.annotation.empty());
    c.multiplier_exact = G(Rational(3, 5), Rational(4, 5));
    CHECK(classify(sq, c, kTol) == CycleClass::IrrationallyIndifferent);
    c.multiplier_exact = G(Rational(0), Rational(-1));
    CHECK(classify(sq, c, kTol) == CycleClass::Parabolic);
    CHECK(c.rotation_order == 4);
}

TEST_CASE("periodic point count with multiplicity") {
    std::mt19937 rng(41);
    for (int trial = 0; trial < 3; ++trial) {
        auto f = trial == 0 ? exact_map({q(1, 4), G(0), G(1)}) : random_exact_map(rng, 2);
        for (int kappa = 1; kappa <= 4; ++kappa) {
            int total = 0;
            for (int j = 1; j <= kappa; ++j)
                if (kappa % j == 0)
                    for (const auto& p : periodic_points(f, j, kTol)) total += p.multiplicity;
            CHECK(total == (1 << kappa) + 1);
        }
    }
}

TEST_CASE("multiplier is a conjugacy invariant and independent of the start") {
    std::mt19937 rng(43);
    for (int trial = 0; trial < 3; ++trial) {
        auto f = random_exact_map(rng, 2).to_float();
        Mobius<Complex> m = normalized(
            Mobius<Complex>{random_complex(rng), random_complex(rng), random_complex(rng), random_complex(rng)});
        auto g = f.conjugate(m);
        auto cf = enumerate_cycles(f, 2, kTol);
        auto cg = enumerate_cycles(g, 2, kTol);
        REQUIRE(cf.size() == cg.size());
        for (auto& c : cf) {
            bool found = false;
            for (auto& d : cg)
                if (d.period == c.period && abs(d.multiplier - c.multiplier) < Real(1e-25)) {
                    found = true;
                    CHECK(d.cls == c.cls);
                }
            CHECK(found);
            if (c.period == 2) {
                Cycle rotated = c;
                std::rotate(rotated.points.begin(), rotated.points.begin() + 1, rotated.points.end());
                compute_multiplier(f, rotated);
                CHECK(abs(rotated.multiplier - c.multiplier) < Real(1e-60));
            }
        }
    }
}

TEST_CASE("strongly repelling period-4 points of a cubic return to themselves") {
    // Roots of the expanded degree-81 period equation carry ~1e-27 error; multipliers near 1e5 amplify it.
    const auto f = exact_map({G(Rational(0), Rational(-1, 2)), G(Rational(1, 3), Rational(-3, 2)), q(-4), gi(0, -1)});
    const auto pts = periodic_points(f, 4, kTol);
    CHECK(pts.size() % 4 == 0);
    for (const auto& p : pts) {
        SpherePoint y = p.point;
        for (int j = 0; j < 4; ++j) y = f(y);
        CHECK(chordal_distance(y, p.point) < Real(1e-60));
    }
}
