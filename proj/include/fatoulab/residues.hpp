#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fatoulab/parabolic.hpp"
#include "fatoulab/qd.hpp"

namespace fatou {

/// Coefficients c_j of the polar part sum_j c_j dw^2 / w^{j+2} of q in the
/// chart at x (terms of order -2 and below); empty when q has at most a
/// simple pole there.
std::vector<Complex> polar_part(const RationalQD& q, const SpherePoint& x, const Tolerances& tol);

/// |c| log|rho|, or |c| Re beta on a parabolic cycle; c is the coordinate
/// along dw^2/w^2 or along q_f.
double residue_closed(const Cycle& c, const Complex& coefficient);
/// Decomposes the polar part against the basis first; throws
/// UnsupportedDivergence when it is not invariant.
double residue_closed(const Cycle& c, const DivergenceBasis& basis, const std::vector<Complex>& polar, double tol);

/// Global differential with a prescribed invariant polar part along a cycle
/// and simple poles at three auxiliary points, chosen so that there is no
/// other pole and no simple-pole term at the cycle points.
struct Completion {
    RationalQD q;
    std::vector<SpherePoint> auxiliary;
    std::vector<std::vector<Complex>> polar;  // per cycle point, chart coefficients
};
Completion complete_divergence(const RationalMap& f, const Cycle& c, const std::vector<Complex>& polar,
                               const Tolerances& tol, const std::vector<SpherePoint>& avoid = {});

struct FluxOptions {
    double r0 = 0.1;
    int levels = 6;  // radii r0, r0/2, ..., r0/2^levels
    double quad_tol = 1e-10;
    long budget = 20'000'000;
};

struct ResidueReport {
    Cycle cycle;
    std::vector<Complex> polar;
    Complex coefficient;  // along dw^2/w^2 or q_f
    double closed_form = 0;
    std::vector<double> radii;
    std::vector<double> flux;  // (1/2pi) signed mass of f(U) - U at each radius
    double limit = 0;
    double exponent = 0;  // fitted error exponent, 0 when not fitted
    double gap = 0;       // |closed_form - limit|
    std::string extrapolation;
};

/// Flux definition of the residue: U is a union of chart disks of radius r
/// about the cycle, f(U) is bounded by the image of the circles.
ResidueReport residue_flux(const RationalMap& f, Cycle c, const RationalQD& q, const FluxOptions& opts,
                           const Tolerances& tol);

/// Cycle through a periodic point, classified, with parabolic data when needed.
Cycle cycle_through(const RationalMap& f, const SpherePoint& x, const Tolerances& tol, int max_period = 64);

struct DivergentCycle {
    Cycle cycle;
    std::vector<Complex> polar;  // at cycle.points[0]
    Complex coefficient;
    double residue = 0;
};

/// Cycles carrying the multiple poles of q; throws UnsupportedDivergence when
/// a multiple pole is not periodic or its polar part is not invariant.
std::vector<DivergentCycle> divergent_cycles(const RationalMap& f, const RationalQD& q, const Tolerances& tol);

struct IntegralValue {
    double value = 0;
    double error = 0;
    long evaluations = 0;
};

/// Integral of f_*|q| - |f_*q| over the sphere; clamped to 0 in [-tol, 0).
IntegralValue mass_decrease(const RationalMap& f, const RationalQD& q, double tol, long budget = 50'000'000);

/// Integral of |q - f_*q| over the sphere.
IntegralValue nabla_norm(const RationalMap& f, const RationalQD& q, double tol, long budget = 50'000'000);

struct BalanceReport {
    IntegralValue dec;
    IntegralValue nabla;
    double res_total = 0;
    double slack = 0;  // ||q - f_*q|| - |Dec - 2 pi Res|
    std::vector<DivergentCycle> cycles;
};

BalanceReport balance_check(const RationalMap& f, const RationalQD& q, double tol, const Tolerances& t,
                            long budget = 50'000'000);

}  // namespace fatou
