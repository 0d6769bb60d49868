#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fatoulab/ratmap.hpp"

namespace fatou {

enum class CycleClass { Superattracting, Attracting, IrrationallyIndifferent, Parabolic, Repelling };
enum class ParabolicSubtype { Repelling, Attracting, Indifferent };

std::string_view to_string(CycleClass c);
std::string_view to_string(ParabolicSubtype s);

/// Formal invariants of a parabolic cycle: the first return to points[0]
/// iterated n times is zeta + a zeta^{N+1} + ..., N = nu n.
struct ParabolicData {
    int n = 1;
    int N = 1;
    int nu = 1;
    Complex iota;
    Complex beta;
    std::optional<G> iota_exact;
    std::optional<G> beta_exact;
    ParabolicSubtype subtype = ParabolicSubtype::Repelling;
    bool within_tolerance = false;  // |Re beta| below eps_beta
    int truncation_order = 0;
};

struct Cycle {
    std::vector<SpherePoint> points;  // x, f(x), ..., f^{period-1}(x)
    int period = 1;
    Complex multiplier;
    std::optional<G> multiplier_exact;
    CycleClass cls = CycleClass::Repelling;
    int rotation_order = 0;  // n with multiplier^n = 1 when parabolic
    std::string annotation;
    std::optional<ParabolicData> parabolic;
    std::optional<int> gamma;
};

struct PeriodicPoint {
    SpherePoint point;
    int multiplicity = 1;  // as a root of the period equation
};

/// Points of exact period kappa.
std::vector<PeriodicPoint> periodic_points(const RationalMap& f, int kappa, const Tolerances& tol);

/// Partition points of exact period kappa into cycles, each starting at its
/// lexicographically smallest (Re, Im) point with infinity last.
std::vector<Cycle> group_cycles(const RationalMap& f, const std::vector<PeriodicPoint>& points, int kappa,
                                const Tolerances& tol);

/// Chain-rule product of chart-corrected derivatives along the cycle.
void compute_multiplier(const RationalMap& f, Cycle& c);

CycleClass classify(const RationalMap& f, Cycle& c, const Tolerances& tol);

/// Cycles of every period up to pmax, classified.
std::vector<Cycle> enumerate_cycles(const RationalMap& f, int pmax, const Tolerances& tol);

/// Lexicographic (Re, Im) order on the affine chart with infinity last.
bool lex_less(const SpherePoint& a, const SpherePoint& b);

}  // namespace fatou
