#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fatoulab/parabolic.hpp"
#include "fatoulab/qd.hpp"

namespace fatou {

enum class OrbitFate { Periodic, Preperiodic, Merged, InfiniteTail };
std::string_view to_string(OrbitFate f);

struct CriticalOrbit {
    SpherePoint value;  // the critical value
    OrbitFate fate = OrbitFate::InfiniteTail;
    int steps = 0;        // iterates examined
    int cycle_entry = -1;  // (pre)periodic: first step on the cycle
    int cycle_length = 0;
    int merged_into = -1;  // index of the orbit it lands on
    int merge_step = -1;
    int merge_target_step = -1;
    bool exact = false;    // decided in exact arithmetic
    bool heuristic = false;  // still distinct and aperiodic at the cap
    bool converging = false;  // came within eps_orbit of itself without landing
    std::vector<SpherePoint> prefix;
};

struct DeltaReport {
    int count = 0;
    int iter_cap = 0;
    std::vector<CriticalOrbit> orbits;
};

/// Infinite tails of critical orbits; merged orbits share one tail.
DeltaReport delta(const RationalMap& f, int iter_cap, const Tolerances& tol);

struct GammaReport {
    int pmax = 0;
    int gamma_partial = 0;  // lower bound for gamma(f)
    std::vector<Cycle> cycles;
};

/// Cycles of period up to pmax with their weights.
GammaReport gamma(const RationalMap& f, int pmax, const Tolerances& tol);

/// Rank side of the counting argument: A holds the nonrepelling cycles and
/// the critical orbits up to one step past each tail.
struct DimensionCheck {
    std::vector<SpherePoint> points;
    int flat_dimension = 0;  // sum over cycles of dim of nonpositive-residue divergences
    int new_points = 0;      // #(A+ - A)
    bool injective = false;
    double sigma_ratio = 0;
    std::string failure;  // nonempty when the matrix could not be built
};

struct FSReport {
    RationalMap map;
    int pmax = 0;
    int iter_cap = 0;
    GammaReport gamma;
    DeltaReport delta;
    bool pass = false;  // gamma_partial <= delta
    int classical_count = 0;
    int classical_bound = 0;  // 2D - 2
    bool classical_pass = false;
    std::optional<DimensionCheck> dimension;
};

FSReport check_fs(const RationalMap& f, int pmax, int iter_cap, const Tolerances& tol, bool dimension_check = false);

DimensionCheck dimension_check(const RationalMap& f, const GammaReport& g, const DeltaReport& d, const Tolerances& tol);

}  // namespace fatou
