#pragma once

#include <vector>

#include "fatoulab/poly.hpp"

namespace fatou {

struct Root {
    Complex value;
    int multiplicity = 1;
};

/// Roots with multiplicity. When `converged` is false the list is the last
/// iterate of the solver and may be inaccurate.
struct RootSet {
    std::vector<Root> roots;
    bool converged = true;
    int iterations = 0;

    int count() const {
        int n = 0;
        for (const auto& r : roots) n += r.multiplicity;
        return n;
    }
};

/// Aberth-Ehrlich iteration started in double precision (when the
/// coefficients fit) and finished at the working precision; roots closer than
/// tol.eps_cluster (relative) are merged into one entry.
RootSet poly_roots(const Poly<Complex>& p, const Tolerances& tol);
RootSet poly_roots(const Poly<GaussianRational>& p, const Tolerances& tol);

/// Same as poly_roots but throws NonConvergence instead of flagging.
RootSet poly_roots_checked(const Poly<Complex>& p, const Tolerances& tol);

/// Roots listed with repetition.
std::vector<Complex> flatten(const RootSet& rs);

/// Double-precision roots only; for sampling and quadrature where 53 bits suffice.
std::vector<Cd> poly_roots_double(const std::vector<Cd>& coeffs);

}  // namespace fatou
