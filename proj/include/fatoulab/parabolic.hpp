#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fatoulab/cycles.hpp"
#include "fatoulab/series.hpp"

namespace fatou {

/// Chart at x sending x to 0: s = z - x for |x| <= 1, s = 1/z - 1/x otherwise, s = 1/z at infinity.
Mobius<Complex> chart_at(const SpherePoint& x);
std::optional<Mobius<G>> exact_chart_at(const SpherePoint& x);

/// Germ of f read from the chart at x to the chart at y = f(x).
TruncatedSeries<Complex> step_germ(const RationalMap& f, const SpherePoint& x, const SpherePoint& y, int T);

/// Taylor series through order T of the first return f^period read in the
/// chart at points[0].
TruncatedSeries<Complex> germ_at(const RationalMap& f, const Cycle& c, int T);
/// Exact variant, available when f and every cycle point are exact.
std::optional<TruncatedSeries<G>> germ_at_exact(const RationalMap& f, const Cycle& c, int T);

/// g o g o ... o g (m times).
template <class S>
TruncatedSeries<S> germ_iterate(const TruncatedSeries<S>& g, int m) {
    TruncatedSeries<S> acc = g;
    for (int i = 1; i < m; ++i) acc = series_compose(g, acc);
    return acc;
}

/// Invariants of a germ rho w + ... whose multiplier is a primitive n-th root of unity.
ParabolicData germ_invariants(const TruncatedSeries<Complex>& g, int n, const Tolerances& tol);
ParabolicData germ_invariants(const TruncatedSeries<G>& g, int n, const Tolerances& tol);

/// Fills and returns cycle.parabolic; germ order grows from 2 kappa D + 4 by doubling up to 512.
ParabolicData parabolic_invariants(const RationalMap& f, Cycle& c, const Tolerances& tol);

/// Weight of the cycle from its class and, when parabolic, nu and the sign of Re beta.
int gamma_of_cycle(const Cycle& c);

/// Result of conjugating a germ by zeta -> zeta + c zeta^k substitutions until it reads
/// rho(zeta + a zeta^{N+1} + b zeta^{2N+1}) + O(zeta^{2N+2}).
template <class S>
struct NormalFormReduction {
    int N = 0;
    S rho, a, b;
    S alpha;  // b / a^2, the coefficient after rescaling a to 1
    S beta;   // (N+1)/2 - alpha
    TruncatedSeries<S> coordinate;  // psi with psi o g o psi^{-1} in the form above
};

NormalFormReduction<Complex> reduce_normal_form(const TruncatedSeries<Complex>& g, int n, const Tolerances& tol);
NormalFormReduction<G> reduce_normal_form(const TruncatedSeries<G>& g, int n, const Tolerances& tol);

/// Polar part sum_j c[j] dw^2 / w^{j+2} in the chart at a cycle representative.
struct Divergence {
    Mobius<Complex> chart;
    std::vector<Complex> c;
    bool flat = false;  // lies in the nonpositive-residue subspace
    std::string label;  // "dw2/w2", "D0:l", "q_f"
};

struct DivergenceBasis {
    std::vector<Divergence> elements;
    int qf_index = -1;  // position of the q_f direction, parabolic cycles only
    int flat_dimension() const;
};

/// Basis of the invariant divergences at the cycle, each checked against the
/// first-return germ by series pullback.
DivergenceBasis invariant_divergence_basis(const RationalMap& f, Cycle& c, const Tolerances& tol);
/// Same for a germ at 0; data is required when the germ is parabolic.
DivergenceBasis divergence_basis_for_germ(const TruncatedSeries<Complex>& g, CycleClass cls,
                                          const std::optional<ParabolicData>& data, const Tolerances& tol);

/// Coordinates of a polar part against the basis; throws UnsupportedDivergence
/// when it is not an invariant divergence.
std::vector<Complex> decompose(const DivergenceBasis& basis, const std::vector<Complex>& polar, double tol);

/// Polar coefficients of g*q for q = sum c[j] dw^2/w^{j+2}.
std::vector<Complex> pullback_polar(const TruncatedSeries<Complex>& g, const std::vector<Complex>& c);

}  // namespace fatou
