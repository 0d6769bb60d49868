#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fatoulab/linalg.hpp"
#include "fatoulab/ratmap.hpp"

namespace fatou {

/// q = R(z) dz^2 with R = num/den, den monic, num and den coprime.
/// Exact when built from Gaussian-rational coefficients.
class RationalQD {
public:
    RationalQD() : den_({Complex(1)}) {}
    static RationalQD exact(Poly<G> num, Poly<G> den);
    /// Cancels common roots numerically.
    static RationalQD floating(Poly<Complex> num, Poly<Complex> den, const Tolerances& tol);
    static RationalQD floating(Poly<Complex> num, Poly<Complex> den) {
        return floating(std::move(num), std::move(den), Tolerances::for_current_precision());
    }
    /// Float pair already known to be coprime; only normalizes.
    static RationalQD from_reduced(Poly<Complex> num, Poly<Complex> den);
    /// dz^2 / prod (z - a) over the finite points of A.
    static RationalQD simple_poles(const std::vector<SpherePoint>& a);

    bool is_exact() const { return exact_; }
    bool is_zero() const { return num_.is_zero(); }
    const Poly<Complex>& num() const { return num_; }
    const Poly<Complex>& den() const { return den_; }
    const Poly<G>& exact_num() const;
    const Poly<G>& exact_den() const;

    /// ord at infinity through u = 1/z, q = R(1/u) u^{-4} du^2.
    int order_at_infinity() const;
    int order_at(const SpherePoint& x, const Tolerances& tol) const;

    /// Finite poles with their orders, plus infinity when ord < 0 there.
    struct Pole {
        SpherePoint point;
        int order;  // pole order, positive
    };
    std::vector<Pole> poles(const Tolerances& tol) const;
    /// True when every pole is simple.
    bool integrable(const Tolerances& tol) const;

    Complex operator()(const Complex& z) const;
    std::optional<G> eval_exact(const G& z) const;
    Cd eval_cd(const Cd& z) const;

    RationalQD scaled(const Complex& s) const;
    RationalQD scaled_exact(const G& s) const;
    RationalQD to_float() const;

private:
    bool exact_ = false;
    Poly<Complex> num_, den_;
    Poly<G> enum_, eden_;
    std::vector<Cd> ncd_, dcd_;
    void refresh_cd();
};

/// Total mass of |q| on the sphere.
struct QDNorm {
    bool infinite = false;  // some pole of order >= 2
    double value = 0;
    double error = 0;
    long evaluations = 0;
};

/// Adaptive quadrature to absolute error tol; throws QuadratureBudgetExceeded.
QDNorm qd_norm(const RationalQD& q, double tol, long budget = 50'000'000);

/// Largest coefficient difference (both normalized to a monic denominator);
/// infinity when denominator degrees differ.
double coefficient_distance(const RationalQD& a, const RationalQD& b);

/// f*q = R(f(z)) f'(z)^2 dz^2. Orders at every critical point are checked
/// against deg_c (ord_{f(c)} q + 2) - 2.
RationalQD pullback(const RationalMap& f, const RationalQD& q, const Tolerances& tol);

struct PushforwardInfo {
    std::vector<SpherePoint> candidate_poles;  // f(poles of q) and critical values
    std::vector<int> order_bounds;             // lower bound on ord of the result at each candidate
    int order_bound_infinity = 0;
    int samples = 0;
    double residual = 0;  // relative, on fresh samples
    bool exact = false;
    bool bumped = false;  // pole bounds were raised by one on retry
};

/// Sum over the inverse branches, reconstructed by sampling the fibre sums
/// at generic points and solving for the numerator; exact when f, q and the
/// candidate poles are exact.
RationalQD pushforward(const RationalMap& f, const RationalQD& q, const Tolerances& tol,
                       PushforwardInfo* info = nullptr);

struct FibrePoint {
    SpherePoint point;
    int multiplicity = 1;  // local degree of f there
};
/// f^{-1}(x) with local degrees; exact points where f and x are exact and the
/// preimage is Gaussian-rational.
std::vector<FibrePoint> fibre(const RationalMap& f, const SpherePoint& x, const Tolerances& tol);

/// sum_{f(w) = z} R(w)/f'(w)^2 by solving the fibre.
Complex fibre_sum(const RationalMap& f, const RationalQD& q, const Complex& z, const Tolerances& tol);

/// Double-precision fibre sums for quadrature.
class FibreSampler {
public:
    FibreSampler(const RationalMap& f, const RationalQD& q);
    struct Value {
        Cd sum;      // density of f_*q
        double abs;      // density of f_*|q|
        double deficit;  // abs - |sum|, computed stably
    };
    Value at(const Cd& z) const;
    /// Fibre over z = 1/u, read in the u chart (densities times |u|^-4).
    Value at_inverse(const Cd& u) const;

private:
    Value sum_over(const std::vector<Cd>& roots) const;
    Cd density(const Cd& w) const;
    std::vector<Cd> p_, q_, w_;
    RationalQD q_copy_;
    // Multiple poles x with den = (z - x)^m rest, to keep relative accuracy near x.
    struct Factored {
        Cd x;
        int m;
        std::vector<Cd> rest;
    };
    std::vector<Factored> factored_;
    std::vector<Cd> num_;
};

struct QDSpaceBasis {
    std::vector<SpherePoint> points;
    std::vector<RationalQD> elements;
    double gram_condition = 1.0;  // of the column-normalized sampling Gram matrix
    int dimension() const { return static_cast<int>(elements.size()); }
};

/// Basis of differentials with at worst simple poles in A, of dimension #A - 3.
QDSpaceBasis basis_Q(const std::vector<SpherePoint>& a, const Tolerances& tol);

/// Least-squares coordinates of values (sampled at zs) in a basis; residual
/// relative to the largest sample value.
std::vector<Complex> coordinates_in_basis(const QDSpaceBasis& basis, const std::vector<Complex>& zs,
                                          const std::vector<Complex>& values, double* residual);

struct OperatorMatrix {
    QDSpaceBasis domain, codomain;
    Matrix<Complex> matrix;  // column j: coordinates of (I - f_*) domain[j]
    std::vector<double> singular_values;
    double solve_residual = 0;
    int rank = 0;
    bool injective = false;
    double sigma_ratio = 0;               // sigma_min / sigma_max
    std::vector<SpherePoint> added_critical_values;  // S(f) points not already in A or f(A)
    std::vector<std::string> warnings;
};

/// Matrix of I - f_* from Q(A) to Q(A+), A+ = A, f(A) and the critical values.
OperatorMatrix nabla_matrix(const RationalMap& f, const std::vector<SpherePoint>& a, const Tolerances& tol);

/// Singular values (descending) of a complex matrix, in double precision.
std::vector<double> singular_values(const Matrix<Complex>& m);
/// sigma_max / sigma_min of the column-normalized sample matrix.
double sampled_gram_condition(const std::vector<RationalQD>& elems, const std::vector<Complex>& zs);

struct LattesVerdict {
    bool lattes = false;
    std::optional<RationalQD> witness;
    std::vector<SpherePoint> pole_set;
    std::string evidence;
};

LattesVerdict lattes_test(const RationalMap& f, const Tolerances& tol);

/// Deterministic sample points on |z| = 3/2 (golden-angle sequence), avoiding
/// the given points by at least 1e-6.
std::vector<Complex> sample_points(int count, const std::vector<SpherePoint>& avoid, int skip = 0);

}  // namespace fatou
