#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fatoulab/poly.hpp"
#include "fatoulab/roots.hpp"

namespace fatou {

using G = GaussianRational;

/// Point of the sphere as (z0 : z1), affine coordinate z0/z1; infinity is (1 : 0).
/// Points known exactly also carry their Gaussian-rational value.
struct SpherePoint {
    Complex z0{Real(1), Real(0)};
    Complex z1{Real(0), Real(0)};
    std::optional<G> exact;  // finite exact value
    bool exact_infinity = false;

    static SpherePoint infinity();
    static SpherePoint affine(const Complex& z);
    static SpherePoint from_exact(const G& z);
    /// nullopt means infinity.
    static SpherePoint from_exact(const std::optional<G>& z);

    bool is_infinity() const { return z1.real() == 0 && z1.imag() == 0; }
    bool is_exact() const { return exact.has_value() || exact_infinity; }
    /// Affine coordinate; throws IndeterminatePoint at infinity.
    Complex value() const;
    Cd value_cd() const;
    std::optional<G> exact_value() const { return exact; }

    std::string str() const;
};

/// sin of the half-angle between the points on the unit sphere, in [0, 1].
Real chordal_distance(const SpherePoint& a, const SpherePoint& b);
/// Exact equality when both are exact, chordal distance below tol otherwise.
bool same_point(const SpherePoint& a, const SpherePoint& b, double tol);

/// z -> (a z + b)/(c z + d)
template <class S>
struct Mobius {
    S a = scalar<S>(1), b = scalar<S>(0), c = scalar<S>(0), d = scalar<S>(1);

    S det() const { return a * d - b * c; }
    Mobius inverse() const { return {d, -b, -c, a}; }
    Mobius operator*(const Mobius& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
    }
    static Mobius translation(const S& t) { return {scalar<S>(1), t, scalar<S>(0), scalar<S>(1)}; }
    static Mobius inversion() { return {scalar<S>(0), scalar<S>(1), scalar<S>(1), scalar<S>(0)}; }
};

/// Charts: s = z when |x| <= 1, s = 1/z otherwise.
bool uses_infinity_chart(const SpherePoint& x);
bool uses_infinity_chart(const std::optional<G>& x);

/// Scale a complex Mobius map to determinant 1.
Mobius<Complex> normalized(const Mobius<Complex>& m);
SpherePoint apply(const Mobius<Complex>& m, const SpherePoint& x);
Mobius<Complex> to_complex(const Mobius<G>& m);

enum class CoefficientMode { Exact, Float };

/// f = P/Q with P, Q coprime and the leading coefficient of the denominator
/// (in degree D) or of the numerator equal to 1.
class RationalMap {
public:
    RationalMap() = default;
    /// Cancels the exact gcd; throws DegreeTooSmall for constants.
    static RationalMap exact(Poly<G> p, Poly<G> q);
    /// Throws NotCoprime when the resultant test fails.
    static RationalMap floating(Poly<Complex> p, Poly<Complex> q, const Tolerances& tol);
    static RationalMap floating(Poly<Complex> p, Poly<Complex> q) {
        return floating(std::move(p), std::move(q), Tolerances::for_current_precision());
    }

    /// Exact coefficients, float arithmetic (decimal literals parse this way).
    static RationalMap exact_coefficients_float_mode(Poly<G> p, Poly<G> q);

    CoefficientMode mode() const { return mode_; }
    bool is_exact() const { return mode_ == CoefficientMode::Exact; }
    /// Exact coefficients are stored (always true in exact mode).
    bool has_exact_coefficients() const { return has_exact_; }
    /// Float coefficients recomputed at the current working precision.
    RationalMap at_current_precision() const;
    int degree() const { return degree_; }
    const Poly<Complex>& num() const { return p_; }
    const Poly<Complex>& den() const { return q_; }
    const Poly<G>& exact_num() const;
    const Poly<G>& exact_den() const;

    SpherePoint operator()(const SpherePoint& x) const;
    /// Exact evaluation; nullopt is infinity.
    std::optional<G> eval_exact(const std::optional<G>& x) const;
    /// Affine evaluation in double, infinity returned as a huge value.
    Cd eval_cd(const Cd& z) const;

    /// Derivative of the map read in charts s = z (|x| <= 1) or s = 1/z
    /// (|x| > 1) at x and at f(x).
    Complex local_derivative(const SpherePoint& x) const;
    Complex local_derivative(const SpherePoint& x, bool in_inf_chart, bool out_inf_chart) const;
    std::optional<G> local_derivative_exact(const std::optional<G>& x) const;

    /// f^k; throws DegreeCapExceeded when D^k > cap.
    RationalMap iterate(int k, unsigned degree_cap = 4096) const;
    /// this o g
    RationalMap compose(const RationalMap& g) const;

    RationalMap conjugate(const Mobius<Complex>& m) const;
    RationalMap conjugate(const Mobius<G>& m) const;

    /// Same map with float coefficients.
    RationalMap to_float() const;

    friend bool operator==(const RationalMap& a, const RationalMap& b);

private:
    void set_float_from_exact();
    void normalize();

    CoefficientMode mode_ = CoefficientMode::Float;
    bool has_exact_ = false;
    int degree_ = 0;
    Poly<G> pe_, qe_;
    Poly<Complex> p_, q_;
    Poly<Complex> rp_, rq_;  // coefficient reversals at degree D (chart at infinity)
    std::vector<Cd> pcd_, qcd_;
};

/// Largest coefficient difference after both maps are normalized; the maps
/// must share a degree.
double coefficient_distance(const RationalMap& a, const RationalMap& b);

struct CriticalPoint {
    SpherePoint point;
    int local_degree = 2;
};

std::vector<CriticalPoint> critical_points(const RationalMap& f, const Tolerances& tol);
/// Critical values, deduplicated.
std::vector<SpherePoint> critical_values(const RationalMap& f, const Tolerances& tol);

/// Orbit of one critical value through T iterates.
struct OrbitRecord {
    std::vector<SpherePoint> points;  // points[0] = the critical value
    int revisit_step = -1;            // first step j with points[j] == points[i], i < j
    int revisit_target = -1;          // that i
    int merge_orbit = -1;             // earlier orbit this one lands on
    int merge_step = -1;              // step of this orbit at first coincidence
    int merge_target_step = -1;       // matching step in the other orbit
    bool converging = false;          // a float revisit was rejected by the confirmation
};

/// Decides a float coincidence between orbit o1 at step s1 and orbit o2 at step s2.
using CoincidenceCheck = std::function<bool(const std::vector<OrbitRecord>&, int o1, int s1, int o2, int s2)>;

/// Without a check, float coincidences persisting under iteration are accepted.
std::vector<OrbitRecord> postcritical_prefix(const RationalMap& f, int T, const Tolerances& tol,
                                             const CoincidenceCheck& confirm = {});

/// Homogeneous resultant test for float coefficient pairs.
bool numerically_coprime(const Poly<Complex>& p, const Poly<Complex>& q, int degree, double eps);

}  // namespace fatou
