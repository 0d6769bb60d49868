#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "fatoulab/ratmap.hpp"

namespace fatou {

/// Adaptive Gauss-Kronrod (7, 15) to an absolute tolerance, sharing one
/// evaluation budget across calls.
class Quadrature {
public:
    explicit Quadrature(long budget = 50'000'000) : budget_(budget) {}

    double integrate(const std::function<double(double)>& f, double a, double b, double abs_tol,
                     double* error = nullptr, double rel_tol = 0);
    /// Integral of g over the disk |s - centre| <= radius against area, in polar coordinates.
    double disk(const std::function<double(Cd)>& g, Cd centre, double radius, double abs_tol, double* error = nullptr);

    long evaluations() const { return used_; }

private:
    // Integrand value with the error already made in computing it.
    using Sample = std::pair<double, double>;
    using Integrand = std::function<Sample(double)>;
    struct Piece {
        double a, b, value, error, carried, floor;
    };
    Piece rule(const Integrand& f, double a, double b);
    double adapt(const Integrand& f, double a, double b, double abs_tol, double rel_tol, double* error);

    long budget_;
    long used_ = 0;
};

/// Area density on the sphere given in both charts: z_chart(z) against dA(z)
/// for |z| <= 1 and u_chart(u) against dA(u) for z = 1/u, |u| <= 1.
struct SphereDensity {
    std::function<double(Cd)> z_chart;
    std::function<double(Cd)> u_chart;
};

struct QuadResult {
    double value = 0;
    double error = 0;
    long evaluations = 0;
};

/// Integral over the sphere of a density with integrable singularities at the
/// given points, each isolated by a smooth bump and integrated in polar
/// coordinates about it.
QuadResult integrate_sphere(const SphereDensity& density, const std::vector<SpherePoint>& singular, double abs_tol,
                            long budget = 50'000'000);

}  // namespace fatou
