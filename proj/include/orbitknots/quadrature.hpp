#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

namespace orbitknots {

// Gauss-Legendre nodes/weights on [-1, 1], computed once per order and cached.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

const GaussRule& gauss_legendre(int order);

// Integrate f over [a, b] with a fixed-order Gauss rule.
double gauss_integrate(const std::function<double(double)>& f, double a, double b,
                       int order);

struct AdaptiveResult {
    double value = 0.0;
    double error = 0.0;       // accumulated error estimate
    std::size_t evals = 0;    // integrand evaluations
    bool converged = true;
};

// Adaptive Gauss-Kronrod (7/15) on [a, b]. Splits the worst interval until
// the global error estimate drops below max(abs_tol, rel_tol*|I|) or the
// subdivision budget is exhausted (then converged = false).
AdaptiveResult adaptive_gk(const std::function<double(double)>& f, double a, double b,
                           double abs_tol, double rel_tol, int max_intervals = 2000);

// Trapezoid rule for an L-periodic function sampled at n points. Spectrally
// accurate for smooth periodic integrands.
double periodic_trapezoid(const std::function<double(double)>& f, double period,
                          int n);

// Adaptive quadrature over a triangle (p0, p1, p2) in the plane, by uniform
// 4-way subdivision of the worst cell with an embedded degree-5 rule.
struct Tri2D {
    double x0, y0, x1, y1, x2, y2;
};

AdaptiveResult adaptive_triangle(const std::function<double(double, double)>& f,
                                 const Tri2D& tri, double abs_tol, double rel_tol,
                                 int max_cells = 4000);

// Adaptive cubature over an axis-aligned 3D box: embedded tensor
// Gauss rule (3^3 against 2^3) with bisection of the worst cell along its
// longest axis. Handles integrable point singularities by refinement.
struct Box3D {
    double lo[3];
    double hi[3];
};

AdaptiveResult adaptive_box3(const std::function<double(double, double, double)>& f,
                             const Box3D& box, double abs_tol, double rel_tol,
                             int max_cells = 20000);

// Compensated (Kahan) accumulator; summation order is the caller's
// responsibility and must be deterministic for bit-stable outputs.
class KahanSum {
public:
    void add(double v) {
        const double y = v - c_;
        const double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }

private:
    double s_ = 0.0;
    double c_ = 0.0;
};

}  // namespace orbitknots
