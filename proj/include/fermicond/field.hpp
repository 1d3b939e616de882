#pragma once

#include "fermicond/common.hpp"

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace fermicond {

using PointFn = std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>;

// Time envelope 𝒜(t) of a cyclic pulse; vanishes outside [t0, t1].
struct Envelope {
    enum class Kind { sin2, gaussian };
    Kind kind = Kind::sin2;
    double t0 = 0.0, t1 = 1.0;
    double amplitude = 1.0;
    double center = 0.5;  // gaussian only
    double width = 0.25;  // gaussian only
    double carrier = 0.0; // gaussian only: cos(carrier (t - center))

    double value(double t) const;
    double derivative(double t) const;
    // ℰ_t = -𝒜'(t) for flat fields
    double field(double t) const { return -derivative(t); }
};

struct VectorPotential {
    int d = 1;
    PointFn A;
    PointFn dAdt; // optional analytic time derivative
    double t0 = 0.0, t1 = 0.0;
    double support = 0.0; // A(t, .) vanishes outside [-support, support]^d
    bool cyclic = true;   // A(t, .) = 0 for t <= t0 and t >= t1
    std::string name = "custom";

    Eigen::VectorXd operator()(double t, const Eigen::VectorXd& x) const { return A(t, x); }
};

VectorPotential zero_potential(int d);
// A(t,x) = 𝒜(t) w on [-1,1]^d, zero elsewhere: E = ℰ_t w with ℰ = -𝒜'
VectorPotential flat_pulse(int d, const Eigen::VectorXd& w, const Envelope& env);
// A(t,x) = 𝒜(t) w Π cos²(π x_i / 2) on [-1,1]^d
VectorPotential bump_pulse(int d, const Eigen::VectorXd& w, const Envelope& env);
// A(t,x) = g(t) ∇φ(x) for a user scalar φ; support is the caller's promise
VectorPotential gradient_potential(int d, std::function<Eigen::VectorXd(const Eigen::VectorXd&)> grad_phi,
                                   std::function<double(double)> g, double t0, double t1, double support);

// A_l(t,x) = η A(t, x/l)
VectorPotential rescale(const VectorPotential& A, double l, double eta);

// E_A(t,x) = -∂_t A by central difference with step h
Eigen::VectorXd electric_field(const VectorPotential& A, double t, const Eigen::VectorXd& x, double h = 1e-5);
// analytic -∂_t A when available, otherwise the central difference
Eigen::VectorXd electric_field_exact(const VectorPotential& A, double t, const Eigen::VectorXd& x, double h = 1e-5);

// ∫_0^1 A(t, α x2 + (1-α) x1)·(x2 - x1) dα, adaptive Gauss–Kronrod to 1e-10
double line_integral(const VectorPotential& A, double t, const Eigen::VectorXd& x1, const Eigen::VectorXd& x2);
// 𝐄_t^A(x1,x2) = ∫_0^1 E_A(t, α x2 + (1-α) x1)·(x2 - x1) dα
double integrated_field(const VectorPotential& A, double t, const Eigen::VectorXd& x1, const Eigen::VectorXd& x2);

// adaptive G7-K15 on [a,b] to absolute tolerance; throws quadrature-failure
double adaptive_gk(const std::function<double(double)>& f, double a, double b, double abs_tol = 1e-10);

} // namespace fermicond
