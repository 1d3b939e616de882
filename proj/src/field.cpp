#include "fermicond/field.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>

namespace fermicond {

namespace {
constexpr double pi = std::numbers::pi;

bool inside_unit_cube(const Eigen::VectorXd& x)
{
    for (Eigen::Index i = 0; i < x.size(); ++i)
        if (std::abs(x[i]) > 1.0) return false;
    return true;
}
} // namespace

double Envelope::value(double t) const
{
    if (t <= t0 || t >= t1) return 0.0;
    double s = std::sin(pi * (t - t0) / (t1 - t0));
    double v = amplitude * s * s;
    if (kind == Kind::gaussian) {
        double u = t - center;
        v *= std::exp(-u * u / (2 * width * width)) * std::cos(carrier * u);
    }
    return v;
}

double Envelope::derivative(double t) const
{
    if (t <= t0 || t >= t1) return 0.0;
    double k = pi / (t1 - t0);
    double ph = k * (t - t0);
    double s2 = std::sin(ph) * std::sin(ph);
    double ds2 = k * std::sin(2 * ph);
    if (kind == Kind::sin2) return amplitude * ds2;
    double u = t - center;
    double g = std::exp(-u * u / (2 * width * width));
    double dg = -u / (width * width) * g;
    double c = std::cos(carrier * u), dc = -carrier * std::sin(carrier * u);
    return amplitude * (ds2 * g * c + s2 * dg * c + s2 * g * dc);
}

VectorPotential zero_potential(int d)
{
    VectorPotential a;
    a.d = d;
    a.A = [d](double, const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(d).eval(); };
    a.dAdt = a.A;
    a.name = "zero";
    return a;
}

VectorPotential flat_pulse(int d, const Eigen::VectorXd& w, const Envelope& env)
{
    if (w.size() != d) throw Error(ErrorKind::shape_mismatch, "field direction needs d components");
    VectorPotential a;
    a.d = d;
    a.t0 = env.t0;
    a.t1 = env.t1;
    a.support = 1.0;
    a.name = env.kind == Envelope::Kind::sin2 ? "flat-sin2" : "flat-gaussian";
    a.A = [w, env](double t, const Eigen::VectorXd& x) -> Eigen::VectorXd {
        if (!inside_unit_cube(x)) return Eigen::VectorXd::Zero(w.size());
        return env.value(t) * w;
    };
    a.dAdt = [w, env](double t, const Eigen::VectorXd& x) -> Eigen::VectorXd {
        if (!inside_unit_cube(x)) return Eigen::VectorXd::Zero(w.size());
        return env.derivative(t) * w;
    };
    return a;
}

VectorPotential bump_pulse(int d, const Eigen::VectorXd& w, const Envelope& env)
{
    if (w.size() != d) throw Error(ErrorKind::shape_mismatch, "field direction needs d components");
    auto profile = [](const Eigen::VectorXd& x) {
        double p = 1.0;
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            if (std::abs(x[i]) >= 1.0) return 0.0;
            double c = std::cos(pi * x[i] / 2);
            p *= c * c;
        }
        return p;
    };
    VectorPotential a;
    a.d = d;
    a.t0 = env.t0;
    a.t1 = env.t1;
    a.support = 1.0;
    a.name = "bump";
    a.A = [w, env, profile](double t, const Eigen::VectorXd& x) -> Eigen::VectorXd {
        return env.value(t) * profile(x) * w;
    };
    a.dAdt = [w, env, profile](double t, const Eigen::VectorXd& x) -> Eigen::VectorXd {
        return env.derivative(t) * profile(x) * w;
    };
    return a;
}

VectorPotential gradient_potential(int d, std::function<Eigen::VectorXd(const Eigen::VectorXd&)> grad_phi,
                                   std::function<double(double)> g, double t0, double t1, double support)
{
    VectorPotential a;
    a.d = d;
    a.t0 = t0;
    a.t1 = t1;
    a.support = support;
    a.cyclic = false;
    a.name = "gradient";
    a.A = [grad_phi, g](double t, const Eigen::VectorXd& x) -> Eigen::VectorXd { return g(t) * grad_phi(x); };
    return a;
}

VectorPotential rescale(const VectorPotential& A, double l, double eta)
{
    if (!(l > 0)) throw Error(ErrorKind::invalid_argument, "rescale needs l > 0");
    VectorPotential a = A;
    a.support = A.support * l;
    a.name = A.name;
    auto base = A.A;
    a.A = [base, l, eta](double t, const Eigen::VectorXd& x) -> Eigen::VectorXd {
        if (eta == 0.0) return Eigen::VectorXd::Zero(x.size());
        return eta * base(t, x / l);
    };
    if (A.dAdt) {
        auto bd = A.dAdt;
        a.dAdt = [bd, l, eta](double t, const Eigen::VectorXd& x) -> Eigen::VectorXd {
            if (eta == 0.0) return Eigen::VectorXd::Zero(x.size());
            return eta * bd(t, x / l);
        };
    }
    return a;
}

Eigen::VectorXd electric_field(const VectorPotential& A, double t, const Eigen::VectorXd& x, double h)
{
    return -(A.A(t + h, x) - A.A(t - h, x)) / (2 * h);
}

Eigen::VectorXd electric_field_exact(const VectorPotential& A, double t, const Eigen::VectorXd& x, double h)
{
    if (A.dAdt) return -A.dAdt(t, x);
    return electric_field(A, t, x, h);
}

double adaptive_gk(const std::function<double(double)>& f, double a, double b, double abs_tol)
{
    double err = 0, l1 = 0;
    double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 25, 1e-13, &err, &l1);
    if (!(err <= abs_tol) && !(err <= 1e-13 * l1))
        throw Error(ErrorKind::quadrature_failure, "line integral did not reach tolerance (err " + std::to_string(err) + ")");
    return v;
}

double line_integral(const VectorPotential& A, double t, const Eigen::VectorXd& x1, const Eigen::VectorXd& x2)
{
    if (A.cyclic && (t <= A.t0 || t >= A.t1)) return 0.0;
    Eigen::VectorXd dx = x2 - x1;
    return adaptive_gk([&](double al) { return A.A(t, x1 + al * dx).dot(dx); }, 0.0, 1.0);
}

double integrated_field(const VectorPotential& A, double t, const Eigen::VectorXd& x1, const Eigen::VectorXd& x2)
{
    Eigen::VectorXd dx = x2 - x1;
    return adaptive_gk([&](double al) { return electric_field_exact(A, t, x1 + al * dx).dot(dx); }, 0.0, 1.0);
}

} // namespace fermicond
