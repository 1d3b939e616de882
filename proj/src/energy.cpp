#include "fermicond/energy.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

namespace fermicond {

namespace {

double trace_with(const Mat& rho, const Mat& B) { return (rho.transpose().cwiseProduct(B)).sum().real(); }

double one_body_expect(const Mat& G, const Mat& h) { return (h.cwiseProduct(G)).sum().real(); }

Eigen::VectorXd coords(const Site& x) {
    Eigen::VectorXd v(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) v[i] = x[i];
    return v;
}

// nested adaptive quadrature over [-a, a]^d
double cube_integral(const std::function<double(const Eigen::VectorXd&)>& f, int d, double a) {
    Eigen::VectorXd x(d);
    std::function<double(int)> level = [&](int i) -> double {
        return adaptive_gk(
            [&](double xi) {
                x[i] = xi;
                return i + 1 == d ? f(x) : level(i + 1);
            },
            -a, a, 1e-11);
    };
    return level(0);
}

} // namespace

EnergyTrace energy_increments(const TransportContext& c, const VectorPotential& A_bar, double eta, double l,
                              const std::vector<double>& times, const DriveOptions& opt) {
    EnergyTrace tr;
    tr.times = times;
    tr.eta = eta;
    tr.l = l;
    tr.n_sites = c.box.n_sites();
    VectorPotential A = rescale(A_bar, l, eta);
    const double h0 = trace_with(c.state.rho, c.H.m);
    HamiltonianFn H = [&](double t) -> Mat {
        Mat h = c.H.m;
        if (eta != 0.0) add_second_quantized(c.rep, W_one_particle(c.box, c.hop, A, t), h);
        return h;
    };
    drive_observe(c.state.rho, H, times, opt, [&](double t, const Mat& rho) {
        Mat w = eta != 0.0 ? W_one_particle(c.box, c.hop, A, t) : Mat::Zero(c.box.n_sites(), c.box.n_sites());
        Mat G = one_body_density(c.rep, rho);
        const double ht = trace_with(rho, c.H.m);
        const double wt = one_body_expect(G, w);
        const double w0 = one_body_expect(c.G, w);
        tr.S.push_back(ht - h0);
        tr.P.push_back(wt);
        tr.Ip.push_back(ht + wt - h0 - w0);
        tr.Id.push_back(w0);
    });
    return tr;
}

double balance_residual(const EnergyTrace& tr) {
    double scale = 0, worst = 0;
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        scale = std::max({scale, std::abs(tr.S[i]), std::abs(tr.P[i]), std::abs(tr.Ip[i]), std::abs(tr.Id[i])});
        worst = std::max(worst, std::abs(tr.S[i] + tr.P[i] - tr.Ip[i] - tr.Id[i]));
    }
    return scale > 0 ? worst / scale : worst;
}

void write_energy_csv(std::ostream& os, const EnergyTrace& tr, const std::string& header) {
    os << "# " << header << "\n";
    os << "t,S,P,Ip,Id,S_norm,P_norm,Ip_norm,Id_norm\n" << std::setprecision(17);
    const double norm = tr.eta != 0.0 ? tr.eta * tr.eta * tr.n_sites : 1.0;
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        os << tr.times[i] << "," << tr.S[i] << "," << tr.P[i] << "," << tr.Ip[i] << "," << tr.Id[i] << ","
           << tr.S[i] / norm << "," << tr.P[i] / norm << "," << tr.Ip[i] / norm << "," << tr.Id[i] / norm << "\n";
    }
}

JouleIntegrand joule_integrand_X(const TransportContext& c, const VectorPotential& A, const std::vector<double>& s) {
    const SpectralData& sp = *c.spectral;
    const int n = sp.dim();
    const auto& bonds = c.box.bonds();
    std::vector<Mat> I;
    for (const Bond& b : bonds) I.push_back(to_eigenbasis(current_obs(c.rep, c.box, c.hop, {b.b, b.a}).op.m, sp));

    // entries where any bond current is nonzero
    RMat K = duhamel_kernel(c.state);
    std::vector<std::pair<int, int>> idx;
    for (int m = 0; m < n; ++m)
        for (int k = 0; k < n; ++k) {
            bool any = false;
            for (const Mat& op : I)
                if (op(k, m) != cplx(0.0, 0.0)) {
                    any = true;
                    break;
                }
            if (any && K(m, k) != 0.0) idx.push_back({m, k});
        }

    // M(s) = Σ_b 𝐄_s(b) I_b restricted to those entries
    const std::size_t ns = s.size();
    std::vector<Eigen::VectorXcd> M(ns, Eigen::VectorXcd::Zero(idx.size()));
    for (std::size_t i = 0; i < ns; ++i)
        for (std::size_t b = 0; b < bonds.size(); ++b) {
            const double e = integrated_field(A, s[i], coords(c.box.site(bonds[b].b)), coords(c.box.site(bonds[b].a)));
            if (e == 0.0) continue;
            for (std::size_t p = 0; p < idx.size(); ++p) M[i][p] += e * I[b](idx[p].second, idx[p].first);
        }
    Eigen::VectorXd kw(idx.size()), om(idx.size());
    for (std::size_t p = 0; p < idx.size(); ++p) {
        kw[p] = K(idx[p].first, idx[p].second);
        om[p] = sp.E(idx[p].second) - sp.E(idx[p].first);
    }

    // both orientations of x and of y give the same product
    const double pref = 4.0 / c.box.n_sites();
    JouleIntegrand X{s, RMat::Zero(ns, ns)};
    for (std::size_t i = 0; i < ns; ++i)
        for (std::size_t j = 0; j < ns; ++j) {
            if (i == j) continue;
            const double dt = s[i] - s[j];
            double acc = 0;
            for (std::size_t p = 0; p < idx.size(); ++p) {
                const cplx g = std::conj(M[j][p]) * M[i][p];
                if (g == cplx(0.0, 0.0)) continue;
                acc += kw[p] * (g * (std::polar(1.0, dt * om[p]) - 1.0)).real();
            }
            X.X(i, j) = pref * acc;
        }
    return X;
}

double joule_integrand_bound(const TransportContext& c, const VectorPotential& A, double s1, double s2) {
    double a1 = 0, a2 = 0;
    for (const Bond& b : c.box.bonds()) {
        const double norm = std::abs(c.hop.h(b.a, b.b));
        const Eigen::VectorXd x = coords(c.box.site(b.b)), y = coords(c.box.site(b.a));
        a1 += norm * std::abs(integrated_field(A, s1, x, y));
        a2 += norm * std::abs(integrated_field(A, s2, x, y));
    }
    return 8.0 * std::abs(s1 - s2) * a1 * a2 / c.box.n_sites();
}

RMat field_overlap(const VectorPotential& A, double s1, double s2) {
    const int d = A.d;
    RMat out(d, d);
    const double a = A.support > 0 ? A.support : 1.0;
    for (int k = 0; k < d; ++k)
        for (int q = 0; q < d; ++q)
            out(k, q) = cube_integral(
                [&](const Eigen::VectorXd& x) {
                    return electric_field_exact(A, s1, x)[k] * electric_field_exact(A, s2, x)[q];
                },
                d, a);
    return out;
}

double x_infinity(const std::function<RMat(double)>& xi, const VectorPotential& A, double s1, double s2,
                  OhmKernelOrder order) {
    RMat X = xi(s1 - s2);
    if (order == OhmKernelOrder::transposed) X.transposeInPlace();
    return 4.0 * X.cwiseProduct(field_overlap(A, s1, s2)).sum();
}

double simpson_any(const std::vector<double>& f, double h) {
    const int n = static_cast<int>(f.size()) - 1;
    if (n <= 0) return 0.0;
    if (n == 1) return 0.5 * h * (f[0] + f[1]);
    auto simpson = [&](int a, int b) { // even number of intervals from a to b
        double acc = f[a] + f[b];
        for (int k = a + 1; k < b; ++k) acc += ((k - a) % 2 ? 4.0 : 2.0) * f[k];
        return acc * h / 3.0;
    };
    if (n % 2 == 0) return simpson(0, n);
    // Simpson 3/8 on the last three intervals
    const double tail = 3.0 * h / 8.0 * (f[n - 3] + 3 * f[n - 2] + 3 * f[n - 1] + f[n]);
    return (n > 3 ? simpson(0, n - 3) : 0.0) + tail;
}

std::vector<double> triangle_integrals(const JouleIntegrand& X) {
    const std::size_t n = X.s.size();
    std::vector<double> out(n, 0.0);
    if (n < 2) return out;
    const double h = X.s[1] - X.s[0];
    std::vector<double> inner(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> row(i + 1);
        for (std::size_t j = 0; j <= i; ++j) row[j] = X.X(i, j);
        inner[i] = simpson_any(row, h);
    }
    for (std::size_t i = 1; i < n; ++i)
        out[i] = simpson_any(std::vector<double>(inner.begin(), inner.begin() + i + 1), h);
    return out;
}

JouleFlat joule_flat(const std::function<RMat(double)>& xi, const RMat& xi_d, const Envelope& env,
                     const Eigen::VectorXd& w, double t, OhmKernelOrder order, int n) {
    JouleFlat out;
    if (t <= env.t0) return out;
    const double hi = std::min(t, env.t1);
    int M = std::max(2, static_cast<int>(std::ceil(n * (hi - env.t0))));
    if (M % 2) ++M;
    const double h = (hi - env.t0) / M;
    auto kern = [&](double tau) {
        RMat X = xi(tau);
        if (order == OhmKernelOrder::transposed) X.transposeInPlace();
        return X;
    };
    std::vector<double> E(M + 1);
    for (int j = 0; j <= M; ++j) E[j] = env.field(env.t0 + j * h);
    std::vector<RMat> Xk(M + 1);
    for (int k = 0; k <= M; ++k) Xk[k] = kern(k * h);

    // J_p at each node, then the outer integral
    std::vector<double> outer(M + 1, 0.0);
    for (int i = 0; i <= M; ++i) {
        Eigen::VectorXd J = Eigen::VectorXd::Zero(w.size());
        if (i > 0) {
            for (int c = 0; c < w.size(); ++c) {
                std::vector<double> f(i + 1);
                for (int j = 0; j <= i; ++j) f[j] = (Xk[i - j] * w)[c] * E[j];
                J[c] = simpson_any(f, h);
            }
        }
        outer[i] = E[i] * w.dot(J);
    }
    out.ip = simpson_any(outer, h);

    const double intE = -(env.value(t) - env.value(env.t0));
    out.id = 0.5 * w.dot(xi_d * w) * intE * intE;

    // J_p(t) for t possibly beyond the pulse
    Eigen::VectorXd Jt = Eigen::VectorXd::Zero(w.size());
    for (int c = 0; c < w.size(); ++c) {
        std::vector<double> f(M + 1);
        for (int j = 0; j <= M; ++j) f[j] = (kern(t - (env.t0 + j * h)) * w)[c] * E[j];
        Jt[c] = simpson_any(f, h);
    }
    out.correction = intE * w.dot(Jt);
    return out;
}

} // namespace fermicond
