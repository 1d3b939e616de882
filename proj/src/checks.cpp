#include "fermicond/checks.hpp"

#include "fermicond/stats.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <numbers>

namespace fermicond {

Gate at_most(std::string name, double value, double limit, std::string note) {
    return {std::move(name), value, limit, value <= limit, std::move(note)};
}

Gate at_least(std::string name, double value, double limit, std::string note) {
    return {std::move(name), value, limit, value >= limit, std::move(note), false};
}

bool all_pass(const std::vector<Gate>& g) {
    for (const auto& x : g)
        if (!x.pass) return false;
    return true;
}

namespace {

double min_eig(const RMat& m) {
    Eigen::SelfAdjointEigenSolver<RMat> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

double sup_abs(const RMat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

cplx cnormal(Rng& r) { return {r.normal(), r.normal()}; }

} // namespace

OperatorMatrix random_local(const FockRep& rep, const std::vector<int>& modes, Rng& r, bool even_only,
                            bool conserving) {
    auto a = build_annihilators(rep);
    SpMat acc(rep.dim(), rep.dim());
    acc.setIdentity();
    acc *= cnormal(r);
    std::vector<SpMat> gens;
    std::vector<bool> created;
    for (int x : modes) {
        gens.push_back(sparse(a[x]));
        created.push_back(false);
        gens.push_back(SpMat(gens.back().adjoint()));
        created.push_back(true);
    }
    if (!even_only && !conserving)
        for (const auto& g : gens) acc += cnormal(r) * g;
    for (std::size_t i = 0; i < gens.size(); ++i)
        for (std::size_t j = i + 1; j < gens.size(); ++j) {
            const cplx c = cnormal(r);
            if (conserving && created[i] == created[j]) continue;
            acc += c * SpMat(gens[i] * gens[j]);
        }
    OperatorMatrix out{Mat(acc), Parity::even};
    out.parity = (even_only || conserving) ? Parity::even : classify_parity(out.m);
    return out;
}

std::vector<Gate> transport_gates(const TransportContext& c, const BohrKernel& k, const std::vector<double>& grid,
                                  double theta) {
    std::vector<Gate> g;
    g.push_back(at_most("xi(0)", sup_abs(k.eval(0.0)), 0.0));
    double sym = 0;
    for (double t : grid) sym = std::max(sym, sup_abs(k.eval(-t) - k.eval(t).transpose()));
    g.push_back(at_most("xi(-t)-xi(t)^T", sym, 1e-10));
    const RMat xd = xi_d_l(c);
    double diag = 0;
    for (int a = 0; a < xd.rows(); ++a) diag = std::max(diag, std::abs(xd(a, a)));
    g.push_back(at_most("|xi_d,kk|", diag, 2.0 * (theta + 1.0)));
    return g;
}

std::vector<Gate> measure_gates(const MatrixMeasure& mu, const BohrKernel& k, const std::vector<double>& grid) {
    double lk = 0, psd = std::numeric_limits<double>::infinity();
    for (double t : grid) {
        const RMat s = k.sym(t);
        lk = std::max(lk, sup_abs(levy_khintchine(mu, t) - s));
        psd = std::min(psd, min_eig(-s));
    }
    return {at_most("levy-khintchine sup error", lk, 1e-8),
            at_least("min atom eigenvalue", min_weight_eigenvalue(mu), -1e-10),
            at_least("min eig -[xi]_+", psd, -1e-10)};
}

std::vector<Gate> time_reversal_gates(const TransportContext& c, const BohrKernel& k, const std::vector<double>& grid) {
    double anti = 0;
    for (double t : grid) anti = std::max(anti, sup_abs(k.antisym(t)));
    const Eigen::VectorXd jth = thermal_current(c);
    return {at_most("|[xi]_-|", anti, 1e-10), at_most("|J_th|", jth.size() ? jth.cwiseAbs().maxCoeff() : 0.0, 1e-10)};
}

Gate kms_gate(const TransportContext& c, int pairs, std::uint64_t seed) {
    const int n = c.box.n_sites();
    double worst = 0;
    for (int i = 0; i < pairs; ++i) {
        Rng r(seed, {stream_tag::battery, 2, i});
        const int x = std::min(n - 1, static_cast<int>(r.uniform() * n));
        const int y = std::min(n - 1, static_cast<int>(r.uniform() * n));
        std::vector<int> m1{x};
        if (n > 1) m1.push_back((x + 1) % n);
        auto B1 = random_local(c.rep, m1, r, false);
        auto B2 = random_local(c.rep, {y}, r, false);
        const cplx lhs = kms_lhs(B1, B2, c.state);
        const cplx rhs = c.state.expect(B2.m * B1.m);
        worst = std::max(worst, std::abs(lhs - rhs) / (opnorm(B1) * opnorm(B2)));
    }
    return at_most("kms", worst, 1e-9, std::to_string(pairs) + " pairs");
}

WorkCheck work_check(const TransportContext& c, int perturbations, std::uint64_t seed, const DriveOptions& opt) {
    WorkCheck out;
    const int n = c.box.n_sites();
    const Eigen::Index dim = c.rep.dim();
    const double T = 2.0;
    for (int p = 0; p < perturbations; ++p) {
        Rng r(seed, {stream_tag::battery, 1, p});
        const int x = std::min(n - 1, static_cast<int>(r.uniform() * n));
        std::vector<int> modes{x};
        if (n > 1) modes.push_back((x + 1) % n);
        auto B = random_local(c.rep, modes, r, true, true);
        const Mat Bh = 0.5 * (B.m + B.m.adjoint());
        const double amp = r.uniform(0.2, 1.0) / std::max(1e-12, opnorm(Bh));
        const double om = r.uniform(0.0, 3.0);
        const double k = std::numbers::pi / T;
        HamiltonianFn A = [&, amp, om, k](double t) -> Mat {
            if (t <= 0 || t >= T) return Mat::Zero(dim, dim);
            const double s = std::sin(k * t);
            return (amp * s * s * std::cos(om * t)) * Bh;
        };
        HamiltonianFn dA = [&, amp, om, k](double t) -> Mat {
            if (t <= 0 || t >= T) return Mat::Zero(dim, dim);
            const double s = std::sin(k * t);
            return (amp * (k * std::sin(2 * k * t) * std::cos(om * t) - om * s * s * std::sin(om * t))) * Bh;
        };
        auto w = work_functional(c.state, c.H, A, dA, 0.0, T, opt);
        out.L.push_back(w.L);
        out.energy_increment.push_back(w.energy_increment);
    }
    double lo = std::numeric_limits<double>::infinity();
    for (double v : out.L) lo = std::min(lo, v);
    out.gate = at_least("work functional", out.L.empty() ? 0.0 : lo, -1e-9,
                        std::to_string(perturbations) + " cyclic perturbations");
    return out;
}

HeatCheck heat_check(const TransportContext& c, const VectorPotential& A_bar, double eta, double l,
                     const std::vector<double>& times, const DriveOptions& opt) {
    HeatCheck h;
    h.trace = energy_increments(c, A_bar, eta, l, times, opt);
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < times.size(); ++i)
        if (times[i] >= A_bar.t1) lo = std::min(lo, h.trace.S[i]);
    if (!std::isfinite(lo)) lo = 0;
    h.gates = {at_least("heat production", lo, -1e-9), at_most("energy balance", balance_residual(h.trace), 1e-6)};
    return h;
}

LRCheck lieb_robinson_bonds(const TransportContext& c, double theta, const InterparticleInteraction& ip,
                            const DecayFunction& F, const std::vector<double>& times, double dmin, double dmax) {
    LRCheck out;
    const auto params = lieb_robinson_params(c.box, theta, ip, F);
    const auto& bonds = c.box.bonds();
    std::vector<LocalObservable> obs;
    for (const auto& b : bonds) obs.push_back({current_obs(c.rep, c.box, c.hop, {b.b, b.a}).op, {b.a, b.b}});
    double worst = 0;
    for (std::size_t i = 0; i < bonds.size(); ++i)
        for (std::size_t j = i + 1; j < bonds.size(); ++j) {
            double dist = std::numeric_limits<double>::infinity();
            for (int x : obs[i].support)
                for (int y : obs[j].support) dist = std::min(dist, c.box.distance(x, y));
            if (dist < dmin - 1e-12 || dist > dmax + 1e-12) continue;
            for (double t : times) {
                auto r = lieb_robinson_check(obs[i], obs[j], t, *c.spectral, c.box, params);
                out.rows.push_back({int(i), int(j), dist, t, r.lhs, r.rhs, r.satisfied});
                const double excess = std::max(0.0, r.lhs - 1e-10);
                worst = std::max(worst, r.rhs > 0 ? excess / r.rhs : (excess > 0 ? INFINITY : 0.0));
            }
        }
    out.gate = at_most("lieb-robinson lhs/rhs", worst, 1.0, std::to_string(out.rows.size()) + " pairs x times");
    return out;
}

OhmCheck ohm_check(const TransportContext& c, const Envelope& env, const Eigen::VectorXd& w, double l,
                   const std::vector<double>& etas, const std::vector<double>& times, const DriveOptions& opt) {
    OhmCheck o;
    o.etas = etas;
    const auto k = xi_kernel(c);
    o.lin = ohm_linear([&](double t) { return k.eval(t); }, xi_d_l(c), env, w, times, OhmKernelOrder::transposed);
    const auto A = flat_pulse(c.box.dim(), w, env);
    for (double eta : etas) {
        o.traces.push_back(driven_currents(c, A, eta, l, times, opt));
        double r = 0;
        for (std::size_t i = 0; i < times.size(); ++i)
            r = std::max(r, (o.traces.back().J_p[i] - eta * o.lin.J_p[i]).norm());
        o.remainder.push_back(r);
    }
    for (const auto& j : o.lin.J_p) o.scale = std::max(o.scale, j.norm());
    // Lagrange weights of the interpolant through (η_j, 𝕁_p(η_j)/η_j) at η = 0
    std::vector<double> L(etas.size(), 1.0);
    for (std::size_t j = 0; j < etas.size(); ++j)
        for (std::size_t m = 0; m < etas.size(); ++m)
            if (m != j) L[j] *= -etas[m] / (etas[j] - etas[m]);
    for (std::size_t i = 0; i < times.size(); ++i) {
        Eigen::VectorXd x = Eigen::VectorXd::Zero(w.size());
        for (std::size_t j = 0; j < etas.size(); ++j) x += L[j] * o.traces[j].J_p[i] / etas[j];
        o.extrapolation_error = std::max(o.extrapolation_error, (x - o.lin.J_p[i]).norm());
    }
    if (etas.size() >= 2) {
        o.order = fit_loglog(etas, o.remainder).slope;
        o.gates.push_back(at_least("ohm remainder order", o.order, 1.9));
    }
    o.gates.push_back(at_most("ohm extrapolation", o.extrapolation_error, 1e-4 * (1.0 + o.scale)));
    return o;
}

JouleCheck joule_check(const TransportContext& c, const VectorPotential& A_bar, double l,
                       const std::vector<double>& etas, const std::vector<double>& times, const DriveOptions& opt,
                       int x_points) {
    JouleCheck j;
    const double t_end = times.back();
    auto X = joule_integrand_X(c, rescale(A_bar, l, 1.0), uniform_grid(A_bar.t0, t_end, x_points));
    j.double_integral = triangle_integrals(X).back();
    const double N = c.box.n_sites();
    const double ld = std::pow(l, c.box.dim());
    double balance = 0, heat = std::numeric_limits<double>::infinity();
    std::vector<double> s_end, a;
    for (double eta : etas) {
        auto tr = energy_increments(c, A_bar, eta, l, times, opt);
        balance = std::max(balance, balance_residual(tr));
        for (std::size_t i = 0; i < times.size(); ++i)
            if (times[i] >= A_bar.t1) heat = std::min(heat, tr.S[i]);
        const double e2 = eta * eta;
        j.ratio_ld.push_back(tr.Ip.back() / (e2 * ld) / j.double_integral);
        j.ratio_sites.push_back(tr.Ip.back() / (e2 * N / 4.0) / j.double_integral);
        s_end.push_back(tr.S.back());
        j.traces.push_back(std::move(tr));
    }
    if (!std::isfinite(heat)) heat = 0;
    j.gates.push_back(at_most("energy balance", balance, 1e-6));
    j.gates.push_back(at_least("heat production", heat, -1e-9));
    if (etas.size() >= 2) {
        j.s_slope = fit_loglog(etas, s_end).slope;
        j.gates.push_back(at_most("S eta^2 scaling", std::abs(j.s_slope - 2.0) / 2.0, 0.02));
    }
    // O(η) budget: twice the spread of the ratio across the η grid, plus round-off
    auto budget = [&](const std::vector<double>& r) {
        double lo = r[0], hi = r[0];
        for (double v : r) lo = std::min(lo, v), hi = std::max(hi, v);
        return 2.0 * (hi - lo) + 1e-6;
    };
    std::size_t small = 0;
    for (std::size_t i = 1; i < etas.size(); ++i)
        if (etas[i] < etas[small]) small = i;
    j.gates.push_back(at_most("Ip/(eta^2 |L|/4) vs X_l integral", std::abs(j.ratio_sites[small] - 1.0),
                              budget(j.ratio_sites)));
    j.gates.push_back(at_most("Ip/(eta^2 l^d) vs X_l integral", std::abs(j.ratio_ld[small] - 1.0), budget(j.ratio_ld),
                              "literal l^d normalisation"));
    return j;
}

BochnerCheck bochner_check(const BohrKernel& k, int pulses, double t0, double t1, std::uint64_t seed, int n) {
    BochnerCheck b;
    const int d = k.d();
    auto xi = [&](double t) { return k.eval(t); };
    for (int p = 0; p < pulses; ++p) {
        Rng r(seed, {stream_tag::battery, 3, p});
        std::vector<double> cm(3);
        std::vector<Eigen::VectorXd> vm(3, Eigen::VectorXd(d));
        for (int m = 0; m < 3; ++m) {
            cm[m] = r.normal();
            for (int q = 0; q < d; ++q) vm[m][q] = r.normal();
        }
        auto dphi = [&](double t) {
            const double u = (t - t0) / (t1 - t0);
            Eigen::VectorXd out = Eigen::VectorXd::Zero(d);
            for (int m = 0; m < 3; ++m)
                out += cm[m] * std::numbers::pi * (m + 1) / (t1 - t0) * std::sin(2 * std::numbers::pi * (m + 1) * u) *
                       vm[m];
            return out;
        };
        b.values.push_back(bochner_functional(xi, dphi, t0, t1, n));
    }
    double lo = std::numeric_limits<double>::infinity();
    for (double v : b.values) lo = std::min(lo, v);
    b.gate = at_least("bochner functional", b.values.empty() ? 0.0 : lo, -1e-8,
                      std::to_string(pulses) + " pulses");
    return b;
}

CesaroCheck cesaro_check(const MatrixMeasure& mu, const BohrKernel& k, const std::vector<double>& Ts) {
    CesaroCheck out;
    out.T = Ts;
    const auto ac = ac_measure(mu);
    const RMat total = ac.total();
    for (const auto& a : ac.atoms) out.C += a.weight.norm() / std::abs(a.nu);
    double worst_scaled = 0;
    auto err_at = [&](double T) {
        const int intervals = 2 * static_cast<int>(std::ceil(50.0 * T));
        return (cesaro_mean([&](double s) { return k.sym(s); }, T, intervals) + total).norm();
    };
    for (double T : Ts) {
        double sup = 0;
        for (int j = 0; j <= 4; ++j) {
            const double Tp = T * (1.0 + 0.25 * j / 4.0);
            const double e = err_at(Tp);
            if (j == 0) out.err_at_T.push_back(e);
            sup = std::max(sup, e);
            worst_scaled = std::max(worst_scaled, Tp * e);
        }
        out.err.push_back(sup);
    }
    if (Ts.size() >= 2) {
        out.slope = fit_loglog(Ts, out.err).slope;
        out.gates.push_back(at_most("cesaro 1/T slope", std::abs(out.slope + 1.0), 0.1));
    }
    out.gates.push_back(at_most("cesaro T*err", worst_scaled, out.C + 1e-9));
    return out;
}

DrudeCheck drude_check(const MatrixMeasure& mu, const Eigen::VectorXd& w, double T, const std::vector<double>& nu_grid) {
    DrudeCheck d;
    d.report = drude_tail_compare(mu, w, T, nu_grid);
    d.expected_slope = d.report.drude.D / T;
    std::vector<double> x, y;
    for (const auto& r : d.report.rows)
        if (r.nu > d.report.spectral_diameter) {
            d.max_tail_beyond = std::max(d.max_tail_beyond, std::abs(r.measure_tail));
            x.push_back(r.nu);
            y.push_back(r.drude_tail);
        }
    d.gates.push_back(at_most("measure tail past diameter", d.max_tail_beyond, 0.0));
    if (x.size() >= 2 && d.expected_slope > 0) {
        d.slope = fit_line(x, y).slope;
        d.gates.push_back(at_most("drude tail slope vs D/T", std::abs(d.slope / d.expected_slope - 1.0), 0.05));
    } else {
        d.gates.push_back({"drude tail slope vs D/T", 0, 0.05, false, "no grid points past the spectral diameter", true});
    }
    return d;
}

std::vector<double> nu_plot_grid(const MatrixMeasure& mu) {
    double top = 0;
    for (const auto& a : mu.atoms) top = std::max(top, std::abs(a.nu));
    return uniform_grid(0.0, top > 0 ? 4.0 * top : 1.0, 400);
}

} // namespace fermicond
