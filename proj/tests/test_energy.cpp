#include <doctest.h>

#include "fermicond/energy.hpp"

#include <sstream>

using namespace fermicond;

namespace {

Model chain_model(int n, DisorderKind kind, std::uint64_t seed, double lambda = 1.0,
                  InterparticleInteraction ip = InterparticleInteraction::none()) {
    auto spec = LatticeSpec::chain(n);
    return make_model(spec, sample_disorder({kind, seed}, spec), 0.5, lambda, ip);
}

Eigen::VectorXd unit(int d, int k) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
    w[k] = 1.0;
    return w;
}

double max_abs(const std::vector<double>& v) {
    double m = 0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

} // namespace

TEST_CASE("energy traces vanish without field and before the pulse") {
    Model m = chain_model(4, DisorderKind::iid_uniform, 5, 1.0, InterparticleInteraction::density_density(0.5, 1.0, 1.0));
    auto c = TransportContext::build(m, 1.0);
    Envelope env;
    auto A = flat_pulse(1, unit(1, 0), env);
    auto grid = uniform_grid(-0.5, 1.5, 21);

    auto zero = energy_increments(c, A, 0.0, 1.5, grid, {});
    CHECK(max_abs(zero.S) < 1e-12);
    CHECK(max_abs(zero.P) < 1e-12);
    CHECK(max_abs(zero.Ip) < 1e-12);
    CHECK(max_abs(zero.Id) < 1e-12);

    auto tr = energy_increments(c, A, 0.1, 1.5, grid, {});
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (grid[i] <= env.t0) {
            CHECK(std::abs(tr.S[i]) < 1e-12);
            CHECK(std::abs(tr.P[i]) < 1e-12);
            CHECK(std::abs(tr.Ip[i]) < 1e-12);
            CHECK(std::abs(tr.Id[i]) < 1e-12);
        }
    CHECK(max_abs(tr.S) > 1e-6);
}

TEST_CASE("balance, heat production and quadratic scaling") {
    struct Case {
        Model m;
        double l;
        int d;
    };
    std::vector<Case> cases;
    cases.push_back({chain_model(6, DisorderKind::iid_uniform, 11, 1.0,
                                 InterparticleInteraction::density_density(0.7, 1.0, 2.0)),
                     3.0, 1});
    auto rect = LatticeSpec::rect({2, 3});
    cases.push_back({make_model(rect, sample_disorder({DisorderKind::iid_uniform, 4}, rect), 0.3, 0.5,
                                InterparticleInteraction::hubbard(1.0)),
                     1.5, 2});
    Envelope env;
    env.t1 = 1.5;
    auto grid = uniform_grid(0.0, 3.0, 31);
    for (auto& cs : cases) {
        auto c = TransportContext::build(cs.m, 2.0);
        Eigen::VectorXd w = Eigen::VectorXd::Ones(cs.d).normalized();
        auto A = bump_pulse(cs.d, w, env);
        auto t1 = energy_increments(c, A, 0.04, cs.l, grid, {});
        auto t2 = energy_increments(c, A, 0.02, cs.l, grid, {});
        CHECK(balance_residual(t1) < 1e-6);
        CHECK(balance_residual(t2) < 1e-6);
        double s_end = 0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (grid[i] < env.t1) continue;
            CHECK(t1.S[i] >= -1e-9);
            if (s_end == 0) s_end = t1.S[i];
            CHECK(std::abs(t1.S[i] - s_end) < 1e-9 * std::max(1.0, std::abs(s_end)));
        }
        CHECK(s_end > 0);
        // S and Ip scale as η² over one octave
        const std::size_t last = grid.size() - 1;
        CHECK(t1.S[last] / t2.S[last] == doctest::Approx(4.0).epsilon(0.02));
        CHECK(t1.Ip[last] / t2.Ip[last] == doctest::Approx(4.0).epsilon(0.02));
    }
}

TEST_CASE("Joule integrand trivial values") {
    Model m = chain_model(3, DisorderKind::iid_uniform, 3);
    auto c = TransportContext::build(m, 1.0);
    Envelope env;
    auto s = uniform_grid(0.0, 1.0, 11);
    auto X = joule_integrand_X(c, rescale(bump_pulse(1, unit(1, 0), env), 1.0, 1.0), s);
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(X.X(i, i) == 0.0);
    CHECK(X.X.cwiseAbs().maxCoeff() > 1e-3);
    auto Z = joule_integrand_X(c, flat_pulse(1, Eigen::VectorXd::Zero(1), env), s);
    CHECK(Z.X.cwiseAbs().maxCoeff() == 0.0);
    auto tri = triangle_integrals(Z);
    CHECK(max_abs(tri) == 0.0);
}

TEST_CASE("Joule integrand stays below the box bound") {
    Envelope env;
    auto s = uniform_grid(0.0, 1.0, 21);
    for (int l : {1, 2, 3}) {
        Model m = chain_model(2 * l + 1, DisorderKind::iid_uniform, 17, 2.0,
                              InterparticleInteraction::density_density(0.5, 1.0, 1.0));
        auto c = TransportContext::build(m, 1.0);
        auto A = rescale(bump_pulse(1, unit(1, 0), env), l, 1.0);
        auto X = joule_integrand_X(c, A, s);
        for (std::size_t i = 0; i < s.size(); ++i)
            for (std::size_t j = 0; j < s.size(); ++j)
                CHECK(std::abs(X.X(i, j)) <= joule_integrand_bound(c, A, s[i], s[j]) + 1e-12);
    }
}

TEST_CASE("simpson_any on polynomials") {
    for (int n : {1, 2, 3, 4, 5, 7, 10}) {
        const double h = 1.0 / n;
        std::vector<double> f(n + 1);
        for (int i = 0; i <= n; ++i) f[i] = std::pow(i * h, 2);
        CHECK(simpson_any(f, h) == doctest::Approx(1.0 / 3.0).epsilon(n == 1 ? 1.0 : 1e-12));
    }
}

TEST_CASE("flat field: Joule form against the double integral of X_l") {
    Envelope env;
    auto s = uniform_grid(0.0, 1.0, 201);
    struct Case {
        Model m;
        double l;
        Eigen::VectorXd w;
    };
    std::vector<Case> cases;
    cases.push_back({chain_model(3, DisorderKind::iid_uniform, 8), 1.0, unit(1, 0)});
    auto rect = LatticeSpec::rect({2, 3});
    Eigen::VectorXd w2(2);
    w2 << 0.6, -0.8;
    cases.push_back({make_model(rect, sample_disorder({DisorderKind::iid_uniform, 9}, rect), 0.4, 0.5,
                                InterparticleInteraction::none()),
                     1.0, w2});
    for (auto& cs : cases) {
        auto c = TransportContext::build(cs.m, 1.0);
        auto A = flat_pulse(static_cast<int>(cs.w.size()), cs.w, env);
        auto X = joule_integrand_X(c, rescale(A, cs.l, 1.0), s);
        auto tri = triangle_integrals(X);
        auto k = xi_kernel(c);
        auto xi = [&](double t) { return k.eval(t); };
        for (int i : {100, 150, 200}) {
            auto jf = joule_flat(xi, xi_d_l(c), env, cs.w, s[i]);
            // four orientations of each bond pair contribute the same product
            CHECK(std::abs(tri[i] - 4.0 * jf.ip) < 1e-6);
        }
    }
}

TEST_CASE("driven increments against the linear-response densities") {
    Envelope env;
    Eigen::VectorXd w = unit(1, 0);
    auto grid = uniform_grid(0.0, 2.0, 41);
    for (int n : {3, 5}) {
        Model m = chain_model(n, DisorderKind::iid_uniform, 3);
        auto c = TransportContext::build(m, 1.0);
        const double l = (n - 1) / 2.0;
        const double N = c.box.n_sites();
        auto A = flat_pulse(1, w, env);
        auto X = joule_integrand_X(c, rescale(A, l, 1.0), uniform_grid(0.0, 2.0, 201));
        auto tri = triangle_integrals(X);
        auto k = xi_kernel(c);
        auto xi = [&](double t) { return k.eval(t); };

        std::vector<double> err_ip, err_s, err_id, err_p;
        for (double eta : {0.02, 0.01}) {
            auto tr = energy_increments(c, A, eta, l, grid, {});
            const double e2 = eta * eta;
            double ip = 0, s = 0, id = 0, p = 0;
            for (int i : {10, 20, 40}) {
                auto jf = joule_flat(xi, xi_d_l(c), env, w, grid[i]);
                const double scale = N * std::abs(jf.ip) + N * std::abs(jf.id) + 1e-3;
                ip = std::max(ip, std::abs(tr.Ip[i] / e2 - N * jf.ip) / scale);
                s = std::max(s, std::abs(tr.S[i] / e2 - N * jf.s()) / scale);
                id = std::max(id, std::abs(tr.Id[i] / e2 + N * jf.id) / scale);
                p = std::max(p, std::abs(tr.P[i] / e2 - N * (jf.correction - jf.id)) / scale);
            }
            // Ip against the double integral, normalised by |Λ|/4
            const double dbl = std::abs(tr.Ip[40] / e2 - 0.25 * N * tri[200]) / std::abs(0.25 * N * tri[200]);
            CHECK(dbl < 3.0 * eta);
            err_ip.push_back(ip);
            err_s.push_back(s);
            err_id.push_back(id);
            err_p.push_back(p);
        }
        for (auto* e : {&err_ip, &err_s, &err_id, &err_p}) {
            CHECK((*e)[0] < 0.05);
            // O(η) remainder: halving η at least shrinks it by a quarter
            CHECK((*e)[1] < 0.75 * (*e)[0] + 1e-7);
        }
    }
}

TEST_CASE("X_l approaches X_inf on a clean chain") {
    auto clean = [](int n) {
        auto spec = LatticeSpec::chain(n);
        return make_model(spec, sample_disorder({DisorderKind::deterministic_zero, 0}, spec), 0.0, 0.0,
                          InterparticleInteraction::none());
    };
    auto cref = TransportContext::build(clean(11), 1.0);
    auto bulk = bulk_kernel(cref);
    auto xi = [&](double t) { return bulk.eval(t); };
    Envelope env;
    auto A = bump_pulse(1, unit(1, 0), env);
    const std::vector<std::pair<double, double>> pts = {{0.3, 0.1}, {0.6, 0.2}, {0.9, 0.4}, {0.8, 0.7}};
    std::vector<double> err;
    for (int l : {2, 3, 4}) {
        auto c = TransportContext::build(clean(2 * l + 1), 1.0);
        double e = 0;
        for (auto [s1, s2] : pts) {
            const double xinf = x_infinity(xi, A, s1, s2);
            // the clean free current is conserved in the bulk
            CHECK(std::abs(xinf) < 1e-5);
            auto X = joule_integrand_X(c, rescale(A, l, 1.0), {s1, s2});
            e = std::max(e, std::abs(X.X(0, 1) - 0.5 * xinf));
        }
        err.push_back(e);
    }
    MESSAGE("|X_l - X_inf/2| for l=2,3,4: " << err[0] << " " << err[1] << " " << err[2]);
    CHECK(err[1] < err[0]);
    CHECK(err[2] < err[1]);
}

TEST_CASE("energy CSV") {
    EnergyTrace tr;
    tr.times = {0.0, 1.0};
    tr.S = {0.0, 0.5};
    tr.P = {0.0, 0.0};
    tr.Ip = {0.0, 0.5};
    tr.Id = {0.0, 0.0};
    tr.eta = 0.5;
    tr.n_sites = 4; // η²|Λ| = 1
    std::ostringstream os;
    write_energy_csv(os, tr, "chain 4");
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "# chain 4");
    std::getline(is, line);
    CHECK(line == "t,S,P,Ip,Id,S_norm,P_norm,Ip_norm,Id_norm");
    std::getline(is, line);
    std::getline(is, line);
    CHECK(line.substr(0, 2) == "1,");
    CHECK(line.find(",0.5,") != std::string::npos);
}
