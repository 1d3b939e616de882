#include <doctest.h>

#include "fermicond/field.hpp"
#include "fermicond/model.hpp"
#include "fermicond/rng.hpp"
#include "fermicond/stats.hpp"

#include <boost/math/special_functions/zeta.hpp>

#include <bit>
#include <cmath>

using namespace fermicond;

namespace {

LatticeSpec cube(int d, int l) {
    LatticeSpec s;
    s.d = d;
    s.l = l;
    return s;
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd x(v.size());
    int i = 0;
    for (double a : v) x[i++] = a;
    return x;
}

Envelope sin2(double t0, double t1, double amp) {
    Envelope e;
    e.t0 = t0;
    e.t1 = t1;
    e.amplitude = amp;
    return e;
}

} // namespace

TEST_CASE("clean chain Laplacian") {
    Box box(cube(1, 1));
    auto w = sample_disorder({DisorderKind::deterministic_zero, 0}, box.spec());
    auto hop = build_hopping(box, w, 0.0);
    Mat expect(3, 3);
    expect << 2, -1, 0, -1, 2, -1, 0, -1, 2;
    CHECK((hop.h - expect).norm() == 0.0);
}

TEST_CASE("hoppings cancel at theta=1, omega2=-1") {
    Box box(cube(2, 1));
    auto w = sample_disorder({DisorderKind::deterministic_zero, 0}, box.spec());
    for (auto& z : w.omega2) z = -1.0;
    auto hop = build_hopping(box, w, 1.0);
    Mat off = hop.h;
    off.diagonal().setZero();
    CHECK(off.norm() == 0.0);
    for (int i = 0; i < box.n_sites(); ++i) CHECK(hop.h(i, i) == cplx(4.0));
}

TEST_CASE("random hopping is self-adjoint with bounded entries") {
    Box box(cube(2, 2));
    auto w = sample_disorder({DisorderKind::iid_uniform, 3}, box.spec());
    auto hop = build_hopping(box, w, 0.7);
    CHECK((hop.h - hop.h.adjoint()).norm() == 0.0);
    for (int i = 0; i < box.n_sites(); ++i)
        for (int j = 0; j < box.n_sites(); ++j) {
            if (i == j) continue;
            double m = std::abs(hop.h(i, j));
            if (box.bond_index(i, j) >= 0) CHECK(m <= 1.7 + 1e-15);
            else CHECK(m == 0.0);
        }
    Eigen::ComplexEigenSolver<Mat> ces(hop.h);
    for (Eigen::Index k = 0; k < ces.eigenvalues().size(); ++k) CHECK(std::abs(ces.eigenvalues()(k).imag()) < 1e-12);
}

TEST_CASE("Peierls substitution") {
    Box box(cube(1, 3));
    auto w = sample_disorder({DisorderKind::iid_uniform, 4}, box.spec());
    auto hop = build_hopping(box, w, 0.5);
    auto same = peierls_hopping(hop, box, zero_potential(1), 0.3);
    CHECK((same.h - hop.h).norm() == 0.0);

    // constant A = a in d=1, gradient form so it is not cut off in time
    const double a = 0.37;
    auto Aconst = gradient_potential(
        1, [](const Eigen::VectorXd&) { return vec({1.0}); }, [a](double) { return a; }, -1e9, 1e9, 1e9);
    auto ph = peierls_hopping(hop, box, Aconst, 0.0);
    for (const auto& b : box.bonds()) {
        CHECK(std::abs(ph.h(b.a, b.b) - std::polar(1.0, a) * hop.h(b.a, b.b)) < 1e-13);
        CHECK(std::abs(ph.h(b.b, b.a) - std::polar(1.0, -a) * hop.h(b.b, b.a)) < 1e-13);
    }
    CHECK((ph.h - ph.h.adjoint()).norm() < 1e-15);
    for (int i = 0; i < box.n_sites(); ++i)
        for (int j = 0; j < box.n_sites(); ++j) CHECK(std::abs(ph.h(i, j)) == doctest::Approx(std::abs(hop.h(i, j))));
}

TEST_CASE("gauge covariance of the magnetic Laplacian") {
    Box box(cube(2, 2));
    auto w = sample_disorder({DisorderKind::iid_uniform, 5}, box.spec());
    auto hop = build_hopping(box, w, 0.5);
    auto phi = [](const Eigen::VectorXd& x) {
        return 0.8 * std::sin(0.7 * x[0] + 0.2) * std::cos(0.4 * x[1]) + 0.3 * x[0] * x[1];
    };
    auto grad = [](const Eigen::VectorXd& x) {
        return vec({0.8 * 0.7 * std::cos(0.7 * x[0] + 0.2) * std::cos(0.4 * x[1]) + 0.3 * x[1],
                    -0.8 * 0.4 * std::sin(0.7 * x[0] + 0.2) * std::sin(0.4 * x[1]) + 0.3 * x[0]});
    };
    auto A = gradient_potential(2, grad, [](double) { return 1.0; }, -1e9, 1e9, 1e9);
    auto ph = peierls_hopping(hop, box, A, 0.0);
    CVec d(box.n_sites());
    for (int i = 0; i < box.n_sites(); ++i) d(i) = std::polar(1.0, phi(vec({double(box.site(i)[0]), double(box.site(i)[1])})));
    Mat similar = d.conjugate().asDiagonal() * hop.h * d.asDiagonal();
    CHECK((ph.h - similar).norm() < 1e-9);
}

TEST_CASE("electric fields") {
    auto env = sin2(0.0, 2.0, 0.8);
    auto A = flat_pulse(1, vec({1.0}), env);
    // analytic derivative of a sin² envelope vs central difference
    for (double t : {0.1, 0.5, 0.77, 1.3, 1.9}) {
        double exact = -0.8 * (M_PI / 2) * std::sin(M_PI * t);
        CHECK(std::abs(electric_field(A, t, vec({0.3}))[0] - exact) < 1e-8);
        CHECK(std::abs(electric_field_exact(A, t, vec({0.3}))[0] - exact) < 1e-12);
    }
    // AC condition: the time integral of E vanishes after the pulse
    double integral = adaptive_gk([&](double s) { return electric_field_exact(A, s, vec({0.0}))[0]; }, 0.0, 2.0, 1e-10);
    CHECK(std::abs(integral) < 1e-10);
    for (double t : {-0.5, 2.1, 2.5}) CHECK(electric_field(A, t, vec({0.0}))[0] == 0.0);

    // plateau: A constant in time on [1,2]
    VectorPotential P;
    P.d = 1;
    P.t0 = 0;
    P.t1 = 3;
    P.support = 1;
    P.A = [](double t, const Eigen::VectorXd&) {
        double s = t < 1 ? std::sin(M_PI * t / 2) : (t <= 2 ? 1.0 : std::sin(M_PI * (t - 1) / 2));
        return vec({s * s});
    };
    CHECK(std::abs(electric_field(P, 1.5, vec({0.0}))[0]) < 1e-12);
    CHECK(integrated_field(P, 1.5, vec({0.0}), vec({1.0})) == doctest::Approx(0.0));
}

TEST_CASE("rescaling") {
    auto A = bump_pulse(2, vec({1.0, 0.5}), sin2(0, 1, 1));
    auto same = rescale(A, 1.0, 1.0);
    auto x = vec({0.2, -0.4});
    CHECK((same(0.3, x) - A(0.3, x)).norm() == 0.0);
    auto big = rescale(A, 3.0, 1.0);
    CHECK(big.support == doctest::Approx(3.0));
    CHECK((big(0.3, 3.0 * x) - A(0.3, x)).norm() < 1e-15);
    CHECK(big(0.3, vec({3.1, 0.0})).norm() == 0.0);
    auto none = rescale(A, 2.0, 0.0);
    CHECK(none(0.3, x).norm() == 0.0);
}

TEST_CASE("free many-body spectrum is the subset sums") {
    for (int n : {3, 5, 8}) {
        Box box(LatticeSpec::chain(n));
        auto w = sample_disorder({DisorderKind::iid_uniform, std::uint64_t(n)}, box.spec());
        auto hop = build_hopping(box, w, 0.0);
        Eigen::SelfAdjointEigenSolver<Mat> one(hop.h);
        std::vector<double> sums;
        for (int mask = 0; mask < (1 << n); ++mask) {
            double e = 0;
            for (int k = 0; k < n; ++k)
                if (mask >> k & 1) e += one.eigenvalues()(k);
            sums.push_back(e);
        }
        std::sort(sums.begin(), sums.end());
        auto H = build_hamiltonian(FockRep(box), box, w, 0.0, 0.0, InterparticleInteraction::none());
        Eigen::SelfAdjointEigenSolver<Mat> many(H.m, Eigen::EigenvaluesOnly);
        double err = 0;
        for (int k = 0; k < (1 << n); ++k) err = std::max(err, std::abs(many.eigenvalues()(k) - sums[k]));
        CHECK(err < 1e-10);
        CHECK(H.parity == Parity::even);
        CHECK((H.m - H.m.adjoint()).norm() < 1e-12);
    }
}

TEST_CASE("hubbard interaction: brute-force pair count") {
    for (int n : {2, 4}) {
        Box box(LatticeSpec::chain(n));
        FockRep rep(box);
        auto V = interaction_operator(rep, box, InterparticleInteraction::hubbard(1.5));
        for (Eigen::Index s = 0; s < rep.dim(); ++s) {
            int pairs = 0;
            for (int k = 0; k + 1 < n; ++k)
                if ((s >> k & 1) && (s >> (k + 1) & 1)) ++pairs;
            CHECK(V.m(s, s).real() == doctest::Approx(1.5 * pairs));
        }
        Mat off = V.m;
        off.diagonal().setZero();
        CHECK(off.norm() == 0.0);
    }
    // 2-site: only |11⟩ is shifted, by U
    Box two(LatticeSpec::chain(2));
    auto w = sample_disorder({DisorderKind::deterministic_zero, 0}, two.spec());
    auto H0 = build_hamiltonian(FockRep(two), two, w, 0, 0, InterparticleInteraction::none());
    auto H1 = build_hamiltonian(FockRep(two), two, w, 0, 0, InterparticleInteraction::hubbard(2.0));
    Mat diff = H1.m - H0.m;
    CHECK(diff(3, 3).real() == doctest::Approx(2.0));
    CHECK(std::abs(diff.sum() - cplx(2.0)) < 1e-15);
}

TEST_CASE("number conservation with density-density interactions") {
    Box box(LatticeSpec::rect({2, 3}));
    FockRep rep(box);
    auto w = sample_disorder({DisorderKind::iid_uniform, 6}, box.spec());
    auto ip = InterparticleInteraction::density_density(0.8, 0.7, 2.0);
    auto H = build_hamiltonian(rep, box, w, 0.5, 1.0, ip);
    CHECK(commutator(H, total_number(rep)).m.norm() < 1e-12);
    CHECK_THROWS_AS(interaction_operator(rep, box, InterparticleInteraction::density_density(1, 1, 3.5)), Error);
}

TEST_CASE("translation covariance of the Hamiltonian data") {
    auto big = LatticeSpec::chain(9); // sites -4..4
    auto w = sample_disorder({DisorderKind::iid_uniform, 12}, big);
    Box B(big);
    auto small = cube(1, 2);           // sites -2..2
    Box S(small);
    Site shift{1};
    auto moved = translate_sample(w, shift, small);
    auto hs = build_hopping(S, moved, 0.6);
    auto hb = build_hopping(B, w, 0.6);
    for (int i = 0; i < S.n_sites(); ++i)
        for (int j = 0; j < S.n_sites(); ++j) {
            Site xi{S.site(i)[0] + 1}, xj{S.site(j)[0] + 1};
            CHECK(hs.h(i, j) == hb.h(B.index(xi), B.index(xj)));
        }
    for (int i = 0; i < S.n_sites(); ++i) CHECK(moved.omega1[i] == w.omega1[B.index(Site{S.site(i)[0] + 1})]);
}

TEST_CASE("W_t") {
    Box box(cube(1, 3));
    auto w = sample_disorder({DisorderKind::iid_uniform, 9}, box.spec());
    auto m = make_model(box.spec(), w, 0.3, 0.0, InterparticleInteraction::none());
    CHECK(build_W(m, zero_potential(1), 0.5).m.norm() == 0.0);
    auto A = flat_pulse(1, vec({1.0}), sin2(0, 2, 1.0));
    CHECK(build_W(m, A, 2.5).m.norm() == 0.0);
    CHECK(build_W(m, A, -0.1).m.norm() == 0.0);
    auto W = build_W(m, A, 0.7);
    CHECK((W.m - W.m.adjoint()).norm() < 1e-13);
    CHECK(W.m.norm() > 0);

    // ‖W‖ = O(η): log-log slope over three field strengths
    std::vector<double> etas = {1e-3, 1e-2, 1e-1}, norms;
    FockRep rep(box);
    auto hop = build_hopping(box, w, 0.3);
    for (double eta : etas) norms.push_back(opnorm(build_W(rep, box, hop, rescale(A, 1.0, eta), 0.7)));
    CHECK(fit_loglog(etas, norms).slope == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("interaction norms") {
    DecayFunction F;
    F.d = 1;
    F.eps = 2.0;
    Box box(cube(1, 3));
    CHECK(interaction_norm(InterparticleInteraction::none(), F, box) == 0.0);

    // brute force over the box: on-site sets see every pair through x, pair sets need 1/F(1)
    const double U = -1.3;
    double brute = 0;
    for (int x = 0; x < box.n_sites(); ++x) {
        double through = 0;
        for (int y = 0; y < box.n_sites(); ++y)
            if (std::abs(box.distance(x, y) - 1.0) < 1e-12) {
                through += std::abs(U);
                brute = std::max(brute, std::abs(U) / F(1.0));
            }
        brute = std::max(brute, through / F(0.0));
    }
    CHECK(interaction_norm(InterparticleInteraction::hubbard(U), F, box) == doctest::Approx(brute));
    CHECK(brute == doctest::Approx(std::max(2 * std::abs(U) / F(0.0), std::abs(U) / F(1.0))));
}

TEST_CASE("decay function summability against the zeta tail") {
    DecayFunction F;
    F.d = 1;
    F.eps = 2.0;
    Box box(cube(1, 100));
    double partial = decay_norm_F1(F, box);
    // full lattice value 2ζ(3) - 1, minus twice the tail Σ_{k ≥ 102} k^{-3}
    double full = 2 * boost::math::zeta(3.0) - 1;
    double tail_lo = 1.0 / (2 * 102.0 * 102.0), tail_hi = 1.0 / (2 * 101.0 * 101.0);
    CHECK(partial <= full - 2 * tail_lo + 1e-12);
    CHECK(partial >= full - 2 * tail_hi - 1e-12);

    // monotone in the box
    double prev = 0, prevD = 0;
    for (int l : {2, 4, 8, 16}) {
        Box b(cube(1, l));
        double n1 = decay_norm_F1(F, b), D = decay_conv_D(F, b);
        CHECK(n1 >= prev);
        CHECK(D >= prevD - 1e-12);
        prev = n1;
        prevD = D;
    }

    // shell terms n^{d-1} F(n) (1+n)^ς are summable only for ς < ε
    auto r2 = decay_checks(F, Box(cube(1, 10)), 1.0);
    CHECK_FALSE(r2.meets_2d);
    CHECK(r2.shell_sequence.back() < r2.shell_sequence.front());
    F.eps = 3.5;
    auto r35 = decay_checks(F, Box(cube(1, 10)), 1.0);
    CHECK(r35.meets_2d);
    CHECK(r35.meets_3d);
    DecayFunction E;
    E.form = DecayFunction::Form::exponential;
    E.d = 2;
    E.eps = 0.5;
    E.varsigma = 0.3;
    auto re = decay_checks(E, Box(cube(2, 3)), 8.0);
    CHECK(re.meets_3d);
    CHECK(re.norm_F1 > 1.0);
}
