#include <doctest.h>

#include "fermicond/equilibrium.hpp"
#include "fermicond/stats.hpp"
#include "helpers.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include <filesystem>
#include <fstream>

using namespace fermicond;
using namespace testing_util;

namespace {

struct Fixture {
    Box box;
    FockRep rep;
    OperatorMatrix H;
    Fixture(int n, double theta, double lambda, InterparticleInteraction ip, std::uint64_t seed)
        : box(LatticeSpec::chain(n)), rep(box) {
        auto w = sample_disorder({DisorderKind::iid_uniform, seed}, box.spec());
        H = build_hamiltonian(rep, box, w, theta, lambda, ip);
    }
};

double trace_distance_to(const Mat& a, const Mat& b) { return (a - b).norm(); }

} // namespace

TEST_CASE("spectral data invariants") {
    Fixture f(6, 0.5, 1.0, InterparticleInteraction::hubbard(1.0), 1);
    auto s = diagonalize(f.H);
    const auto n = s.dim();
    Mat D = s.U.adjoint() * f.H.m * s.U;
    Mat diag = Mat::Zero(n, n);
    for (int k = 0; k < n; ++k) diag(k, k) = s.E(k);
    CHECK((D - diag).norm() <= 1e-10 * std::max(1.0, s.hnorm) * n);
    CHECK((s.U.adjoint() * s.U - Mat::Identity(n, n)).norm() < 1e-12 * n);
    for (int k = 1; k < n; ++k) CHECK(s.E(k - 1) <= s.E(k));
    // number sectors give 7 blocks on six sites
    CHECK(s.block_rows.size() == 7);
    // dense solver oracle for eigenvalues
    Eigen::SelfAdjointEigenSolver<Mat> es(f.H.m, Eigen::EigenvaluesOnly);
    CHECK((es.eigenvalues() - s.E).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(s.source_hash == matrix_fingerprint(f.H.m));
}

TEST_CASE("block transforms agree with dense products") {
    Fixture f(5, 0.5, 1.0, InterparticleInteraction::none(), 2);
    auto s = diagonalize(f.H);
    Mat B = random_matrix(f.rep.dim(), 3);
    CHECK((to_eigenbasis(B, s) - s.U.adjoint() * B * s.U).norm() < 1e-11);
    CHECK((from_eigenbasis(B, s) - s.U * B * s.U.adjoint()).norm() < 1e-11);
}

TEST_CASE("Gibbs state") {
    FockRep rep(Box(LatticeSpec::chain(4)));
    OperatorMatrix zero{Mat::Zero(16, 16), Parity::even};
    auto st = gibbs(zero, 1.3);
    CHECK((st.rho - Mat::Identity(16, 16) / 16.0).norm() < 1e-15);

    Fixture f(6, 0.5, 1.0, InterparticleInteraction::hubbard(1.0), 4);
    auto g = gibbs(f.H, 2.0);
    CHECK(std::abs(g.rho.trace() - cplx(1.0)) < 1e-13);
    Eigen::SelfAdjointEigenSolver<Mat> es(g.rho, Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() > -1e-14);
    CHECK((g.rho * f.H.m - f.H.m * g.rho).norm() < 1e-12);
    // oracle: dense matrix exponential
    Mat e = (-2.0 * f.H.m).exp();
    e /= e.trace();
    CHECK((g.rho - e).norm() < 1e-10);

    // low temperature on a gapped H approaches the ground projector
    auto s = std::make_shared<const SpectralData>(diagonalize(f.H));
    double gap = s->E(1) - s->E(0);
    REQUIRE(gap > 1e-6);
    auto cold = gibbs(s, 50.0 / gap);
    CVec g0 = s->U.col(0);
    double fidelity = (g0.adjoint() * cold.rho * g0)(0, 0).real();
    CHECK(fidelity > 1 - 1e-8);

    CHECK_THROWS_AS(gibbs(f.H, -1.0), Error);
}

TEST_CASE("KMS condition on random local pairs") {
    Fixture f(6, 0.5, 1.0, InterparticleInteraction::hubbard(1.0), 5);
    auto s = std::make_shared<const SpectralData>(diagonalize(f.H));
    auto st = gibbs(s, 1.0);
    for (int k = 0; k < 10; ++k) {
        auto B1 = random_local(f.rep, {k % 6, (k + 1) % 6}, 100 + k);
        auto B2 = random_local(f.rep, {(k + 3) % 6}, 200 + k);
        cplx lhs = kms_lhs(B1, B2, st);
        cplx rhs = st.expect(B2.m * B1.m);
        CHECK(std::abs(lhs - rhs) <= 1e-9 * opnorm(B1) * opnorm(B2));
    }
}

TEST_CASE("Heisenberg and imaginary-time evolution") {
    Fixture f(5, 0.3, 0.5, InterparticleInteraction::hubbard(0.7), 6);
    auto s = diagonalize(f.H);
    auto B = random_local(f.rep, {1, 2}, 7);
    CHECK((heisenberg(B, 0.0, s).m - B.m).norm() < 1e-12);
    CHECK((heisenberg(f.H, 1.7, s).m - f.H.m).norm() < 1e-11);
    Mat lhs = heisenberg(heisenberg(B, 0.4, s), 1.1, s).m;
    Mat rhs = heisenberg(B, 1.5, s).m;
    CHECK((lhs - rhs).norm() < 1e-11 * B.m.norm());
    // oracle: matrix exponentials
    Mat U = (cplx(0, 1.5) * f.H.m).exp();
    CHECK((rhs - U * B.m * U.adjoint()).norm() < 1e-10 * B.m.norm());
    Mat E = (-0.6 * f.H.m).exp();
    Mat Ei = (0.6 * f.H.m).exp();
    CHECK((imaginary_time(B, 0.6, s).m - E * B.m * Ei).norm() < 1e-9 * (E * B.m * Ei).norm());

    long before = warning_count();
    imaginary_time(B, 100.0, s);
    CHECK(warning_count() == before + 1);
}

TEST_CASE("Duhamel pairing") {
    Fixture f(5, 0.5, 1.0, InterparticleInteraction::hubbard(1.0), 8);
    auto s = std::make_shared<const SpectralData>(diagonalize(f.H));
    for (double beta : {0.5, 1.0, 2.0}) {
        auto st = gibbs(s, beta);
        auto I = identity(f.rep);
        CHECK(std::abs(duhamel(I, I, st) - cplx(beta)) < 1e-12);
        for (int k = 0; k < 4; ++k) {
            auto B = random_local(f.rep, {k, k + 1}, 300 + k);
            cplx bb = duhamel(B, B, st);
            CHECK(bb.real() >= 0);
            CHECK(std::abs(bb.imag()) < 1e-12 * std::abs(bb));
            auto C = random_local(f.rep, {(k + 2) % 5}, 400 + k);
            cplx closed = duhamel(B, C, st);
            cplx quad = duhamel_quadrature(B, C, st, 64);
            CHECK(std::abs(closed - quad) < 1e-9 * std::max(1.0, std::abs(closed)));
        }
    }
    // trace state: every non-constant part drops out
    auto st0 = gibbs(s, 0.0);
    auto I = identity(f.rep);
    CHECK(std::abs(duhamel(I, I, st0)) == 0.0);
}

TEST_CASE("stationarity of the Gibbs state") {
    Fixture f(6, 0.5, 1.0, InterparticleInteraction::hubbard(1.0), 9);
    auto s = std::make_shared<const SpectralData>(diagonalize(f.H));
    auto st = gibbs(s, 1.0);
    for (double t : {0.1, 1.0, 10.0}) {
        auto B = random_local(f.rep, {2, 3}, 17);
        CHECK(std::abs(st.expect(heisenberg(B, t, *s)) - st.expect(B)) <= 1e-10 * opnorm(B));
    }
    // A ≡ 0: the driven state does not move
    HamiltonianFn Hc = [&](double) { return f.H.m; };
    Mat rho = drive(st, Hc, 0.0, 3.0, {0.1, Integrator::cf4});
    CHECK((rho - st.rho).norm() < 1e-10);
}

TEST_CASE("autonomous drive matches the exact propagator") {
    Fixture f(4, 0.5, 1.0, InterparticleInteraction::hubbard(1.0), 10);
    Mat rho0 = random_matrix(16, 11);
    rho0 = rho0 * rho0.adjoint();
    rho0 /= rho0.trace();
    for (auto method : {Integrator::midpoint, Integrator::cf4}) {
        DrivenPropagator p([&](double) { return f.H.m; }, {0.05, method});
        Mat rho = rho0;
        p.evolve(rho, 0.0, 2.0);
        Mat U = (cplx(0, -2.0) * f.H.m).exp();
        CHECK((rho - U * rho0 * U.adjoint()).norm() < 1e-10);
        CHECK(std::abs(rho.trace() - cplx(1.0)) < 1e-12);
    }
}

TEST_CASE("driven propagator: unitarity, composition, order") {
    Fixture f(4, 0.5, 1.0, InterparticleInteraction::none(), 12);
    Box box(LatticeSpec::chain(4));
    FockRep rep(box);
    auto V = second_quantize(rep, [&] {
        Mat v = Mat::Zero(4, 4);
        v(0, 1) = cplx(0.3, 0.4);
        v(1, 0) = std::conj(v(0, 1));
        v(2, 2) = 0.8;
        v(3, 0) = 0.5;
        v(0, 3) = 0.5;
        return v;
    }());
    HamiltonianFn H = [&](double t) -> Mat { return f.H.m + std::sin(2.0 * t) * std::cos(0.7 * t) * V.m; };

    for (auto method : {Integrator::midpoint, Integrator::cf4}) {
        DrivenPropagator p(H, {0.1, method});
        Mat U = p.step_unitary(0.2, 0.1);
        CHECK((U * U.adjoint() - Mat::Identity(16, 16)).norm() < 1e-12);
        DrivenPropagator q(H, {0.01, method});
        Mat Uts = q.propagator(0.0, 1.0);
        Mat Utr = q.propagator(0.5, 1.0) * q.propagator(0.0, 0.5);
        CHECK((Uts - Utr).norm() < 1e-10);
    }

    auto st = gibbs(f.H, 1.0);
    auto obs = random_local(rep, {0, 1}, 13);
    obs = hermitian_part(obs);
    Mat ref = drive(st, H, 0.0, 2.0, {0.002, Integrator::cf4});
    double vref = (ref.transpose().cwiseProduct(obs.m)).sum().real();
    for (auto [method, expected] : {std::pair{Integrator::midpoint, 2.0}, std::pair{Integrator::cf4, 4.0}}) {
        std::vector<double> dts = {0.2, 0.1, 0.05}, errs;
        for (double dt : dts) {
            Mat r = drive(st, H, 0.0, 2.0, {dt, method});
            errs.push_back(std::abs((r.transpose().cwiseProduct(obs.m)).sum().real() - vref));
        }
        double slope = fit_loglog(dts, errs).slope;
        CHECK(slope == doctest::Approx(expected).epsilon(0.15));
    }
}

TEST_CASE("drive_checked halves until converged") {
    Fixture f(3, 0.5, 1.0, InterparticleInteraction::none(), 14);
    auto st = gibbs(f.H, 1.0);
    Box box(LatticeSpec::chain(3));
    FockRep rep(box);
    auto V = bilinear(rep, 0, 1, 1.0);
    Mat Vh = V.m + V.m.adjoint();
    HamiltonianFn H = [&](double t) -> Mat { return f.H.m + std::sin(3 * t) * Vh; };
    Mat a = drive_checked(st, H, 0.0, 1.0, {0.2, Integrator::cf4}, 1e-9);
    Mat b = drive(st, H, 0.0, 1.0, {0.001, Integrator::cf4});
    CHECK((a - b).norm() < 1e-8);
    CHECK_THROWS_AS(drive_checked(st, H, 0.0, 1.0, {0.5, Integrator::midpoint}, 1e-16, 2), Error);
}

TEST_CASE("work functional and passivity") {
    Fixture f(4, 0.5, 1.0, InterparticleInteraction::hubbard(1.0), 15);
    auto st = gibbs(f.H, 1.0);
    HamiltonianFn zero = [&](double) -> Mat { return Mat::Zero(16, 16); };
    auto r0 = work_functional(st, f.H, zero, zero, 0.0, 1.0, {0.05, Integrator::cf4});
    CHECK(r0.L == 0.0);

    for (int k = 0; k < 5; ++k) {
        auto B = hermitian_part(random_local(f.rep, {k % 4, (k + 1) % 4}, 500 + k, true));
        double T = 2.0;
        HamiltonianFn A = [&, T](double t) -> Mat {
            if (t <= 0 || t >= T) return Mat::Zero(16, 16);
            double s = std::sin(M_PI * t / T);
            return 0.5 * s * s * std::cos(1.3 * t) * B.m;
        };
        auto r = work_functional(st, f.H, A, {}, 0.0, T, {0.01, Integrator::cf4});
        CHECK(r.L >= -1e-9);
        // the work equals the energy increment of the driven system
        CHECK(r.L == doctest::Approx(r.energy_increment).epsilon(1e-6).scale(1.0));
    }
}

TEST_CASE("Lieb-Robinson bound on the free chain") {
    Box box(LatticeSpec::chain(8));
    FockRep rep(box);
    auto w = sample_disorder({DisorderKind::deterministic_zero, 0}, box.spec());
    auto H = build_hamiltonian(rep, box, w, 0, 0, InterparticleInteraction::none());
    auto s = diagonalize(H);
    DecayFunction F;
    auto params = lieb_robinson_params(box, 0.0, InterparticleInteraction::none(), F);
    auto hop01 = bilinear(rep, 0, 1, 1.0);
    LocalObservable B1{{hop01.m + hop01.m.adjoint(), Parity::even}, {0, 1}};
    for (int far : {2, 7}) {
        LocalObservable B2{number_operator(rep, far), {far}};
        auto r0 = lieb_robinson_check(B1, B2, 0.0, s, box, params);
        CHECK(r0.lhs < 1e-12);
        CHECK(r0.satisfied);
        auto r1 = lieb_robinson_check(B1, B2, 1.0, s, box, params);
        CHECK(r1.satisfied);
        CHECK(r1.lhs > 0);
    }
    auto a = build_annihilators(rep);
    LocalObservable odd{a[0], {0}};
    LocalObservable other{number_operator(rep, 5), {5}};
    CHECK_THROWS_AS(lieb_robinson_check(odd, other, 1.0, s, box, params), Error);
    LocalObservable overlap{number_operator(rep, 1), {1}};
    CHECK_THROWS_AS(lieb_robinson_check(B1, overlap, 1.0, s, box, params), Error);
}

TEST_CASE("eigen cache") {
    auto dir = std::filesystem::temp_directory_path() / "fermicond-test-cache";
    std::filesystem::remove_all(dir);
    EigenCache cache(dir);
    Fixture f(4, 0.5, 1.0, InterparticleInteraction::hubbard(1.0), 16);
    auto s1 = diagonalize_cached(f.H, &cache, "model-a");
    CHECK(cache.entries() == 1);
    auto s2 = diagonalize_cached(f.H, &cache, "model-a");
    CHECK((s1.U - s2.U).norm() == 0.0);
    CHECK((s1.E - s2.E).norm() == 0.0);
    CHECK(s2.block_rows == s1.block_rows);

    // flip one byte in the payload
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        std::fstream io(e.path(), std::ios::in | std::ios::out | std::ios::binary);
        io.seekp(100);
        char c = 0x5a;
        io.write(&c, 1);
    }
    CHECK_THROWS_AS(cache.load("model-a"), Error);
    CHECK(cache.clear() == 1);
    CHECK(cache.entries() == 0);
    std::filesystem::remove_all(dir);
}
