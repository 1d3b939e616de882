#include <doctest.h>

#include "fermicond/fock.hpp"
#include "fermicond/lattice.hpp"
#include "fermicond/rng.hpp"

#include <sstream>

using namespace fermicond;

namespace {

Mat random_matrix(Eigen::Index n, std::uint64_t seed) {
    Rng r(seed, {stream_tag::test_data});
    Mat m(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i) m(i, j) = cplx(r.normal(), r.normal());
    return m;
}

// random even element supported on modes {x, y}: polynomial in a_x, a_y of even degree
OperatorMatrix random_local_even(const FockRep& rep, int x, int y, std::uint64_t seed) {
    auto a = build_annihilators(rep);
    Rng r(seed, {stream_tag::test_data, 1});
    auto c = [&] { return cplx(r.normal(), r.normal()); };
    auto I = identity(rep);
    OperatorMatrix out = c() * I;
    std::vector<OperatorMatrix> gens = {a[x], adjoint(a[x]), a[y], adjoint(a[y])};
    for (std::size_t i = 0; i < gens.size(); ++i)
        for (std::size_t j = i + 1; j < gens.size(); ++j) out = out + c() * (gens[i] * gens[j]);
    return out;
}

} // namespace

TEST_CASE("single mode") {
    FockRep rep(Box(LatticeSpec::chain(1)));
    auto a = build_annihilators(rep);
    REQUIRE(a.size() == 1);
    Mat expect(2, 2);
    expect << 0, 1, 0, 0;
    CHECK((a[0].m - expect).norm() == 0.0);
    CHECK(a[0].parity == Parity::odd);
}

TEST_CASE("nilpotency") {
    FockRep rep(Box(LatticeSpec::chain(2)));
    auto a = build_annihilators(rep);
    CHECK((a[1].m * a[1].m).norm() == 0.0);
    CHECK((a[0].m * a[0].m).norm() == 0.0);
}

TEST_CASE("CAR relations up to N=10") {
    for (int n : {1, 3, 6, 10}) CHECK(car_residual(FockRep(Box(LatticeSpec::chain(n)))) <= 1e-12);
}

TEST_CASE("CAR dense oracle, N=3") {
    FockRep rep(Box(LatticeSpec::chain(3)));
    auto a = build_annihilators(rep);
    auto I = identity(rep);
    for (int x = 0; x < 3; ++x)
        for (int y = 0; y < 3; ++y) {
            CHECK(opnorm(anticommutator(a[x], a[y])) <= 1e-12);
            Mat ac = anticommutator(a[x], adjoint(a[y])).m;
            if (x == y) ac -= I.m;
            CHECK(opnorm(ac) <= 1e-12);
        }
}

TEST_CASE("dimension cap") {
    CHECK_THROWS_AS(FockRep(Box(LatticeSpec::chain(15))), Error);
    CHECK_NOTHROW(FockRep(Box(LatticeSpec::chain(4)), 4));
    CHECK_THROWS_AS(FockRep(Box(LatticeSpec::chain(5)), 4), Error);
}

TEST_CASE("bilinear") {
    FockRep rep(Box(LatticeSpec::chain(3)));
    auto n1 = bilinear(rep, 1, 1, 1.0);
    Eigen::SelfAdjointEigenSolver<Mat> es(n1.m);
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
        double v = es.eigenvalues()(k);
        CHECK((std::abs(v) < 1e-14 || std::abs(v - 1) < 1e-14));
    }
    CHECK(n1.parity == Parity::even);
    CHECK(bilinear(rep, 0, 2, 0.0).m.norm() == 0.0);
    CHECK_THROWS_AS(bilinear(rep, Site{0}, Site{5}, 1.0), Error);

    FockRep two(Box(LatticeSpec::chain(2)));
    auto a = build_annihilators(two);
    // brute force: Tr(a_x^* a_y) = Σ_n ⟨n|a_x^* a_y|n⟩
    Mat prod = adjoint(a[0]).m * a[1].m;
    CHECK(std::abs(bilinear(two, 0, 1, 1.0).m.trace()) == 0.0);
    CHECK((bilinear(two, 0, 1, 1.0).m - prod).norm() == 0.0);
}

TEST_CASE("commutator, adjoint, norm") {
    FockRep rep(Box(LatticeSpec::chain(3)));
    auto a = build_annihilators(rep);
    OperatorMatrix A{random_matrix(rep.dim(), 1), Parity::mixed};
    CHECK(commutator(A, A).m.norm() == 0.0);
    auto nx = bilinear(rep, 1, 1, 1.0);
    CHECK((commutator(nx, a[1]).m + a[1].m).norm() < 1e-14);
    CHECK(opnorm(identity(rep)) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK((adjoint(adjoint(A)).m - A.m).norm() == 0.0);
    OperatorMatrix B{random_matrix(4, 2), Parity::mixed};
    CHECK_THROWS_AS(commutator(A, B), Error);
}

TEST_CASE("parity") {
    FockRep rep(Box(LatticeSpec::chain(4)));
    auto a = build_annihilators(rep);
    auto P = parity_operator(rep);
    for (int x = 0; x < 4; ++x)
        for (int y = 0; y < 4; ++y) {
            auto prod = a[x] * adjoint(a[y]);
            CHECK(prod.parity == Parity::even);
            CHECK(classify_parity(prod.m) == Parity::even);
            CHECK(commutator(prod, P).m.norm() < 1e-14);
        }
    CHECK(classify_parity(a[2].m) == Parity::odd);
    CHECK(classify_parity((a[0] + a[0] * a[1]).m) == Parity::mixed);
    auto e = random_local_even(rep, 0, 3, 4);
    CHECK(commutator(e, P).m.norm() < 1e-12);
}

TEST_CASE("time reversal") {
    FockRep rep(Box(LatticeSpec::chain(3)));
    auto a = build_annihilators(rep);
    auto I = identity(rep);
    CHECK((time_reversal(rep, cplx(0, 1) * I).m - cplx(0, -1) * I.m).norm() == 0.0);
    for (int x = 0; x < 3; ++x) CHECK((time_reversal(rep, a[x]).m - a[x].m).norm() == 0.0);
    auto b = bilinear(rep, 0, 2, 1.0);
    CHECK((time_reversal(rep, b).m - b.m).norm() == 0.0);

    auto B1 = random_local_even(rep, 0, 1, 10);
    auto B2 = random_local_even(rep, 1, 2, 11);
    CHECK((time_reversal(rep, B1 * B2).m - (time_reversal(rep, B1) * time_reversal(rep, B2)).m).norm() < 1e-12);
    CHECK((time_reversal(rep, adjoint(B1)).m - adjoint(time_reversal(rep, B1)).m).norm() < 1e-12);
    CHECK((time_reversal(rep, time_reversal(rep, B1)).m - B1.m).norm() == 0.0);
}

TEST_CASE("one-body density and mode permutations") {
    FockRep rep(Box(LatticeSpec::chain(3)));
    auto a = build_annihilators(rep);
    // pure state a_0^* a_2^* |0⟩
    Mat vac = Mat::Zero(rep.dim(), 1);
    vac(0, 0) = 1.0;
    Mat psi = adjoint(a[0]).m * adjoint(a[2]).m * vac;
    Mat rho = psi * psi.adjoint();
    Mat G = one_body_density(rep, rho);
    for (int x = 0; x < 3; ++x)
        for (int y = 0; y < 3; ++y) {
            cplx expect = (rho * adjoint(a[x]).m * a[y].m).trace();
            CHECK(std::abs(G(x, y) - expect) < 1e-14);
        }
    CHECK(G(0, 0).real() == doctest::Approx(1.0));
    CHECK(G(1, 1).real() == doctest::Approx(0.0));

    std::vector<int> perm = {2, 0, 1};
    Mat V = mode_permutation_unitary(rep, perm);
    CHECK((V * V.adjoint() - Mat::Identity(8, 8)).norm() < 1e-14);
    for (int x = 0; x < 3; ++x) CHECK((V * a[x].m * V.adjoint() - a[perm[x]].m).norm() < 1e-14);
}

TEST_CASE("binary dump round trip") {
    OperatorMatrix A{random_matrix(8, 3), Parity::mixed};
    std::stringstream ss;
    dump_binary(A, ss);
    auto B = load_binary(ss);
    CHECK((A.m - B.m).norm() == 0.0);
    CHECK(ss.str().substr(0, 6) == "FCMAT1");
}
