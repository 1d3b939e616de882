#pragma once

#include "fermicond/fock.hpp"
#include "fermicond/rng.hpp"

#include <vector>

namespace testing_util {

using namespace fermicond;

inline Mat random_matrix(Eigen::Index n, std::uint64_t seed) {
    Rng r(seed, {stream_tag::test_data});
    Mat m(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i) m(i, j) = cplx(r.normal(), r.normal());
    return m;
}

// random polynomial of degree ≤ 2 in a_x, a_x^* for x in `modes`; even part only if requested
inline OperatorMatrix random_local(const FockRep& rep, const std::vector<int>& modes, std::uint64_t seed,
                                   bool even_only = false) {
    auto a = build_annihilators(rep);
    Rng r(seed, {stream_tag::test_data, 1});
    auto c = [&] { return cplx(r.normal(), r.normal()); };
    OperatorMatrix out = c() * identity(rep);
    std::vector<OperatorMatrix> gens;
    for (int x : modes) {
        gens.push_back(a[x]);
        gens.push_back(adjoint(a[x]));
    }
    if (!even_only)
        for (const auto& g : gens) out = out + c() * g;
    for (std::size_t i = 0; i < gens.size(); ++i)
        for (std::size_t j = i + 1; j < gens.size(); ++j) out = out + c() * (gens[i] * gens[j]);
    out.parity = even_only ? Parity::even : classify_parity(out.m);
    return out;
}

inline OperatorMatrix hermitian_part(const OperatorMatrix& b) {
    return {0.5 * (b.m + b.m.adjoint()), b.parity};
}

} // namespace testing_util
