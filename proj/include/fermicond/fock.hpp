#pragma once

#include "fermicond/common.hpp"
#include "fermicond/lattice.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace fermicond {

using Mat = Eigen::MatrixXcd;
using RMat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;

enum class Parity { even, odd, mixed };

Parity product_parity(Parity a, Parity b);
const char* parity_name(Parity p);

struct OperatorMatrix {
    Mat m;
    Parity parity = Parity::mixed;

    OperatorMatrix() = default;
    OperatorMatrix(Mat mat, Parity p) : m(std::move(mat)), parity(p) {}

    Eigen::Index dim() const { return m.rows(); }
};

OperatorMatrix operator+(const OperatorMatrix& a, const OperatorMatrix& b);
OperatorMatrix operator-(const OperatorMatrix& a, const OperatorMatrix& b);
OperatorMatrix operator*(const OperatorMatrix& a, const OperatorMatrix& b);
OperatorMatrix operator*(cplx c, const OperatorMatrix& a);

// Occupation basis: basis index n has bit j set when mode j (site_order[j]) is
// occupied. a_j carries the string (-1)^{#occupied modes below j}.
class FockRep {
public:
    static constexpr int default_cap = 14;

    explicit FockRep(const Box& box, int cap = default_cap);
    FockRep(std::vector<Site> site_order, int cap = default_cap);

    int n_modes() const { return static_cast<int>(sites_.size()); }
    Eigen::Index dim() const { return Eigen::Index(1) << sites_.size(); }
    const std::vector<Site>& site_order() const { return sites_; }
    int mode_of(const Site& x) const; // throws unknown-site

private:
    std::vector<Site> sites_;
};

std::vector<OperatorMatrix> build_annihilators(const FockRep& rep);

// c a_x^* a_y for mode indices x, y
OperatorMatrix bilinear(const FockRep& rep, int x, int y, cplx c);
OperatorMatrix bilinear(const FockRep& rep, const Site& x, const Site& y, cplx c);

// Σ_{x,y} h_{xy} a_x^* a_y for a one-particle matrix h over the modes
OperatorMatrix second_quantize(const FockRep& rep, const Mat& h);
// Σ_{x,y} h_{xy} a_x^* a_y added into an existing dense matrix
void add_second_quantized(const FockRep& rep, const Mat& h, Mat& out);

OperatorMatrix number_operator(const FockRep& rep, int x);
OperatorMatrix total_number(const FockRep& rep);
OperatorMatrix parity_operator(const FockRep& rep);
OperatorMatrix identity(const FockRep& rep);

OperatorMatrix commutator(const OperatorMatrix& a, const OperatorMatrix& b);
OperatorMatrix anticommutator(const OperatorMatrix& a, const OperatorMatrix& b);
OperatorMatrix adjoint(const OperatorMatrix& a);
double opnorm(const OperatorMatrix& a);
double opnorm(const Mat& a);

// antilinear: entry-wise conjugation in the occupation basis
OperatorMatrix time_reversal(const FockRep& rep, const OperatorMatrix& a);

// classify from the entries: even operators only connect basis states of equal
// particle-number parity, odd ones only states of opposite parity
Parity classify_parity(const Mat& m, double tol = 1e-13);

// ϱ(a_x^* a_y) for all mode pairs, G(x,y), from a density matrix in the occupation basis
Mat one_body_density(const FockRep& rep, const Mat& rho);

using SpMat = Eigen::SparseMatrix<cplx>;
SpMat sparse(const OperatorMatrix& a);

// largest Frobenius residual (an upper bound for the operator norm) of
// {a_x, a_y} = 0 and {a_x, a_y^*} = δ_xy over all mode pairs; sparse products
double car_residual(const FockRep& rep);

// Unitary on Fock space implementing a_x -> a_{perm[x]} for a mode permutation
Mat mode_permutation_unitary(const FockRep& rep, const std::vector<int>& perm);

// row-major little-endian float64 (re,im) pairs after a header
// "FCMAT1\0\0", uint64 rows, uint64 cols
void dump_binary(const OperatorMatrix& a, std::ostream& os);
OperatorMatrix load_binary(std::istream& is);

} // namespace fermicond
