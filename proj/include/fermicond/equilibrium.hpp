#pragma once

#include "fermicond/common.hpp"
#include "fermicond/fock.hpp"
#include "fermicond/model.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace fermicond {

struct SpectralData {
    Vec E;                       // ascending
    Mat U;                       // columns are eigenvectors
    std::uint64_t source_hash = 0;
    double hnorm = 0.0;          // max |E|
    // connected components of H: basis rows and matching eigenvector columns
    std::vector<std::vector<int>> block_rows;
    std::vector<std::vector<int>> block_cols;
    std::vector<Mat> block_U;    // U(block_rows[b], block_cols[b])

    int dim() const { return static_cast<int>(E.size()); }
};

std::uint64_t matrix_fingerprint(const Mat& m);

// groups of basis indices connected by nonzero entries of any of the matrices
std::vector<std::vector<int>> connected_blocks(const std::vector<const Mat*>& mats);

// Hermitian eigendecomposition; diagonalizes each connected block separately
SpectralData diagonalize(const OperatorMatrix& H);

Mat to_eigenbasis(const Mat& B, const SpectralData& s);
Mat from_eigenbasis(const Mat& B, const SpectralData& s);

struct GibbsState {
    double beta = 1.0;
    Vec p;                                      // Boltzmann weights in the eigenbasis
    std::shared_ptr<const SpectralData> spectral;
    Mat rho;                                    // density matrix, occupation basis

    const SpectralData& spec() const { return *spectral; }
    cplx expect(const Mat& B) const;            // Tr(ρ B)
    cplx expect(const OperatorMatrix& B) const { return expect(B.m); }
};

// β = 0 is accepted as a test fixture (trace state)
GibbsState gibbs(std::shared_ptr<const SpectralData> s, double beta);
GibbsState gibbs(const OperatorMatrix& H, double beta);

// τ_t(B) = e^{itH} B e^{-itH}
OperatorMatrix heisenberg(const OperatorMatrix& B, double t, const SpectralData& s);
// τ_{iα}(B) = e^{-αH} B e^{αH}; warns when e^{|α| ΔE} > 1e12
OperatorMatrix imaginary_time(const OperatorMatrix& B, double alpha, const SpectralData& s);

// ϱ(B1 τ_{iβ}(B2)) with the imaginary-time factors applied entry-wise in the eigenbasis
cplx kms_lhs(const OperatorMatrix& B1, const OperatorMatrix& B2, const GibbsState& st);

// Duhamel weights K(m,n) = ∫_0^β p_m e^{-α(E_n - E_m)} dα
RMat duhamel_kernel(const GibbsState& st);
// (B1,B2)_∼ in closed form
cplx duhamel(const OperatorMatrix& B1, const OperatorMatrix& B2, const GibbsState& st);
// same pairing for operators already in the eigenbasis
cplx duhamel_eigen(const Mat& B1e, const Mat& B2e, const RMat& K);
// oracle: n-point Gauss–Legendre quadrature of the α-integral
cplx duhamel_quadrature(const OperatorMatrix& B1, const OperatorMatrix& B2, const GibbsState& st, int n = 64);

// ---- non-autonomous evolution ----

enum class Integrator { midpoint, cf4 };

struct DriveOptions {
    double dt = 0.01;
    Integrator method = Integrator::cf4;
};

using HamiltonianFn = std::function<Mat(double)>;
using Observer = std::function<void(double, const Mat&)>;

// Steps the density matrix with exponential integrators. Exponentials are taken
// block-wise on the connected components of H(t) and ρ, merged as needed.
class DrivenPropagator {
public:
    DrivenPropagator(HamiltonianFn H, DriveOptions opt);

    // in-place ρ -> U(t_to, t_from) ρ U(t_to, t_from)^*, steps of at most dt
    void evolve(Mat& rho, double t_from, double t_to);
    // single-step unitary from t to t+h as a full matrix
    Mat step_unitary(double t, double h);
    // U(t, s) as a full matrix
    Mat propagator(double s, double t);

    int steps_taken() const { return steps_; }

private:
    void merge_pattern(const Mat& m);
    std::vector<std::vector<int>> blocks() const;
    std::vector<Mat> block_step(double t, double h, const std::vector<std::vector<int>>& blocks);

    HamiltonianFn H_;
    DriveOptions opt_;
    std::vector<int> parent_;
    int steps_ = 0;
};

// evolves ρ0 along `grid` (ascending, grid[0] = start) and calls obs at every grid point
void drive_observe(const Mat& rho0, const HamiltonianFn& H, const std::vector<double>& grid,
                   const DriveOptions& opt, const Observer& obs);

// ρ_t from the Gibbs state at t0
Mat drive(const GibbsState& st, const HamiltonianFn& H, double t0, double t, const DriveOptions& opt);

// runs with dt, dt/2, ... until successive final states differ by < tol (Frobenius)
Mat drive_checked(const GibbsState& st, const HamiltonianFn& H, double t0, double t, DriveOptions opt,
                  double tol, int max_halvings = 6);

struct WorkResult {
    double L = 0;                 // ∫ ρ_s(∂_s A_s) ds by composite Simpson
    double energy_increment = 0;  // ρ_t(H + A_t) - ϱ(H + A_t0)
    std::vector<double> times;
    std::vector<double> integrand;
};

// L_t^A(ρ) for a perturbation s -> A_s added to H; dA may be empty (central difference)
WorkResult work_functional(const GibbsState& st, const OperatorMatrix& H, const HamiltonianFn& A,
                           const HamiltonianFn& dA, double t0, double t, const DriveOptions& opt);

// ---- Lieb–Robinson ----

struct LocalObservable {
    OperatorMatrix op;
    std::vector<int> support; // site indices
};

struct LRParams {
    DecayFunction F;
    double D_theta0 = 0; // sup-norm of the interaction Ψ^(ω,ϑ)
    double conv_D = 0;   // convolution constant of F
};

struct LRResult {
    double lhs = 0;
    double rhs = 0;
    bool satisfied = false;
};

LRParams lieb_robinson_params(const Box& box, double theta0, const InterparticleInteraction& ip,
                              const DecayFunction& F);
LRResult lieb_robinson_check(const LocalObservable& B1, const LocalObservable& B2, double t,
                             const SpectralData& s, const Box& box, const LRParams& p);

// ---- eigendecomposition cache ----

class EigenCache {
public:
    static constexpr std::uint32_t format_version = 1;

    explicit EigenCache(std::filesystem::path dir);
    static std::filesystem::path default_dir(); // FERMICOND_CACHE_DIR or ~/.cache/fermicond

    std::optional<SpectralData> load(const std::string& key) const; // throws cache-corruption
    void store(const std::string& key, const SpectralData& s) const; // atomic rename
    std::size_t entries() const;
    std::uintmax_t bytes() const;
    std::size_t clear() const;
    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path file_for(const std::string& key) const;
    std::filesystem::path dir_;
};

SpectralData diagonalize_cached(const OperatorMatrix& H, const EigenCache* cache, const std::string& key);

} // namespace fermicond
