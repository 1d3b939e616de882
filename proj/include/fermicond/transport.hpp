#pragma once

#include "fermicond/equilibrium.hpp"
#include "fermicond/field.hpp"
#include "fermicond/model.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace fermicond {

// ordered pair of site indices at distance one
struct OrientedBond {
    int x1 = 0;
    int x2 = 0;
};

struct OrientedBondObservable {
    OrientedBond bond;
    OperatorMatrix op;
};

// I_x = -2 Im(⟨e_x1, Δ e_x2⟩ a_x1^* a_x2)
OrientedBondObservable current_obs(const FockRep& rep, const Box& box, const HoppingMatrix& hop, OrientedBond b);
OrientedBondObservable current_obs(const FockRep& rep, const Box& box, const DisorderSample& omega, double theta,
                                   OrientedBond b);
// P_x = 2 Re(⟨e_x1, Δ e_x2⟩ a_x1^* a_x2)
OrientedBondObservable kinetic_obs(const FockRep& rep, const Box& box, const HoppingMatrix& hop, OrientedBond b);
// -2 Im((e^{-i ∫ A} - 1) ⟨e_x1, Δ e_x2⟩ a_x1^* a_x2), line integral from x1 to x2
OrientedBondObservable diamagnetic_obs(const FockRep& rep, const Box& box, const HoppingMatrix& hop, OrientedBond b,
                                       const VectorPotential& A, double t);

// (x + e_k, x) for every x with both ends in the box
std::vector<OrientedBond> axis_bonds(const Box& box, int k);
// J_k = Σ_x I_(x+e_k, x)
OperatorMatrix total_current(const FockRep& rep, const Box& box, const HoppingMatrix& hop, int k);

// expectation values through the one-body density G(x,y) = ϱ(a_x^* a_y)
double current_expect(const Mat& G, const HoppingMatrix& hop, OrientedBond b);
double kinetic_expect(const Mat& G, const HoppingMatrix& hop, OrientedBond b);
double diamagnetic_expect(const Mat& G, const HoppingMatrix& hop, const Box& box, OrientedBond b,
                          const VectorPotential& A, double t);

// σ_p(x, y, t) = ∫_0^t ϱ(i[I_y, τ_s(I_x)]) ds, closed form per Bohr frequency
double sigma_p(const OperatorMatrix& Ix, const OperatorMatrix& Iy, double t, const GibbsState& st);
// oracle: composite Simpson in s with 2n intervals
double sigma_p_quadrature(const OperatorMatrix& Ix, const OperatorMatrix& Iy, double t, const GibbsState& st,
                          int n = 200);
// σ_d(x) = ϱ(P_x)
double sigma_d(const OperatorMatrix& P, const GibbsState& st);

// Σ over Bohr pairs (m,n) of G_kq(m,n) (e^{itω} - 1), ω = E_n - E_m, where
// G_kq(m,n) = scale K(m,n) conj((A_k)_nm) (B_q)_nm. A = B = J and scale 1/|Λ| give Ξ_p,l.
class BohrKernel {
public:
    BohrKernel() = default;
    BohrKernel(const GibbsState& st, const std::vector<Mat>& A_eig, const std::vector<Mat>& B_eig, double scale);

    int d() const { return d_; }
    std::size_t size() const { return omega_.size(); }
    double omega(std::size_t i) const { return omega_[i]; }
    cplx weight(std::size_t i, int k, int q) const { return g_[(i * d_ + k) * d_ + q]; }

    RMat eval(double t) const;    // Re Σ G (e^{itω} - 1)
    RMat sym(double t) const;     // Σ Re G (cos tω - 1)
    RMat antisym(double t) const; // -Σ Im G sin tω
    Eigen::MatrixXcd eval_complex(double t) const;

private:
    int d_ = 0;
    std::vector<double> omega_;
    std::vector<cplx> g_;
};

struct TransportSeries {
    std::vector<double> times;
    std::vector<RMat> xi_p;
    RMat xi_d;
    std::string provenance;
    // filled by disorder averages
    std::vector<RMat> xi_p_stderr;
    RMat xi_d_stderr;
    int n_samples = 1;
};

// everything needed to evaluate transport quantities of one sample
struct TransportContext {
    Box box;
    FockRep rep;
    HoppingMatrix hop;
    OperatorMatrix H;
    std::shared_ptr<const SpectralData> spectral;
    GibbsState state;
    Mat G; // one-body density of the Gibbs state

    static TransportContext build(const Model& m, double beta, const EigenCache* cache = nullptr,
                                  const std::string& cache_key = "");
};

BohrKernel xi_kernel(const TransportContext& c);
// Σ_x σ_p((x+e_q, x), (c+e_k, c), t) for the bond c nearest the box centre on each axis
BohrKernel bulk_kernel(const TransportContext& c);

TransportSeries xi_series(const TransportContext& c, const std::vector<double>& times);
RMat xi_d_l(const TransportContext& c);
Eigen::VectorXd thermal_current(const TransportContext& c);

std::vector<double> symmetric_grid(double T, int points); // [-T, T]
std::vector<double> uniform_grid(double a, double b, int points);

struct DisorderAverageConfig {
    LatticeSpec spec;
    DisorderKind kind = DisorderKind::iid_uniform;
    std::uint64_t master_seed = 0;
    double theta = 0;
    double lambda = 0;
    double beta = 1;
    InterparticleInteraction ip;
    int workers = 1;
    // sample i uses derive_seed(master_seed, i); a pairing function may replace the sample
    std::function<DisorderSample(int, const DisorderSample&)> transform;
};

TransportSeries disorder_average(const DisorderAverageConfig& cfg, int n_samples, const std::vector<double>& times,
                                 const EigenCache* cache = nullptr);

struct CurrentDensityTrace {
    std::vector<double> times;
    Eigen::VectorXd J_th;
    std::vector<Eigen::VectorXd> J_p;
    std::vector<Eigen::VectorXd> J_d;
    double eta = 0;
};

// H + W_t(η Ā_l) driven from t0, currents read off the one-body density
CurrentDensityTrace driven_currents(const TransportContext& c, const VectorPotential& A_bar, double eta, double l,
                                    const std::vector<double>& times, const DriveOptions& opt);

enum class OhmKernelOrder {
    as_stated,   // ∫ (Ξ(t-s) w) ℰ_s ds
    transposed,  // ∫ (Ξ(t-s)ᵀ w) ℰ_s ds
};

struct OhmLinear {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> J_p;
    std::vector<Eigen::VectorXd> J_d;
};

// linear-response currents for a flat field ℰ_s w on [t0, ∞); Simpson with
// Richardson refinement until two levels agree to tol, else grid-too-coarse
OhmLinear ohm_linear(const std::function<RMat(double)>& xi_p, const RMat& xi_d, const Envelope& env,
                     const Eigen::VectorXd& w, const std::vector<double>& times, OhmKernelOrder order,
                     double tol = 1e-9, int max_levels = 14);

// ½ ∫∫_{[t0,t1]²} ⟨φ'(s), [Ξ(t-s)]₊ φ'(t)⟩ ds dt by 2-D Simpson on n intervals (even);
// ≥ 0 for any cyclic pulse when Ξ is conditionally positive definite
double bochner_functional(const std::function<RMat(double)>& xi_p,
                          const std::function<Eigen::VectorXd(double)>& dphi, double t0, double t1, int n = 400);

// ---- fluctuations and Green–Kubo ----

// a local observable pattern: support offsets and a builder for given modes
struct LocalTemplate {
    std::vector<Site> offsets;
    std::function<OperatorMatrix(const FockRep&, const std::vector<int>&)> build;
};

// 𝔽(B) = |Λ|^{-1/2} Σ_x (χ_x(B) - ϱ(χ_x(B)) I) over translates that fit in the box
OperatorMatrix fluctuation(const FockRep& rep, const Box& box, const LocalTemplate& B, const GibbsState& st);
// template of the current on bond (e_k, 0) with the sample's hoppings at each translate
LocalTemplate current_template(const Box& box, const HoppingMatrix& hop, int k);

struct GreenKuboReport {
    std::vector<double> times;
    std::vector<RMat> increment;       // (𝔽(I_k), 𝔽(τ_t(I_q)))_∼ - (𝔽(I_k), 𝔽(I_q))_∼
    std::vector<RMat> xi;              // Ξ_p,l(t)
    std::vector<RMat> asymmetry;       // increment - incrementᵀ
    double identity_residual = 0;      // max |increment - Ξ_p,l|
    double reference_residual = -1;    // max |increment - reference| when a reference is given
};

GreenKuboReport green_kubo_check(const TransportContext& c, const std::vector<double>& times,
                                 const std::function<RMat(double)>& reference = {});

} // namespace fermicond
