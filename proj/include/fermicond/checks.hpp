#pragma once

// Numerical gates shared by the `invariants` experiment and the acceptance
// runner. Each check returns Gate records: a measured value, the limit it is
// held to, and whether it passed.

#include "fermicond/energy.hpp"
#include "fermicond/levy.hpp"
#include "fermicond/measure.hpp"
#include "fermicond/rng.hpp"

#include <string>
#include <vector>

namespace fermicond {

struct Gate {
    std::string name;
    double value = 0;
    double limit = 0;
    bool pass = false;
    std::string note;
    bool upper = true; // value is held below the limit
};

Gate at_most(std::string name, double value, double limit, std::string note = {});
Gate at_least(std::string name, double value, double limit, std::string note = {});
bool all_pass(const std::vector<Gate>& g);

// random polynomial of degree ≤ 2 in a_x, a_x^* on `modes`; only even
// monomials if asked; number-conserving monomials only if asked
OperatorMatrix random_local(const FockRep& rep, const std::vector<int>& modes, Rng& r, bool even_only,
                            bool conserving = false);

// ---- per sample ----

// Ξ(0) = 0, ‖Ξ(-t) - Ξ(t)ᵀ‖ ≤ 1e-10 on `grid`, |Ξ_d,kk| ≤ 2(ϑ + 1)
std::vector<Gate> transport_gates(const TransportContext& c, const BohrKernel& k, const std::vector<double>& grid,
                                  double theta);
// Lévy–Khintchine sup error ≤ 1e-8, atom weights ≥ -1e-10, -[Ξ(t)]₊ ≥ -1e-10
std::vector<Gate> measure_gates(const MatrixMeasure& mu, const BohrKernel& k, const std::vector<double>& grid);
// ‖[Ξ(t)]₋‖ ≤ 1e-10 on the grid and |𝕁_th| ≤ 1e-10
std::vector<Gate> time_reversal_gates(const TransportContext& c, const BohrKernel& k, const std::vector<double>& grid);

// max |ϱ(B1 τ_iβ(B2)) - ϱ(B2 B1)| / (‖B1‖‖B2‖) over random local pairs, ≤ 1e-9
Gate kms_gate(const TransportContext& c, int pairs, std::uint64_t seed);

// min L_T^A over random cyclic perturbations g(t) B, B even, local, Hermitian; ≥ -1e-9
struct WorkCheck {
    std::vector<double> L;
    std::vector<double> energy_increment;
    Gate gate;
};
WorkCheck work_check(const TransportContext& c, int perturbations, std::uint64_t seed, const DriveOptions& opt);

// S(t) ≥ -1e-9 for t ≥ t1 and the balance S + P = Ip + Id to 1e-6
struct HeatCheck {
    EnergyTrace trace;
    std::vector<Gate> gates;
};
HeatCheck heat_check(const TransportContext& c, const VectorPotential& A_bar, double eta, double l,
                     const std::vector<double>& times, const DriveOptions& opt);

// all pairs of single-bond currents with support distance in [dmin, dmax]
struct LRRow {
    int bond1 = 0, bond2 = 0;
    double distance = 0, t = 0, lhs = 0, rhs = 0;
    bool satisfied = false;
};
struct LRCheck {
    std::vector<LRRow> rows;
    Gate gate; // value: max lhs / rhs, limit 1
};
LRCheck lieb_robinson_bonds(const TransportContext& c, double theta, const InterparticleInteraction& ip,
                            const DecayFunction& F, const std::vector<double>& times, double dmin, double dmax);

// ---- model level ----

// 𝕁_p(η) - η J_lin has fitted order ≥ 1.9; the polynomial extrapolation of
// 𝕁_p(η)/η to η = 0 matches J_lin within 1e-4 (1 + max ‖J_lin‖)
struct OhmCheck {
    std::vector<double> etas;
    std::vector<CurrentDensityTrace> traces;
    OhmLinear lin;
    std::vector<double> remainder; // max_t ‖𝕁_p(η) - η J_lin‖
    double order = 0;
    double extrapolation_error = 0;
    double scale = 0;
    std::vector<Gate> gates;
};
OhmCheck ohm_check(const TransportContext& c, const Envelope& env, const Eigen::VectorXd& w, double l,
                   const std::vector<double>& etas, const std::vector<double>& times, const DriveOptions& opt);

// balance, η² scaling of S(t_end) (log-log slope within 2% of 2), heat
// production, and Ip against ∫∫X_l under the η²|Λ_l|/4 and the literal η² l^d
// normalisations, with an O(η) budget read off the spread over the η grid
struct JouleCheck {
    std::vector<EnergyTrace> traces;
    double double_integral = 0; // ∫_{t0}^{t} ds₁ ∫_{t0}^{s₁} ds₂ X_l at t = times.back()
    std::vector<double> ratio_ld;    // Ip / (η² l^d) / ∫∫X_l per η
    std::vector<double> ratio_sites; // Ip / (η² |Λ_l| / 4) / ∫∫X_l per η
    double s_slope = 0;
    std::vector<Gate> gates;
};
JouleCheck joule_check(const TransportContext& c, const VectorPotential& A_bar, double l,
                       const std::vector<double>& etas, const std::vector<double>& times, const DriveOptions& opt,
                       int x_points = 201);

// 10 random cyclic pulses φ = Σ_{m≤3} c_m sin²(π m u) v_m on [t0, t1]; min functional ≥ -1e-8
struct BochnerCheck {
    std::vector<double> values;
    Gate gate;
};
BochnerCheck bochner_check(const BohrKernel& k, int pulses, double t0, double t1, std::uint64_t seed, int n = 400);

// |(1/T)∫₀^T [Ξ]₊ + μ_AC(ℝ∖{0})| from the sampled series by Simpson; the sup over
// [T, 1.25 T] is fitted against T. Gates: slope within 0.1 of -1 and T·err ≤ C.
struct CesaroCheck {
    std::vector<double> T;
    std::vector<double> err;      // window sup
    std::vector<double> err_at_T; // at T itself
    double slope = 0;
    double C = 0;
    std::vector<Gate> gates;
};
CesaroCheck cesaro_check(const MatrixMeasure& mu, const BohrKernel& k, const std::vector<double>& Ts);

// the measure tail vanishes past the spectral diameter, the mass-matched
// Drude tail ν²∫_ν^∞σ_T grows with slope D/T ± 5% there
struct DrudeCheck {
    DrudeTailReport report;
    double slope = 0;
    double expected_slope = 0;
    double max_tail_beyond = 0;
    std::vector<Gate> gates;
};
DrudeCheck drude_check(const MatrixMeasure& mu, const Eigen::VectorXd& w, double T, const std::vector<double>& nu_grid);

// the ν grid shared by measure and Drude outputs: 400 points on [0, 4 ν_max]
std::vector<double> nu_plot_grid(const MatrixMeasure& mu);

} // namespace fermicond
