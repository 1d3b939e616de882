#pragma once

#include "fermicond/transport.hpp"

#include <iosfwd>

namespace fermicond {

struct EnergyTrace {
    std::vector<double> times;
    std::vector<double> S;  // ρ_t(H) - ϱ(H)
    std::vector<double> P;  // ρ_t(W_t)
    std::vector<double> Ip; // ρ_t(H + W_t) - ϱ(H + W_t)
    std::vector<double> Id; // ϱ(W_t)
    double eta = 0;
    double l = 1;
    int n_sites = 1;
};

// drive H + W_t(η Ā_l) from the Gibbs state and record the four increments
EnergyTrace energy_increments(const TransportContext& c, const VectorPotential& A_bar, double eta, double l,
                              const std::vector<double>& times, const DriveOptions& opt);

// max |S + P - Ip - Id| relative to the largest magnitude in the trace
double balance_residual(const EnergyTrace& tr);

// CSV: t, S, P, Ip, Id and the same divided by η² |Λ_l|
void write_energy_csv(std::ostream& os, const EnergyTrace& tr, const std::string& header);

// X_l on a square grid: X(i, j) = X_l(s_i, s_j), field A given without η
struct JouleIntegrand {
    std::vector<double> s;
    RMat X;
};

// |Λ|⁻¹ Σ over oriented bond pairs of σ_p(x, y, s₁ - s₂) 𝐄_{s₁}(x) 𝐄_{s₂}(y)
JouleIntegrand joule_integrand_X(const TransportContext& c, const VectorPotential& A, const std::vector<double>& s);

// |X_l(s₁, s₂)| ≤ 4|Λ|⁻¹ Σ_{b,b'} 2|s₁ - s₂| ‖I_b‖ ‖I_b'‖ |𝐄_{s₁}(b)| |𝐄_{s₂}(b')|,
// from |σ_p(x, y, t)| ≤ 2|t| ‖I_x‖ ‖I_y‖ and ‖I_b‖ = |⟨e_x, Δ e_y⟩|
double joule_integrand_bound(const TransportContext& c, const VectorPotential& A, double s1, double s2);

// ∫ d^dx [E_A(s₁,x)]_k [E_A(s₂,x)]_q over the support of A, nested adaptive quadrature
RMat field_overlap(const VectorPotential& A, double s1, double s2);

// Σ_{k,q ∈ ±1..±d} Ξ_{k,q}(s₁ - s₂) ∫ E_k(s₁) E_q(s₂), signs odd in each index.
// `transposed` pairs Ξ_{q,k} with E_k(s₁) E_q(s₂), the order X_l converges to.
double x_infinity(const std::function<RMat(double)>& xi, const VectorPotential& A, double s1, double s2,
                  OhmKernelOrder order = OhmKernelOrder::transposed);

// ∫_{s_0}^{s_i} ds₁ ∫_{s_0}^{s₁} ds₂ X(s₁, s₂) for every grid index i, composite Simpson
// (3/8 rule on the last panel for odd counts)
std::vector<double> triangle_integrals(const JouleIntegrand& X);

// Composite Simpson for any number of intervals ≥ 1 on a uniform grid
double simpson_any(const std::vector<double>& f, double h);

// flat field ℰ_t w on the whole box, densities per site
struct JouleFlat {
    double ip = 0;         // ∫ ds ℰ_s ⟨w, J_p(s)⟩
    double id = 0;         // ⟨w, Ξ_d w⟩ (∫ℰ)² / 2
    double correction = 0; // (∫_{t0}^t ℰ) ⟨w, J_p(t)⟩
    double s() const { return ip - correction; }
    double p() const { return id + correction; }
};

// J_p(s) = ∫_{t0}^s Ξ(s - u)[ᵀ] w ℰ_u du; `n` Simpson intervals per unit of time
JouleFlat joule_flat(const std::function<RMat(double)>& xi, const RMat& xi_d, const Envelope& env,
                     const Eigen::VectorXd& w, double t, OhmKernelOrder order = OhmKernelOrder::transposed,
                     int n = 400);

} // namespace fermicond
