#pragma once

// Conductivity measures at finite volume. Everything is atomic.
//
// Conventions: `MatrixMeasure` stores the ν²-weighted measure 𝝁 of the
// Lévy–Khintchine form
//     [Ξ_p,l(t)]₊ = −(t²/2) 𝝁({0}) + Σ_ν (cos tν − 1) ν⁻² 𝝁({ν}),
// and `ACMeasure` is the view ν⁻² 𝝁 on ν ≠ 0, i.e. the measure μ_p,l with
// [Ξ_p,l(t)]₊ = ∫ (cos tν − 1) μ_p,l(dν).

#include "fermicond/transport.hpp"

#include <iosfwd>

namespace fermicond {

struct MatrixAtom {
    double nu = 0;
    RMat weight;
};

struct MatrixMeasure {
    int d = 1;
    std::vector<MatrixAtom> atoms; // ν ≠ 0, sorted, symmetric in ν
    RMat zero_atom;                // 𝝁({0})
    // diagnostics: Σ Re G over degenerate Bohr pairs (they drop out of [Ξ]₊)
    RMat degenerate_mass;

    RMat total() const; // 𝝁(ℝ)
};

struct ACMeasure {
    int d = 1;
    std::vector<MatrixAtom> atoms; // ν⁻² 𝝁 restricted to ν ≠ 0
    RMat total() const;
};

// atoms from Bohr pairs with ω > tol; pairs closer than tol are merged
MatrixMeasure extract_measure(const BohrKernel& k, double hnorm, double merge_tol = 1e-9);
MatrixMeasure extract_measure(const TransportContext& c);
ACMeasure ac_measure(const MatrixMeasure& mu);

// min eigenvalue over all weights (and zero atom)
double min_weight_eigenvalue(const MatrixMeasure& mu);
// throws psd-violation below -tol
void check_psd(const MatrixMeasure& mu, double tol = 1e-8);

RMat levy_khintchine(const MatrixMeasure& mu, double t);
std::vector<RMat> levy_khintchine(const MatrixMeasure& mu, const std::vector<double>& times);

// ---- polarization ----

struct ScalarMeasure {
    std::vector<double> nu;
    std::vector<double> w;
};

// ⟨w, 𝝁 w⟩ atom by atom
ScalarMeasure project(const MatrixMeasure& mu, const Eigen::VectorXd& w);

// ⟨e_k, μ e_q⟩ = ¼(μ_{e_k+e_q} − μ_{e_k−e_q}); the family returns μ_w for any w
MatrixMeasure bochner_polarization(int d, const std::function<ScalarMeasure(const Eigen::VectorXd&)>& family,
                                   double merge_tol = 1e-9, double consistency_tol = 1e-10);

// ---- Cesàro means ----

// (1/T) ∫_0^T [Ξ]₊ ds in closed form per atom
RMat cesaro_mean(const MatrixMeasure& mu, double T);
// the same by composite Simpson on a sampled map
RMat cesaro_mean(const std::function<RMat(double)>& xi_plus, double T, int intervals = 2000);

// ---- Drude ----

struct DrudeSpec {
    double T = 1.0;
    double D = 1.0;
    // T(ν) = T / (1 + D_prime T ν²) when set
    std::optional<double> D_prime;
};

double freq_dependent_T(const DrudeSpec& s, double nu);
// D T / (1 + T² ν²), with T(ν) in place of T when D_prime is set
double drude_density(const DrudeSpec& s, double nu);
// ∫_ν^∞ σ_T for constant T
double drude_tail(const DrudeSpec& s, double nu);
// D such that ∫ σ_T = πD equals the given mass
DrudeSpec calibrate_drude(double T, double mass);

struct DrudeTailRow {
    double nu;
    double measure_tail; // ν² μ_AC,w([ν, ∞))
    double drude_tail;   // ν² ∫_ν^∞ σ_T
};

struct DrudeTailReport {
    std::vector<DrudeTailRow> rows;
    double spectral_diameter = 0; // largest atom frequency
    double nu_star = -1;          // first grid ν from which the measure tail is 0 < Drude tail, -1 if none
    DrudeSpec drude;
};

// scalar comparison in direction w, D calibrated to μ_AC,w(ℝ)
DrudeTailReport drude_tail_compare(const MatrixMeasure& mu, const Eigen::VectorXd& w, double T,
                                   const std::vector<double>& nu_grid);

// Gaussian-smoothed density of ⟨w, μ_AC w⟩, plotting only
double smoothed_density(const ACMeasure& mu, const Eigen::VectorXd& w, double nu, double bandwidth);

// CSV: nu, w[1][1..d], ..., w[d][1..d]; zero atom on the nu=0 row
void write_measure_csv(std::ostream& os, const MatrixMeasure& mu, const std::string& provenance);

} // namespace fermicond
