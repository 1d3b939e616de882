#pragma once

// Lévy processes with exponent t ↦ 𝛔(α) built from a directional conductivity
// measure: F_t = √D0 B_t + big jumps (|ν| ≥ 1) + compensated small jumps.

#include "fermicond/measure.hpp"

namespace fermicond {

struct LevyAtom {
    double nu = 0;
    double weight = 0; // rate of jumps of size ν
};

struct LevyTriple {
    double D0 = 0;
    std::vector<LevyAtom> atoms; // ν ≠ 0, sorted

    double mass() const; // m_AC(ℝ∖{0})
};

// -(α²/2) D0 + Σ (cos αν - 1) weight. The drift and the sine part vanish for
// symmetric measures and are not included.
double char_exponent(const LevyTriple& l, double alpha);

// ⟨w, 𝝁({0}) w⟩ and ⟨w, ν⁻² 𝝁({ν}) w⟩ for unit w. w must be a common
// eigenvector of every weight, and `antisym_sup` (sup_t |[Ξ(t)]₋ w|, from
// the caller's series) must be ≤ tol, else anisotropy-violation.
LevyTriple from_conductivity(const MatrixMeasure& mu, const Eigen::VectorXd& w, double antisym_sup = 0.0,
                             double tol = 1e-8);

struct LevySampleOptions {
    // atoms with |ν| < epsilon are dropped (truncation of infinite-activity input)
    double epsilon = 0.0;
    int workers = 1;
    // keep inter-arrival times of all jumps (both channels), for tests
    bool record_jumps = false;
};

struct PathEnsemble {
    std::vector<double> times; // includes 0
    Eigen::MatrixXd F;         // paths × times
    std::uint64_t seed = 0;
    std::vector<double> inter_jump; // filled if record_jumps
};

PathEnsemble sample_paths(const LevyTriple& l, int n_paths, const std::vector<double>& times, std::uint64_t seed,
                          const LevySampleOptions& opt = {});
// grid 0, dt, 2dt, ..., t_max
PathEnsemble sample_paths(const LevyTriple& l, int n_paths, double t_max, double dt, std::uint64_t seed,
                          const LevySampleOptions& opt = {});

// the triple actually simulated for a given epsilon
LevyTriple truncate(const LevyTriple& l, double epsilon);

struct CharRow {
    double alpha = 0, t = 0;
    double mc_re = 0, mc_im = 0;
    double exact = 0;
    double se_re = 0, se_im = 0;
    double z = 0;                    // |mc - exact| / √(se_re² + se_im²)
    bool pass = false;               // z ≤ n_se
    bool pass_componentwise = false; // each part within n_se of its own error
};

struct CharReport {
    std::vector<CharRow> rows;
    double pass_fraction = 0;
    double componentwise_fraction = 0;
};

// E[e^{iαF_t}] against exp(t 𝛔(α)). The standard error of the complex mean is
// √(se_re² + se_im²); a point passes within `n_se` of it (exact agreement
// passes when the error is 0).
CharReport validate_char(const PathEnsemble& e, const LevyTriple& l, const std::vector<double>& alphas,
                         double n_se = 3.0);

// ---- Drude jumps ----

struct DrudeJumpRow {
    double T = 0;
    double total_rate = 0; // discretised mass on [-ν_max, ν_max]
    double tail_prob = 0;  // P(|jump| > ν0)
    double eps_mass = 0;   // fraction of the mass in [-ε, ε]
};

struct DrudeJumpOptions {
    double nu_max = 100.0;
    int cells = 20000; // midpoint atoms per half line
    double nu0 = 1.0;
    double eps = 0.1;
};

// the truncated, discretised Drude density D T / (1 + T² ν²) as a triple
LevyTriple drude_triple(const DrudeSpec& s, const DrudeJumpOptions& opt);
std::vector<DrudeJumpRow> drude_jump_stats(double D, const std::vector<double>& T_grid, const DrudeJumpOptions& opt = {});

} // namespace fermicond
