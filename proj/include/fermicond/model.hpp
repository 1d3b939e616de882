#pragma once

#include "fermicond/common.hpp"
#include "fermicond/field.hpp"
#include "fermicond/fock.hpp"
#include "fermicond/lattice.hpp"

#include <functional>
#include <limits>
#include <string>

namespace fermicond {

struct HoppingMatrix {
    Mat h;            // one-particle matrix over box sites
    double theta = 0; // hopping-disorder strength
};

// ⟨e_x, Δ e_x⟩ = 2d; ⟨e_x, Δ e_{x+e_j}⟩ = -(1 + ϑ ω₂({x, x+e_j})), reverse entry conjugated
HoppingMatrix build_hopping(const Box& box, const DisorderSample& omega, double theta);

// entries multiplied by exp(i ∫_0^1 A(t, α y + (1-α) x)·(y - x) dα)
HoppingMatrix peierls_hopping(const HoppingMatrix& hop, const Box& box, const VectorPotential& A, double t);

struct DecayFunction {
    enum class Form { polynomial, exponential };
    Form form = Form::polynomial;
    int d = 1;
    double eps = 2.0;
    double varsigma = 1.0; // exponential rate, exponential form only

    double operator()(double r) const;
};

struct InterparticleInteraction {
    enum class Kind { none, density_density, hubbard };
    Kind kind = Kind::none;
    double U = 0.0;             // hubbard: nearest-neighbour n_x n_y strength (spinless)
    double strength = 0.0;      // density-density: v(r) = strength exp(-(r-1)/decay_length)
    double decay_length = 1.0;
    double range = 0.0;         // density-density: v(r) = 0 for r > range
    std::function<double(double)> profile; // optional custom v(r), overrides strength/decay_length

    double v(double r) const; // pair coefficient at Euclidean distance r > 0
    double reach() const;     // largest distance with nonzero v
    std::string describe() const;

    static InterparticleInteraction none();
    static InterparticleInteraction hubbard(double U);
    static InterparticleInteraction density_density(double strength, double decay_length, double range);
};

// One realization: lattice box, disorder sample, couplings.
struct Model {
    LatticeSpec spec;
    DisorderSample omega;
    double theta = 0.0;
    double lambda = 0.0;
    InterparticleInteraction ip;

    Box box() const { return Box(spec); }
    FockRep rep() const { return FockRep(Box(spec)); }
};

Model make_model(const LatticeSpec& spec, const DisorderSample& omega, double theta, double lambda,
                 const InterparticleInteraction& ip);

// H = Σ ⟨e_x,(Δ + λV) e_y⟩ a_x^* a_y + Σ_{x,y} v(|x-y|) n_x n_y
OperatorMatrix build_hamiltonian(const FockRep& rep, const Box& box, const DisorderSample& omega, double theta,
                                 double lambda, const InterparticleInteraction& ip);
OperatorMatrix build_hamiltonian(const Model& m);

// diagonal part Σ v n_x n_y alone
OperatorMatrix interaction_operator(const FockRep& rep, const Box& box, const InterparticleInteraction& ip);

// W_t = Σ ⟨e_x,(Δ^(A) - Δ) e_y⟩ a_x^* a_y
OperatorMatrix build_W(const FockRep& rep, const Box& box, const HoppingMatrix& hop, const VectorPotential& A,
                       double t);
OperatorMatrix build_W(const Model& m, const VectorPotential& A, double t);
// one-particle Δ^(A) - Δ (for cheap expectation values)
Mat W_one_particle(const Box& box, const HoppingMatrix& hop, const VectorPotential& A, double t);

// ‖Ψ^IP‖_W on the box: sup_{x,y} Σ_{Λ ⊃ {x,y}} ‖Ψ_Λ‖ / F(|x-y|)
double interaction_norm(const InterparticleInteraction& ip, const DecayFunction& F, const Box& box);
// ‖Ψ^(ω,ϑ)‖_W maximised over ω for ϑ ≤ theta0 (hopping plus interaction)
double dynamics_norm(double theta0, const InterparticleInteraction& ip, const DecayFunction& F, const Box& box);

struct DecayReport {
    double norm_F1 = 0;      // sup_y Σ_x F(|x-y|) on the box
    double conv_D = 0;       // sup_{x,y} Σ_z F(|x-z|) F(|z-y|) / F(|x-y|) on the box
    double varsigma_sup = 0; // supremum of admissible exponents in the polynomial-decay condition
    bool meets_2d = false;
    bool meets_3d = false;
    std::vector<double> shell_sequence; // (1+n)^ς_test · shell term for m = 0, n = 1..l
};

double decay_norm_F1(const DecayFunction& F, const Box& box);
double decay_conv_D(const DecayFunction& F, const Box& box);
DecayReport decay_checks(const DecayFunction& F, const Box& box, double varsigma_test);

// boundary margin (in sites) between the support of A and the box edge; negative when it sticks out
double field_margin(const VectorPotential& A, const Box& box);

} // namespace fermicond
