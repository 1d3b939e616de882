#include "fermicond/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

namespace fermicond {

namespace {

Eigen::VectorXd coords(const Site& x)
{
    Eigen::VectorXd v(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) v[i] = x[i];
    return v;
}

} // namespace

HoppingMatrix build_hopping(const Box& box, const DisorderSample& omega, double theta)
{
    if (theta < 0) throw Error(ErrorKind::invalid_argument, "theta must be >= 0");
    if (static_cast<int>(omega.omega2.size()) != static_cast<int>(box.bonds().size()))
        throw Error(ErrorKind::shape_mismatch, "disorder sample does not match the box");
    const int n = box.n_sites();
    HoppingMatrix hop;
    hop.theta = theta;
    hop.h = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) hop.h(i, i) = 2.0 * box.dim();
    for (std::size_t k = 0; k < box.bonds().size(); ++k) {
        const Bond& b = box.bonds()[k];
        cplx c = -(1.0 + theta * omega.omega2[k]);
        hop.h(b.a, b.b) = c;
        hop.h(b.b, b.a) = std::conj(c);
    }
    return hop;
}

HoppingMatrix peierls_hopping(const HoppingMatrix& hop, const Box& box, const VectorPotential& A, double t)
{
    HoppingMatrix out = hop;
    if (A.cyclic && (t <= A.t0 || t >= A.t1)) return out;
    for (const Bond& b : box.bonds()) {
        double phase = line_integral(A, t, coords(box.site(b.a)), coords(box.site(b.b)));
        cplx f = std::polar(1.0, phase);
        out.h(b.a, b.b) = f * hop.h(b.a, b.b);
        out.h(b.b, b.a) = std::conj(out.h(b.a, b.b));
    }
    return out;
}

double DecayFunction::operator()(double r) const
{
    double p = std::pow(1.0 + r, -(d + eps));
    if (form == Form::exponential) p *= std::exp(-varsigma * r);
    return p;
}

double InterparticleInteraction::v(double r) const
{
    switch (kind) {
    case Kind::none: return 0.0;
    case Kind::hubbard: return std::abs(r - 1.0) < 1e-12 ? U : 0.0;
    case Kind::density_density:
        if (r <= 0 || r > range + 1e-12) return 0.0;
        if (profile) return profile(r);
        return strength * std::exp(-(r - 1.0) / decay_length);
    }
    return 0.0;
}

double InterparticleInteraction::reach() const
{
    switch (kind) {
    case Kind::none: return 0.0;
    case Kind::hubbard: return U == 0.0 ? 0.0 : 1.0;
    case Kind::density_density: return range;
    }
    return 0.0;
}

std::string InterparticleInteraction::describe() const
{
    std::ostringstream os;
    switch (kind) {
    case Kind::none: os << "none"; break;
    case Kind::hubbard: os << "hubbard(" << U << ")"; break;
    case Kind::density_density:
        os << "density-density(" << strength << "," << decay_length << "," << range << ")";
        break;
    }
    return os.str();
}

InterparticleInteraction InterparticleInteraction::none() { return {}; }

InterparticleInteraction InterparticleInteraction::hubbard(double U)
{
    InterparticleInteraction ip;
    ip.kind = Kind::hubbard;
    ip.U = U;
    return ip;
}

InterparticleInteraction InterparticleInteraction::density_density(double strength, double decay_length, double range)
{
    InterparticleInteraction ip;
    ip.kind = Kind::density_density;
    ip.strength = strength;
    ip.decay_length = decay_length;
    ip.range = range;
    return ip;
}

Model make_model(const LatticeSpec& spec, const DisorderSample& omega, double theta, double lambda,
                 const InterparticleInteraction& ip)
{
    Model m;
    m.spec = spec;
    m.omega = omega;
    m.theta = theta;
    m.lambda = lambda;
    m.ip = ip;
    return m;
}

OperatorMatrix interaction_operator(const FockRep& rep, const Box& box, const InterparticleInteraction& ip)
{
    const Eigen::Index dim = rep.dim();
    Mat out = Mat::Zero(dim, dim);
    if (ip.kind == InterparticleInteraction::Kind::none) return {out, Parity::even};
    int longest = 0;
    for (int i = 0; i < box.dim(); ++i) longest = std::max(longest, box.spec().size(i) - 1);
    if (ip.reach() > longest + 1e-12)
        throw Error(ErrorKind::range_exceeds_box, "interaction range " + std::to_string(ip.reach()) +
                                                      " exceeds the box");
    const int n = box.n_sites();
    std::vector<std::pair<std::uint64_t, double>> pairs;
    for (int x = 0; x < n; ++x)
        for (int y = x + 1; y < n; ++y) {
            double v = ip.v(box.distance(x, y));
            if (v != 0.0) pairs.push_back({(std::uint64_t(1) << x) | (std::uint64_t(1) << y), v});
        }
    for (Eigen::Index s = 0; s < dim; ++s) {
        double e = 0;
        for (const auto& [mask, v] : pairs)
            if ((std::uint64_t(s) & mask) == mask) e += v;
        out(s, s) = e;
    }
    return {out, Parity::even};
}

OperatorMatrix build_hamiltonian(const FockRep& rep, const Box& box, const DisorderSample& omega, double theta,
                                 double lambda, const InterparticleInteraction& ip)
{
    if (rep.n_modes() != box.n_sites()) throw Error(ErrorKind::shape_mismatch, "representation does not match box");
    HoppingMatrix hop = build_hopping(box, omega, theta);
    Mat h1 = hop.h;
    for (int i = 0; i < box.n_sites(); ++i) h1(i, i) += lambda * omega.omega1[i];
    OperatorMatrix H = interaction_operator(rep, box, ip);
    add_second_quantized(rep, h1, H.m);
    return H;
}

OperatorMatrix build_hamiltonian(const Model& m)
{
    Box box(m.spec);
    return build_hamiltonian(FockRep(box), box, m.omega, m.theta, m.lambda, m.ip);
}

Mat W_one_particle(const Box& box, const HoppingMatrix& hop, const VectorPotential& A, double t)
{
    return peierls_hopping(hop, box, A, t).h - hop.h;
}

OperatorMatrix build_W(const FockRep& rep, const Box& box, const HoppingMatrix& hop, const VectorPotential& A,
                       double t)
{
    return second_quantize(rep, W_one_particle(box, hop, A, t));
}

OperatorMatrix build_W(const Model& m, const VectorPotential& A, double t)
{
    Box box(m.spec);
    return build_W(FockRep(box), box, build_hopping(box, m.omega, m.theta), A, t);
}

namespace {

// sup over site pairs of Σ_{Λ ⊃ {x,y}} ‖Ψ_Λ‖ / F(|x-y|) for interactions made of
// one-site terms (norm `onsite`) and two-site terms (norm pair(x,y))
template <class PairNorm>
double pair_interaction_norm(const Box& box, const DecayFunction& F, double onsite, PairNorm pair)
{
    const int n = box.n_sites();
    double best = 0;
    for (int x = 0; x < n; ++x) {
        double diag = onsite;
        for (int y = 0; y < n; ++y) {
            if (y == x) continue;
            double p = pair(x, y);
            diag += p;
            best = std::max(best, p / F(box.distance(x, y)));
        }
        best = std::max(best, diag / F(0.0));
    }
    return best;
}

} // namespace

double interaction_norm(const InterparticleInteraction& ip, const DecayFunction& F, const Box& box)
{
    if (ip.kind == InterparticleInteraction::Kind::none) return 0.0;
    return pair_interaction_norm(box, F, 0.0,
                                 [&](int x, int y) { return std::abs(ip.v(box.distance(x, y))); });
}

double dynamics_norm(double theta0, const InterparticleInteraction& ip, const DecayFunction& F, const Box& box)
{
    const double c = 1.0 + theta0;
    return pair_interaction_norm(box, F, 2.0 * box.dim(), [&](int x, int y) {
        double v = std::abs(ip.v(box.distance(x, y)));
        // c(a_x^* a_y + h.c.) + v n_x n_y has spectrum {0, ±c, v}
        if (box.bond_index(x, y) >= 0) return std::max(c, v);
        return v;
    });
}

double decay_norm_F1(const DecayFunction& F, const Box& box)
{
    double best = 0;
    for (int y = 0; y < box.n_sites(); ++y) {
        double s = 0;
        for (int x = 0; x < box.n_sites(); ++x) s += F(box.distance(x, y));
        best = std::max(best, s);
    }
    return best;
}

double decay_conv_D(const DecayFunction& F, const Box& box)
{
    const int n = box.n_sites();
    RMat f(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) f(i, j) = F(box.distance(i, j));
    RMat ff = f * f;
    double best = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) best = std::max(best, ff(i, j) / f(i, j));
    return best;
}

DecayReport decay_checks(const DecayFunction& F, const Box& box, double varsigma_test)
{
    DecayReport r;
    r.norm_F1 = decay_norm_F1(F, box);
    r.conv_D = decay_conv_D(F, box);
    // shell term ~ n^{d-1} F(n - m): summable against (1+n)^ς iff ς < ε for the
    // polynomial form; any ς for the exponential form
    r.varsigma_sup = F.form == DecayFunction::Form::polynomial ? F.eps : std::numeric_limits<double>::infinity();
    r.meets_2d = r.varsigma_sup > 2.0 * F.d;
    r.meets_3d = r.varsigma_sup > 3.0 * F.d;
    // shells of the cube Λ_n inside the box, m = 0 (z = origin)
    int lmax = box.spec().size(0);
    for (int i = 0; i < box.dim(); ++i) lmax = std::min(lmax, box.spec().size(i));
    lmax = (lmax - 1) / 2;
    for (int n = 1; n <= lmax; ++n) {
        double shell = std::pow(2.0 * n + 1, F.d) - std::pow(2.0 * n - 1, F.d);
        r.shell_sequence.push_back(shell * F(double(n)) * std::pow(1.0 + n, varsigma_test));
    }
    return r;
}

double field_margin(const VectorPotential& A, const Box& box)
{
    double m = std::numeric_limits<double>::infinity();
    for (int i = 0; i < box.dim(); ++i) {
        double lo = box.spec().low(i), hi = lo + box.spec().size(i) - 1;
        m = std::min({m, hi - A.support, -A.support - lo});
    }
    return m;
}

} // namespace fermicond
