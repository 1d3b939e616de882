#include "fermicond/transport.hpp"

#include "fermicond/parallel.hpp"
#include "fermicond/rng.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fermicond {

namespace {

void check_bond(const Box& box, OrientedBond b) {
    if (b.x1 < 0 || b.x2 < 0 || b.x1 >= box.n_sites() || b.x2 >= box.n_sites() || box.bond_index(b.x1, b.x2) < 0)
        throw Error(ErrorKind::not_a_bond, "sites " + std::to_string(b.x1) + ", " + std::to_string(b.x2) +
                                               " are not nearest neighbours");
}

Eigen::VectorXd coords(const Site& x) {
    Eigen::VectorXd v(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) v[i] = x[i];
    return v;
}

// -2 Im(c X) and 2 Re(c X) for X = a_x1^* a_x2 as matrices
Mat im_part(const FockRep& rep, OrientedBond b, cplx c) {
    Mat X = bilinear(rep, b.x1, b.x2, c).m;
    return -2.0 * (X - X.adjoint()) / cplx(0, 2);
}

Mat re_part(const FockRep& rep, OrientedBond b, cplx c) {
    Mat X = bilinear(rep, b.x1, b.x2, c).m;
    return X + X.adjoint();
}

double bond_phase(const Box& box, const VectorPotential& A, double t, OrientedBond b) {
    return line_integral(A, t, coords(box.site(b.x1)), coords(box.site(b.x2)));
}

double simpson(const std::vector<double>& f, double h) {
    const std::size_t n = f.size() - 1; // even
    double acc = f.front() + f.back();
    for (std::size_t k = 1; k < n; ++k) acc += (k % 2 ? 4.0 : 2.0) * f[k];
    return acc * h / 3.0;
}

} // namespace

OrientedBondObservable current_obs(const FockRep& rep, const Box& box, const HoppingMatrix& hop, OrientedBond b) {
    check_bond(box, b);
    return {b, {im_part(rep, b, hop.h(b.x1, b.x2)), Parity::even}};
}

OrientedBondObservable current_obs(const FockRep& rep, const Box& box, const DisorderSample& omega, double theta,
                                   OrientedBond b) {
    return current_obs(rep, box, build_hopping(box, omega, theta), b);
}

OrientedBondObservable kinetic_obs(const FockRep& rep, const Box& box, const HoppingMatrix& hop, OrientedBond b) {
    check_bond(box, b);
    return {b, {re_part(rep, b, hop.h(b.x1, b.x2)), Parity::even}};
}

OrientedBondObservable diamagnetic_obs(const FockRep& rep, const Box& box, const HoppingMatrix& hop, OrientedBond b,
                                       const VectorPotential& A, double t) {
    check_bond(box, b);
    const double phi = bond_phase(box, A, t, b);
    const cplx f = std::polar(1.0, -phi) - 1.0;
    return {b, {im_part(rep, b, f * hop.h(b.x1, b.x2)), Parity::even}};
}

std::vector<OrientedBond> axis_bonds(const Box& box, int k) {
    std::vector<OrientedBond> out;
    for (const Bond& b : box.bonds())
        if (b.axis == k) out.push_back({b.b, b.a});
    return out;
}

OperatorMatrix total_current(const FockRep& rep, const Box& box, const HoppingMatrix& hop, int k) {
    // J_k is the second quantization of the one-particle matrix i(c e_1 e_2^* - c̄ e_2 e_1^*)
    Mat j = Mat::Zero(box.n_sites(), box.n_sites());
    for (auto b : axis_bonds(box, k)) {
        cplx c = hop.h(b.x1, b.x2);
        j(b.x1, b.x2) += cplx(0, 1) * c;
        j(b.x2, b.x1) += -cplx(0, 1) * std::conj(c);
    }
    return second_quantize(rep, j);
}

double current_expect(const Mat& G, const HoppingMatrix& hop, OrientedBond b) {
    return -2.0 * (hop.h(b.x1, b.x2) * G(b.x1, b.x2)).imag();
}

double kinetic_expect(const Mat& G, const HoppingMatrix& hop, OrientedBond b) {
    return 2.0 * (hop.h(b.x1, b.x2) * G(b.x1, b.x2)).real();
}

double diamagnetic_expect(const Mat& G, const HoppingMatrix& hop, const Box& box, OrientedBond b,
                          const VectorPotential& A, double t) {
    const double phi = bond_phase(box, A, t, b);
    const cplx f = std::polar(1.0, -phi) - 1.0;
    return -2.0 * (f * hop.h(b.x1, b.x2) * G(b.x1, b.x2)).imag();
}

double sigma_p(const OperatorMatrix& Ix, const OperatorMatrix& Iy, double t, const GibbsState& st) {
    const SpectralData& s = st.spec();
    BohrKernel k(st, {to_eigenbasis(Iy.m, s)}, {to_eigenbasis(Ix.m, s)}, 1.0);
    return k.eval(t)(0, 0);
}

double sigma_p_quadrature(const OperatorMatrix& Ix, const OperatorMatrix& Iy, double t, const GibbsState& st,
                          int n) {
    if (t == 0.0) return 0.0;
    const int M = 2 * n;
    const double h = t / M;
    std::vector<double> f;
    for (int k = 0; k <= M; ++k) {
        OperatorMatrix tx = heisenberg(Ix, k * h, st.spec());
        Mat c = cplx(0, 1) * (Iy.m * tx.m - tx.m * Iy.m);
        f.push_back(st.expect(c).real());
    }
    return simpson(f, h);
}

double sigma_d(const OperatorMatrix& P, const GibbsState& st) { return st.expect(P).real(); }

// ---- BohrKernel ----

BohrKernel::BohrKernel(const GibbsState& st, const std::vector<Mat>& A, const std::vector<Mat>& B, double scale) {
    if (A.size() != B.size() || A.empty()) throw Error(ErrorKind::shape_mismatch, "BohrKernel: operator lists");
    d_ = static_cast<int>(A.size());
    const SpectralData& s = st.spec();
    const int n = s.dim();
    RMat K = duhamel_kernel(st);
    std::vector<cplx> w(d_ * d_);
    for (int m = 0; m < n; ++m)
        for (int k = 0; k < n; ++k) { // k plays the role of n in G(m, n)
            bool any = false;
            for (int a = 0; a < d_ && !any; ++a)
                any = A[a](k, m) != cplx(0.0, 0.0) || B[a](k, m) != cplx(0.0, 0.0);
            if (!any) continue;
            bool nonzero = false;
            for (int a = 0; a < d_; ++a)
                for (int b = 0; b < d_; ++b) {
                    cplx g = scale * K(m, k) * std::conj(A[a](k, m)) * B[b](k, m);
                    w[a * d_ + b] = g;
                    nonzero = nonzero || g != cplx(0.0, 0.0);
                }
            if (!nonzero) continue;
            omega_.push_back(s.E(k) - s.E(m));
            g_.insert(g_.end(), w.begin(), w.end());
        }
}

RMat BohrKernel::eval(double t) const {
    RMat out = RMat::Zero(d_, d_);
    const int dd = d_ * d_;
    for (std::size_t i = 0; i < omega_.size(); ++i) {
        const cplx ph = std::polar(1.0, t * omega_[i]) - 1.0;
        const cplx* g = &g_[i * dd];
        for (int a = 0; a < dd; ++a) out.data()[a] += (g[a] * ph).real();
    }
    // data() is column-major while g is row-major (k, q)
    RMat r = out.transpose();
    return r;
}

RMat BohrKernel::sym(double t) const {
    RMat out = RMat::Zero(d_, d_);
    for (std::size_t i = 0; i < omega_.size(); ++i) {
        const double c = std::cos(t * omega_[i]) - 1.0;
        for (int k = 0; k < d_; ++k)
            for (int q = 0; q < d_; ++q) out(k, q) += weight(i, k, q).real() * c;
    }
    return out;
}

RMat BohrKernel::antisym(double t) const {
    RMat out = RMat::Zero(d_, d_);
    for (std::size_t i = 0; i < omega_.size(); ++i) {
        const double s = std::sin(t * omega_[i]);
        for (int k = 0; k < d_; ++k)
            for (int q = 0; q < d_; ++q) out(k, q) -= weight(i, k, q).imag() * s;
    }
    return out;
}

Eigen::MatrixXcd BohrKernel::eval_complex(double t) const {
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(d_, d_);
    for (std::size_t i = 0; i < omega_.size(); ++i) {
        const cplx ph = std::polar(1.0, t * omega_[i]) - 1.0;
        for (int k = 0; k < d_; ++k)
            for (int q = 0; q < d_; ++q) out(k, q) += weight(i, k, q) * ph;
    }
    return out;
}

// ---- context ----

TransportContext TransportContext::build(const Model& m, double beta, const EigenCache* cache,
                                         const std::string& cache_key) {
    Box box(m.spec);
    FockRep rep(box);
    HoppingMatrix hop = build_hopping(box, m.omega, m.theta);
    OperatorMatrix H = build_hamiltonian(rep, box, m.omega, m.theta, m.lambda, m.ip);
    auto spectral = std::make_shared<const SpectralData>(
        cache ? diagonalize_cached(H, cache, cache_key) : diagonalize(H));
    GibbsState st = gibbs(spectral, beta);
    Mat G = one_body_density(rep, st.rho);
    return TransportContext{box, rep, hop, H, spectral, st, G};
}

BohrKernel xi_kernel(const TransportContext& c) {
    std::vector<Mat> J;
    for (int k = 0; k < c.box.dim(); ++k)
        J.push_back(to_eigenbasis(total_current(c.rep, c.box, c.hop, k).m, *c.spectral));
    return BohrKernel(c.state, J, J, 1.0 / c.box.n_sites());
}

BohrKernel bulk_kernel(const TransportContext& c) {
    std::vector<Mat> J, Ic;
    Eigen::VectorXd centre = Eigen::VectorXd::Zero(c.box.dim());
    for (int i = 0; i < c.box.dim(); ++i)
        centre[i] = c.box.spec().low(i) + 0.5 * (c.box.spec().size(i) - 1);
    for (int k = 0; k < c.box.dim(); ++k) {
        J.push_back(to_eigenbasis(total_current(c.rep, c.box, c.hop, k).m, *c.spectral));
        auto bonds = axis_bonds(c.box, k);
        if (bonds.empty()) throw Error(ErrorKind::invalid_argument, "bulk_kernel: no bonds along an axis");
        auto mid = [&](OrientedBond b) {
            return (0.5 * (coords(c.box.site(b.x1)) + coords(c.box.site(b.x2))) - centre).norm();
        };
        auto best = *std::min_element(bonds.begin(), bonds.end(),
                                      [&](OrientedBond a, OrientedBond b) { return mid(a) < mid(b) - 1e-12; });
        Ic.push_back(to_eigenbasis(current_obs(c.rep, c.box, c.hop, best).op.m, *c.spectral));
    }
    return BohrKernel(c.state, Ic, J, 1.0);
}

RMat xi_d_l(const TransportContext& c) {
    const int d = c.box.dim();
    RMat out = RMat::Zero(d, d);
    for (int k = 0; k < d; ++k) {
        double s = 0;
        for (auto b : axis_bonds(c.box, k)) s += kinetic_expect(c.G, c.hop, b);
        out(k, k) = s / c.box.n_sites();
    }
    return out;
}

Eigen::VectorXd thermal_current(const TransportContext& c) {
    const int d = c.box.dim();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(d);
    for (int k = 0; k < d; ++k) {
        double s = 0;
        for (auto b : axis_bonds(c.box, k)) s += current_expect(c.G, c.hop, b);
        out[k] = s / c.box.n_sites();
    }
    return out;
}

TransportSeries xi_series(const TransportContext& c, const std::vector<double>& times) {
    TransportSeries ts;
    ts.times = times;
    BohrKernel k = xi_kernel(c);
    for (double t : times) ts.xi_p.push_back(t == 0.0 ? RMat::Zero(k.d(), k.d()) : k.eval(t));
    ts.xi_d = xi_d_l(c);
    return ts;
}

std::vector<double> uniform_grid(double a, double b, int points) {
    if (points < 2) throw Error(ErrorKind::invalid_argument, "grid needs >= 2 points");
    std::vector<double> g(points);
    for (int i = 0; i < points; ++i) g[i] = a + (b - a) * i / (points - 1);
    return g;
}

std::vector<double> symmetric_grid(double T, int points) {
    auto g = uniform_grid(-T, T, points);
    // exact mirror symmetry, exact zero in the middle for odd counts
    for (int i = 0; i < points / 2; ++i) g[points - 1 - i] = -g[i];
    if (points % 2) g[points / 2] = 0.0;
    return g;
}

TransportSeries disorder_average(const DisorderAverageConfig& cfg, int n_samples, const std::vector<double>& times,
                                 const EigenCache* cache) {
    if (n_samples < 2) throw Error(ErrorKind::invalid_argument, "disorder_average: n_samples >= 2");
    auto one = [&](int i) -> TransportSeries {
        const std::uint64_t seed = derive_seed(cfg.master_seed, std::uint64_t(i));
        DisorderSample w = sample_disorder({cfg.kind, seed}, cfg.spec);
        if (cfg.transform) w = cfg.transform(i, w);
        Model m = make_model(cfg.spec, w, cfg.theta, cfg.lambda, cfg.ip);
        std::ostringstream key;
        key << "transport|" << cfg.spec.d << "|" << cfg.spec.l;
        for (int e : cfg.spec.extent) key << ":" << e;
        key << "|" << disorder_kind_name(cfg.kind) << "|" << seed << "|" << cfg.theta << "|" << cfg.lambda << "|"
            << cfg.ip.describe() << "|" << (cfg.transform ? "t" : "");
        auto ctx = TransportContext::build(m, cfg.beta, cache, key.str());
        return xi_series(ctx, times);
    };
    auto samples = parallel_map<TransportSeries>(n_samples, cfg.workers, one);

    TransportSeries avg;
    avg.times = times;
    avg.n_samples = n_samples;
    const int d = cfg.spec.d;
    const double n = n_samples;
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
        RMat mean = RMat::Zero(d, d), sq = RMat::Zero(d, d);
        for (const auto& s : samples) mean += s.xi_p[ti];
        mean /= n;
        for (const auto& s : samples) sq += (s.xi_p[ti] - mean).cwiseAbs2();
        avg.xi_p.push_back(mean);
        avg.xi_p_stderr.push_back(n > 1 ? RMat((sq / (n - 1) / n).cwiseSqrt()) : RMat::Zero(d, d));
    }
    RMat mean = RMat::Zero(d, d), sq = RMat::Zero(d, d);
    for (const auto& s : samples) mean += s.xi_d;
    mean /= n;
    for (const auto& s : samples) sq += (s.xi_d - mean).cwiseAbs2();
    avg.xi_d = mean;
    avg.xi_d_stderr = n > 1 ? RMat((sq / (n - 1) / n).cwiseSqrt()) : RMat::Zero(d, d);
    std::ostringstream prov;
    prov << "disorder-averaged over " << n_samples << " samples, master seed " << cfg.master_seed;
    avg.provenance = prov.str();
    return avg;
}

CurrentDensityTrace driven_currents(const TransportContext& c, const VectorPotential& A_bar, double eta, double l,
                                    const std::vector<double>& times, const DriveOptions& opt) {
    CurrentDensityTrace tr;
    tr.times = times;
    tr.eta = eta;
    tr.J_th = thermal_current(c);
    const int d = c.box.dim();
    VectorPotential A = rescale(A_bar, l, eta);
    HamiltonianFn H = [&](double t) -> Mat {
        Mat h = c.H.m;
        if (eta != 0.0) add_second_quantized(c.rep, W_one_particle(c.box, c.hop, A, t), h);
        return h;
    };
    std::vector<std::vector<OrientedBond>> bonds;
    for (int k = 0; k < d; ++k) bonds.push_back(axis_bonds(c.box, k));
    drive_observe(c.state.rho, H, times, opt, [&](double t, const Mat& rho) {
        Mat G = one_body_density(c.rep, rho);
        Eigen::VectorXd jp(d), jd(d);
        for (int k = 0; k < d; ++k) {
            double sp = 0, sd = 0;
            for (auto b : bonds[k]) {
                sp += current_expect(G, c.hop, b);
                if (eta != 0.0) sd += diamagnetic_expect(G, c.hop, c.box, b, A, t);
            }
            jp[k] = sp / c.box.n_sites() - tr.J_th[k];
            jd[k] = sd / c.box.n_sites();
        }
        tr.J_p.push_back(jp);
        tr.J_d.push_back(jd);
    });
    return tr;
}

OhmLinear ohm_linear(const std::function<RMat(double)>& xi_p, const RMat& xi_d, const Envelope& env,
                     const Eigen::VectorXd& w, const std::vector<double>& times, OhmKernelOrder order, double tol,
                     int max_levels) {
    OhmLinear out;
    out.times = times;
    const int d = static_cast<int>(w.size());
    for (double t : times) {
        Eigen::VectorXd jp = Eigen::VectorXd::Zero(d);
        const double hi = std::min(t, env.t1);
        if (hi > env.t0) {
            auto integrand = [&](double s) -> Eigen::VectorXd {
                RMat X = xi_p(t - s);
                if (order == OhmKernelOrder::transposed) X.transposeInPlace();
                return X * w * env.field(s);
            };
            auto simpson_v = [&](int M, std::vector<Eigen::VectorXd>& cache) {
                // cache holds the values on the M-interval grid; refine by adding midpoints
                const double h = (hi - env.t0) / M;
                std::vector<Eigen::VectorXd> vals(M + 1);
                for (int k = 0; k <= M; ++k) {
                    if (!cache.empty() && k % 2 == 0) vals[k] = cache[k / 2];
                    else vals[k] = integrand(env.t0 + k * h);
                }
                cache = vals;
                Eigen::VectorXd acc = vals.front() + vals.back();
                for (int k = 1; k < M; ++k) acc += (k % 2 ? 4.0 : 2.0) * vals[k];
                return Eigen::VectorXd(acc * h / 3.0);
            };
            std::vector<Eigen::VectorXd> cache;
            int M = 16;
            Eigen::VectorXd prev = simpson_v(M, cache);
            bool done = false;
            for (int level = 0; level < max_levels; ++level) {
                M *= 2;
                Eigen::VectorXd next = simpson_v(M, cache);
                if ((next - prev).norm() <= tol * std::max(1.0, next.norm())) {
                    jp = next;
                    done = true;
                    break;
                }
                prev = next;
            }
            if (!done) throw Error(ErrorKind::grid_too_coarse, "ohm_linear: Simpson refinement did not settle");
        }
        out.J_p.push_back(jp);
        // ∫_{t0}^t ℰ = -(𝒜(t) - 𝒜(t0))
        const double integral = t > env.t0 ? -(env.value(t) - env.value(env.t0)) : 0.0;
        out.J_d.push_back(xi_d * w * integral);
    }
    return out;
}

double bochner_functional(const std::function<RMat(double)>& xi_p,
                          const std::function<Eigen::VectorXd(double)>& dphi, double t0, double t1, int n) {
    if (n % 2) ++n;
    const double h = (t1 - t0) / n;
    std::vector<Eigen::VectorXd> v(n + 1);
    for (int i = 0; i <= n; ++i) v[i] = dphi(t0 + i * h);
    // lags (j - i) h, symmetric part only
    std::vector<RMat> lag(n + 1);
    for (int k = 0; k <= n; ++k) {
        RMat X = xi_p(k * h);
        lag[k] = 0.5 * (X + X.transpose());
    }
    std::vector<double> outer(n + 1);
    for (int i = 0; i <= n; ++i) {
        std::vector<double> row(n + 1);
        for (int j = 0; j <= n; ++j) row[j] = v[i].dot(lag[std::abs(j - i)] * v[j]);
        outer[i] = simpson(row, h);
    }
    return 0.5 * simpson(outer, h);
}

// ---- fluctuations ----

OperatorMatrix fluctuation(const FockRep& rep, const Box& box, const LocalTemplate& B, const GibbsState& st) {
    const Eigen::Index dim = rep.dim();
    Mat acc = Mat::Zero(dim, dim);
    int count = 0;
    for (int x = 0; x < box.n_sites(); ++x) {
        std::vector<int> modes;
        bool fits = true;
        for (const Site& off : B.offsets) {
            Site y = box.site(x);
            for (std::size_t i = 0; i < y.size(); ++i) y[i] += off[i];
            int idx = box.index(y);
            if (idx < 0) {
                fits = false;
                break;
            }
            modes.push_back(idx);
        }
        if (!fits) continue;
        OperatorMatrix b = B.build(rep, modes);
        acc += b.m;
        acc -= st.expect(b.m) * Mat::Identity(dim, dim);
        ++count;
    }
    if (count == 0) throw Error(ErrorKind::support_overflow, "fluctuation: no translate of the support fits the box");
    return {acc / std::sqrt(double(box.n_sites())), Parity::even};
}

LocalTemplate current_template(const Box& box, const HoppingMatrix& hop, int k) {
    LocalTemplate t;
    Site e(box.dim(), 0);
    e[k] = 1;
    t.offsets = {e, Site(box.dim(), 0)};
    t.build = [&box, hop](const FockRep& rep, const std::vector<int>& modes) {
        return current_obs(rep, box, hop, {modes[0], modes[1]}).op;
    };
    return t;
}

GreenKuboReport green_kubo_check(const TransportContext& c, const std::vector<double>& times,
                                 const std::function<RMat(double)>& reference) {
    GreenKuboReport r;
    r.times = times;
    const int d = c.box.dim();
    const SpectralData& s = *c.spectral;
    std::vector<Mat> F;
    for (int k = 0; k < d; ++k)
        F.push_back(to_eigenbasis(fluctuation(c.rep, c.box, current_template(c.box, c.hop, k), c.state).m, s));
    RMat K = duhamel_kernel(c.state);
    BohrKernel xi = xi_kernel(c);
    const int n = s.dim();
    RMat base(d, d);
    for (int k = 0; k < d; ++k)
        for (int q = 0; q < d; ++q) base(k, q) = duhamel_eigen(F[k], F[q], K).real();
    for (double t : times) {
        RMat inc(d, d);
        for (int q = 0; q < d; ++q) {
            Mat ft = F[q];
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i)
                    if (ft(i, j) != cplx(0.0, 0.0)) ft(i, j) *= std::polar(1.0, t * (s.E(i) - s.E(j)));
            for (int k = 0; k < d; ++k) inc(k, q) = duhamel_eigen(F[k], ft, K).real() - base(k, q);
        }
        RMat x = t == 0.0 ? RMat::Zero(d, d) : xi.eval(t);
        r.increment.push_back(inc);
        r.xi.push_back(x);
        r.asymmetry.push_back(inc - inc.transpose());
        r.identity_residual = std::max(r.identity_residual, (inc - x).cwiseAbs().maxCoeff());
        if (reference) {
            RMat ref = reference(t);
            r.reference_residual = std::max(r.reference_residual, (inc - ref).cwiseAbs().maxCoeff());
        }
    }
    return r;
}

} // namespace fermicond
