#include "fermicond/equilibrium.hpp"

#include "fermicond/hash.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/special_functions/legendre.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

namespace fermicond {

namespace {

int find_root(std::vector<int>& parent, int i) {
    while (parent[i] != i) {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    return i;
}

void unite(std::vector<int>& parent, int a, int b) {
    a = find_root(parent, a);
    b = find_root(parent, b);
    if (a == b) return;
    if (a < b) std::swap(a, b);
    parent[a] = b;
}

void merge_nonzero(std::vector<int>& parent, const Mat& m) {
    const Eigen::Index n = m.rows();
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
            if (m(i, j) != cplx(0.0, 0.0)) unite(parent, int(i), int(j));
}

std::vector<std::vector<int>> groups(std::vector<int>& parent) {
    const int n = static_cast<int>(parent.size());
    std::vector<int> slot(n, -1);
    std::vector<std::vector<int>> out;
    for (int i = 0; i < n; ++i) {
        int r = find_root(parent, i);
        if (slot[r] < 0) {
            slot[r] = static_cast<int>(out.size());
            out.emplace_back();
        }
        out[slot[r]].push_back(i);
    }
    return out;
}

bool all_zero(const Mat& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            if (m(i, j) != cplx(0.0, 0.0)) return false;
    return true;
}

Mat hermitian_exp(const Mat& M, double h) {
    Eigen::SelfAdjointEigenSolver<Mat> es(M);
    if (es.info() != Eigen::Success) throw Error(ErrorKind::diagonalization_failure, "block exponential");
    CVec ph(M.rows());
    for (Eigen::Index k = 0; k < M.rows(); ++k) ph(k) = std::polar(1.0, -h * es.eigenvalues()(k));
    return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

const double cf4_a1 = 0.25 - std::sqrt(3.0) / 6.0;
const double cf4_a2 = 0.25 + std::sqrt(3.0) / 6.0;
const double cf4_c1 = 0.5 - std::sqrt(3.0) / 6.0;
const double cf4_c2 = 0.5 + std::sqrt(3.0) / 6.0;

} // namespace

std::uint64_t matrix_fingerprint(const Mat& m) {
    std::uint64_t dims[2] = {std::uint64_t(m.rows()), std::uint64_t(m.cols())};
    std::uint64_t h = fnv1a(dims, sizeof(dims));
    return fnv1a(m.data(), sizeof(cplx) * std::size_t(m.size()), h);
}

std::vector<std::vector<int>> connected_blocks(const std::vector<const Mat*>& mats) {
    if (mats.empty()) return {};
    const int n = static_cast<int>(mats.front()->rows());
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    for (const Mat* m : mats) {
        if (m->rows() != n || m->cols() != n) throw Error(ErrorKind::shape_mismatch, "connected_blocks");
        merge_nonzero(parent, *m);
    }
    return groups(parent);
}

SpectralData diagonalize(const OperatorMatrix& H) {
    const Mat& h = H.m;
    const int n = static_cast<int>(h.rows());
    if (h.cols() != n) throw Error(ErrorKind::shape_mismatch, "diagonalize: matrix not square");
    if (!h.allFinite()) throw Error(ErrorKind::diagonalization_failure, "diagonalize: non-finite entries");

    auto blocks = connected_blocks({&h});
    std::vector<double> evals;
    std::vector<std::pair<int, int>> origin; // (block, local column)
    std::vector<Mat> vecs;
    evals.reserve(n);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const auto& idx = blocks[b];
        Mat sub = h(idx, idx);
        Eigen::SelfAdjointEigenSolver<Mat> es(sub);
        if (es.info() != Eigen::Success)
            throw Error(ErrorKind::diagonalization_failure, "eigensolver did not converge");
        for (Eigen::Index k = 0; k < sub.rows(); ++k) {
            evals.push_back(es.eigenvalues()(k));
            origin.emplace_back(int(b), int(k));
        }
        vecs.push_back(es.eigenvectors());
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return evals[a] < evals[b]; });

    SpectralData s;
    s.E.resize(n);
    s.U = Mat::Zero(n, n);
    s.block_rows = blocks;
    s.block_cols.assign(blocks.size(), {});
    for (int c = 0; c < n; ++c) {
        int k = order[c];
        s.E(c) = evals[k];
        auto [b, local] = origin[k];
        const auto& idx = blocks[b];
        for (std::size_t r = 0; r < idx.size(); ++r) s.U(idx[r], c) = vecs[b](Eigen::Index(r), local);
        s.block_cols[b].push_back(c);
    }
    for (std::size_t b = 0; b < blocks.size(); ++b) s.block_U.push_back(s.U(s.block_rows[b], s.block_cols[b]));
    s.hnorm = n ? std::max(std::abs(s.E(0)), std::abs(s.E(n - 1))) : 0.0;
    s.source_hash = matrix_fingerprint(h);
    return s;
}

Mat to_eigenbasis(const Mat& B, const SpectralData& s) {
    const int n = s.dim();
    if (B.rows() != n || B.cols() != n) throw Error(ErrorKind::shape_mismatch, "to_eigenbasis");
    if (s.block_rows.size() <= 1) return s.U.adjoint() * B * s.U;
    Mat out = Mat::Zero(n, n);
    const std::size_t nb = s.block_rows.size();
    for (std::size_t a = 0; a < nb; ++a)
        for (std::size_t b = 0; b < nb; ++b) {
            Mat sub = B(s.block_rows[a], s.block_rows[b]);
            if (all_zero(sub)) continue;
            out(s.block_cols[a], s.block_cols[b]) = s.block_U[a].adjoint() * sub * s.block_U[b];
        }
    return out;
}

Mat from_eigenbasis(const Mat& B, const SpectralData& s) {
    const int n = s.dim();
    if (B.rows() != n || B.cols() != n) throw Error(ErrorKind::shape_mismatch, "from_eigenbasis");
    if (s.block_rows.size() <= 1) return s.U * B * s.U.adjoint();
    Mat out = Mat::Zero(n, n);
    const std::size_t nb = s.block_rows.size();
    for (std::size_t a = 0; a < nb; ++a)
        for (std::size_t b = 0; b < nb; ++b) {
            Mat sub = B(s.block_cols[a], s.block_cols[b]);
            if (all_zero(sub)) continue;
            out(s.block_rows[a], s.block_rows[b]) = s.block_U[a] * sub * s.block_U[b].adjoint();
        }
    return out;
}

cplx GibbsState::expect(const Mat& B) const {
    if (B.rows() != rho.rows() || B.cols() != rho.cols()) throw Error(ErrorKind::shape_mismatch, "expect");
    // Tr(ρB) = Σ_ij ρ_ij B_ji
    return (rho.transpose().cwiseProduct(B)).sum();
}

GibbsState gibbs(std::shared_ptr<const SpectralData> s, double beta) {
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw Error(ErrorKind::invalid_argument, "gibbs: beta must be >= 0");
    GibbsState st;
    st.beta = beta;
    st.spectral = s;
    const int n = s->dim();
    st.p.resize(n);
    const double e0 = n ? s->E(0) : 0.0;
    for (int k = 0; k < n; ++k) st.p(k) = std::exp(-beta * (s->E(k) - e0));
    st.p /= st.p.sum();
    Mat diag = Mat::Zero(n, n);
    for (int k = 0; k < n; ++k) diag(k, k) = st.p(k);
    st.rho = from_eigenbasis(diag, *s);
    return st;
}

GibbsState gibbs(const OperatorMatrix& H, double beta) {
    return gibbs(std::make_shared<const SpectralData>(diagonalize(H)), beta);
}

OperatorMatrix heisenberg(const OperatorMatrix& B, double t, const SpectralData& s) {
    Mat be = to_eigenbasis(B.m, s);
    const int n = s.dim();
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            if (be(i, j) != cplx(0.0, 0.0)) be(i, j) *= std::polar(1.0, t * (s.E(i) - s.E(j)));
    return {from_eigenbasis(be, s), B.parity};
}

OperatorMatrix imaginary_time(const OperatorMatrix& B, double alpha, const SpectralData& s) {
    const int n = s.dim();
    if (n && std::exp(std::abs(alpha) * (s.E(n - 1) - s.E(0))) > 1e12)
        warn("imaginary_time: e^{|alpha| dE} exceeds 1e12, result is ill-conditioned");
    Mat be = to_eigenbasis(B.m, s);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            if (be(i, j) != cplx(0.0, 0.0)) be(i, j) *= std::exp(-alpha * (s.E(i) - s.E(j)));
    return {from_eigenbasis(be, s), B.parity};
}

cplx kms_lhs(const OperatorMatrix& B1, const OperatorMatrix& B2, const GibbsState& st) {
    const SpectralData& s = st.spec();
    Mat b1 = to_eigenbasis(B1.m, s);
    Mat b2 = to_eigenbasis(B2.m, s);
    const int n = s.dim();
    const double beta = st.beta;
    const double e0 = s.E(0);
    double logz = std::log((-beta * (s.E.array() - e0)).exp().sum());
    cplx acc = 0.0;
    // Σ_mn p_m (B1)_mn e^{-β(E_n - E_m)} (B2)_nm
    for (int m = 0; m < n; ++m)
        for (int k = 0; k < n; ++k) {
            cplx term = b1(m, k) * b2(k, m);
            if (term == cplx(0.0, 0.0)) continue;
            double logw = -beta * (s.E(m) - e0) - logz - beta * (s.E(k) - s.E(m));
            acc += std::exp(logw) * term;
        }
    return acc;
}

RMat duhamel_kernel(const GibbsState& st) {
    const SpectralData& s = st.spec();
    const int n = s.dim();
    const double tol = 1e-10 * std::max(s.hnorm, 1e-300);
    RMat K(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            double w = s.E(j) - s.E(i);
            if (std::abs(w) < tol) {
                K(i, j) = st.beta * 0.5 * (st.p(i) + st.p(j));
            } else {
                double plow = w > 0 ? st.p(i) : st.p(j);
                K(i, j) = plow * (-std::expm1(-st.beta * std::abs(w))) / std::abs(w);
            }
        }
    return K;
}

cplx duhamel_eigen(const Mat& B1e, const Mat& B2e, const RMat& K) {
    return (B1e.conjugate().cwiseProduct(B2e).cwiseProduct(K.cast<cplx>())).sum();
}

cplx duhamel(const OperatorMatrix& B1, const OperatorMatrix& B2, const GibbsState& st) {
    const SpectralData& s = st.spec();
    return duhamel_eigen(to_eigenbasis(B1.m, s), to_eigenbasis(B2.m, s), duhamel_kernel(st));
}

cplx duhamel_quadrature(const OperatorMatrix& B1, const OperatorMatrix& B2, const GibbsState& st, int n) {
    if (n < 1) throw Error(ErrorKind::invalid_argument, "duhamel_quadrature: n >= 1");
    std::vector<double> pos = boost::math::legendre_p_zeros<double>(n);
    std::vector<std::pair<double, double>> nodes;
    for (double x : pos) {
        double dp = boost::math::legendre_p_prime<double>(n, x);
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes.emplace_back(x, w);
        if (x != 0.0) nodes.emplace_back(-x, w);
    }
    const double half = 0.5 * st.beta;
    OperatorMatrix b1a = adjoint(B1);
    cplx acc = 0.0;
    for (auto [x, w] : nodes) {
        double alpha = half * (x + 1.0);
        OperatorMatrix ta = imaginary_time(B2, alpha, st.spec());
        acc += w * half * st.expect(b1a.m * ta.m);
    }
    return acc;
}

// ---- DrivenPropagator ----

DrivenPropagator::DrivenPropagator(HamiltonianFn H, DriveOptions opt) : H_(std::move(H)), opt_(opt) {
    if (!(opt_.dt > 0.0)) throw Error(ErrorKind::invalid_argument, "drive: dt must be positive");
}

void DrivenPropagator::merge_pattern(const Mat& m) {
    if (parent_.empty()) {
        parent_.resize(m.rows());
        std::iota(parent_.begin(), parent_.end(), 0);
    }
    if (Eigen::Index(parent_.size()) != m.rows()) throw Error(ErrorKind::shape_mismatch, "drive: dimension changed");
    merge_nonzero(parent_, m);
}

std::vector<std::vector<int>> DrivenPropagator::blocks() const {
    auto p = parent_;
    return groups(p);
}

std::vector<Mat> DrivenPropagator::block_step(double t, double h, const std::vector<std::vector<int>>& bl) {
    std::vector<Mat> out;
    out.reserve(bl.size());
    if (opt_.method == Integrator::midpoint) {
        Mat Hm = H_(t + 0.5 * h);
        for (const auto& idx : bl) out.push_back(hermitian_exp(Hm(idx, idx), h));
    } else {
        Mat H1 = H_(t + cf4_c1 * h);
        Mat H2 = H_(t + cf4_c2 * h);
        for (const auto& idx : bl) {
            Mat h1 = H1(idx, idx);
            Mat h2 = H2(idx, idx);
            Mat first = hermitian_exp(cf4_a2 * h1 + cf4_a1 * h2, h);
            Mat second = hermitian_exp(cf4_a1 * h1 + cf4_a2 * h2, h);
            out.push_back(second * first);
        }
    }
    ++steps_;
    return out;
}

void DrivenPropagator::evolve(Mat& rho, double t_from, double t_to) {
    const double span = t_to - t_from;
    if (span == 0.0) return;
    const int n = std::max(1, int(std::ceil(std::abs(span) / opt_.dt - 1e-9)));
    const double h = span / n;
    merge_pattern(rho);
    for (int k = 0; k < n; ++k) {
        double t = t_from + k * h;
        // merge the sparsity of the sampled Hamiltonians before forming blocks
        if (opt_.method == Integrator::midpoint) {
            merge_pattern(H_(t + 0.5 * h));
        } else {
            merge_pattern(H_(t + cf4_c1 * h));
            merge_pattern(H_(t + cf4_c2 * h));
        }
        auto bl = blocks();
        auto Us = block_step(t, h, bl);
        for (std::size_t b = 0; b < bl.size(); ++b) {
            const auto& idx = bl[b];
            Mat sub = rho(idx, idx);
            rho(idx, idx) = Us[b] * sub * Us[b].adjoint();
        }
    }
}

Mat DrivenPropagator::step_unitary(double t, double h) {
    Mat Ha = H_(t + 0.5 * h);
    const int n = int(Ha.rows());
    std::vector<int> all(n);
    std::iota(all.begin(), all.end(), 0);
    return block_step(t, h, {all}).front();
}

Mat DrivenPropagator::propagator(double s, double t) {
    Mat probe = H_(s);
    const int n = int(probe.rows());
    Mat P = Mat::Identity(n, n);
    const double span = t - s;
    if (span == 0.0) return P;
    const int steps = std::max(1, int(std::ceil(std::abs(span) / opt_.dt - 1e-9)));
    const double h = span / steps;
    std::vector<int> all(n);
    std::iota(all.begin(), all.end(), 0);
    for (int k = 0; k < steps; ++k) P = block_step(s + k * h, h, {all}).front() * P;
    return P;
}

void drive_observe(const Mat& rho0, const HamiltonianFn& H, const std::vector<double>& grid,
                   const DriveOptions& opt, const Observer& obs) {
    if (grid.empty()) return;
    DrivenPropagator prop(H, opt);
    Mat rho = rho0;
    obs(grid[0], rho);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        prop.evolve(rho, grid[i - 1], grid[i]);
        obs(grid[i], rho);
    }
}

Mat drive(const GibbsState& st, const HamiltonianFn& H, double t0, double t, const DriveOptions& opt) {
    DrivenPropagator prop(H, opt);
    Mat rho = st.rho;
    prop.evolve(rho, t0, t);
    return rho;
}

Mat drive_checked(const GibbsState& st, const HamiltonianFn& H, double t0, double t, DriveOptions opt,
                  double tol, int max_halvings) {
    Mat prev = drive(st, H, t0, t, opt);
    for (int k = 0; k < max_halvings; ++k) {
        opt.dt *= 0.5;
        Mat next = drive(st, H, t0, t, opt);
        double diff = (next - prev).norm();
        if (diff < tol) return next;
        prev = std::move(next);
    }
    throw Error(ErrorKind::step_size_nonconvergence,
                "drive: no convergence after " + std::to_string(max_halvings) + " halvings (dt=" +
                    std::to_string(opt.dt) + ")");
}

WorkResult work_functional(const GibbsState& st, const OperatorMatrix& H, const HamiltonianFn& A,
                           const HamiltonianFn& dA, double t0, double t, const DriveOptions& opt) {
    WorkResult r;
    if (t == t0) return r;
    int M = std::max(2, 2 * int(std::ceil(std::abs(t - t0) / (2.0 * opt.dt) - 1e-9)));
    const double h = (t - t0) / M;
    for (int k = 0; k <= M; ++k) r.times.push_back(t0 + k * h);

    auto derivative = [&](double s) -> Mat {
        if (dA) return dA(s);
        const double e = 1e-5;
        return (A(s + e) - A(s - e)) / (2.0 * e);
    };
    HamiltonianFn Ht = [&](double s) -> Mat { return H.m + A(s); };
    Mat last;
    drive_observe(st.rho, Ht, r.times, opt, [&](double s, const Mat& rho) {
        r.integrand.push_back((rho.transpose().cwiseProduct(derivative(s))).sum().real());
        last = rho;
    });
    double acc = r.integrand.front() + r.integrand.back();
    for (int k = 1; k < M; ++k) acc += (k % 2 ? 4.0 : 2.0) * r.integrand[k];
    r.L = acc * h / 3.0;
    Mat Hend = H.m + A(t);
    Mat Hstart = H.m + A(t0);
    r.energy_increment = (last.transpose().cwiseProduct(Hend)).sum().real() -
                         (st.rho.transpose().cwiseProduct(Hstart)).sum().real();
    return r;
}

// ---- Lieb–Robinson ----

LRParams lieb_robinson_params(const Box& box, double theta0, const InterparticleInteraction& ip,
                              const DecayFunction& F) {
    LRParams p;
    p.F = F;
    p.D_theta0 = dynamics_norm(theta0, ip, F, box);
    p.conv_D = decay_conv_D(F, box);
    return p;
}

LRResult lieb_robinson_check(const LocalObservable& B1, const LocalObservable& B2, double t,
                             const SpectralData& s, const Box& box, const LRParams& p) {
    for (int x : B1.support)
        if (std::find(B2.support.begin(), B2.support.end(), x) != B2.support.end())
            throw Error(ErrorKind::overlapping_supports, "lieb_robinson_check: supports intersect");
    if (classify_parity(B1.op.m) != Parity::even)
        throw Error(ErrorKind::odd_observable, "lieb_robinson_check: B1 must be even");
    LRResult r;
    r.lhs = opnorm(commutator(heisenberg(B1.op, t, s), B2.op));
    double fsum = 0.0;
    for (int x : B1.support)
        for (int y : B2.support) fsum += p.F(box.distance(x, y));
    const double growth = std::expm1(2.0 * p.conv_D * std::abs(t) * p.D_theta0);
    r.rhs = 2.0 / p.conv_D * opnorm(B1.op) * opnorm(B2.op) * growth * fsum;
    r.satisfied = r.lhs <= r.rhs + 1e-10;
    return r;
}

// ---- cache ----

namespace {

constexpr char cache_magic[8] = {'F', 'C', 'E', 'I', 'G', 0, 0, 0};

template <class T>
void put(std::string& buf, const T& v) {
    buf.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T take(const std::string& buf, std::size_t& pos) {
    if (pos + sizeof(T) > buf.size()) throw Error(ErrorKind::cache_corruption, "cache entry truncated");
    T v;
    std::memcpy(&v, buf.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
}

std::string serialize(const SpectralData& s) {
    std::string buf(cache_magic, 8);
    put(buf, EigenCache::format_version);
    put(buf, std::uint64_t(s.dim()));
    put(buf, s.source_hash);
    put(buf, s.hnorm);
    for (int k = 0; k < s.dim(); ++k) put(buf, s.E(k));
    for (Eigen::Index j = 0; j < s.U.cols(); ++j)
        for (Eigen::Index i = 0; i < s.U.rows(); ++i) {
            put(buf, s.U(i, j).real());
            put(buf, s.U(i, j).imag());
        }
    put(buf, std::uint64_t(s.block_rows.size()));
    for (std::size_t b = 0; b < s.block_rows.size(); ++b) {
        put(buf, std::uint64_t(s.block_rows[b].size()));
        for (int v : s.block_rows[b]) put(buf, std::int32_t(v));
        for (int v : s.block_cols[b]) put(buf, std::int32_t(v));
    }
    auto digest = sha256(buf);
    buf.append(reinterpret_cast<const char*>(digest.data()), digest.size());
    return buf;
}

SpectralData deserialize(const std::string& buf) {
    if (buf.size() < 8 + 32 || std::memcmp(buf.data(), cache_magic, 8) != 0)
        throw Error(ErrorKind::cache_corruption, "cache entry has bad header");
    std::string body = buf.substr(0, buf.size() - 32);
    auto digest = sha256(body);
    if (std::memcmp(digest.data(), buf.data() + body.size(), 32) != 0)
        throw Error(ErrorKind::cache_corruption, "cache entry checksum mismatch");
    std::size_t pos = 8;
    auto version = take<std::uint32_t>(body, pos);
    if (version != EigenCache::format_version)
        throw Error(ErrorKind::cache_corruption, "cache entry has format version " + std::to_string(version));
    auto n = take<std::uint64_t>(body, pos);
    SpectralData s;
    s.source_hash = take<std::uint64_t>(body, pos);
    s.hnorm = take<double>(body, pos);
    s.E.resize(Eigen::Index(n));
    for (std::uint64_t k = 0; k < n; ++k) s.E(Eigen::Index(k)) = take<double>(body, pos);
    s.U.resize(Eigen::Index(n), Eigen::Index(n));
    for (std::uint64_t j = 0; j < n; ++j)
        for (std::uint64_t i = 0; i < n; ++i) {
            double re = take<double>(body, pos);
            double im = take<double>(body, pos);
            s.U(Eigen::Index(i), Eigen::Index(j)) = cplx(re, im);
        }
    auto nb = take<std::uint64_t>(body, pos);
    for (std::uint64_t b = 0; b < nb; ++b) {
        auto len = take<std::uint64_t>(body, pos);
        std::vector<int> rows(len), cols(len);
        for (auto& v : rows) v = take<std::int32_t>(body, pos);
        for (auto& v : cols) v = take<std::int32_t>(body, pos);
        s.block_rows.push_back(rows);
        s.block_cols.push_back(cols);
        s.block_U.push_back(s.U(rows, cols));
    }
    if (pos != body.size()) throw Error(ErrorKind::cache_corruption, "cache entry has trailing bytes");
    return s;
}

} // namespace

EigenCache::EigenCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::filesystem::path EigenCache::default_dir() {
    if (const char* env = std::getenv("FERMICOND_CACHE_DIR"); env && *env) return env;
    if (const char* home = std::getenv("HOME"); home && *home)
        return std::filesystem::path(home) / ".cache" / "fermicond";
    return std::filesystem::temp_directory_path() / "fermicond-cache";
}

std::filesystem::path EigenCache::file_for(const std::string& key) const {
    return dir_ / (sha256_hex(key).substr(0, 32) + ".eig");
}

std::optional<SpectralData> EigenCache::load(const std::string& key) const {
    auto f = file_for(key);
    std::ifstream in(f, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return deserialize(ss.str());
}

void EigenCache::store(const std::string& key, const SpectralData& s) const {
    std::filesystem::create_directories(dir_);
    auto f = file_for(key);
    auto tmp = f;
    tmp += ".tmp" + std::to_string(std::hash<std::string>{}(key) ^ std::uint64_t(reinterpret_cast<std::uintptr_t>(&s)));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        std::string buf = serialize(s);
        out.write(buf.data(), std::streamsize(buf.size()));
        if (!out) throw Error(ErrorKind::cache_corruption, "cannot write cache entry " + tmp.string());
    }
    std::filesystem::rename(tmp, f);
}

std::size_t EigenCache::entries() const {
    if (!std::filesystem::exists(dir_)) return 0;
    std::size_t n = 0;
    for (const auto& e : std::filesystem::directory_iterator(dir_))
        if (e.path().extension() == ".eig") ++n;
    return n;
}

std::uintmax_t EigenCache::bytes() const {
    if (!std::filesystem::exists(dir_)) return 0;
    std::uintmax_t n = 0;
    for (const auto& e : std::filesystem::directory_iterator(dir_))
        if (e.path().extension() == ".eig") n += e.file_size();
    return n;
}

std::size_t EigenCache::clear() const {
    if (!std::filesystem::exists(dir_)) return 0;
    std::size_t n = 0;
    for (const auto& e : std::filesystem::directory_iterator(dir_))
        if (e.path().extension() == ".eig" || e.path().string().find(".eig.tmp") != std::string::npos) {
            std::filesystem::remove(e.path());
            ++n;
        }
    return n;
}

SpectralData diagonalize_cached(const OperatorMatrix& H, const EigenCache* cache, const std::string& key) {
    if (!cache) return diagonalize(H);
    const std::uint64_t fp = matrix_fingerprint(H.m);
    if (auto hit = cache->load(key)) {
        if (hit->source_hash == fp) return *hit;
        warn("eigen cache: fingerprint mismatch for key " + key + ", recomputing");
    }
    SpectralData s = diagonalize(H);
    cache->store(key, s);
    return s;
}

} // namespace fermicond
