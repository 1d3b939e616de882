#include "fermicond/levy.hpp"

#include "fermicond/parallel.hpp"
#include "fermicond/rng.hpp"

#include <algorithm>
#include <cmath>

namespace fermicond {

double LevyTriple::mass() const {
    double m = 0;
    for (const auto& a : atoms) m += a.weight;
    return m;
}

double char_exponent(const LevyTriple& l, double alpha) {
    double acc = -0.5 * alpha * alpha * l.D0;
    for (const auto& a : l.atoms) acc += (std::cos(alpha * a.nu) - 1.0) * a.weight;
    return acc;
}

LevyTriple from_conductivity(const MatrixMeasure& mu, const Eigen::VectorXd& w_in, double antisym_sup, double tol) {
    if (w_in.size() != mu.d) throw Error(ErrorKind::shape_mismatch, "direction needs d components");
    if (w_in.norm() == 0.0) throw Error(ErrorKind::invalid_argument, "direction must be nonzero");
    const Eigen::VectorXd w = w_in.normalized();
    if (antisym_sup > tol)
        throw Error(ErrorKind::anisotropy_violation,
                    "antisymmetric part " + std::to_string(antisym_sup) + " in direction w exceeds tolerance");

    double scale = mu.zero_atom.size() ? mu.zero_atom.norm() : 0.0;
    for (const auto& a : mu.atoms) scale = std::max(scale, a.weight.norm());
    auto off_axis = [&](const RMat& W) { return (W * w - w.dot(W * w) * w).norm(); };
    double worst = mu.zero_atom.size() ? off_axis(mu.zero_atom) : 0.0;
    for (const auto& a : mu.atoms) worst = std::max(worst, off_axis(a.weight));
    if (worst > tol * std::max(scale, 1e-300) && worst > 1e-300)
        throw Error(ErrorKind::anisotropy_violation,
                    "direction is not an eigenvector of the measure (residual " + std::to_string(worst) + ")");

    LevyTriple out;
    out.D0 = mu.zero_atom.size() ? std::max(0.0, w.dot(mu.zero_atom * w)) : 0.0;
    for (const auto& a : mu.atoms) {
        const double v = w.dot(a.weight * w) / (a.nu * a.nu);
        if (v != 0.0) out.atoms.push_back({a.nu, v});
    }
    return out;
}

LevyTriple truncate(const LevyTriple& l, double epsilon) {
    LevyTriple out{l.D0, {}};
    for (const auto& a : l.atoms)
        if (std::abs(a.nu) >= epsilon) out.atoms.push_back(a);
    return out;
}

namespace {

struct JumpChannel {
    std::vector<double> nu, cdf; // cumulative weights normalised to 1
    double rate = 0;
    double drift = 0; // -∫ ν m(dν), compensator of the small-jump channel

    double draw(Rng& r) const {
        const double u = r.uniform();
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        return nu[std::min<std::size_t>(it - cdf.begin(), nu.size() - 1)];
    }
};

JumpChannel make_channel(const std::vector<LevyAtom>& atoms, bool small) {
    JumpChannel c;
    double acc = 0;
    for (const auto& a : atoms) {
        if ((std::abs(a.nu) < 1.0) != small) continue;
        acc += a.weight;
        c.nu.push_back(a.nu);
        c.cdf.push_back(acc);
        if (small) c.drift -= a.nu * a.weight;
    }
    c.rate = acc;
    for (double& v : c.cdf) v /= acc;
    return c;
}

} // namespace

PathEnsemble sample_paths(const LevyTriple& l_in, int n_paths, const std::vector<double>& times, std::uint64_t seed,
                          const LevySampleOptions& opt) {
    if (n_paths < 1) throw Error(ErrorKind::invalid_argument, "need at least one path");
    if (times.empty() || times.front() != 0.0 || !std::is_sorted(times.begin(), times.end()))
        throw Error(ErrorKind::invalid_argument, "time grid must be sorted and start at 0");
    if (l_in.D0 < 0) throw Error(ErrorKind::invalid_argument, "negative diffusion coefficient");
    for (const auto& a : l_in.atoms)
        if (a.weight < 0) throw Error(ErrorKind::psd_violation, "negative jump weight");

    const LevyTriple l = truncate(l_in, opt.epsilon);
    const JumpChannel big = make_channel(l.atoms, false), small = make_channel(l.atoms, true);
    const double sd = std::sqrt(l.D0);
    const double t_max = times.back();
    const int nt = static_cast<int>(times.size());

    struct PathOut {
        std::vector<double> F;
        std::vector<double> gaps;
    };
    auto one = [&](int p) {
        PathOut o;
        o.F.assign(nt, 0.0);
        const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(p));
        if (sd > 0) {
            Rng r(s, {stream_tag::brownian});
            double b = 0;
            for (int k = 1; k < nt; ++k) {
                b += std::sqrt(times[k] - times[k - 1]) * r.normal();
                o.F[k] += sd * b;
            }
        }
        auto run = [&](const JumpChannel& c, std::int64_t tag) {
            if (c.rate <= 0) return;
            Rng r(s, {tag});
            double t = 0;
            for (;;) {
                const double gap = r.exponential(c.rate);
                t += gap;
                if (t > t_max) break;
                if (opt.record_jumps) o.gaps.push_back(gap);
                const double j = c.draw(r);
                for (int k = static_cast<int>(std::lower_bound(times.begin(), times.end(), t) - times.begin()); k < nt;
                     ++k)
                    o.F[k] += j;
            }
            for (int k = 0; k < nt; ++k) o.F[k] += c.drift * times[k];
        };
        run(big, stream_tag::big_jumps);
        run(small, stream_tag::small_jumps);
        return o;
    };
    auto paths = parallel_map<PathOut>(n_paths, opt.workers, one);

    PathEnsemble e;
    e.times = times;
    e.seed = seed;
    e.F.resize(n_paths, nt);
    for (int p = 0; p < n_paths; ++p) {
        for (int k = 0; k < nt; ++k) e.F(p, k) = paths[p].F[k];
        e.inter_jump.insert(e.inter_jump.end(), paths[p].gaps.begin(), paths[p].gaps.end());
    }
    return e;
}

PathEnsemble sample_paths(const LevyTriple& l, int n_paths, double t_max, double dt, std::uint64_t seed,
                          const LevySampleOptions& opt) {
    if (!(dt > 0) || !(t_max >= 0)) throw Error(ErrorKind::invalid_argument, "need dt > 0 and t_max >= 0");
    const int n = static_cast<int>(std::llround(t_max / dt));
    std::vector<double> t(n + 1);
    for (int k = 0; k <= n; ++k) t[k] = k * dt;
    t.back() = t_max;
    return sample_paths(l, n_paths, t, seed, opt);
}

CharReport validate_char(const PathEnsemble& e, const LevyTriple& l, const std::vector<double>& alphas, double n_se) {
    CharReport rep;
    const double n = static_cast<double>(e.F.rows());
    int passed = 0, passed_cw = 0;
    for (std::size_t k = 0; k < e.times.size(); ++k) {
        if (e.times[k] == 0.0) continue;
        for (double a : alphas) {
            CharRow row;
            row.alpha = a;
            row.t = e.times[k];
            double sc = 0, ss = 0, sc2 = 0, ss2 = 0;
            for (Eigen::Index p = 0; p < e.F.rows(); ++p) {
                const double c = std::cos(a * e.F(p, k)), s = std::sin(a * e.F(p, k));
                sc += c;
                ss += s;
                sc2 += c * c;
                ss2 += s * s;
            }
            row.mc_re = sc / n;
            row.mc_im = ss / n;
            row.se_re = std::sqrt(std::max(0.0, sc2 / n - row.mc_re * row.mc_re) / (n - 1));
            row.se_im = std::sqrt(std::max(0.0, ss2 / n - row.mc_im * row.mc_im) / (n - 1));
            row.exact = std::exp(row.t * char_exponent(l, a));
            auto ok = [&](double diff, double se) { return std::abs(diff) <= n_se * se || std::abs(diff) <= 1e-12; };
            const double diff = std::hypot(row.mc_re - row.exact, row.mc_im);
            const double se = std::hypot(row.se_re, row.se_im);
            row.z = se > 0 ? diff / se : (diff <= 1e-12 ? 0.0 : INFINITY);
            row.pass = ok(diff, se);
            row.pass_componentwise = ok(row.mc_re - row.exact, row.se_re) && ok(row.mc_im, row.se_im);
            passed += row.pass;
            passed_cw += row.pass_componentwise;
            rep.rows.push_back(row);
        }
    }
    if (!rep.rows.empty()) {
        rep.pass_fraction = static_cast<double>(passed) / rep.rows.size();
        rep.componentwise_fraction = static_cast<double>(passed_cw) / rep.rows.size();
    }
    return rep;
}

LevyTriple drude_triple(const DrudeSpec& s, const DrudeJumpOptions& opt) {
    LevyTriple out;
    const double h = opt.nu_max / opt.cells;
    out.atoms.reserve(2 * opt.cells);
    for (int i = opt.cells - 1; i >= 0; --i) {
        const double nu = (i + 0.5) * h;
        out.atoms.push_back({-nu, drude_density(s, nu) * h});
    }
    for (int i = 0; i < opt.cells; ++i) {
        const double nu = (i + 0.5) * h;
        out.atoms.push_back({nu, drude_density(s, nu) * h});
    }
    return out;
}

std::vector<DrudeJumpRow> drude_jump_stats(double D, const std::vector<double>& T_grid, const DrudeJumpOptions& opt) {
    std::vector<DrudeJumpRow> rows;
    for (double T : T_grid) {
        DrudeSpec s;
        s.T = T;
        s.D = D;
        const LevyTriple l = drude_triple(s, opt);
        DrudeJumpRow r;
        r.T = T;
        double tail = 0, eps = 0;
        for (const auto& a : l.atoms) {
            r.total_rate += a.weight;
            if (std::abs(a.nu) > opt.nu0) tail += a.weight;
            if (std::abs(a.nu) <= opt.eps) eps += a.weight;
        }
        r.tail_prob = tail / r.total_rate;
        r.eps_mass = eps / r.total_rate;
        rows.push_back(r);
    }
    return rows;
}

} // namespace fermicond
