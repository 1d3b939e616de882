#include "fermicond/measure.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

namespace fermicond {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Cluster {
    double nu_sum = 0;
    int count = 0;
    double first = 0;
    RMat mu; // Σ ω² W
    RMat w;  // Σ W
};

double min_eig(const RMat& m) {
    if (m.size() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<RMat> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

// greedy clustering of sorted frequencies; returns representative frequencies
std::vector<double> cluster_frequencies(std::vector<double> nus, double tol) {
    std::sort(nus.begin(), nus.end());
    std::vector<double> reps;
    double first = 0, sum = 0;
    int count = 0;
    for (double v : nus) {
        if (count > 0 && v - first > tol) {
            reps.push_back(sum / count);
            count = 0;
            sum = 0;
        }
        if (count == 0) first = v;
        sum += v;
        ++count;
    }
    if (count > 0) reps.push_back(sum / count);
    return reps;
}

int nearest(const std::vector<double>& reps, double v) {
    auto it = std::lower_bound(reps.begin(), reps.end(), v);
    int i = static_cast<int>(it - reps.begin());
    if (i == static_cast<int>(reps.size())) return i - 1;
    if (i > 0 && std::abs(reps[i - 1] - v) < std::abs(reps[i] - v)) return i - 1;
    return i;
}

} // namespace

RMat MatrixMeasure::total() const {
    RMat s = zero_atom;
    for (const auto& a : atoms) s += a.weight;
    return s;
}

RMat ACMeasure::total() const {
    RMat s = RMat::Zero(d, d);
    for (const auto& a : atoms) s += a.weight;
    return s;
}

MatrixMeasure extract_measure(const BohrKernel& k, double hnorm, double merge_tol) {
    MatrixMeasure mu;
    const int d = k.d();
    mu.d = d;
    mu.zero_atom = RMat::Zero(d, d);
    mu.degenerate_mass = RMat::Zero(d, d);
    const double zero_tol = merge_tol * std::max(1.0, hnorm);

    std::vector<std::pair<double, std::size_t>> pos;
    for (std::size_t i = 0; i < k.size(); ++i) {
        const double w = k.omega(i);
        if (std::abs(w) <= zero_tol) {
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b) mu.degenerate_mass(a, b) += k.weight(i, a, b).real();
        } else if (w > 0) {
            pos.push_back({w, i});
        }
    }
    std::sort(pos.begin(), pos.end());

    // the pair (n, m) carries the conjugate of (m, n), so the real weights
    // at ±ω coincide and the negative side is a mirror
    std::vector<Cluster> clusters;
    for (const auto& [w, i] : pos) {
        if (clusters.empty() || w - clusters.back().first > merge_tol) {
            Cluster c;
            c.first = w;
            c.mu = RMat::Zero(d, d);
            c.w = RMat::Zero(d, d);
            clusters.push_back(c);
        }
        Cluster& c = clusters.back();
        c.nu_sum += w;
        ++c.count;
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) {
                const double g = k.weight(i, a, b).real();
                c.w(a, b) += g;
                c.mu(a, b) += w * w * g;
            }
    }
    for (auto it = clusters.rbegin(); it != clusters.rend(); ++it) {
        RMat m = 0.5 * (it->mu + it->mu.transpose());
        mu.atoms.push_back({-it->nu_sum / it->count, m});
    }
    for (const auto& c : clusters) {
        RMat m = 0.5 * (c.mu + c.mu.transpose());
        mu.atoms.push_back({c.nu_sum / c.count, m});
    }
    check_psd(mu);
    return mu;
}

MatrixMeasure extract_measure(const TransportContext& c) { return extract_measure(xi_kernel(c), c.spectral->hnorm); }

ACMeasure ac_measure(const MatrixMeasure& mu) {
    ACMeasure ac;
    ac.d = mu.d;
    for (const auto& a : mu.atoms) ac.atoms.push_back({a.nu, a.weight / (a.nu * a.nu)});
    return ac;
}

double min_weight_eigenvalue(const MatrixMeasure& mu) {
    double m = min_eig(mu.zero_atom);
    for (const auto& a : mu.atoms) m = std::min(m, min_eig(a.weight));
    return m;
}

void check_psd(const MatrixMeasure& mu, double tol) {
    for (const auto& a : mu.atoms) {
        const double e = min_eig(a.weight);
        if (e < -tol) {
            std::ostringstream os;
            os << "atom at nu = " << a.nu << " has eigenvalue " << e << " (trace " << a.weight.trace() << ")";
            throw Error(ErrorKind::psd_violation, os.str());
        }
    }
    const double e0 = min_eig(mu.zero_atom);
    if (e0 < -tol) throw Error(ErrorKind::psd_violation, "zero atom has eigenvalue " + std::to_string(e0));
}

RMat levy_khintchine(const MatrixMeasure& mu, double t) {
    RMat out = -0.5 * t * t * mu.zero_atom;
    for (const auto& a : mu.atoms) out += (std::cos(t * a.nu) - 1.0) / (a.nu * a.nu) * a.weight;
    return out;
}

std::vector<RMat> levy_khintchine(const MatrixMeasure& mu, const std::vector<double>& times) {
    std::vector<RMat> out;
    out.reserve(times.size());
    for (double t : times) out.push_back(levy_khintchine(mu, t));
    return out;
}

ScalarMeasure project(const MatrixMeasure& mu, const Eigen::VectorXd& w) {
    ScalarMeasure s;
    const double z = w.dot(mu.zero_atom * w);
    if (z != 0.0) {
        s.nu.push_back(0.0);
        s.w.push_back(z);
    }
    for (const auto& a : mu.atoms) {
        s.nu.push_back(a.nu);
        s.w.push_back(w.dot(a.weight * w));
    }
    return s;
}

MatrixMeasure bochner_polarization(int d, const std::function<ScalarMeasure(const Eigen::VectorXd&)>& family,
                                   double merge_tol, double consistency_tol) {
    auto e = [d](int k) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
        v[k] = 1.0;
        return v;
    };
    // μ_{e_k ± e_q} for k ≤ q, μ_{e_k} and μ_0
    std::map<std::pair<int, int>, ScalarMeasure> plus, minus;
    std::vector<ScalarMeasure> single;
    for (int k = 0; k < d; ++k) {
        single.push_back(family(e(k)));
        for (int q = k; q < d; ++q) {
            plus[{k, q}] = family(e(k) + e(q));
            minus[{k, q}] = family(e(k) - e(q));
        }
    }
    std::vector<double> all;
    auto collect = [&](const ScalarMeasure& s) {
        for (double v : s.nu)
            if (std::abs(v) > merge_tol) all.push_back(v);
    };
    for (auto& [key, s] : plus) collect(s);
    for (auto& [key, s] : minus) collect(s);
    for (auto& s : single) collect(s);
    std::vector<double> reps = cluster_frequencies(all, merge_tol);
    const int n = static_cast<int>(reps.size());

    auto bin = [&](const ScalarMeasure& s) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(n + 1); // last slot is ν = 0
        for (std::size_t i = 0; i < s.nu.size(); ++i) {
            if (std::abs(s.nu[i]) <= merge_tol) v[n] += s.w[i];
            else v[nearest(reps, s.nu[i])] += s.w[i];
        }
        return v;
    };

    std::vector<RMat> W(n + 1, RMat::Zero(d, d));
    double scale = 0;
    for (int k = 0; k < d; ++k)
        for (int q = k; q < d; ++q) {
            Eigen::VectorXd v = 0.25 * (bin(plus[{k, q}]) - bin(minus[{k, q}]));
            for (int i = 0; i <= n; ++i) {
                W[i](k, q) = v[i];
                W[i](q, k) = v[i];
            }
            if (k == q) {
                Eigen::VectorXd direct = bin(single[k]);
                scale = std::max(scale, direct.cwiseAbs().maxCoeff());
                const double gap = (v - direct).cwiseAbs().maxCoeff();
                if (gap > consistency_tol * std::max(1.0, scale)) {
                    std::ostringstream os;
                    os << "diagonal " << k << " differs from the direct measure by " << gap;
                    throw Error(ErrorKind::inconsistent_inputs, os.str());
                }
            }
        }
    MatrixMeasure mu;
    mu.d = d;
    mu.zero_atom = W[n];
    mu.degenerate_mass = RMat::Zero(d, d);
    for (int i = 0; i < n; ++i) mu.atoms.push_back({reps[i], W[i]});
    return mu;
}

RMat cesaro_mean(const MatrixMeasure& mu, double T) {
    if (T <= 0) throw Error(ErrorKind::invalid_argument, "cesaro_mean: T > 0");
    if (mu.zero_atom.cwiseAbs().maxCoeff() > 0)
        warn("cesaro_mean: nonzero atom at the origin, the mean grows like T^2");
    RMat out = -(T * T / 6.0) * mu.zero_atom;
    for (const auto& a : mu.atoms) {
        const double x = T * a.nu;
        out += (std::sin(x) / x - 1.0) / (a.nu * a.nu) * a.weight;
    }
    return out;
}

RMat cesaro_mean(const std::function<RMat(double)>& xi_plus, double T, int intervals) {
    if (intervals % 2) ++intervals;
    const double h = T / intervals;
    RMat acc = xi_plus(0.0) + xi_plus(T);
    for (int k = 1; k < intervals; ++k) acc += (k % 2 ? 4.0 : 2.0) * xi_plus(k * h);
    return acc * h / 3.0 / T;
}

double freq_dependent_T(const DrudeSpec& s, double nu) {
    if (!(s.T > 0) || !(s.D > 0)) throw Error(ErrorKind::invalid_argument, "Drude parameters must be positive");
    if (!s.D_prime) return s.T;
    if (!(*s.D_prime > 0)) throw Error(ErrorKind::invalid_argument, "Drude parameters must be positive");
    return s.T / (1.0 + *s.D_prime * s.T * nu * nu);
}

double drude_density(const DrudeSpec& s, double nu) {
    const double T = freq_dependent_T(s, nu);
    return s.D * T / (1.0 + T * T * nu * nu);
}

double drude_tail(const DrudeSpec& s, double nu) {
    if (!(s.T > 0) || !(s.D > 0)) throw Error(ErrorKind::invalid_argument, "Drude parameters must be positive");
    // atan form loses everything for large Tν; use atan(1/x) = π/2 - atan(x)
    const double x = s.T * nu;
    return s.D * (x > 1 ? std::atan(1.0 / x) : kPi / 2 - std::atan(x));
}

DrudeSpec calibrate_drude(double T, double mass) {
    if (!(mass > 0)) throw Error(ErrorKind::invalid_argument, "calibrate_drude: mass must be positive");
    return DrudeSpec{T, mass / kPi, std::nullopt};
}

DrudeTailReport drude_tail_compare(const MatrixMeasure& mu, const Eigen::VectorXd& w, double T,
                                   const std::vector<double>& nu_grid) {
    ACMeasure ac = ac_measure(mu);
    DrudeTailReport r;
    double mass = 0;
    for (const auto& a : ac.atoms) {
        mass += w.dot(a.weight * w);
        r.spectral_diameter = std::max(r.spectral_diameter, std::abs(a.nu));
    }
    r.drude = calibrate_drude(T, mass);
    for (double nu : nu_grid) {
        double tail = 0;
        for (const auto& a : ac.atoms)
            if (a.nu >= nu) tail += w.dot(a.weight * w);
        r.rows.push_back({nu, nu * nu * tail, nu * nu * drude_tail(r.drude, nu)});
    }
    for (int i = static_cast<int>(r.rows.size()) - 1; i >= 0; --i) {
        if (r.rows[i].measure_tail == 0.0 && r.rows[i].drude_tail > 0.0) r.nu_star = r.rows[i].nu;
        else break;
    }
    return r;
}

double smoothed_density(const ACMeasure& mu, const Eigen::VectorXd& w, double nu, double bandwidth) {
    double s = 0;
    for (const auto& a : mu.atoms) {
        const double z = (nu - a.nu) / bandwidth;
        s += w.dot(a.weight * w) * std::exp(-0.5 * z * z);
    }
    return s / (std::sqrt(2 * kPi) * bandwidth);
}

void write_measure_csv(std::ostream& os, const MatrixMeasure& mu, const std::string& provenance) {
    os << "# " << provenance << "\n";
    os << "# convention: nu^2-weighted measure, zero atom on the nu=0 row\n";
    os << "nu";
    for (int k = 0; k < mu.d; ++k)
        for (int q = 0; q < mu.d; ++q) os << ",w" << k + 1 << q + 1;
    os << "\n" << std::setprecision(17);
    auto row = [&](double nu, const RMat& w) {
        os << nu;
        for (int k = 0; k < mu.d; ++k)
            for (int q = 0; q < mu.d; ++q) os << "," << w(k, q);
        os << "\n";
    };
    if (mu.zero_atom.size()) row(0.0, mu.zero_atom);
    for (const auto& a : mu.atoms) row(a.nu, a.weight);
}

} // namespace fermicond
