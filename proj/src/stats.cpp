#include "fermicond/stats.hpp"

#include "fermicond/common.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fermicond {

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw Error(ErrorKind::invalid_argument, "fit_line: need >= 2 points");
    const double n = double(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0) throw Error(ErrorKind::invalid_argument, "fit_line: degenerate abscissae");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = syy > 0 ? sxy * sxy / (sxx * syy) : 1.0;
    return f;
}

LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(std::abs(y[i])));
    }
    return fit_line(lx, ly);
}

double mean(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
}

double variance(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return s / double(v.size() - 1);
}

double kolmogorov_q(double lambda) {
    if (lambda < 1e-3) return 1.0;
    if (lambda < 1.18) {
        // small-λ form via the Jacobi theta transformation
        const double c = std::sqrt(2.0 * M_PI) / lambda;
        const double e = -M_PI * M_PI / (8.0 * lambda * lambda);
        double s = 0;
        for (int k = 1; k <= 25; k += 2) s += std::exp(e * k * k);
        return std::clamp(1.0 - c * s, 0.0, 1.0);
    }
    double s = 0, sign = 1;
    for (int k = 1; k <= 100; ++k) {
        double term = std::exp(-2.0 * k * k * lambda * lambda);
        s += sign * term;
        if (term < 1e-18) break;
        sign = -sign;
    }
    return std::clamp(2.0 * s, 0.0, 1.0);
}

KSResult ks_test(std::vector<double> sample, const std::function<double(double)>& cdf) {
    if (sample.empty()) throw Error(ErrorKind::invalid_argument, "ks_test: empty sample");
    std::sort(sample.begin(), sample.end());
    const double n = double(sample.size());
    double D = 0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        double F = cdf(sample[i]);
        D = std::max({D, (i + 1) / n - F, F - i / n});
    }
    const double sn = std::sqrt(n);
    return {D, kolmogorov_q((sn + 0.12 + 0.11 / sn) * D)};
}

KSResult ks_test_2(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw Error(ErrorKind::invalid_argument, "ks_test_2: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = double(a.size()), nb = double(b.size());
    std::size_t i = 0, j = 0;
    double D = 0;
    while (i < a.size() && j < b.size()) {
        double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        D = std::max(D, std::abs(i / na - j / nb));
    }
    const double ne = std::sqrt(na * nb / (na + nb));
    return {D, kolmogorov_q((ne + 0.12 + 0.11 / ne) * D)};
}

} // namespace fermicond
