#pragma once

#include <functional>
#include <vector>

namespace fermicond {

struct LineFit {
    double slope = 0;
    double intercept = 0;
    double r2 = 0;
};

// least squares y = intercept + slope * x
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);
// slope of log|y| against log x
LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

double mean(const std::vector<double>& v);
double variance(const std::vector<double>& v); // unbiased

// Kolmogorov limiting distribution Q(λ) = 2 Σ (-1)^{k-1} e^{-2 k² λ²}
double kolmogorov_q(double lambda);

struct KSResult {
    double D = 0;
    double p = 0;
};

// one sample against a continuous CDF; p from the asymptotic law with the
// Stephens small-sample correction √n + 0.12 + 0.11/√n
KSResult ks_test(std::vector<double> sample, const std::function<double(double)>& cdf);
// two samples, effective n = n m / (n + m)
KSResult ks_test_2(std::vector<double> a, std::vector<double> b);

} // namespace fermicond
