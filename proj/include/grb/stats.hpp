// One-sample test statistics and the critical values used by the check suite.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace grb {

// sup_x |F_n(x) - F(x)| for a continuous reference cdf.
inline double ks_statistic(std::vector<double> samples,
                           const std::function<double(double)>& cdf) {
    if (samples.empty()) throw std::invalid_argument("ks_statistic: no samples");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max(d, std::fabs(f - i / n));
        d = std::max(d, std::fabs((i + 1) / n - f));
    }
    return d;
}

// Asymptotic critical value c(alpha)/sqrt(n) of the one-sample KS test.
inline double ks_critical(int n, double alpha) {
    // c(alpha) = sqrt(-ln(alpha/2)/2)
    return std::sqrt(-0.5 * std::log(alpha / 2.0)) / std::sqrt(double(n));
}

inline double chi2_statistic(const std::vector<double>& counts,
                             const std::vector<double>& expected) {
    if (counts.size() != expected.size())
        throw std::invalid_argument("chi2_statistic: size mismatch");
    double chi2 = 0.0;
    for (size_t i = 0; i < counts.size(); ++i) {
        if (expected[i] <= 0.0)
            throw std::invalid_argument("chi2_statistic: nonpositive expected");
        const double d = counts[i] - expected[i];
        chi2 += d * d / expected[i];
    }
    return chi2;
}

// Acklam's rational approximation, |relative error| < 1.2e-9.
inline double normal_quantile(double p) {
    if (p <= 0.0 || p >= 1.0)
        throw std::invalid_argument("normal_quantile: p outside (0,1)");
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double p_low = 0.02425;
    double q, r;
    if (p < p_low) {
        q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
                c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - p_low) return -normal_quantile(1.0 - p);
    q = p - 0.5;
    r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r +
            a[5]) *
           q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

// Wilson-Hilferty upper quantile of chi-square with df degrees of freedom.
inline double chi2_critical(int df, double alpha) {
    const double z = normal_quantile(1.0 - alpha);
    const double t = 2.0 / (9.0 * df);
    const double u = 1.0 - t + z * std::sqrt(t);
    return df * u * u * u;
}

}  // namespace grb
