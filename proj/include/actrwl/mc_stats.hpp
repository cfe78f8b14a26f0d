#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "actrwl/special.hpp"

namespace actrwl {

/// Sorted sample with explicit bookkeeping of exact zeros so laws with an
/// atom at the origin can be tested on their continuous part.
class EmpiricalDist {
public:
    EmpiricalDist() = default;

    static EmpiricalDist from_samples(std::vector<double> values) {
        EmpiricalDist e;
        e.n_total_ = values.size();
        e.values_ = std::move(values);
        e.zero_count_ = 0;
        std::sort(e.values_.begin(), e.values_.end());
        for (double v : e.values_)
            if (v == 0.0) ++e.zero_count_;
        return e;
    }

    /// Continuous part only: exact zeros removed, counts remembered.
    EmpiricalDist without_zeros() const {
        EmpiricalDist e;
        e.values_.reserve(values_.size() - zero_count_);
        for (double v : values_)
            if (v != 0.0) e.values_.push_back(v);
        e.n_total_ = e.values_.size();
        e.zero_count_ = 0;
        return e;
    }

    const std::vector<double>& values() const { return values_; }
    std::size_t n() const { return values_.size(); }
    std::size_t n_total() const { return n_total_; }
    std::size_t zero_count() const { return zero_count_; }
    double zero_fraction() const {
        return n_total_ ? static_cast<double>(zero_count_) / n_total_ : 0.0;
    }

    /// Empirical CDF (right-continuous).
    double cdf(double x) const {
        auto it = std::upper_bound(values_.begin(), values_.end(), x);
        return static_cast<double>(it - values_.begin()) / values_.size();
    }

private:
    std::vector<double> values_;
    std::size_t n_total_ = 0;
    std::size_t zero_count_ = 0;
};

struct TestResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// Kolmogorov asymptotic survival Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2).
inline double kolmogorov_q(double lambda) {
    if (lambda <= 0.0) return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k & 1) ? term : -term;
        if (term < 1e-16) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

/// One-sample KS test against a continuous cdf. The p-value uses the
/// asymptotic Kolmogorov law with the Stephens small-sample correction.
/// Exact zeros in the sample are rejected: an atom cannot be tested against
/// a continuous law, callers must strip it first (see without_zeros()).
inline TestResult ks_one_sample(const EmpiricalDist& e,
                                const std::function<double(double)>& cdf) {
    const auto& v = e.values();
    if (v.size() < 20) throw std::invalid_argument("ks_one_sample: need n >= 20");
    if (e.zero_count() > 0)
        throw std::invalid_argument(
            "ks_one_sample: sample carries an atom at 0; strip zeros before testing "
            "against a continuous cdf");
    const double n = static_cast<double>(v.size());
    double d = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double f = cdf(v[i]);
        d = std::max(d, std::max(f - static_cast<double>(i) / n,
                                 static_cast<double>(i + 1) / n - f));
    }
    const double sn = std::sqrt(n);
    return {d, kolmogorov_q((sn + 0.12 + 0.11 / sn) * d)};
}

/// Two-sample KS. Ties across the two samples are handled by comparing the
/// CDFs only after consuming every observation equal to the current value
/// from both samples (midrank-style convention), so lattice data is legal.
inline TestResult ks_two_sample(const EmpiricalDist& a, const EmpiricalDist& b) {
    const auto& x = a.values();
    const auto& y = b.values();
    if (x.empty() || y.empty()) throw std::invalid_argument("ks_two_sample: empty input");
    const double nx = static_cast<double>(x.size()), ny = static_cast<double>(y.size());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < x.size() && j < y.size()) {
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] == v) ++i;
        while (j < y.size() && y[j] == v) ++j;
        d = std::max(d, std::abs(i / nx - j / ny));
    }
    const double ne = std::sqrt(nx * ny / (nx + ny));
    return {d, kolmogorov_q((ne + 0.12 + 0.11 / ne) * d)};
}

/// Normal quantile (Acklam's rational approximation, |rel err| < 1.2e-9).
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("normal_quantile: p in (0,1)");
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
    const double pl = 0.02425;
    double q, r;
    if (p < pl) {
        q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p <= 1.0 - pl) {
        q = p - 0.5;
        r = q * q;
        return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
               (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

/// Wilson score interval with continuity correction for k successes in n trials.
inline std::pair<double, double> binomial_ci(std::uint64_t k, std::uint64_t n, double level) {
    if (n == 0) throw std::invalid_argument("binomial_ci: n > 0 required");
    const double z = normal_quantile(0.5 + 0.5 * level);
    const double z2 = z * z;
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(k) / nn;
    double lo, hi;
    if (k == 0) {
        lo = 0.0;
    } else {
        const double num = 2.0 * nn * p + z2 - 1.0 -
                           z * std::sqrt(z2 - 2.0 - 1.0 / nn + 4.0 * p * (nn * (1.0 - p) + 1.0));
        lo = std::max(0.0, num / (2.0 * (nn + z2)));
    }
    if (k == n) {
        hi = 1.0;
    } else {
        const double num = 2.0 * nn * p + z2 + 1.0 +
                           z * std::sqrt(z2 + 2.0 - 1.0 / nn + 4.0 * p * (nn * (1.0 - p) - 1.0));
        hi = std::min(1.0, num / (2.0 * (nn + z2)));
    }
    return {lo, hi};
}

/// Pearson chi-square on count vectors; dof = cells - 1.
inline TestResult chi_square_counts(const std::vector<double>& obs,
                                    const std::vector<double>& expected) {
    if (obs.empty() || obs.size() != expected.size())
        throw std::invalid_argument("chi_square_counts: size mismatch or empty");
    double stat = 0.0;
    for (std::size_t i = 0; i < obs.size(); ++i) {
        if (!(expected[i] > 0.0))
            throw std::invalid_argument("chi_square_counts: expected counts must be positive");
        const double d = obs[i] - expected[i];
        stat += d * d / expected[i];
    }
    const double dof = static_cast<double>(obs.size() - 1);
    const double p = 1.0 - reg_lower_gamma(0.5 * dof, 0.5 * stat);
    return {stat, p};
}

} // namespace actrwl
