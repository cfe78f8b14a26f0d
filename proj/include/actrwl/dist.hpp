#pragma once

#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include "actrwl/rng.hpp"
#include "actrwl/special.hpp"

namespace actrwl {

/// Generalized beta prime (GB2) parameters: shape mu, shape nu, scale h.
struct GB2Params {
    double mu;
    double nu;
    double h;

    GB2Params(double mu_, double nu_, double h_) : mu(mu_), nu(nu_), h(h_) {
        if (!(mu > 0.0 && nu > 0.0 && h > 0.0))
            throw std::invalid_argument("GB2Params: mu, nu, h must all be positive");
    }
};

/// GB2 density f(x; mu, nu, h) = (x/h)^{mu-1} (1+x/h)^{-mu-nu} / (h B[mu,nu]).
inline double gb2_pdf(const GB2Params& p, double x) {
    if (!(x > 0.0)) throw std::invalid_argument("gb2_pdf: x must be positive");
    const double y = x / p.h;
    const double lf = (p.mu - 1.0) * std::log(y) - (p.mu + p.nu) * std::log1p(y) -
                      std::log(p.h) - log_beta(p.mu, p.nu);
    return std::exp(lf);
}

/// GB2 cdf: X/(h+X) ~ Beta(mu,nu), so F(x) = I_{x/(h+x)}[mu, nu].
inline double gb2_cdf(const GB2Params& p, double x) {
    if (x <= 0.0) return 0.0;
    return reg_incomplete_beta(x / (p.h + x), p.mu, p.nu);
}

/// The aging kernel p_{t0}: GB2 with shapes pinned to (1-alpha, alpha)
/// and scale t0. This is also the law of the remaining lifetime at t0.
class AgingKernel {
public:
    AgingKernel(double alpha, double t0)
        : params_(1.0 - alpha, alpha, t0), alpha_(alpha), t0_(t0) {
        if (!(alpha > 0.0 && alpha < 1.0))
            throw std::invalid_argument("AgingKernel: alpha must lie strictly in (0,1)");
        if (!(t0 > 0.0)) throw std::invalid_argument("AgingKernel: t0 must be positive");
    }

    double alpha() const { return alpha_; }
    double t0() const { return t0_; }
    const GB2Params& params() const { return params_; }

    double pdf(double r) const { return gb2_pdf(params_, r); }

    double cdf(double x) const {
        if (x <= 0.0) return 0.0;
        return reg_incomplete_beta(x / (t0_ + x), 1.0 - alpha_, alpha_);
    }

    /// Mass beyond x: the probability that nothing has regenerated by x.
    double tail(double x) const {
        if (x <= 0.0) return 1.0;
        // I_x[a,b] = 1 - I_{1-x}[b,a] keeps the tail accurate where cdf -> 1.
        return reg_incomplete_beta(t0_ / (t0_ + x), alpha_, 1.0 - alpha_);
    }

    /// Draw via B ~ Beta(1-alpha, alpha), return t0 * B/(1-B).
    double sample(Stream& rng) const {
        const double x = rng.gamma(1.0 - alpha_);
        const double y = rng.gamma(alpha_);
        return t0_ * x / y;
    }

    /// Laplace transform exp(s t0) Gamma(alpha, s t0) / Gamma(alpha);
    /// evaluated through the scaled incomplete gamma so large s t0 is safe.
    double laplace(double s) const {
        if (!(s > 0.0)) throw std::invalid_argument("AgingKernel::laplace: s must be positive");
        return upper_incomplete_gamma_scaled(alpha_, s * t0_) / std::tgamma(alpha_);
    }

private:
    GB2Params params_;
    double alpha_;
    double t0_;
};

inline double aging_kernel_cdf(const AgingKernel& k, double x) { return k.cdf(x); }
inline double aging_kernel_sample(const AgingKernel& k, Stream& rng) { return k.sample(rng); }
inline double aging_kernel_laplace(const AgingKernel& k, double s) { return k.laplace(s); }

/// Density of the remaining lifetime R_t = D_{E_t} - t:
///   f_{R_t}(r) = (r/t)^{-alpha} (1+r/t)^{-1} / (t B[alpha, 1-alpha]),  r > 0.
inline double remaining_life_pdf(double alpha, double t, double r) {
    if (!(t > 0.0) || !(r > 0.0))
        throw std::invalid_argument("remaining_life_pdf: t, r must be positive");
    const double y = r / t;
    return std::pow(y, -alpha) / (1.0 + y) / (t * beta_fn(alpha, 1.0 - alpha));
}

/// Density of the age V_t = t - D_{E_t-} (GB1 form):
///   f_{V_t}(v) = (v/t)^{-alpha} (1-v/t)^{alpha-1} / (t B[alpha, 1-alpha]),  0 < v < t.
inline double age_pdf_gb1(double alpha, double t, double v) {
    if (!(t > 0.0) || !(v > 0.0 && v < t))
        throw std::invalid_argument("age_pdf_gb1: need 0 < v < t");
    const double y = v / t;
    return std::pow(y, -alpha) * std::pow(1.0 - y, alpha - 1.0) /
           (t * beta_fn(alpha, 1.0 - alpha));
}

inline double age_cdf_gb1(double alpha, double t, double v) {
    if (v <= 0.0) return 0.0;
    if (v >= t) return 1.0;
    return reg_incomplete_beta(v / t, 1.0 - alpha, alpha);
}

/// Density of the overshoot D_{E_t}: g(r) = r^{-1} (t/(r-t))^alpha / B[alpha,1-alpha], r > t.
inline double overshoot_pdf(double alpha, double t, double r) {
    if (!(t > 0.0) || !(r > t))
        throw std::invalid_argument("overshoot_pdf: need r > t > 0");
    return std::pow(t / (r - t), alpha) / (r * beta_fn(alpha, 1.0 - alpha));
}

/// Density of the undershoot D_{E_t-}: h(v) = v^{alpha-1} (t-v)^{-alpha} / B[alpha,1-alpha],
/// 0 < v < t.
inline double undershoot_pdf(double alpha, double t, double v) {
    if (!(t > 0.0) || !(v > 0.0 && v < t))
        throw std::invalid_argument("undershoot_pdf: need 0 < v < t");
    return std::pow(v, alpha - 1.0) * std::pow(t - v, -alpha) / beta_fn(alpha, 1.0 - alpha);
}

/// Mittag-Leffler waiting time with P(W > t) = E_alpha(-lambda t^alpha):
/// product form W = lambda^{-1/alpha} X^{1/alpha} S with X ~ Exp(1) and S
/// standard one-sided alpha-stable. alpha = 1 degenerates to Exp(lambda).
inline double ml_waiting_sample(double alpha, double lambda, Stream& rng) {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw std::invalid_argument("ml_waiting_sample: alpha in (0,1] required");
    if (!(lambda > 0.0)) throw std::invalid_argument("ml_waiting_sample: lambda > 0 required");
    if (alpha == 1.0) return rng.exponential() / lambda;
    const double x = rng.exponential();
    const double s = rng.stable_onesided(alpha);
    return std::pow(x / lambda, 1.0 / alpha) * s;
}

} // namespace actrwl
