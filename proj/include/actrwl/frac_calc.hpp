#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "actrwl/levy.hpp"

namespace actrwl {

/// Function sampled on the uniform grid t_i = i dt, i = 0..n-1, with its
/// initial value f(0+) tracked explicitly.
struct TimeGridFn {
    double dt = 0.0;
    std::vector<double> values;
    double f0 = 0.0;

    TimeGridFn() = default;
    TimeGridFn(double dt_, std::vector<double> v)
        : dt(dt_), values(std::move(v)), f0(values.empty() ? 0.0 : values.front()) {
        if (!(dt > 0.0)) throw std::invalid_argument("TimeGridFn: dt must be positive");
    }

    std::size_t n() const { return values.size(); }
    double t(std::size_t i) const { return dt * static_cast<double>(i); }

    template <typename F>
    static TimeGridFn sample(F&& f, double T, double dt) {
        const std::size_t n = static_cast<std::size_t>(std::llround(T / dt)) + 1;
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = f(dt * static_cast<double>(i));
        return TimeGridFn(dt, std::move(v));
    }
};

/// Grunwald-Letnikov weights w_0 = 1, w_j = w_{j-1} (j-1-alpha)/j: the
/// binomial coefficients of (1-z)^alpha. Signs alternate after w_0 and the
/// partial sums decrease to 0 like n^{-alpha}/Gamma(1-alpha).
struct GrunwaldWeights {
    double alpha = 0.0;
    std::vector<double> w;

    double partial_sum(std::size_t upto) const {
        double s = 0.0;
        for (std::size_t j = 0; j <= upto && j < w.size(); ++j) s += w[j];
        return s;
    }
};

inline GrunwaldWeights grunwald_weights(double alpha, std::size_t n) {
    if (n < 1) throw std::invalid_argument("grunwald_weights: n >= 1 required");
    GrunwaldWeights g;
    g.alpha = alpha;
    g.w.resize(n + 1);
    g.w[0] = 1.0;
    for (std::size_t j = 1; j <= n; ++j)
        g.w[j] = g.w[j - 1] * (static_cast<double>(j) - 1.0 - alpha) / static_cast<double>(j);
    return g;
}

namespace detail {

// Fractional integral I(t_n) = (1/Gamma(1-a)) int_0^{t_n} (t_n-r)^{-a} f(r) dr
// by product integration exact on piecewise-linear f. The kernel powers live
// on the grid, so (k dt)^{1-a} and (k dt)^{2-a} are precomputed once.
inline std::vector<double> frac_integral_pl(const TimeGridFn& f, double alpha) {
    const std::size_t n = f.n();
    const double dt = f.dt;
    std::vector<double> p1(n), p2(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double tk = dt * static_cast<double>(k);
        p1[k] = std::pow(tk, 1.0 - alpha);
        p2[k] = std::pow(tk, 2.0 - alpha);
    }
    const double inv_g = 1.0 / std::tgamma(1.0 - alpha);
    const double om = 1.0 - alpha;
    std::vector<double> I(n, 0.0);
    for (std::size_t m = 1; m < n; ++m) {
        double acc = 0.0;
        for (std::size_t j = 1; j <= m; ++j) {
            const std::size_t kl = m - j;     // tau_j = (m-j) dt
            const std::size_t kr = m - j + 1; // tau_{j-1} = (m-j+1) dt
            const double tau_r = dt * static_cast<double>(kr);
            const double A = (p1[kr] - p1[kl]) / om;
            const double B = tau_r * A - (p2[kr] - p2[kl]) / (2.0 - alpha);
            acc += f.values[j - 1] * A + (f.values[j] - f.values[j - 1]) / dt * B;
        }
        I[m] = acc * inv_g;
    }
    return I;
}

// d/dt on the grid: central differences inside, second-order one-sided ends.
inline std::vector<double> grid_derivative(const std::vector<double>& v, double dt) {
    const std::size_t n = v.size();
    std::vector<double> d(n, 0.0);
    if (n < 3) return d;
    d[0] = (v[1] - v[0]) / dt;
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (v[i + 1] - v[i - 1]) / (2.0 * dt);
    d[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * dt);
    return d;
}

} // namespace detail

/// Riemann-Liouville derivative D_t^alpha f = d/dt of the fractional
/// integral, with the integral evaluated by exact piecewise-linear product
/// integration. The first few nodes sit in the t^{-alpha} layer and are not
/// meaningful on a uniform grid.
inline TimeGridFn riemann_liouville(const TimeGridFn& f, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("riemann_liouville: alpha in (0,1) required");
    auto I = detail::frac_integral_pl(f, alpha);
    TimeGridFn out;
    out.dt = f.dt;
    out.values = detail::grid_derivative(I, f.dt);
    out.f0 = out.values.empty() ? 0.0 : out.values.front();
    return out;
}

/// Caputo derivative computed as the Riemann-Liouville derivative of
/// f - f(0+), never differentiating the input samples.
inline TimeGridFn caputo(const TimeGridFn& f, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("caputo: alpha in (0,1) required");
    TimeGridFn shifted = f;
    for (auto& v : shifted.values) v -= f.f0;
    shifted.f0 = 0.0;
    return riemann_liouville(shifted, alpha);
}

/// Grunwald-Letnikov form of the RL derivative on the grid:
/// D^alpha f(t_m) ~ dt^{-alpha} sum_{j<=m} w_j f(t_{m-j}); first order in dt.
inline TimeGridFn riemann_liouville_grunwald(const TimeGridFn& f, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("riemann_liouville_grunwald: alpha in (0,1) required");
    const std::size_t n = f.n();
    const auto g = grunwald_weights(alpha, n == 0 ? 1 : n - 1);
    const double scale = std::pow(f.dt, -alpha);
    TimeGridFn out;
    out.dt = f.dt;
    out.values.assign(n, 0.0);
    for (std::size_t m = 0; m < n; ++m) {
        double acc = 0.0;
        for (std::size_t j = 0; j <= m; ++j) acc += g.w[j] * f.values[m - j];
        out.values[m] = acc * scale;
    }
    out.f0 = out.values.empty() ? 0.0 : out.values.front();
    return out;
}

/// Max-norm residual of the Caputo/RL relation
///   caputo(f) = RL(f) - f(0+) t^{-alpha}/Gamma(1-alpha)
/// over the grid, skipping the first `skip` nodes (the t^{-alpha} layer).
inline double rl_caputo_relation_residual(const TimeGridFn& f, double alpha,
                                          std::size_t skip = 5) {
    const auto cap = caputo(f, alpha);
    const auto rl = riemann_liouville(f, alpha);
    const double inv_g = 1.0 / std::tgamma(1.0 - alpha);
    double worst = 0.0;
    for (std::size_t i = skip; i + 1 < f.n(); ++i) {
        const double t = f.t(i);
        const double rhs = rl.values[i] - f.f0 * std::pow(t, -alpha) * inv_g;
        worst = std::max(worst, std::abs(cap.values[i] - rhs));
    }
    return worst;
}

} // namespace actrwl
