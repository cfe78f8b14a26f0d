#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "actrwl/dist.hpp"
#include "actrwl/levy.hpp"
#include "actrwl/rng.hpp"
#include "actrwl/special.hpp"

namespace actrwl {

/// Thrown when a path is queried past its simulated horizon.
struct HorizonError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Discretized stable subordinator trajectory on a uniform u-grid.
struct SubordinatorPath {
    double du = 0.0;
    std::vector<double> d_values; // d_values[k] = D(k*du); d_values[0] = 0
    AlphaScale params{0.5, 1.0};
    std::uint64_t seed = 0;

    double u_max() const { return du * (d_values.size() - 1); }
    double d_max() const { return d_values.back(); }
};

/// i.i.d. draws plus provenance.
struct SampleSet {
    std::vector<double> values;
    std::string process;
    double alpha = 0.0;
    double c = 1.0;
    double t0 = 0.0;
    double t = 0.0;
    std::uint64_t seed = 0;

    std::size_t n() const { return values.size(); }
};

/// u-horizon with P(D_{u_max} < t_total) < 1e-6, from the stretched-exponential
/// left tail of the stable law: P(S < x) ~ exp(-(1-a) a^{a/(1-a)} x^{-a/(1-a)}).
inline double subordinator_horizon(const AlphaScale& p, double t_total) {
    const double a = p.alpha;
    const double expo = a / (1.0 - a);
    const double cc = (1.0 - a) * std::pow(a, expo);
    // quantile at 1e-7 with a 1.5x safety margin on u
    const double x_q = std::pow(cc / (std::log(1e7)), 1.0 / expo);
    return 1.5 * std::pow(t_total / x_q, a) / p.c;
}

/// Simulate D on a uniform grid: increments (c du)^{1/alpha} S, S standard
/// one-sided stable.
inline SubordinatorPath subordinator_path(const AlphaScale& params, double du, double u_max,
                                          Stream& rng) {
    if (!(du > 0.0)) throw std::invalid_argument("subordinator_path: du must be positive");
    if (!(u_max >= du)) throw std::invalid_argument("subordinator_path: u_max >= du required");
    SubordinatorPath path;
    path.du = du;
    path.params = params;
    path.seed = rng.spec().master_seed;
    const std::size_t n = static_cast<std::size_t>(std::ceil(u_max / du));
    path.d_values.resize(n + 1);
    path.d_values[0] = 0.0;
    const double inc_scale = std::pow(params.c * du, 1.0 / params.alpha);
    for (std::size_t k = 1; k <= n; ++k)
        path.d_values[k] = path.d_values[k - 1] + inc_scale * rng.stable_onesided(params.alpha);
    return path;
}

/// Extend an existing path in place with the same stream until D exceeds target.
inline void extend_path(SubordinatorPath& path, double d_target, Stream& rng) {
    const double inc_scale = std::pow(path.params.c * path.du, 1.0 / path.params.alpha);
    while (path.d_values.back() <= d_target)
        path.d_values.push_back(path.d_values.back() +
                                inc_scale * rng.stable_onesided(path.params.alpha));
}

/// Right-continuous grid inversion at time t.
struct InverseAt {
    double E;      // first grid u with D_u > t
    double R;      // D_{E} - t  (remaining life)
    double V;      // t - D at the preceding grid point (age)
    double D_at_E; // the overshoot value D_{E}
};

inline InverseAt inverse_at(const SubordinatorPath& path, double t) {
    if (!(t >= 0.0)) throw std::invalid_argument("inverse_at: t must be nonnegative");
    if (t >= path.d_max())
        throw HorizonError("inverse_at: t beyond simulated horizon; extend u_max");
    auto it = std::upper_bound(path.d_values.begin(), path.d_values.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - path.d_values.begin());
    InverseAt r;
    r.E = path.du * static_cast<double>(k);
    r.D_at_E = path.d_values[k];
    r.R = path.d_values[k] - t;
    r.V = t - path.d_values[k - 1];
    return r;
}

/// Exact single-time draw of E_t: E_t = (t/S)^alpha / c in law.
inline double inverse_marginal_sample(const AlphaScale& params, double t, Stream& rng) {
    if (!(t > 0.0)) throw std::invalid_argument("inverse_marginal_sample: t must be positive");
    const double s = rng.stable_onesided(params.alpha);
    return std::pow(t / s, params.alpha) / params.c;
}

/// Exact marginal draw of A_u.
inline double levy_sample(const LevyFamily& fam, double u, Stream& rng) {
    if (!(u >= 0.0)) throw std::invalid_argument("levy_sample: u must be nonnegative");
    if (u == 0.0) return 0.0;
    switch (fam.kind) {
        case LevyFamily::Kind::Brownian:
            return fam.mu * u + std::sqrt(fam.A * u) * rng.normal();
        case LevyFamily::Kind::SymmetricStable:
            return std::pow(fam.scale * u, 1.0 / fam.beta) * rng.stable_symmetric(fam.beta);
        case LevyFamily::Kind::Poisson:
            return static_cast<double>(rng.poisson(fam.lambda * u));
        case LevyFamily::Kind::CompoundPoisson: {
            const std::uint64_t n = rng.poisson(fam.lambda * u);
            double acc = 0.0;
            for (std::uint64_t i = 0; i < n; ++i)
                acc += fam.jump_mean + fam.jump_sd * rng.normal();
            return acc;
        }
    }
    throw std::logic_error("levy_sample: unsupported family");
}

/// Path of A on an increasing grid (independent stationary increments).
inline std::vector<double> levy_path(const LevyFamily& fam, const std::vector<double>& u_grid,
                                     Stream& rng) {
    std::vector<double> out(u_grid.size());
    double prev_u = 0.0, acc = 0.0;
    for (std::size_t i = 0; i < u_grid.size(); ++i) {
        if (u_grid[i] < prev_u)
            throw std::invalid_argument("levy_path: u_grid must be nondecreasing");
        acc += levy_sample(fam, u_grid[i] - prev_u, rng);
        prev_u = u_grid[i];
        out[i] = acc;
    }
    return out;
}

/// One draw of the CTRWL Y_t = A_{E_t}: exact, by conditional independence.
inline double ctrwl_sample(const LevyFamily& fam, const AlphaScale& params, double t,
                           Stream& rng) {
    if (!(t > 0.0)) throw std::invalid_argument("ctrwl_sample: t must be positive");
    const double u = inverse_marginal_sample(params, t, rng);
    return levy_sample(fam, u, rng);
}

// ---------------------------------------------------------------------------
// First-passage engine for aging increments.
//
// The subordinator is decomposed exactly into jumps larger than a cutoff
// (compound Poisson: rate c h^{-alpha}/Gamma(1-alpha), Pareto sizes
// h U^{-1/alpha}) plus the small-jump remainder, which is replaced by its
// mean drift c alpha h^{1-alpha} / ((1-alpha) Gamma(1-alpha)) per unit u.
// Barrier passage times are then exact in u under the approximating law:
// no grid, so E_{t0} and E_{t0+t} carry no discretization error. The
// neglected small-jump fluctuation shifts the passage laws by O(h^{1-alpha})
// near the barrier only; the cutoff is taken relative to the total horizon
// and is a knob on the sampler.
// ---------------------------------------------------------------------------

struct FirstPassageEngine {
    AlphaScale params;
    double cutoff;     // absolute jump-size cutoff h
    double jump_rate;  // c h^{-alpha} / Gamma(1-alpha)
    double drift;      // small-jump mean drift per unit u

    FirstPassageEngine(const AlphaScale& p, double t_total, double cutoff_ratio = 1e-4)
        : params(p), cutoff(cutoff_ratio * t_total) {
        if (!(t_total > 0.0))
            throw std::invalid_argument("FirstPassageEngine: t_total must be positive");
        if (!(cutoff_ratio > 0.0 && cutoff_ratio < 1.0))
            throw std::invalid_argument("FirstPassageEngine: cutoff_ratio in (0,1)");
        const double a = p.alpha;
        const double g1ma = std::tgamma(1.0 - a);
        jump_rate = p.c * std::pow(cutoff, -a) / g1ma;
        drift = p.c * a * std::pow(cutoff, 1.0 - a) / ((1.0 - a) * g1ma);
    }

    /// First-passage times E(b) of every barrier in ascending `barriers`,
    /// written to `epochs` (same order). Returns final (u, D).
    void passage_times(const std::vector<double>& barriers, std::vector<double>& epochs,
                       Stream& rng) const {
        epochs.resize(barriers.size());
        double u = 0.0, d = 0.0;
        std::size_t next = 0;
        while (next < barriers.size()) {
            const double w = rng.exponential() / jump_rate; // u-time to next big jump
            const double d_jump_base = d + drift * w;
            // drift alone may cross one or more barriers before the jump
            while (next < barriers.size() && d_jump_base > barriers[next]) {
                epochs[next] = u + (barriers[next] - d) / drift;
                ++next;
            }
            if (next >= barriers.size()) break;
            const double jump = cutoff * std::pow(rng.uniform01(), -1.0 / params.alpha);
            u += w;
            d = d_jump_base + jump;
            while (next < barriers.size() && d > barriers[next]) {
                epochs[next] = u;
                ++next;
            }
        }
    }
};

/// Joint draw of the aging increments (Y^{t0}_{t_1}, ..., Y^{t0}_{t_k}) on one
/// shared subordinator path; A-increments are redrawn exactly over the
/// E-increments. If no regeneration falls in (t0, t0+t_i], the increment is
/// exactly zero.
inline void aging_increment_sample(const LevyFamily& fam, const AlphaScale& params, double t0,
                                   const std::vector<double>& times, Stream& rng,
                                   std::vector<double>& out, double cutoff_ratio = 1e-4) {
    if (times.empty()) throw std::invalid_argument("aging_increment_sample: times empty");
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!(times[i] > 0.0) || (i > 0 && times[i] <= times[i - 1]))
            throw std::invalid_argument("aging_increment_sample: times must be positive increasing");
    }
    const double t_total = t0 + times.back();
    FirstPassageEngine engine(params, t_total, cutoff_ratio);

    thread_local std::vector<double> barriers, epochs;
    barriers.clear();
    if (t0 > 0.0) barriers.push_back(t0);
    for (double t : times) barriers.push_back(t0 + t);
    engine.passage_times(barriers, epochs, rng);

    out.resize(times.size());
    const double e0 = (t0 > 0.0) ? epochs[0] : 0.0;
    const std::size_t off = (t0 > 0.0) ? 1 : 0;
    double prev_e = e0, acc = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double de = epochs[off + i] - prev_e;
        prev_e = epochs[off + i];
        if (de > 0.0) acc += levy_sample(fam, de, rng);
        out[i] = acc;
    }
}

inline double aging_increment_sample(const LevyFamily& fam, const AlphaScale& params, double t0,
                                     double t, Stream& rng, double cutoff_ratio = 1e-4) {
    thread_local std::vector<double> out;
    aging_increment_sample(fam, params, t0, std::vector<double>{t}, rng, out, cutoff_ratio);
    return out[0];
}

/// Fractional Poisson count at t via the renewal construction with
/// Mittag-Leffler interarrivals.
inline std::uint64_t fpp_renewal_sample(double alpha, double lambda, double t, Stream& rng) {
    if (!(t > 0.0)) throw std::invalid_argument("fpp_renewal_sample: t must be positive");
    std::uint64_t n = 0;
    double acc = ml_waiting_sample(alpha, lambda, rng);
    while (acc <= t) {
        ++n;
        acc += ml_waiting_sample(alpha, lambda, rng);
    }
    return n;
}

} // namespace actrwl
