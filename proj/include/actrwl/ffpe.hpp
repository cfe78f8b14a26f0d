#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <complex>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "actrwl/aging.hpp"
#include "actrwl/dist.hpp"
#include "actrwl/frac_calc.hpp"
#include "actrwl/levy.hpp"
#include "actrwl/parallel.hpp"
#include "actrwl/special.hpp"

namespace actrwl {

/// Thrown when the time stepper detects norm blow-up.
struct StabilityError : std::runtime_error {
    double suggested_dt;
    StabilityError(const std::string& msg, double dt) : std::runtime_error(msg), suggested_dt(dt) {}
};

/// Density sampled on the uniform grid x_i = x0 + i dx, plus an explicit
/// point mass at x = 0 where the law has an atom. Small negative undershoot
/// from quadrature is tolerated and visible, not clipped.
struct GridDensity {
    double x0 = 0.0;
    double dx = 0.0;
    double t = 0.0;
    std::vector<double> values;
    double atom_mass = 0.0;

    std::size_t nx() const { return values.size(); }
    double x(std::size_t i) const { return x0 + dx * static_cast<double>(i); }

    /// Trapezoid mass of the continuous part plus the atom.
    double total_mass() const {
        if (values.size() < 2) return atom_mass;
        double s = 0.5 * (values.front() + values.back());
        for (std::size_t i = 1; i + 1 < values.size(); ++i) s += values[i];
        return s * dx + atom_mass;
    }

    double min_value() const {
        double m = 0.0;
        for (double v : values) m = std::min(m, v);
        return m;
    }
};

/// L1 distance of the continuous parts plus the atom difference.
inline double l1_distance(const GridDensity& a, const GridDensity& b) {
    if (a.nx() != b.nx() || std::abs(a.dx - b.dx) > 1e-12)
        throw std::invalid_argument("l1_distance: incompatible grids");
    double s = 0.0;
    for (std::size_t i = 0; i < a.nx(); ++i) s += std::abs(a.values[i] - b.values[i]);
    return s * a.dx + std::abs(a.atom_mass - b.atom_mass);
}

/// Smooth compactly-supported-in-practice initial density on the x-grid.
struct InitialDensity {
    double x0 = 0.0;
    double dx = 0.0;
    std::vector<double> p;

    static InitialDensity gaussian(double x0, double dx, std::size_t nx, double mean,
                                   double sd) {
        InitialDensity f;
        f.x0 = x0;
        f.dx = dx;
        f.p.resize(nx);
        for (std::size_t i = 0; i < nx; ++i) {
            const double z = (x0 + dx * i - mean) / sd;
            f.p[i] = std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * M_PI));
        }
        f.validate();
        return f;
    }

    double mass() const {
        if (p.size() < 2) return 0.0;
        double s = 0.5 * (p.front() + p.back());
        for (std::size_t i = 1; i + 1 < p.size(); ++i) s += p[i];
        return s * dx;
    }

    void validate() const {
        for (double v : p)
            if (v < 0.0) throw std::invalid_argument("InitialDensity: negative value");
        if (std::abs(mass() - 1.0) > 1e-6)
            throw std::invalid_argument("InitialDensity: mass must be 1 within 1e-6");
    }
};

/// Spatial layout of the solver/density grids.
struct SpaceGrid {
    double X = 6.0;      // domain [-X, X]
    std::size_t nx = 241; // number of nodes (odd keeps a node at x = 0)

    double dx() const { return 2.0 * X / static_cast<double>(nx - 1); }
    double x0() const { return -X; }
};

/// Pick a symmetric domain wide enough that the un-aged law at horizon t
/// keeps its mass inside: quantile-based, brownian/stable only.
inline SpaceGrid default_space_grid(const LevyFamily& fam, const AlphaScale& params, double t,
                                    double dx_target = 0.05) {
    double spread = 1.0;
    const double et = std::pow(t, params.alpha) / (std::tgamma(1.0 + params.alpha) * params.c);
    if (fam.kind == LevyFamily::Kind::Brownian) {
        spread = 8.0 * std::sqrt(fam.A * et) + 8.0 * std::abs(fam.mu) * et;
    } else if (fam.kind == LevyFamily::Kind::SymmetricStable) {
        // power tails: set the cut from the tail mass ~ (X/scale_t)^{-beta}
        const double scale_t = std::pow(fam.scale * et, 1.0 / fam.beta);
        spread = scale_t * std::pow(2e4, 1.0 / fam.beta);
    } else {
        throw std::invalid_argument("default_space_grid: density families only");
    }
    SpaceGrid g;
    g.X = spread;
    std::size_t half = static_cast<std::size_t>(std::ceil(spread / dx_target));
    g.nx = 2 * half + 1;
    return g;
}

namespace detail {

// Density of A_e on the grid nodes, families with a density only.
inline void outer_density_column(const LevyFamily& fam, double e, const SpaceGrid& g,
                                 std::vector<double>& col) {
    const std::size_t nx = g.nx;
    col.resize(nx);
    const double dx = g.dx(), x0 = g.x0();
    switch (fam.kind) {
        case LevyFamily::Kind::Brownian: {
            const double m = fam.mu * e;
            const double sd = std::sqrt(fam.A * e);
            const double inv = 1.0 / (sd * std::sqrt(2.0 * M_PI));
            for (std::size_t i = 0; i < nx; ++i) {
                const double z = (x0 + dx * i - m) / sd;
                col[i] = (std::abs(z) > 38.0) ? 0.0 : inv * std::exp(-0.5 * z * z);
            }
            return;
        }
        case LevyFamily::Kind::SymmetricStable: {
            const double sc = std::pow(fam.scale * e, 1.0 / fam.beta);
            for (std::size_t i = 0; i < nx; ++i)
                col[i] = stable_pdf_symmetric(fam.beta, (x0 + dx * i) / sc) / sc;
            return;
        }
        default:
            throw std::invalid_argument("outer_density_column: family has no usable density");
    }
}

} // namespace detail

/// Un-aged marginal density p0(x,t) = int p_A(x,e) h(e,t) de on the grid,
/// with the e-integral mapped to standard stable nodes.
inline GridDensity reference_density(const LevyFamily& fam, const AlphaScale& params, double t,
                                     const SpaceGrid& grid) {
    if (!fam.has_density())
        throw std::invalid_argument(
            "reference_density: lattice families have no Lebesgue density; use the pmf route");
    if (!(t > 0.0)) throw std::invalid_argument("reference_density: t must be positive");
    detail::StableQuadrature quad(params.alpha);
    GridDensity out;
    out.x0 = grid.x0();
    out.dx = grid.dx();
    out.t = t;
    out.values.assign(grid.nx, 0.0);
    std::vector<double> col;
    for (std::size_t q = 0; q < quad.x.size(); ++q) {
        const double e = std::pow(t / quad.x[q], params.alpha) / params.c;
        detail::outer_density_column(fam, e, grid, col);
        const double w = quad.w[q];
        for (std::size_t i = 0; i < grid.nx; ++i) out.values[i] += w * col[i];
    }
    return out;
}

/// Aged density: continuous part nu(x,t) = int_0^t p0(x,t-r) p_{t0}(r) dr
/// (same singularity-absorbing substitution as the aging probabilities) plus
/// the explicit atom at 0.
inline GridDensity aged_density(const LevyFamily& fam, const AlphaScale& params, double t0,
                                double t, const SpaceGrid& grid, int panels = 12,
                                int nodes = 24) {
    if (!fam.has_density())
        throw std::invalid_argument("aged_density: density families only");
    if (!(t > 0.0 && t0 > 0.0))
        throw std::invalid_argument("aged_density: t, t0 must be positive");
    const double alpha = params.alpha;
    const double om = 1.0 - alpha;
    const double pref =
        std::pow(t, om) / om * std::pow(t0, alpha - 1.0) / beta_fn(alpha, om);
    GridDensity out;
    out.x0 = grid.x0();
    out.dx = grid.dx();
    out.t = t;
    out.values.assign(grid.nx, 0.0);

    detail::StableQuadrature quad(params.alpha);
    std::vector<double> col;
    const auto& rule = gauss_legendre(nodes);
    auto breaks = graded_breaks(0.0, 1.0, panels, 0.5);
    // extra grading toward u = 1 where t - r -> 0 concentrates the density
    {
        auto extra = graded_breaks(0.0, 0.5, 6, 0.5);
        for (double e : extra)
            if (e > 0.0) breaks.push_back(1.0 - e);
        std::sort(breaks.begin(), breaks.end());
        breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    }
    for (std::size_t pnl = 0; pnl + 1 < breaks.size(); ++pnl) {
        const double mid = 0.5 * (breaks[pnl] + breaks[pnl + 1]);
        const double half = 0.5 * (breaks[pnl + 1] - breaks[pnl]);
        for (int i = 0; i < nodes; ++i) {
            const double u = mid + half * rule.nodes[i];
            const double r = t * std::pow(u, 1.0 / om);
            const double s = t - r;
            if (!(s > 1e-12 * t)) continue;
            const double w = pref * half * rule.weights[i] / (1.0 + r / t0);
            // p0 column at time s, reusing the stable nodes
            for (std::size_t q = 0; q < quad.x.size(); ++q) {
                const double e = std::pow(s / quad.x[q], params.alpha) / params.c;
                detail::outer_density_column(fam, e, grid, col);
                const double wq = w * quad.w[q];
                for (std::size_t j = 0; j < grid.nx; ++j) out.values[j] += wq * col[j];
            }
        }
    }
    out.atom_mass = zero_atom(fam, params, t, t0);
    return out;
}

/// Bin samples to the grid as a density; exact zeros can be routed to the
/// atom instead of the x = 0 bin. Bins are centered on the grid nodes.
inline GridDensity histogram_density(const std::vector<double>& samples, const SpaceGrid& grid,
                                     bool zeros_to_atom) {
    GridDensity out;
    out.x0 = grid.x0();
    out.dx = grid.dx();
    out.values.assign(grid.nx, 0.0);
    const double n = static_cast<double>(samples.size());
    std::size_t zeros = 0;
    for (double v : samples) {
        if (zeros_to_atom && v == 0.0) {
            ++zeros;
            continue;
        }
        const double pos = (v - out.x0) / out.dx;
        const long k = std::lround(pos);
        if (k < 0 || k >= static_cast<long>(grid.nx)) continue;
        out.values[static_cast<std::size_t>(k)] += 1.0;
    }
    for (auto& v : out.values) v /= n * out.dx;
    out.atom_mass = static_cast<double>(zeros) / n;
    return out;
}

/// f * density (continuous part convolved on the grid, atom contributing
/// atom_mass * f).
inline GridDensity convolve_initial(const InitialDensity& f, const GridDensity& d) {
    if (std::abs(f.dx - d.dx) > 1e-12)
        throw std::invalid_argument("convolve_initial: grid spacing mismatch");
    GridDensity out;
    out.x0 = f.x0;
    out.dx = f.dx;
    out.t = d.t;
    out.atom_mass = 0.0;
    const std::size_t nf = f.p.size(), nd = d.nx();
    out.values.assign(nf, 0.0);
    // y-grid of d: d.x0 + dx*j ; x - y lands on the f grid when grids align
    for (std::size_t i = 0; i < nf; ++i) {
        const double x = f.x0 + f.dx * i;
        double acc = 0.0;
        for (std::size_t j = 0; j < nd; ++j) {
            const double y = d.x0 + d.dx * j;
            const double xi = (x - y - f.x0) / f.dx;
            const long k = std::lround(xi);
            if (k < 0 || k >= static_cast<long>(nf)) continue;
            const double w = (j == 0 || j + 1 == nd) ? 0.5 : 1.0;
            acc += w * d.values[j] * f.p[static_cast<std::size_t>(k)];
        }
        out.values[i] = acc * d.dx + d.atom_mass * f.p[i];
    }
    return out;
}

/// Time-grid settings for the solver.
struct TimeGrid {
    double T = 1.0;
    std::size_t nt = 2048;

    double dt() const { return T / static_cast<double>(nt); }
};

/// Result of a solve: final density plus mass/positivity diagnostics.
struct FfpeSolution {
    GridDensity final_density;       // C(x, T)
    std::vector<double> mass_series; // trapezoid mass after each step
    double min_value = 0.0;          // most negative undershoot seen
    double max_source_norm = 0.0;    // sup-norm of the aging source at t=0+
    double final_source_norm = 0.0;  // and at t=T
};

namespace detail {

// Apply the generator of the outer process on the grid.
// brownian: mu central difference + (A/2) second difference;
// symmetric stable beta in (1,2): two-sided shifted Grunwald fractional
// differences normalized by -1/(2 cos(pi beta/2)).
struct SpaceOperator {
    LevyFamily fam;
    double dx;
    std::size_t nx;
    std::vector<double> gw; // Grunwald beta-weights when needed

    SpaceOperator(const LevyFamily& f, double dx_, std::size_t nx_) : fam(f), dx(dx_), nx(nx_) {
        if (fam.kind == LevyFamily::Kind::SymmetricStable) {
            if (!(fam.beta > 1.0 && fam.beta < 2.0))
                throw std::invalid_argument(
                    "SpaceOperator: stable index must lie in (1,2) for the shifted scheme");
            GrunwaldWeights g = grunwald_weights(fam.beta, nx + 2);
            gw = g.w;
        } else if (fam.kind != LevyFamily::Kind::Brownian) {
            throw std::invalid_argument("SpaceOperator: brownian or symmetric stable only");
        }
    }

    void apply(const std::vector<double>& v, std::vector<double>& out) const {
        out.assign(nx, 0.0);
        if (fam.kind == LevyFamily::Kind::Brownian) {
            const double cd = 0.5 * fam.A / (dx * dx);
            const double cm = 0.5 * fam.mu / dx;
            for (std::size_t i = 0; i < nx; ++i) {
                const double vm = (i > 0) ? v[i - 1] : 0.0;
                const double vp = (i + 1 < nx) ? v[i + 1] : 0.0;
                out[i] = cd * (vp - 2.0 * v[i] + vm) + cm * (vp - vm);
            }
            return;
        }
        // two-sided shifted Grunwald (shift 1), absorbing beyond the domain:
        // L f_i = cf * sum_j g_j (f_{i-j+1} + f_{i+j-1})
        const double cf = -fam.scale / (2.0 * std::cos(0.5 * M_PI * fam.beta)) /
                          std::pow(dx, fam.beta);
        const long n = static_cast<long>(nx);
        for (long i = 0; i < n; ++i) {
            double acc = 0.0;
            for (long j = 0; j <= i + 1; ++j) {
                const long idx = i - j + 1;
                if (idx >= 0 && idx < n) acc += gw[static_cast<std::size_t>(j)] * v[idx];
            }
            for (long j = 0; j <= n - i; ++j) {
                const long idx = i + j - 1;
                if (idx >= 0 && idx < n) acc += gw[static_cast<std::size_t>(j)] * v[idx];
            }
            out[static_cast<std::size_t>(i)] = cf * acc;
        }
    }
};

// Thomas solve of (I - coef * tridiag(L)) x = rhs for the brownian operator.
struct BrownianImplicit {
    std::vector<double> a, b, c; // sub/diag/super of the system matrix
    std::vector<double> cp, dp;  // scratch

    BrownianImplicit(const LevyFamily& fam, double dx, std::size_t nx, double coef) {
        const double cd = 0.5 * fam.A / (dx * dx);
        const double cm = 0.5 * fam.mu / dx;
        a.assign(nx, -coef * (cd - cm));
        b.assign(nx, 1.0 + coef * 2.0 * cd);
        c.assign(nx, -coef * (cd + cm));
        cp.resize(nx);
        dp.resize(nx);
    }

    void solve(std::vector<double>& rhs) {
        const std::size_t n = rhs.size();
        cp[0] = c[0] / b[0];
        dp[0] = rhs[0] / b[0];
        for (std::size_t i = 1; i < n; ++i) {
            const double m = b[i] - a[i] * cp[i - 1];
            cp[i] = c[i] / m;
            dp[i] = (rhs[i] - a[i] * dp[i - 1]) / m;
        }
        rhs[n - 1] = dp[n - 1];
        for (std::size_t i = n - 1; i-- > 0;) rhs[i] = dp[i] - cp[i] * rhs[i + 1];
    }
};

// Dense LU with partial pivoting for the stable operator system (Toeplitz-ish,
// factored once and reused every step).
struct DenseLU {
    std::size_t n = 0;
    std::vector<double> lu;
    std::vector<int> piv;

    void factor(std::vector<double> m, std::size_t n_) {
        n = n_;
        lu = std::move(m);
        piv.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            std::size_t p = k;
            for (std::size_t i = k + 1; i < n; ++i)
                if (std::abs(lu[i * n + k]) > std::abs(lu[p * n + k])) p = i;
            piv[k] = static_cast<int>(p);
            if (p != k)
                for (std::size_t j = 0; j < n; ++j) std::swap(lu[k * n + j], lu[p * n + j]);
            const double d = lu[k * n + k];
            if (d == 0.0) throw std::runtime_error("DenseLU: singular system");
            for (std::size_t i = k + 1; i < n; ++i) {
                lu[i * n + k] /= d;
                const double f = lu[i * n + k];
                for (std::size_t j = k + 1; j < n; ++j) lu[i * n + j] -= f * lu[k * n + j];
            }
        }
    }

    void solve(std::vector<double>& rhs) const {
        for (std::size_t k = 0; k < n; ++k) {
            if (static_cast<std::size_t>(piv[k]) != k) std::swap(rhs[k], rhs[piv[k]]);
            for (std::size_t i = k + 1; i < n; ++i) rhs[i] -= lu[i * n + k] * rhs[k];
        }
        for (std::size_t k = n; k-- > 0;) {
            for (std::size_t j = k + 1; j < n; ++j) rhs[k] -= lu[k * n + j] * rhs[j];
            rhs[k] /= lu[k * n + k];
        }
    }
};

} // namespace detail

enum class TimeStepping { Implicit, Explicit };

/// Solve the aged equation in its RL form,
///   D_t^alpha C - L C = p(x) t^{-alpha}/Gamma(1-alpha) - (L p)(x) * Q(t),
/// Q(t) = kernel tail (exact cdf complement; identically 0 when t0 = 0),
/// with Grunwald memory in time and the discrete generator in space.
/// Default stepping is implicit in the generator (factor once, backsolve per
/// step): the explicit variant demands dt^alpha <~ dx^2 / A, hopeless for
/// initial data narrow enough to matter, and is kept only with its
/// norm-growth guard. delta_0 initial data is not representable here by
/// design; use aged_density for that case.
inline FfpeSolution solve_ffpe(const LevyFamily& fam, const AlphaScale& params, double t0,
                               const InitialDensity& f, const SpaceGrid& grid,
                               const TimeGrid& tg,
                               TimeStepping stepping = TimeStepping::Implicit) {
    if (f.p.size() != grid.nx)
        throw std::invalid_argument("solve_ffpe: initial density not on the solver grid");
    const double dt = tg.dt();
    const double dta = std::pow(dt, params.alpha);
    const std::size_t nx = grid.nx, nt = tg.nt;
    const double dx = grid.dx();

    detail::SpaceOperator L(fam, dx, nx);
    const auto gw = grunwald_weights(params.alpha, nt).w;

    // source profile (L p)(x), fixed in time; scaled by the kernel tail
    std::vector<double> Lp;
    L.apply(f.p, Lp);
    const bool aged = t0 > 0.0;
    AgingKernel kernel(aged ? params.alpha : 0.5, aged ? t0 : 1.0); // dummy when t0=0

    // history[j] = C at step j (the scheme needs the full memory)
    std::vector<std::vector<double>> history;
    history.reserve(nt + 1);
    history.push_back(f.p);

    // implicit system (I - dt^alpha L)
    std::optional<detail::BrownianImplicit> tri;
    detail::DenseLU lu;
    if (stepping == TimeStepping::Implicit) {
        if (fam.kind == LevyFamily::Kind::Brownian) {
            tri.emplace(fam, dx, nx, dta);
        } else {
            std::vector<double> m(nx * nx, 0.0);
            std::vector<double> unit(nx, 0.0), col;
            for (std::size_t j = 0; j < nx; ++j) {
                std::fill(unit.begin(), unit.end(), 0.0);
                unit[j] = 1.0;
                L.apply(unit, col);
                for (std::size_t i = 0; i < nx; ++i)
                    m[i * nx + j] = (i == j ? 1.0 : 0.0) - dta * col[i];
            }
            lu.factor(std::move(m), nx);
        }
    }

    FfpeSolution sol;
    sol.mass_series.reserve(nt);
    const double f_sup = *std::max_element(f.p.begin(), f.p.end());
    std::vector<double> rhs(nx), work(nx);

    for (std::size_t n = 1; n <= nt; ++n) {
        const double tn = dt * static_cast<double>(n);
        // memory: C0 - sum_{j=1..n} w_j (C^{n-j} - C0)
        for (std::size_t i = 0; i < nx; ++i) rhs[i] = f.p[i];
        for (std::size_t j = 1; j <= n; ++j) {
            const double w = gw[j];
            const auto& cj = history[n - j];
            for (std::size_t i = 0; i < nx; ++i) rhs[i] -= w * (cj[i] - f.p[i]);
        }
        const double Q = aged ? kernel.tail(tn) : 0.0;
        if (aged) {
            const double src = dta * Q;
            for (std::size_t i = 0; i < nx; ++i) rhs[i] -= src * Lp[i];
        }
        if (stepping == TimeStepping::Implicit) {
            if (tri)
                tri->solve(rhs);
            else
                lu.solve(rhs);
        } else {
            L.apply(history[n - 1], work);
            for (std::size_t i = 0; i < nx; ++i) rhs[i] += dta * work[i];
        }
        history.push_back(rhs);

        double mass = 0.5 * (rhs.front() + rhs.back());
        for (std::size_t i = 1; i + 1 < nx; ++i) mass += rhs[i];
        mass *= dx;
        sol.mass_series.push_back(mass);
        double sup = 0.0, mn = 0.0;
        for (double v : rhs) {
            sup = std::max(sup, std::abs(v));
            mn = std::min(mn, v);
        }
        sol.min_value = std::min(sol.min_value, mn);
        if (sup > 10.0 * f_sup || !std::isfinite(sup)) {
            // explicit stepping demands dt^alpha * A / dx^2 below order one
            double dt_sugg = dt * 0.25;
            if (stepping == TimeStepping::Explicit && fam.kind == LevyFamily::Kind::Brownian)
                dt_sugg = std::min(dt_sugg, std::pow(0.25 * dx * dx / fam.A,
                                                     1.0 / params.alpha));
            std::ostringstream os;
            os << "solve_ffpe: norm growth detected at step " << n << " (sup " << sup
               << "); retry with dt <= " << dt_sugg;
            throw StabilityError(os.str(), dt_sugg);
        }
        if (n == 1) sol.max_source_norm = Q;
        if (n == nt) sol.final_source_norm = Q;
    }

    sol.final_density.x0 = grid.x0();
    sol.final_density.dx = dx;
    sol.final_density.t = tg.T;
    sol.final_density.values = history.back();
    sol.final_density.atom_mass = 0.0; // smooth initial data: no atom on the grid
    return sol;
}

// ---------------------------------------------------------------------------
// Fourier(x)-Laplace(t) residuals against the closed transform-domain forms.
// The reference trajectory is tabulated on a fine t-grid, its x-FT taken by
// trapezoid on the grid; the aged transform is the same table pushed through
// the kernel quadrature (FT is linear, so this equals the FT of the aged
// trajectory), plus the atom. Laplace in t by trapezoid with an analytic
// flat-tail estimate beyond the horizon.
// ---------------------------------------------------------------------------

class FltChecker {
public:
    FltChecker(const LevyFamily& fam, const AlphaScale& params, double t0,
               std::vector<double> ks, double T = 24.0, double dt = 0.01,
               SpaceGrid grid = SpaceGrid{15.0, 401})
        : fam_(fam), params_(params), t0_(t0), ks_(std::move(ks)), T_(T), dt_(dt) {
        const std::size_t nt = static_cast<std::size_t>(std::llround(T / dt));
        const std::size_t nk = ks_.size();
        ft_ref_.assign(nk, std::vector<std::complex<double>>(nt + 1));
        detail::StableQuadrature quad(params.alpha);
        std::vector<double> col(grid.nx), acc(grid.nx);
        const double dx = grid.dx(), x0 = grid.x0();
        for (std::size_t n = 0; n <= nt; ++n) {
            const double t = dt * static_cast<double>(n);
            if (n == 0) {
                for (std::size_t q = 0; q < nk; ++q) ft_ref_[q][0] = 1.0; // delta_0 start
                continue;
            }
            std::fill(acc.begin(), acc.end(), 0.0);
            for (std::size_t q = 0; q < quad.x.size(); ++q) {
                const double e = std::pow(t / quad.x[q], params.alpha) / params_.c;
                detail::outer_density_column(fam_, e, grid, col);
                const double w = quad.w[q];
                for (std::size_t i = 0; i < grid.nx; ++i) acc[i] += w * col[i];
            }
            for (std::size_t q = 0; q < nk; ++q) {
                const double k = ks_[q];
                std::complex<double> s(0.0, 0.0);
                for (std::size_t i = 0; i < grid.nx; ++i) {
                    const double x = x0 + dx * i;
                    const double wt = (i == 0 || i + 1 == grid.nx) ? 0.5 : 1.0;
                    s += wt * acc[i] * std::exp(std::complex<double>(0.0, -k * x));
                }
                ft_ref_[q][n] = s * dx;
            }
        }
    }

    /// Numeric Laplace transform of the tabulated x-FT of the un-aged law.
    std::complex<double> flt_reference(double k, double s) const {
        return laplace_of(table_index(k), s);
    }

    /// Residual of the un-aged closed form s^{alpha-1}/(s^alpha - psi(-k)/c).
    std::complex<double> reference_residual(double k, double s) const {
        const std::complex<double> closed =
            std::pow(s, params_.alpha - 1.0) /
            (std::pow(s, params_.alpha) - levy_symbol(fam_, k) / params_.c);
        return flt_reference(k, s) - closed;
    }

    /// Numeric aged transform: kernel quadrature over the reference table
    /// plus the atom tail, Laplace-transformed.
    std::complex<double> flt_aged(double k, double s) const {
        const std::size_t qi = table_index(k);
        const std::size_t nt = ft_ref_[qi].size() - 1;
        const AgingKernel kernel(params_.alpha, t0_);
        std::vector<std::complex<double>> aged(nt + 1);
        const double alpha = params_.alpha, om = 1.0 - alpha;
        const auto& rule = gauss_legendre(24);
        auto breaks = graded_breaks(0.0, 1.0, 10, 0.5);
        for (std::size_t n = 0; n <= nt; ++n) {
            const double t = dt_ * static_cast<double>(n);
            if (n == 0) {
                aged[0] = 1.0;
                continue;
            }
            const double pref =
                std::pow(t, om) / om * std::pow(t0_, alpha - 1.0) / beta_fn(alpha, om);
            std::complex<double> acc(0.0, 0.0);
            for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
                const double mid = 0.5 * (breaks[p] + breaks[p + 1]);
                const double half = 0.5 * (breaks[p + 1] - breaks[p]);
                for (int i = 0; i < 24; ++i) {
                    const double u = mid + half * rule.nodes[i];
                    const double r = t * std::pow(u, 1.0 / om);
                    acc += half * rule.weights[i] / (1.0 + r / t0_) *
                           interp(qi, t - r);
                }
            }
            aged[n] = pref * acc + kernel.tail(t);
        }
        // Laplace by trapezoid plus flat tail
        std::complex<double> out(0.0, 0.0);
        for (std::size_t n = 0; n <= nt; ++n) {
            const double t = dt_ * static_cast<double>(n);
            const double wt = (n == 0 || n == nt) ? 0.5 : 1.0;
            out += wt * std::exp(-s * t) * aged[n];
        }
        out *= dt_;
        out += aged[nt] * std::exp(-s * T_) / s;
        return out;
    }

    /// Residual of the aged transform identity
    /// pbar(k,s) (s^alpha - psi(-k)/c) - s^{alpha-1} phat_{t0}(s).
    std::complex<double> aged_identity_residual(double k, double s) const {
        const AgingKernel kernel(params_.alpha, t0_);
        const std::complex<double> lhs =
            flt_aged(k, s) *
            (std::pow(s, params_.alpha) - levy_symbol(fam_, k) / params_.c);
        const double rhs = std::pow(s, params_.alpha - 1.0) * kernel.laplace(s);
        return lhs - rhs;
    }

private:
    std::size_t table_index(double k) const {
        for (std::size_t i = 0; i < ks_.size(); ++i)
            if (std::abs(ks_[i] - k) < 1e-12) return i;
        throw std::invalid_argument("FltChecker: k not tabulated");
    }

    std::complex<double> interp(std::size_t qi, double t) const {
        const auto& tab = ft_ref_[qi];
        if (t <= 0.0) return tab[0];
        const double pos = t / dt_;
        const std::size_t n = std::min(static_cast<std::size_t>(pos), tab.size() - 2);
        const double frac = pos - static_cast<double>(n);
        return tab[n] * (1.0 - frac) + tab[n + 1] * frac;
    }

    std::complex<double> laplace_of(std::size_t qi, double s) const {
        const auto& tab = ft_ref_[qi];
        std::complex<double> out(0.0, 0.0);
        for (std::size_t n = 0; n < tab.size(); ++n) {
            const double t = dt_ * static_cast<double>(n);
            const double wt = (n == 0 || n + 1 == tab.size()) ? 0.5 : 1.0;
            out += wt * std::exp(-s * t) * tab[n];
        }
        out *= dt_;
        out += tab.back() * std::exp(-s * T_) / s;
        return out;
    }

    LevyFamily fam_;
    AlphaScale params_;
    double t0_;
    std::vector<double> ks_;
    double T_;
    double dt_;
    std::vector<std::vector<std::complex<double>>> ft_ref_;
};

} // namespace actrwl
