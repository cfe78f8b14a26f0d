#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "actrwl/dist.hpp"
#include "actrwl/levy.hpp"
#include "actrwl/mc_stats.hpp"
#include "actrwl/parallel.hpp"
#include "actrwl/process.hpp"
#include "actrwl/quadrature.hpp"
#include "actrwl/special.hpp"

namespace actrwl {

/// Finite union of disjoint half-open intervals (lo, hi], ordered; endpoints
/// may be +-infinity.
struct BorelSet {
    struct Interval {
        double lo;
        double hi;
    };
    std::vector<Interval> intervals;

    static BorelSet interval(double lo, double hi) {
        BorelSet b;
        b.intervals.push_back({lo, hi});
        b.validate();
        return b;
    }

    void validate() const {
        double prev_hi = -std::numeric_limits<double>::infinity();
        for (const auto& iv : intervals) {
            if (!(iv.lo < iv.hi)) throw std::invalid_argument("BorelSet: need lo < hi");
            if (!(iv.lo >= prev_hi))
                throw std::invalid_argument("BorelSet: intervals must be disjoint and ordered");
            prev_hi = iv.hi;
        }
    }

    bool contains(double x) const {
        for (const auto& iv : intervals)
            if (iv.lo < x && x <= iv.hi) return true;
        return false;
    }

    bool contains_zero() const { return contains(0.0); }

    std::string to_string() const {
        std::ostringstream os;
        for (std::size_t i = 0; i < intervals.size(); ++i) {
            if (i) os << " U ";
            os << "(" << intervals[i].lo << "," << intervals[i].hi << "]";
        }
        return os.str();
    }
};

/// Marginal law of the un-aged process Y_t: a map (t, B) -> P(Y_t in B),
/// continuous in t on (0, inf).
class MarginalLaw {
public:
    MarginalLaw(LevyFamily fam, AlphaScale params) : fam_(fam), params_(params) {}
    virtual ~MarginalLaw() = default;

    virtual double eval(double t, const BorelSet& B) const = 0;

    /// P(Y_t = 0); zero for families with a density.
    virtual double zero_mass(double t) const = 0;

    const LevyFamily& family() const { return fam_; }
    const AlphaScale& params() const { return params_; }

protected:
    LevyFamily fam_;
    AlphaScale params_;
};

namespace detail {

// Shared quadrature skeleton for E[f(E_t)] = int f((t/x)^alpha / c) g(x) dx:
// log-spaced Gauss-Legendre panels over the bulk of the standard stable law,
// with node densities precomputed once per alpha.
struct StableQuadrature {
    std::vector<double> x;
    std::vector<double> w; // includes g(x) factor

    explicit StableQuadrature(double alpha, int panels = 36, int nodes = 16) {
        // Bulk range: stretched-exponential left tail, power right tail.
        const double expo = alpha / (1.0 - alpha);
        const double cc = (1.0 - alpha) * std::pow(alpha, expo);
        const double x_lo = std::pow(cc / std::log(1e11), 1.0 / expo);
        const double g1ma = std::tgamma(1.0 - alpha);
        const double x_hi = std::pow(1e11 * 1.0 / g1ma, 1.0 / alpha);
        const double llo = std::log(x_lo), lhi = std::log(x_hi);
        const auto& rule = gauss_legendre(nodes);
        for (int p = 0; p < panels; ++p) {
            const double a = llo + (lhi - llo) * p / panels;
            const double b = llo + (lhi - llo) * (p + 1) / panels;
            for (int i = 0; i < nodes; ++i) {
                const double ly = 0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[i];
                const double y = std::exp(ly);
                x.push_back(y);
                w.push_back(0.5 * (b - a) * rule.weights[i] * y * stable_pdf_onesided(alpha, y));
            }
        }
    }
};

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z * M_SQRT1_2); }

} // namespace detail

/// Analytic marginal law by subordination quadrature:
/// P(Y_t in B) = int P(A_e in B) h(e,t) de, with the e-integral transformed to
/// the standard stable density. Supports families with a computable marginal
/// cdf/pmf: brownian, Cauchy (beta = 1), poisson, compound_poisson is not
/// supported here (use the MC-tabulated law).
class SubordinatedLaw : public MarginalLaw {
public:
    SubordinatedLaw(LevyFamily fam, AlphaScale params)
        : MarginalLaw(fam, params), quad_(params.alpha) {
        const bool ok = fam.kind == LevyFamily::Kind::Brownian ||
                        (fam.kind == LevyFamily::Kind::SymmetricStable && fam.beta == 1.0) ||
                        fam.kind == LevyFamily::Kind::Poisson;
        if (!ok)
            throw std::invalid_argument(
                "SubordinatedLaw: closed marginal cdf unavailable for " + fam.label());
    }

    double eval(double t, const BorelSet& B) const override {
        if (!(t >= 0.0)) throw std::invalid_argument("SubordinatedLaw::eval: t >= 0 required");
        if (t == 0.0) return B.contains(0.0) ? 1.0 : 0.0;
        KahanSum acc;
        for (std::size_t i = 0; i < quad_.x.size(); ++i) {
            const double e = std::pow(t / quad_.x[i], params_.alpha) / params_.c;
            acc.add(quad_.w[i] * marginal_prob(e, B));
        }
        return std::clamp(acc.value(), 0.0, 1.0);
    }

    double zero_mass(double t) const override {
        if (fam_.kind == LevyFamily::Kind::Poisson)
            return mittag_leffler(params_.alpha, -fam_.lambda * std::pow(t, params_.alpha) /
                                                     params_.c);
        return 0.0;
    }

    /// P(A_e in B) for the supported families.
    double marginal_prob(double e, const BorelSet& B) const {
        double p = 0.0;
        switch (fam_.kind) {
            case LevyFamily::Kind::Brownian: {
                const double m = fam_.mu * e, sd = std::sqrt(fam_.A * e);
                for (const auto& iv : B.intervals)
                    p += detail::normal_cdf((iv.hi - m) / sd) -
                         detail::normal_cdf((iv.lo - m) / sd);
                return p;
            }
            case LevyFamily::Kind::SymmetricStable: {
                const double sc = fam_.scale * e; // Cauchy scale
                for (const auto& iv : B.intervals)
                    p += (std::atan(iv.hi / sc) - std::atan(iv.lo / sc)) / M_PI;
                return p;
            }
            case LevyFamily::Kind::Poisson: {
                const double m = fam_.lambda * e;
                for (const auto& iv : B.intervals) {
                    const long jlo = static_cast<long>(std::floor(std::max(iv.lo, -1.0))) + 1;
                    if (std::isinf(iv.hi)) {
                        // complement of a finite sum
                        double q = 1.0;
                        double pk = std::exp(-m);
                        for (long j = 0; j < jlo; ++j) {
                            q -= pk;
                            pk *= m / static_cast<double>(j + 1);
                        }
                        p += std::max(q, 0.0);
                        continue;
                    }
                    const long jhi = static_cast<long>(std::floor(iv.hi));
                    if (jhi < jlo) continue;
                    double pk = std::exp(-m);
                    for (long j = 0; j <= jhi; ++j) {
                        if (j >= jlo) p += pk;
                        pk *= m / static_cast<double>(j + 1);
                    }
                }
                return p;
            }
            default: throw std::logic_error("SubordinatedLaw: unsupported family");
        }
    }

private:
    detail::StableQuadrature quad_;
};

/// Marginal law tabulated by exact single-time Monte Carlo draws on a t-grid,
/// linearly interpolated; seeds are cached per Borel set so repeated queries
/// reuse the same randomness.
class MCTabulatedLaw : public MarginalLaw {
public:
    MCTabulatedLaw(LevyFamily fam, AlphaScale params, double t_max, StreamSpec seed,
                   std::size_t n = 200000, int grid = 64)
        : MarginalLaw(fam, params), t_max_(t_max), seed_(seed), n_(n), grid_(grid) {}

    double eval(double t, const BorelSet& B) const override {
        if (t <= 0.0) return B.contains(0.0) ? 1.0 : 0.0;
        if (t > t_max_ * (1.0 + 1e-12))
            throw std::invalid_argument("MCTabulatedLaw::eval: t beyond tabulated horizon");
        const auto& tab = table_for(B);
        const double ds = t_max_ / grid_;
        const double pos = std::min(t / ds, static_cast<double>(grid_));
        const std::size_t k = std::min(static_cast<std::size_t>(pos),
                                       static_cast<std::size_t>(grid_ - 1));
        const double frac = pos - static_cast<double>(k);
        return tab[k] * (1.0 - frac) + tab[k + 1] * frac;
    }

    double zero_mass(double t) const override {
        switch (fam_.kind) {
            case LevyFamily::Kind::Poisson:
            case LevyFamily::Kind::CompoundPoisson:
                return mittag_leffler(params_.alpha,
                                      -fam_.lambda * std::pow(t, params_.alpha) / params_.c);
            default: return 0.0;
        }
    }

private:
    const std::vector<double>& table_for(const BorelSet& B) const {
        const std::string key = B.to_string();
        auto it = tables_.find(key);
        if (it != tables_.end()) return it->second;
        std::vector<double> tab(grid_ + 1, 0.0);
        // tab[k] ~ P(Y_{k ds} in B); k = 0 handled analytically (Y_0 = 0)
        tab[0] = B.contains(0.0) ? 1.0 : 0.0;
        Stream master(seed_);
        for (int k = 1; k <= grid_; ++k) {
            const double s = t_max_ * k / grid_;
            Stream rng = master.substream(static_cast<std::uint64_t>(k));
            std::size_t hits = 0;
            for (std::size_t i = 0; i < n_; ++i)
                if (B.contains(ctrwl_sample(fam_, params_, s, rng))) ++hits;
            tab[k] = static_cast<double>(hits) / static_cast<double>(n_);
        }
        return tables_.emplace(key, std::move(tab)).first->second;
    }

    double t_max_;
    StreamSpec seed_;
    std::size_t n_;
    int grid_;
    mutable std::map<std::string, std::vector<double>> tables_;
};

inline std::unique_ptr<MarginalLaw> make_marginal_law(const LevyFamily& fam,
                                                      const AlphaScale& params, double t_max,
                                                      StreamSpec mc_seed = {0xACE1u, 9000}) {
    const bool analytic = fam.kind == LevyFamily::Kind::Brownian ||
                          (fam.kind == LevyFamily::Kind::SymmetricStable && fam.beta == 1.0) ||
                          fam.kind == LevyFamily::Kind::Poisson;
    if (analytic) return std::make_unique<SubordinatedLaw>(fam, params);
    return std::make_unique<MCTabulatedLaw>(fam, params, t_max, mc_seed);
}

// ---------------------------------------------------------------------------
// Aging probabilities: P(Y^{t0}_t in B) = int_0^t P(Y_{t-r} in B) p_{t0}(r) dr.
// The kernel carries an r^{-alpha} endpoint singularity at r = 0; the
// substitution r = t u^{1/(1-alpha)} absorbs it exactly, after which plain
// Gauss-Legendre panels converge fast. The integrand vanishes at r = t since
// the law starts from delta_0 and 0 is outside B; that endpoint is pinned to 0.
// ---------------------------------------------------------------------------

struct AgingQuadrature {
    int panels = 12;
    int nodes = 32;
};

namespace detail {

// integral of f(r) p_{t0}(r) dr over (0,t) with f supplied on the u-scale
template <typename F>
double aging_convolution(double alpha, double t0, double t, F&& f_of_r, int panels, int nodes) {
    const double om = 1.0 - alpha;
    const double pref = std::pow(t, om) / om * std::pow(t0, alpha - 1.0) /
                        beta_fn(alpha, om);
    auto integrand = [&](double u) {
        const double r = t * std::pow(u, 1.0 / om);
        if (r >= t) return 0.0;
        return f_of_r(r) / (1.0 + r / t0);
    };
    return pref * integrate_gl_panels(integrand, graded_breaks(0.0, 1.0, panels, 0.5), nodes);
}

} // namespace detail

/// Quadrature value of the aging probability with a refinement-based error
/// estimate (second value).
inline std::pair<double, double> aging_prob_with_error(const MarginalLaw& law, const BorelSet& B,
                                                       double t, double t0,
                                                       AgingQuadrature q = {}) {
    if (B.contains_zero())
        throw std::invalid_argument("aging_prob: the first Borel set must exclude 0");
    if (!(t > 0.0 && t0 > 0.0)) throw std::invalid_argument("aging_prob: t, t0 must be positive");
    auto f = [&](double r) { return law.eval(t - r, B); };
    const double coarse =
        detail::aging_convolution(law.params().alpha, t0, t, f, q.panels, q.nodes);
    const double fine =
        detail::aging_convolution(law.params().alpha, t0, t, f, 2 * q.panels, q.nodes);
    return {fine, std::abs(fine - coarse)};
}

inline double aging_prob(const MarginalLaw& law, const BorelSet& B, double t, double t0,
                         AgingQuadrature q = {}) {
    return aging_prob_with_error(law, B, t, t0, q).first;
}

/// Zero atom P(Y^{t0}_t = 0). Families with a density: the pure kernel tail,
/// independent of the outer process. Counting families: the tail plus the
/// regenerated-but-still-at-zero mass, closed by P(Y_s = 0) = E_alpha(-lambda s^alpha).
inline double zero_atom(const LevyFamily& fam, const AlphaScale& params, double t, double t0,
                        AgingQuadrature q = {}) {
    if (!(t > 0.0 && t0 > 0.0)) throw std::invalid_argument("zero_atom: t, t0 must be positive");
    const AgingKernel kernel(params.alpha, t0);
    const double tail = kernel.tail(t);
    if (fam.has_density()) return tail;
    if (fam.kind == LevyFamily::Kind::Poisson || fam.kind == LevyFamily::Kind::CompoundPoisson) {
        auto f = [&](double r) {
            return mittag_leffler(params.alpha,
                                  -fam.lambda * std::pow(t - r, params.alpha) / params.c);
        };
        return tail + detail::aging_convolution(params.alpha, t0, t, f, q.panels, q.nodes);
    }
    throw std::invalid_argument("zero_atom: unsupported family " + fam.label());
}

/// C = (sin(pi a)/pi) int_0^t P(Y_{t-r} in B) r^{-a} dr; the t0 -> inf constant.
inline double asymptotic_constant(const MarginalLaw& law, const BorelSet& B, double t,
                                  AgingQuadrature q = {}) {
    if (B.contains_zero())
        throw std::invalid_argument("asymptotic_constant: B must exclude 0");
    const double alpha = law.params().alpha;
    const double om = 1.0 - alpha;
    auto integrand = [&](double u) {
        const double r = t * std::pow(u, 1.0 / om);
        if (r >= t) return 0.0;
        return law.eval(t - r, B);
    };
    const double integral =
        std::pow(t, om) / om *
        integrate_gl_panels(integrand, graded_breaks(0.0, 1.0, 2 * q.panels, 0.5), q.nodes);
    return std::sin(M_PI * alpha) / M_PI * integral;
}

/// Leading-order tail approximation C t0^{alpha-1}.
inline double asymptotic_prob(const MarginalLaw& law, const BorelSet& B, double t, double t0,
                              AgingQuadrature q = {}) {
    return asymptotic_constant(law, B, t, q) * std::pow(t0, law.params().alpha - 1.0);
}

/// Asymptotic mean of fractional-Poisson aging increments:
/// lambda t0^{alpha-1} (sin(pi a)/pi) t Gamma(1-a).
inline double fpp_aging_mean(double alpha, double lambda, double t, double t0) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("fpp_aging_mean: alpha");
    if (!(lambda > 0.0 && t > 0.0 && t0 > 0.0))
        throw std::invalid_argument("fpp_aging_mean: lambda, t, t0 must be positive");
    return lambda * std::pow(t0, alpha - 1.0) * std::sin(M_PI * alpha) / M_PI * t *
           std::tgamma(1.0 - alpha);
}

// ---------------------------------------------------------------------------
// Monte Carlo drivers (replicate-indexed substreams: output is independent of
// the thread count).
// ---------------------------------------------------------------------------

/// n joint draws of (Y^{t0}_{t_1}, ..., Y^{t0}_{t_k}); returns one SampleSet per
/// time, values aligned by replicate.
inline std::vector<SampleSet> sample_aging_increments(const LevyFamily& fam,
                                                      const AlphaScale& params, double t0,
                                                      const std::vector<double>& times,
                                                      std::size_t n, StreamSpec base,
                                                      unsigned threads = 1,
                                                      double cutoff_ratio = 1e-4) {
    std::vector<std::vector<double>> cols(times.size(), std::vector<double>(n));
    parallel_for(n, threads, [&](std::size_t i) {
        Stream rng(StreamSpec{base.master_seed, base.stream_id + i});
        thread_local std::vector<double> vals;
        aging_increment_sample(fam, params, t0, times, rng, vals, cutoff_ratio);
        for (std::size_t j = 0; j < times.size(); ++j) cols[j][i] = vals[j];
    });
    std::vector<SampleSet> out(times.size());
    for (std::size_t j = 0; j < times.size(); ++j) {
        out[j].values = std::move(cols[j]);
        out[j].process = fam.label();
        out[j].alpha = params.alpha;
        out[j].c = params.c;
        out[j].t0 = t0;
        out[j].t = times[j];
        out[j].seed = base.master_seed;
    }
    return out;
}

/// n exact draws of the un-aged Y_t.
inline SampleSet sample_ctrwl(const LevyFamily& fam, const AlphaScale& params, double t,
                              std::size_t n, StreamSpec base, unsigned threads = 1) {
    SampleSet s;
    s.values.resize(n);
    parallel_for(n, threads, [&](std::size_t i) {
        Stream rng(StreamSpec{base.master_seed, base.stream_id + i});
        s.values[i] = ctrwl_sample(fam, params, t, rng);
    });
    s.process = fam.label();
    s.alpha = params.alpha;
    s.c = params.c;
    s.t0 = 0.0;
    s.t = t;
    s.seed = base.master_seed;
    return s;
}

/// Joint un-aged probability P(Y_{s_1} in B_1, ..., Y_{s_k} in B_k) estimated by
/// MC with shared drivers: per replicate one subordinator first-passage skeleton
/// and one vector of normal increments reused across calls (common random
/// numbers across quadrature nodes).
class JointLawEstimator {
public:
    JointLawEstimator(LevyFamily fam, AlphaScale params, double horizon, std::size_t n,
                      StreamSpec base, double cutoff_ratio = 1e-4)
        : fam_(fam), params_(params), n_(n) {
        if (fam.kind != LevyFamily::Kind::Brownian)
            throw std::invalid_argument("JointLawEstimator: brownian driver sharing only");
        FirstPassageEngine eng(params, horizon, cutoff_ratio);
        skeleton_jumps_.resize(n);
        for (std::size_t i = 0; i < n_; ++i) {
            Stream rng(StreamSpec{base.master_seed, base.stream_id + i});
            // store the full jump skeleton up to D > horizon
            auto& sk = skeleton_jumps_[i];
            double u = 0.0, d = 0.0;
            while (d <= horizon) {
                const double w = rng.exponential() / eng.jump_rate;
                u += w;
                d += eng.drift * w;
                const double jump = eng.cutoff * std::pow(rng.uniform01(), -1.0 / params.alpha);
                sk.push_back({u, d, jump});
                d += jump;
            }
            drift_ = eng.drift;
            // normal drivers, one per queried time coordinate (generous cap)
            std::array<double, 8> zs{};
            for (auto& z : zs) z = rng.normal();
            normals_.push_back(zs);
        }
    }

    /// E_t for replicate i from its stored skeleton (exact under the engine law).
    double inverse_at(std::size_t i, double t) const {
        double u_prev = 0.0, d_prev = 0.0;
        for (const auto& j : skeleton_jumps_[i]) {
            const double d_before = d_prev + (j.u - u_prev) * drift_;
            if (d_before > t) return u_prev + (t - d_prev) / drift_;
            if (d_before + j.jump > t) return j.u;
            u_prev = j.u;
            d_prev = d_before + j.jump;
        }
        throw HorizonError("JointLawEstimator: time beyond stored skeleton");
    }

    /// P(Y_{s_1} in B_1, ..., Y_{s_k} in B_k), s ascending, k <= 8.
    double joint_prob(const std::vector<double>& s, const std::vector<BorelSet>& B) const {
        if (s.size() != B.size() || s.empty() || s.size() > 8)
            throw std::invalid_argument("joint_prob: need 1..8 aligned times/sets");
        std::size_t hits = 0;
        for (std::size_t i = 0; i < n_; ++i) {
            double e_prev = 0.0, y = 0.0;
            bool ok = true;
            for (std::size_t j = 0; j < s.size(); ++j) {
                const double e = inverse_at(i, s[j]);
                const double de = e - e_prev;
                e_prev = e;
                y += fam_.mu * de + std::sqrt(fam_.A * std::max(de, 0.0)) * normals_[i][j];
                if (!B[j].contains(y)) {
                    ok = false;
                    break;
                }
            }
            if (ok) ++hits;
        }
        return static_cast<double>(hits) / static_cast<double>(n_);
    }

    std::size_t n() const { return n_; }

private:
    struct JumpEvent {
        double u;    // jump instant
        double d;    // unused placeholder for clarity in dumps
        double jump; // jump size
    };
    LevyFamily fam_;
    AlphaScale params_;
    std::size_t n_;
    double drift_ = 0.0;
    std::vector<std::vector<JumpEvent>> skeleton_jumps_;
    std::vector<std::array<double, 8>> normals_;
};

/// Joint aging probability for k sets (0 outside B_1):
/// int_0^{t_1} P(Y_{t_1-r} in B_1, ..., Y_{t_k-r} in B_k) p_{t0}(r) dr, the joint
/// factor MC-estimated on the quadrature grid with one shared ensemble.
inline double aging_joint_prob(const LevyFamily& fam, const AlphaScale& params,
                               const std::vector<BorelSet>& sets,
                               const std::vector<double>& times, double t0, std::size_t n_mc,
                               StreamSpec seed, AgingQuadrature q = {}) {
    if (sets.empty() || sets.size() != times.size())
        throw std::invalid_argument("aging_joint_prob: times/sets mismatch");
    if (sets[0].contains_zero())
        throw std::invalid_argument("aging_joint_prob: B_1 must exclude 0");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1]))
            throw std::invalid_argument("aging_joint_prob: times must be increasing");
    JointLawEstimator est(fam, params, times.back() * 1.05 + 1e-9, n_mc, seed);
    auto f = [&](double r) {
        std::vector<double> s(times.size());
        for (std::size_t j = 0; j < times.size(); ++j) s[j] = times[j] - r;
        if (s[0] <= 0.0) return 0.0;
        return est.joint_prob(s, sets);
    };
    return detail::aging_convolution(params.alpha, t0, times[0], f, q.panels, q.nodes);
}

// ---------------------------------------------------------------------------
// Scaling and limit checks.
// ---------------------------------------------------------------------------

struct KSLine {
    std::string label;
    double statistic = 0.0;
    double p_value = 1.0;
    bool pass = true;
};

struct SelfSimilarityReport {
    double alpha = 0.0, t0 = 0.0, a = 1.0, hurst = 0.0;
    std::vector<double> times;
    std::uint64_t seed = 0;
    std::size_t n = 0;
    double level = 0.01;
    std::vector<KSLine> coordinate_tests;
    KSLine joint_rank_test;
    double zero_freq_left = 0.0, zero_freq_right = 0.0;
    double zero_freq_sigma = 0.0;
    bool zero_atom_pass = true;
    bool pass = false;
};

/// Rank-sum projection for a joint two-sample comparison: pool the two
/// ensembles, rank each coordinate over the pool, and compare the per-sample
/// rank sums with a two-sample KS.
inline KSLine joint_rank_ks(const std::vector<std::vector<double>>& lhs,
                            const std::vector<std::vector<double>>& rhs, double level) {
    const std::size_t k = lhs.size();
    const std::size_t n1 = lhs[0].size(), n2 = rhs[0].size();
    std::vector<double> score1(n1, 0.0), score2(n2, 0.0);
    std::vector<std::pair<double, std::size_t>> pool(n1 + n2);
    for (std::size_t j = 0; j < k; ++j) {
        for (std::size_t i = 0; i < n1; ++i) pool[i] = {lhs[j][i], i};
        for (std::size_t i = 0; i < n2; ++i) pool[n1 + i] = {rhs[j][i], n1 + i};
        std::sort(pool.begin(), pool.end());
        for (std::size_t r = 0; r < pool.size(); ++r) {
            const std::size_t id = pool[r].second;
            const double rank = static_cast<double>(r);
            if (id < n1)
                score1[id] += rank;
            else
                score2[id - n1] += rank;
        }
    }
    auto e1 = EmpiricalDist::from_samples(score1);
    auto e2 = EmpiricalDist::from_samples(score2);
    auto res = ks_two_sample(e1, e2);
    return {"joint-rank", res.statistic, res.p_value, res.p_value >= level};
}

/// Distributional check of (Y^{t0}_{a t_i}) against (a^{alpha/beta} Y^{t0/a}_{t_i}).
inline SelfSimilarityReport self_similarity_check(const LevyFamily& fam,
                                                  const AlphaScale& params, double t0, double a,
                                                  const std::vector<double>& times,
                                                  std::size_t n, StreamSpec seed,
                                                  double level = 0.01, unsigned threads = 1) {
    const double beta = fam.stability_index(); // throws for non-stable families
    if (!(a > 0.0)) throw std::invalid_argument("self_similarity_check: a must be positive");
    SelfSimilarityReport rep;
    rep.alpha = params.alpha;
    rep.t0 = t0;
    rep.a = a;
    rep.hurst = params.alpha / beta;
    rep.times = times;
    rep.seed = seed.master_seed;
    rep.n = n;
    rep.level = level;

    std::vector<double> scaled_times(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) scaled_times[i] = a * times[i];
    auto lhs = sample_aging_increments(fam, params, t0, scaled_times, n, seed, threads);
    StreamSpec seed2{seed.master_seed, seed.stream_id + n + 1000003};
    auto rhs = sample_aging_increments(fam, params, t0 / a, times, n, seed2, threads);
    const double scale = std::pow(a, rep.hurst);
    for (auto& s : rhs)
        for (auto& v : s.values) v *= scale;

    const double bonferroni = level / static_cast<double>(times.size());
    bool all = true;
    std::vector<std::vector<double>> lcols, rcols;
    for (std::size_t j = 0; j < times.size(); ++j) {
        auto e1 = EmpiricalDist::from_samples(lhs[j].values);
        auto e2 = EmpiricalDist::from_samples(rhs[j].values);
        auto res = ks_two_sample(e1, e2);
        KSLine line{"t=" + std::to_string(times[j]), res.statistic, res.p_value,
                    res.p_value >= bonferroni};
        all = all && line.pass;
        rep.coordinate_tests.push_back(line);
        lcols.push_back(lhs[j].values);
        rcols.push_back(rhs[j].values);
        if (j == 0) {
            const auto z1 = e1.zero_fraction();
            const auto z2 = e2.zero_fraction();
            rep.zero_freq_left = z1;
            rep.zero_freq_right = z2;
            const double pbar = 0.5 * (z1 + z2);
            rep.zero_freq_sigma = std::sqrt(2.0 * pbar * (1.0 - pbar) / static_cast<double>(n));
            rep.zero_atom_pass = std::abs(z1 - z2) <= 3.0 * std::max(rep.zero_freq_sigma, 1e-12);
        }
    }
    rep.joint_rank_test = joint_rank_ks(lcols, rcols, level);
    rep.pass = all && rep.joint_rank_test.pass && rep.zero_atom_pass;
    return rep;
}

struct StationarityReport {
    std::vector<double> alphas;
    std::vector<double> ks_distance;
    double t = 0.0, t0 = 0.0;
    std::uint64_t seed = 0;
    std::size_t n = 0;
    double final_threshold = 0.02;
    double noise_floor = 0.0;
    bool monotone_within_noise = true;
    bool final_below_threshold = false;
    double kernel_mass_small_r = 0.0; // aging-kernel cdf at 0.05 t for the last alpha
    bool pass = false;
};

/// KS distance between aged and un-aged marginals along an alpha grid rising
/// toward 1; the aging kernel concentrates at 0 and the distance must shrink.
inline StationarityReport stationarity_limit_check(const LevyFamily& fam, double c, double t,
                                                   double t0, const std::vector<double>& alphas,
                                                   std::size_t n, StreamSpec seed,
                                                   double final_threshold = 0.02,
                                                   unsigned threads = 1) {
    StationarityReport rep;
    rep.alphas = alphas;
    rep.t = t;
    rep.t0 = t0;
    rep.seed = seed.master_seed;
    rep.n = n;
    rep.final_threshold = final_threshold;
    rep.noise_floor = 3.0 * std::sqrt(2.0 / static_cast<double>(n));
    std::uint64_t sid = seed.stream_id;
    for (double a : alphas) {
        AlphaScale params(a, c);
        auto aged = sample_aging_increments(fam, params, t0, {t}, n,
                                            StreamSpec{seed.master_seed, sid}, threads);
        sid += n + 17;
        auto plain = sample_ctrwl(fam, params, t, n, StreamSpec{seed.master_seed, sid}, threads);
        sid += n + 17;
        auto e1 = EmpiricalDist::from_samples(aged[0].values);
        auto e2 = EmpiricalDist::from_samples(plain.values);
        rep.ks_distance.push_back(ks_two_sample(e1, e2).statistic);
    }
    for (std::size_t i = 0; i + 1 < rep.ks_distance.size(); ++i)
        if (rep.ks_distance[i + 1] > rep.ks_distance[i] + rep.noise_floor)
            rep.monotone_within_noise = false;
    rep.final_below_threshold = rep.ks_distance.back() < final_threshold;
    const AgingKernel k_last(alphas.back(), t0);
    rep.kernel_mass_small_r = k_last.cdf(0.05 * t);
    rep.pass = rep.monotone_within_noise && rep.final_below_threshold;
    return rep;
}

/// MC mean of fractional-Poisson aging increments (counts over the shared
/// subordinator increment); infinite-mean laws never show up here because the
/// increment over a finite window is integrable.
inline double fpp_aging_mean_mc(double alpha, double lambda, double t, double t0, std::size_t n,
                                StreamSpec seed, unsigned threads = 1,
                                double cutoff_ratio = 1e-4) {
    const LevyFamily fam = LevyFamily::poisson(lambda);
    const AlphaScale params(alpha, 1.0);
    std::vector<double> vals(n);
    parallel_for(n, threads, [&](std::size_t i) {
        Stream rng(StreamSpec{seed.master_seed, seed.stream_id + i});
        vals[i] = aging_increment_sample(fam, params, t0, t, rng, cutoff_ratio);
    });
    KahanSum s;
    for (double v : vals) s.add(v);
    return s.value() / static_cast<double>(n);
}

} // namespace actrwl
