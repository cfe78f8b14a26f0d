#include <catch2/catch_amalgamated.hpp>

#include "actrwl/dist.hpp"
#include "actrwl/mc_stats.hpp"
#include "oracles.hpp"

using namespace actrwl;

namespace {

// independent normalization oracle: map x = h u/(1-u) so the integrand
// becomes the Beta(mu,nu) density in u
double gb2_mass_quad(const GB2Params& p) {
    auto f = [&](double u) {
        const double x = p.h * u / (1.0 - u);
        const double jac = p.h / ((1.0 - u) * (1.0 - u));
        return gb2_pdf(p, x) * jac;
    };
    auto br = graded_breaks(1e-13, 0.5, 24, 0.5);
    auto br2 = graded_breaks(1e-13, 0.5, 24, 0.5);
    double acc = integrate_gl_panels(f, br, 32);
    for (std::size_t i = br2.size(); i-- > 1;)
        acc += integrate_gl(f, 1.0 - br2[i], 1.0 - br2[i - 1], 32);
    return acc;
}

} // namespace

TEST_CASE("gb2 pdf frozen points and scale property", "[dist]") {
    CHECK_THAT(gb2_pdf(GB2Params(0.5, 0.5, 1.0), 1.0),
               Catch::Matchers::WithinAbs(1.0 / (2.0 * M_PI), 1e-13));
    CHECK_THAT(gb2_pdf(GB2Params(0.5, 0.5, 2.0), 2.0),
               Catch::Matchers::WithinAbs(1.0 / (4.0 * M_PI), 1e-13));
    // f(x; mu,nu,h) = (1/h) f(x/h; mu,nu,1)
    Stream rng(StreamSpec{11, 0});
    for (int i = 0; i < 50; ++i) {
        const double mu = 0.1 + 2.0 * rng.uniform01();
        const double nu = 0.1 + 2.0 * rng.uniform01();
        const double h = 0.2 + 4.0 * rng.uniform01();
        const double x = 0.05 + 5.0 * rng.uniform01();
        REQUIRE_THAT(gb2_pdf(GB2Params(mu, nu, h), x),
                     Catch::Matchers::WithinRel(gb2_pdf(GB2Params(mu, nu, 1.0), x / h) / h, 1e-12));
    }
    CHECK_THROWS_AS(gb2_pdf(GB2Params(0.5, 0.5, 1.0), 0.0), std::invalid_argument);
    CHECK_THROWS_AS(GB2Params(0.0, 0.5, 1.0), std::invalid_argument);
}

TEST_CASE("gb2 normalization for random parameter triples", "[dist]") {
    Stream rng(StreamSpec{12, 0});
    for (int i = 0; i < 50; ++i) {
        const GB2Params p(0.15 + 1.5 * rng.uniform01(), 0.15 + 1.5 * rng.uniform01(),
                          0.3 + 3.0 * rng.uniform01());
        INFO("mu " << p.mu << " nu " << p.nu << " h " << p.h);
        REQUIRE_THAT(gb2_mass_quad(p), Catch::Matchers::WithinAbs(1.0, 1e-7));
    }
}

TEST_CASE("aging kernel cdf: frozen values, monotonicity, consistency with pdf", "[dist]") {
    AgingKernel k(0.5, 1.0);
    CHECK(k.cdf(0.0) == 0.0);
    CHECK_THAT(k.cdf(1.0), Catch::Matchers::WithinAbs(0.5, 1e-13));
    AgingKernel k3(0.5, 3.0);
    CHECK_THAT(k3.cdf(1.0), Catch::Matchers::WithinAbs(1.0 / 3.0, 1e-12));
    CHECK_THAT(k3.tail(1.0), Catch::Matchers::WithinAbs(2.0 / 3.0, 1e-12));

    // cdf equals the integral of the pdf
    AgingKernel k8(0.8, 2.0);
    auto f = [&](double r) { return k8.pdf(r); };
    const double got = integrate_gl_panels(f, graded_breaks(1e-13, 1.5, 28, 0.5), 32);
    CHECK_THAT(got, Catch::Matchers::WithinAbs(k8.cdf(1.5), 1e-7));

    double prev = 0.0;
    for (double x : {0.1, 0.5, 1.0, 2.0, 10.0, 100.0}) {
        const double v = k8.cdf(x);
        CHECK(v > prev);
        prev = v;
    }
    CHECK(k8.cdf(1e14) > 1.0 - 1e-2);
    CHECK_THROWS_AS(AgingKernel(1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(AgingKernel(0.5, 0.0), std::invalid_argument);
}

TEST_CASE("aging kernel sampler: determinism, KS, tail frequency", "[dist]") {
    AgingKernel k(0.5, 1.0);
    Stream a(StreamSpec{77, 3});
    Stream b(StreamSpec{77, 3});
    for (int i = 0; i < 64; ++i) REQUIRE(k.sample(a) == k.sample(b));

    const std::size_t n = 100000;
    Stream rng(StreamSpec{77, 4});
    std::vector<double> v(n);
    for (auto& x : v) x = k.sample(rng);
    auto e = EmpiricalDist::from_samples(std::move(v));
    auto res = ks_one_sample(e, [&](double x) { return k.cdf(x); });
    CHECK(res.p_value >= 0.01);
    // median lands at the analytic half-mass point
    CHECK_THAT(e.cdf(1.0), Catch::Matchers::WithinAbs(0.5, 3.0 * 0.5 / std::sqrt(double(n))));

    AgingKernel k9(0.9, 1.0);
    Stream rng9(StreamSpec{77, 5});
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (k9.sample(rng9) > 10.0) ++hits;
    const double p = k9.tail(10.0);
    const double sig = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
    CHECK_THAT(static_cast<double>(hits) / n, Catch::Matchers::WithinAbs(p, 3.0 * sig));
}

TEST_CASE("aging kernel laplace transform", "[dist]") {
    // limits: total mass at s -> 0+, stationary limit alpha -> 1
    AgingKernel k(0.5, 1.0);
    CHECK_THAT(k.laplace(1e-9), Catch::Matchers::WithinAbs(1.0, 1e-4));
    AgingKernel k_near1(1.0 - 1e-12, 1.0);
    for (double s : {0.3, 1.0, 4.0})
        CHECK_THAT(k_near1.laplace(s), Catch::Matchers::WithinAbs(1.0, 1e-10));

    // frozen half-index value e * erfc(1), oracle from quadrature
    const double want = oracles::erfcx_quad(1.0);
    CHECK_THAT(k.laplace(1.0), Catch::Matchers::WithinAbs(want, 1e-10));
    CHECK_THAT(k.laplace(1.0), Catch::Matchers::WithinAbs(0.427584, 1e-6));

    // agreement with direct quadrature of exp(-sr) against the pdf
    for (double alpha : {0.3, 0.6, 0.9}) {
        for (double st0 : {0.25, 1.0, 6.0}) {
            AgingKernel kk(alpha, 1.0);
            const double s = st0;
            auto f = [&](double r) { return std::exp(-s * r) * kk.pdf(r); };
            double quad = integrate_gl_panels(f, graded_breaks(1e-14, 1.0, 30, 0.5), 48);
            double lo = 1.0;
            while (s * lo < 75.0) {
                quad += integrate_gl(f, lo, 2.0 * lo, 48);
                lo *= 2.0;
            }
            INFO("alpha " << alpha << " s t0 " << st0);
            REQUIRE_THAT(kk.laplace(s), Catch::Matchers::WithinAbs(quad, 1e-7));
        }
    }

    // completely monotone in s; decade decay and ratio stabilization in t0
    double prev = 1.0;
    for (double s = 0.05; s < 20.0; s *= 1.3) {
        const double v = k.laplace(s);
        CHECK(v < prev);
        prev = v;
    }
    double prev_t0 = 2.0;
    std::vector<double> ratios;
    for (double t0 : {1.0, 10.0, 100.0, 1000.0}) {
        AgingKernel kk(0.5, t0);
        const double v = kk.laplace(1.0);
        CHECK(v < prev_t0);
        prev_t0 = v;
        ratios.push_back(v / std::pow(t0, 0.5 - 1.0));
    }
    CHECK_THAT(ratios[3] / ratios[2], Catch::Matchers::WithinAbs(1.0, 0.10));
}

TEST_CASE("remaining life / age / overshoot / undershoot identities", "[dist]") {
    Stream rng(StreamSpec{13, 0});
    for (int i = 0; i < 100; ++i) {
        const double alpha = 0.1 + 0.8 * rng.uniform01();
        const double t = 0.2 + 4.0 * rng.uniform01();
        const double r = 0.05 + 6.0 * rng.uniform01();
        REQUIRE_THAT(remaining_life_pdf(alpha, t, r),
                     Catch::Matchers::WithinRel(gb2_pdf(GB2Params(1.0 - alpha, alpha, t), r),
                                                1e-12));
        // overshoot g(r') = remaining_life_pdf(alpha, t, r' - t) for r' > t
        const double rp = t + r;
        REQUIRE_THAT(overshoot_pdf(alpha, t, rp),
                     Catch::Matchers::WithinRel(remaining_life_pdf(alpha, t, rp - t), 1e-12));
        // undershoot h(v) = age_pdf_gb1(alpha, t, t - v) by reflection
        const double v = t * (0.02 + 0.96 * rng.uniform01());
        REQUIRE_THAT(undershoot_pdf(alpha, t, v),
                     Catch::Matchers::WithinRel(age_pdf_gb1(alpha, t, t - v), 1e-12));
    }

    // normalizations
    for (double alpha : {0.3, 0.7}) {
        const double t = 1.7;
        auto fv = [&](double v) { return age_pdf_gb1(alpha, t, v); };
        auto inner = graded_breaks(1e-13 * t, 0.5 * t, 22, 0.5);
        double mass = integrate_gl_panels(fv, inner, 32);
        auto outer = graded_breaks(1e-13 * t, 0.5 * t, 22, 0.5);
        for (std::size_t i = outer.size(); i-- > 1;)
            mass += integrate_gl(fv, t - outer[i], t - outer[i - 1], 32);
        INFO("alpha " << alpha);
        CHECK_THAT(mass, Catch::Matchers::WithinAbs(1.0, 1e-7));
        // arcsine symmetry at alpha = 1/2: age cdf at t/2 is 1/2
        CHECK_THAT(age_cdf_gb1(0.5, 1.0, 0.5), Catch::Matchers::WithinAbs(0.5, 1e-13));
    }
}

TEST_CASE("gb2 with nu = alpha <= 1 has unbounded truncated mean", "[dist]") {
    // truncated mean grows like M^{1-alpha}: assert the growth ratio, not a limit
    const double alpha = 0.5;
    AgingKernel k(alpha, 1.0);
    auto trunc_mean = [&](double M) {
        auto f = [&](double x) { return x * k.pdf(x); };
        double acc = integrate_gl_panels(f, graded_breaks(1e-13, 1.0, 24, 0.5), 32);
        double lo = 1.0;
        while (lo < M) {
            acc += integrate_gl(f, lo, std::min(2.0 * lo, M), 32);
            lo *= 2.0;
        }
        return acc;
    };
    const double m2 = trunc_mean(1e2), m4 = trunc_mean(1e4);
    const double expected_ratio = std::pow(1e4 / 1e2, 1.0 - alpha);
    CHECK(m4 > 2.0 * m2); // grows without bound, never converging
    CHECK_THAT(m4 / m2, Catch::Matchers::WithinRel(expected_ratio, 0.25));
}

TEST_CASE("mittag-leffler waiting times", "[dist]") {
    // alpha = 1 degenerates to the exponential law
    {
        Stream rng(StreamSpec{14, 0});
        const std::size_t n = 100000;
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += ml_waiting_sample(1.0, 2.0, rng);
        mean /= n;
        CHECK_THAT(mean, Catch::Matchers::WithinAbs(0.5, 3.0 * 0.5 / std::sqrt(double(n))));
    }
    // survival matches E_alpha(-lambda t^alpha) at several probes
    for (double alpha : {0.5, 0.8}) {
        const double lambda = 1.0;
        Stream rng(StreamSpec{14, 1});
        const std::size_t n = 100000;
        std::vector<double> w(n);
        for (auto& x : w) x = ml_waiting_sample(alpha, lambda, rng);
        for (double t : {0.5, 1.0, 2.0, 5.0}) {
            const double p = mittag_leffler(alpha, -lambda * std::pow(t, alpha));
            std::size_t hits = 0;
            for (double x : w)
                if (x > t) ++hits;
            const double sig = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
            INFO("alpha " << alpha << " t " << t);
            REQUIRE_THAT(static_cast<double>(hits) / n,
                         Catch::Matchers::WithinAbs(p, 3.0 * sig));
        }
    }
    // determinism per seed
    Stream a(StreamSpec{14, 2}), b(StreamSpec{14, 2});
    for (int i = 0; i < 32; ++i) REQUIRE(ml_waiting_sample(0.6, 1.5, a) == ml_waiting_sample(0.6, 1.5, b));
}
