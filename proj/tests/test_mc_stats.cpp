#include <catch2/catch_amalgamated.hpp>

#include "actrwl/mc_stats.hpp"
#include "actrwl/parallel.hpp"
#include "actrwl/rng.hpp"

using namespace actrwl;

TEST_CASE("ks one-sample: null calibration on uniforms", "[mc_stats]") {
    // under the null the p-value is uniform: its mean over trials sits near 1/2
    double psum = 0.0;
    const int trials = 200, n = 400;
    for (int t = 0; t < trials; ++t) {
        Stream rng(StreamSpec{777, static_cast<std::uint64_t>(t)});
        std::vector<double> v(n);
        for (auto& x : v) x = rng.uniform01();
        auto e = EmpiricalDist::from_samples(std::move(v));
        psum += ks_one_sample(e, [](double x) { return std::clamp(x, 0.0, 1.0); }).p_value;
    }
    CHECK_THAT(psum / trials, Catch::Matchers::WithinAbs(0.5, 0.1));
}

TEST_CASE("ks one-sample: gross alternative is crushed", "[mc_stats]") {
    Stream rng(StreamSpec{778, 0});
    std::vector<double> v(10000);
    for (auto& x : v) x = rng.uniform01() + 0.3;
    auto e = EmpiricalDist::from_samples(std::move(v));
    auto res = ks_one_sample(e, [](double x) { return std::clamp(x, 0.0, 1.0); });
    CHECK(res.p_value < 1e-6);
}

TEST_CASE("ks one-sample refuses atom contamination", "[mc_stats]") {
    std::vector<double> v(50, 0.5);
    v[0] = 0.0;
    auto e = EmpiricalDist::from_samples(std::move(v));
    CHECK(e.zero_count() == 1);
    CHECK_THROWS_AS(ks_one_sample(e, [](double x) { return x; }), std::invalid_argument);
    auto clean = e.without_zeros();
    CHECK(clean.zero_count() == 0);
    CHECK(clean.n() == 49);
}

TEST_CASE("ks two-sample basics and ties", "[mc_stats]") {
    Stream rng(StreamSpec{779, 0});
    std::vector<double> v(500);
    for (auto& x : v) x = rng.normal();
    auto a = EmpiricalDist::from_samples(v);
    auto b = EmpiricalDist::from_samples(v);
    CHECK(ks_two_sample(a, b).statistic == 0.0);

    // lattice data with heavy ties must not blow up
    std::vector<double> l1, l2;
    for (int i = 0; i < 400; ++i) {
        l1.push_back(static_cast<double>(rng.poisson(2.0)));
        l2.push_back(static_cast<double>(rng.poisson(2.0)));
    }
    auto e1 = EmpiricalDist::from_samples(std::move(l1));
    auto e2 = EmpiricalDist::from_samples(std::move(l2));
    auto res = ks_two_sample(e1, e2);
    CHECK(res.statistic >= 0.0);
    CHECK(res.p_value > 1e-4); // same law: should not reject hard
}

TEST_CASE("wilson interval with continuity correction", "[mc_stats]") {
    auto [lo, hi] = binomial_ci(50, 100, 0.95);
    // oracle: the closed-form continuity-corrected Wilson bounds
    const double z = normal_quantile(0.975);
    const double z2 = z * z, n = 100.0, p = 0.5;
    const double lo_oracle =
        (2.0 * n * p + z2 - 1.0 -
         z * std::sqrt(z2 - 2.0 - 1.0 / n + 4.0 * p * (n * (1.0 - p) + 1.0))) /
        (2.0 * (n + z2));
    CHECK_THAT(lo, Catch::Matchers::WithinAbs(lo_oracle, 1e-12));
    CHECK_THAT(lo, Catch::Matchers::WithinAbs(0.398, 2.5e-3));
    CHECK_THAT(hi, Catch::Matchers::WithinAbs(0.602, 2.5e-3));
    CHECK_THAT(lo + hi, Catch::Matchers::WithinAbs(1.0, 1e-12)); // symmetry at p = 1/2
    auto [l0, h0] = binomial_ci(0, 50, 0.95);
    CHECK(l0 == 0.0);
    CHECK(h0 > 0.0);
}

TEST_CASE("chi-square on poisson counts: null calibration", "[mc_stats]") {
    const double mean = 2.0;
    const int n = 5000;
    const int cells = 8;
    std::vector<double> expected(cells, 0.0);
    double pk = std::exp(-mean);
    double tail = 1.0;
    for (int j = 0; j < cells - 1; ++j) {
        expected[j] = n * pk;
        tail -= pk;
        pk *= mean / (j + 1);
    }
    expected[cells - 1] = n * tail;

    double psum = 0.0;
    const int trials = 100;
    for (int t = 0; t < trials; ++t) {
        Stream rng(StreamSpec{780, static_cast<std::uint64_t>(t)});
        std::vector<double> obs(cells, 0.0);
        for (int i = 0; i < n; ++i) {
            const auto k = rng.poisson(mean);
            obs[std::min<std::uint64_t>(k, cells - 1)] += 1.0;
        }
        psum += chi_square_counts(obs, expected).p_value;
    }
    CHECK_THAT(psum / trials, Catch::Matchers::WithinAbs(0.5, 0.12));
}

TEST_CASE("streams: reproducible and independent", "[mc_stats]") {
    Stream a(StreamSpec{42, 7});
    Stream b(StreamSpec{42, 7});
    for (int i = 0; i < 1000; ++i) REQUIRE(a.uniform01() == b.uniform01());

    // distinct stream ids: lag-0 cross-correlation below 3/sqrt(n)
    const std::size_t n = 1000000;
    Stream s1(StreamSpec{42, 1});
    Stream s2(StreamSpec{42, 2});
    double sxy = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = s1.uniform01(), y = s2.uniform01();
        sx += x;
        sy += y;
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
    }
    const double nd = static_cast<double>(n);
    const double corr = (sxy / nd - sx / nd * sy / nd) /
                        std::sqrt((sxx / nd - sx / nd * sx / nd) *
                                  (syy / nd - sy / nd * sy / nd));
    CHECK(std::abs(corr) < 3.0 / std::sqrt(nd));
}

TEST_CASE("parallel replicate slots are schedule independent", "[mc_stats]") {
    const std::size_t n = 5000;
    auto run = [&](unsigned threads) {
        std::vector<double> out(n);
        parallel_for(n, threads, [&](std::size_t i) {
            Stream rng(StreamSpec{9001, i});
            out[i] = rng.normal() + rng.exponential();
        });
        return out;
    };
    const auto a = run(1);
    const auto b = run(4);
    const auto c = run(7);
    REQUIRE(a == b);
    REQUIRE(a == c);
}

TEST_CASE("normal quantile sanity", "[mc_stats]") {
    CHECK_THAT(normal_quantile(0.975), Catch::Matchers::WithinAbs(1.959964, 1e-5));
    CHECK_THAT(normal_quantile(0.5), Catch::Matchers::WithinAbs(0.0, 1e-9));
    CHECK_THAT(normal_quantile(0.0013498980316301), Catch::Matchers::WithinAbs(-3.0, 1e-6));
}
