#include <catch2/catch_amalgamated.hpp>

#include "actrwl/aging.hpp"
#include "actrwl/mc_stats.hpp"
#include "oracles.hpp"

using namespace actrwl;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

BorelSet everything_but_zero() {
    BorelSet b;
    b.intervals.push_back({-kInf, -1e-300});
    b.intervals.push_back({0.0, kInf});
    b.validate();
    return b;
}

} // namespace

TEST_CASE("borel sets: membership and validation", "[aging]") {
    auto b = BorelSet::interval(0.2, 0.7);
    CHECK(b.contains(0.7));
    CHECK_FALSE(b.contains(0.2)); // half-open (lo, hi]
    CHECK_FALSE(b.contains_zero());
    auto neg = BorelSet::interval(-kInf, -0.5);
    CHECK(neg.contains(-0.5));
    CHECK_FALSE(neg.contains(-0.4));
    auto z = BorelSet::interval(-1.0, 0.0);
    CHECK(z.contains_zero());
    BorelSet bad;
    bad.intervals.push_back({0.0, 1.0});
    bad.intervals.push_back({0.5, 2.0});
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("marginal law eval is continuous in t and consistent with sampling", "[aging]") {
    const AlphaScale p(0.5);
    SubordinatedLaw law(LevyFamily::brownian(0.0, 1.0), p);
    auto B = BorelSet::interval(1.0, kInf);
    // continuity on a test grid: shrinking h shrinks the increment
    for (double t : {0.3, 1.0, 2.5}) {
        double prev = 1.0;
        for (double h : {0.1, 0.01, 0.001}) {
            const double d = std::abs(law.eval(t + h, B) - law.eval(t, B));
            CHECK(d < prev + 1e-12);
            prev = d;
        }
        CHECK(prev < 1e-3);
    }
    // MC cross-check of the subordination quadrature
    const std::size_t n = 200000;
    auto s = sample_ctrwl(LevyFamily::brownian(0.0, 1.0), p, 1.0, n, StreamSpec{401, 0}, 4);
    std::size_t hits = 0;
    for (double v : s.values)
        if (B.contains(v)) ++hits;
    const double want = law.eval(1.0, B);
    const double sig = std::sqrt(want * (1.0 - want) / double(n));
    CHECK_THAT(double(hits) / n, Catch::Matchers::WithinAbs(want, 3.0 * sig));
}

TEST_CASE("aging probability: complement identity and kernel degeneration", "[aging]") {
    const AlphaScale p(0.5);
    SubordinatedLaw law(LevyFamily::brownian(0.0, 1.0), p);

    // B = R \ {0}: probability is exactly the non-atom mass
    const double got = aging_prob(law, everything_but_zero(), 1.0, 1.0);
    const double atom = zero_atom(LevyFamily::brownian(0.0, 1.0), p, 1.0, 1.0);
    CHECK_THAT(got + atom, Catch::Matchers::WithinAbs(1.0, 1e-3));

    // t0 -> 0+: kernel concentrates at 0 and the aged law recovers the plain law
    auto B = BorelSet::interval(1.0, kInf);
    CHECK_THAT(aging_prob(law, B, 1.0, 1e-4),
               Catch::Matchers::WithinAbs(law.eval(1.0, B), 1e-3));

    // refinement error estimate is small
    auto [v, err] = aging_prob_with_error(law, B, 1.0, 1.0);
    CHECK(err <= 1e-6);
    CHECK(v > 0.0);
    CHECK(v < 1.0);

    CHECK_THROWS_AS(aging_prob(law, BorelSet::interval(-1.0, 1.0), 1.0, 1.0),
                    std::invalid_argument);
}

TEST_CASE("aging probability agrees with path MC at 3 sigma", "[aging]") {
    const AlphaScale p(0.5);
    const LevyFamily fam = LevyFamily::brownian(0.0, 1.0);
    SubordinatedLaw law(fam, p);
    const std::size_t n = 200000;
    auto sets = sample_aging_increments(fam, p, 1.0, {1.0}, n, StreamSpec{402, 0}, 4);
    for (const auto& B : {BorelSet::interval(1.0, kInf), BorelSet::interval(-kInf, -0.5),
                          BorelSet::interval(0.2, 0.7)}) {
        const auto [pq, qe] = aging_prob_with_error(law, B, 1.0, 1.0);
        std::size_t hits = 0;
        for (double v : sets[0].values)
            if (B.contains(v)) ++hits;
        const double pm = double(hits) / n;
        const double sig = std::sqrt(pq * (1.0 - pq) / double(n));
        INFO("B = " << B.to_string() << " quad " << pq << " mc " << pm);
        CHECK_THAT(pm, Catch::Matchers::WithinAbs(pq, 3.0 * sig + qe));
    }
}

TEST_CASE("total mass: atom plus a fine partition of R minus zero sums to one", "[aging]") {
    const AlphaScale p(0.5);
    const LevyFamily fam = LevyFamily::brownian(0.0, 1.0);
    SubordinatedLaw law(fam, p);
    const double t = 1.0, t0 = 1.0;
    BorelSet partition;
    partition.intervals.push_back({-kInf, -2.0});
    for (double x = -2.0; x < -0.1; x += 0.25) partition.intervals.push_back({x, x + 0.25});
    partition.intervals.push_back({-0.1, -1e-300});
    partition.intervals.push_back({0.0, 0.1});
    for (double x = 0.1; x < 2.0; x += 0.25) partition.intervals.push_back({x, x + 0.25});
    partition.intervals.push_back({2.1, kInf});
    // fix the seam from the loop step
    partition.intervals[partition.intervals.size() - 2] = {1.85, 2.1};
    partition.validate();
    const double cont = aging_prob(law, partition, t, t0);
    const double atom = zero_atom(fam, p, t, t0);
    CHECK_THAT(cont + atom, Catch::Matchers::WithinAbs(1.0, 1e-3));
}

TEST_CASE("aging probability is non-increasing in t0 for sets away from the origin",
          "[aging]") {
    const AlphaScale p(0.5);
    SubordinatedLaw law(LevyFamily::brownian(0.0, 1.0), p);
    auto B = BorelSet::interval(1.0, kInf);
    double prev = 1.0;
    for (double t0 : {0.25, 0.5, 1.0, 2.0, 5.0, 20.0}) {
        const double v = aging_prob(law, B, 1.0, t0);
        CHECK(v <= prev + 1e-9);
        prev = v;
    }
}

TEST_CASE("zero atom: closed forms, family independence, counting branch", "[aging]") {
    const AlphaScale p(0.5);
    CHECK_THAT(zero_atom(LevyFamily::brownian(0.0, 1.0), p, 1.0, 1.0),
               Catch::Matchers::WithinAbs(0.5, 1e-12));
    // identical across density families
    CHECK(zero_atom(LevyFamily::brownian(0.0, 1.0), p, 0.7, 2.0) ==
          zero_atom(LevyFamily::symmetric_stable(1.5), p, 0.7, 2.0));

    // MC check for the stable family
    const std::size_t n = 100000;
    std::vector<double> v(n);
    parallel_for(n, 4, [&](std::size_t i) {
        Stream rng(StreamSpec{403, i});
        v[i] = aging_increment_sample(LevyFamily::symmetric_stable(1.5), p, 1.0, 1.0, rng);
    });
    std::size_t zeros = 0;
    for (double x : v)
        if (x == 0.0) ++zeros;
    const double sig = std::sqrt(0.25 / double(n));
    CHECK_THAT(double(zeros) / n, Catch::Matchers::WithinAbs(0.5, 3.0 * sig));

    // counting family: tail plus the regenerated-at-zero mass; MC cross-check
    const double atom_fpp = zero_atom(LevyFamily::poisson(1.0), p, 1.0, 1.0);
    CHECK(atom_fpp > 0.5);
    std::vector<double> w(n);
    parallel_for(n, 4, [&](std::size_t i) {
        Stream rng(StreamSpec{404, i});
        w[i] = aging_increment_sample(LevyFamily::poisson(1.0), p, 1.0, 1.0, rng);
    });
    std::size_t z2 = 0;
    for (double x : w)
        if (x == 0.0) ++z2;
    const double sig2 = std::sqrt(atom_fpp * (1.0 - atom_fpp) / double(n));
    CHECK_THAT(double(z2) / n, Catch::Matchers::WithinAbs(atom_fpp, 3.0 * sig2));
}

TEST_CASE("joint aging probability: k=1 reduction, k=2 against direct MC, monotonicity",
          "[aging]") {
    const AlphaScale p(0.5);
    const LevyFamily fam = LevyFamily::brownian(0.0, 1.0);
    SubordinatedLaw law(fam, p);
    auto B = BorelSet::interval(0.0, kInf);
    const std::size_t n_mc = 200000;

    const double single = aging_prob(law, B, 1.0, 1.0);
    const double joint1 = aging_joint_prob(fam, p, {B}, {1.0}, 1.0, n_mc, StreamSpec{405, 0});
    CHECK_THAT(joint1, Catch::Matchers::WithinAbs(single, 4.0 / std::sqrt(double(n_mc)) + 5e-3));

    // k = 2 against a brute-force joint MC with independent randomness
    const double joint2 =
        aging_joint_prob(fam, p, {B, B}, {1.0, 2.0}, 1.0, n_mc, StreamSpec{406, 0});
    auto sets = sample_aging_increments(fam, p, 1.0, {1.0, 2.0}, n_mc, StreamSpec{407, 0}, 4);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n_mc; ++i)
        if (B.contains(sets[0].values[i]) && B.contains(sets[1].values[i])) ++hits;
    const double direct = double(hits) / double(n_mc);
    const double sig = std::sqrt(direct * (1.0 - direct) / double(n_mc));
    CHECK_THAT(joint2, Catch::Matchers::WithinAbs(direct, 3.0 * (sig * std::sqrt(2.0)) + 5e-3));

    // shrinking B_2 never increases the joint probability
    const double joint2_small =
        aging_joint_prob(fam, p, {B, BorelSet::interval(0.5, kInf)}, {1.0, 2.0}, 1.0, n_mc,
                         StreamSpec{406, 0});
    CHECK(joint2_small <= joint2 + 1e-9);
}

TEST_CASE("asymptotics: ratio approaches one, null set gives zero constant, additivity",
          "[aging]") {
    const AlphaScale p(0.5);
    SubordinatedLaw law(LevyFamily::brownian(0.0, 1.0), p);
    auto B = BorelSet::interval(1.0, kInf);
    const double C = asymptotic_constant(law, B, 1.0);
    REQUIRE(C > 0.0);
    double prev_gap = 1e9;
    for (double t0 : {1e2, 1e3, 1e4}) {
        const double ratio = aging_prob(law, B, 1.0, t0) / (C * std::pow(t0, -0.5));
        const double gap = std::abs(ratio - 1.0);
        CHECK(gap < prev_gap + 1e-12);
        prev_gap = gap;
        if (t0 == 1e4) CHECK(gap < 0.05);
    }
    // a set the law never charges
    auto far = BorelSet::interval(1e9, 1e9 + 1.0);
    CHECK(asymptotic_constant(law, far, 1.0) == 0.0);
    // additivity over disjoint sets (linearity in the probability)
    auto B1 = BorelSet::interval(1.0, 2.0);
    auto B2 = BorelSet::interval(2.0, kInf);
    BorelSet both;
    both.intervals = {{1.0, 2.0}, {2.0, kInf}};
    both.validate();
    CHECK_THAT(asymptotic_constant(law, both, 1.0),
               Catch::Matchers::WithinRel(
                   asymptotic_constant(law, B1, 1.0) + asymptotic_constant(law, B2, 1.0),
                   1e-10));
}

TEST_CASE("erickson mean: identity, asymptote value, MC agreement, alpha -> 1", "[aging]") {
    // int_0^t (t-r)^alpha r^{-alpha} dr = Gamma(1-alpha) Gamma(1+alpha) t
    Stream rng(StreamSpec{408, 0});
    for (int i = 0; i < 20; ++i) {
        const double alpha = 0.1 + 0.8 * rng.uniform01();
        const double t = 0.3 + 4.0 * rng.uniform01();
        auto f = [&](double u) {
            // r = t u^{1/(1-alpha)} absorbs the left singularity exactly
            const double r = t * std::pow(u, 1.0 / (1.0 - alpha));
            return std::pow(t - r, alpha);
        };
        auto br = graded_breaks(0.0, 1.0, 20, 0.5);
        // refine toward u = 1 as well: (t-r)^alpha has a kink there
        auto extra = graded_breaks(0.0, 0.5, 18, 0.5);
        for (double e : extra)
            if (e > 0.0) br.push_back(1.0 - e);
        std::sort(br.begin(), br.end());
        const double got =
            std::pow(t, 1.0 - alpha) / (1.0 - alpha) * integrate_gl_panels(f, br, 32);
        const double want = std::tgamma(1.0 - alpha) * std::tgamma(1.0 + alpha) * t;
        INFO("alpha " << alpha << " t " << t);
        REQUIRE_THAT(got, Catch::Matchers::WithinAbs(want, 1e-8 * std::max(1.0, want)));
    }

    // frozen asymptote at alpha=1/2, lambda=1, t=1, t0=100
    CHECK_THAT(fpp_aging_mean(0.5, 1.0, 1.0, 100.0),
               Catch::Matchers::WithinAbs(1.0 / (10.0 * std::sqrt(M_PI)), 1e-12));
    CHECK_THAT(fpp_aging_mean(0.5, 1.0, 1.0, 100.0),
               Catch::Matchers::WithinAbs(0.056419, 1e-6));

    // MC mean approaches the asymptote (moderate t0 keeps the test fast)
    const double mc = fpp_aging_mean_mc(0.5, 1.0, 1.0, 100.0, 200000, StreamSpec{409, 0}, 4);
    CHECK_THAT(mc, Catch::Matchers::WithinRel(fpp_aging_mean(0.5, 1.0, 1.0, 100.0), 0.05));

    // alpha -> 1: the exact MC mean tends to lambda t
    const double mc99 = fpp_aging_mean_mc(0.99, 1.0, 1.0, 5.0, 200000, StreamSpec{410, 0}, 4);
    CHECK_THAT(mc99, Catch::Matchers::WithinRel(1.0, 0.05));
}

TEST_CASE("self-similarity: rescaled aging increments agree in law", "[aging]") {
    const AlphaScale p(0.5);
    const LevyFamily fam = LevyFamily::brownian(0.0, 1.0);
    // a = 1: identical laws
    auto rep1 = self_similarity_check(fam, p, 1.0, 1.0, {0.5, 1.0}, 20000, StreamSpec{411, 0},
                                      0.01, 4);
    CHECK(rep1.pass);
    // a = 4 with hurst alpha/2
    auto rep = self_similarity_check(fam, p, 1.0, 4.0, {0.5, 1.0}, 40000, StreamSpec{412, 0},
                                     0.01, 4);
    CHECK(rep.hurst == 0.25);
    CHECK(rep.pass);
    // the zero-atom identity holds exactly: I_{at/(at+t0)} = I_{t/(t+t0/a)}
    for (double a : {2.0, 4.0, 10.0}) {
        const double t = 0.7, t0 = 1.3;
        const double lhs = AgingKernel(0.5, t0).cdf(a * t);
        const double rhs = AgingKernel(0.5, t0 / a).cdf(t);
        REQUIRE_THAT(lhs, Catch::Matchers::WithinRel(rhs, 1e-12));
    }
    // non-stable families are rejected
    CHECK_THROWS_AS(self_similarity_check(LevyFamily::poisson(1.0), p, 1.0, 2.0, {1.0}, 100,
                                          StreamSpec{0, 0}),
                    std::invalid_argument);
}

TEST_CASE("stationarity limit: KS distance shrinks as alpha rises", "[aging]") {
    const LevyFamily fam = LevyFamily::poisson(1.0);
    auto rep = stationarity_limit_check(fam, 1.0, 1.0, 5.0, {0.5, 0.99}, 30000,
                                        StreamSpec{413, 0}, 0.03, 4);
    REQUIRE(rep.ks_distance.size() == 2);
    CHECK(rep.ks_distance[1] < rep.ks_distance[0]);
    CHECK(rep.ks_distance[1] < 0.03);
    CHECK(rep.kernel_mass_small_r >= 0.9);
    // strongly subdiffusive contrast case
    auto rep_low = stationarity_limit_check(fam, 1.0, 1.0, 5.0, {0.1}, 30000,
                                            StreamSpec{414, 0}, 0.02, 4);
    CHECK(rep_low.ks_distance[0] > 0.1);
}
