#include <catch2/catch_amalgamated.hpp>

#include "actrwl/ffpe.hpp"
#include "actrwl/io.hpp"
#include "oracles.hpp"

using namespace actrwl;

namespace {

double variance_of(const GridDensity& d) {
    double m0 = 0.0, m1 = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < d.nx(); ++i) {
        const double w = (i == 0 || i + 1 == d.nx()) ? 0.5 : 1.0;
        const double x = d.x(i);
        m0 += w * d.values[i];
        m1 += w * x * d.values[i];
        m2 += w * x * x * d.values[i];
    }
    m0 *= d.dx;
    m1 *= d.dx;
    m2 *= d.dx;
    return m2 / m0 - (m1 / m0) * (m1 / m0);
}

} // namespace

TEST_CASE("reference density: symmetry, mass, variance, gaussian limit", "[ffpe]") {
    const AlphaScale p(0.5);
    const LevyFamily fam = LevyFamily::brownian(0.0, 1.0);
    SpaceGrid grid{8.0, 321};
    auto d = reference_density(fam, p, 1.0, grid);

    // even function to near machine precision
    for (std::size_t i = 0; i < d.nx() / 2; ++i)
        REQUIRE(std::abs(d.values[i] - d.values[d.nx() - 1 - i]) < 1e-10);
    CHECK_THAT(d.total_mass(), Catch::Matchers::WithinAbs(1.0, 1e-4));
    CHECK_THAT(variance_of(d), Catch::Matchers::WithinRel(1.0 / std::tgamma(1.5), 5e-3));

    // alpha -> 1: the time change degenerates and the law becomes Gaussian
    const AlphaScale p99(0.99);
    auto d99 = reference_density(fam, p99, 1.0, grid);
    double l1 = 0.0;
    for (std::size_t i = 0; i < d99.nx(); ++i) {
        const double x = d99.x(i);
        l1 += std::abs(d99.values[i] - std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI)) *
              d99.dx;
    }
    CHECK(l1 <= 0.02);
    CHECK_THROWS_AS(reference_density(LevyFamily::poisson(1.0), p, 1.0, grid),
                    std::invalid_argument);
}

TEST_CASE("reference density matches a Monte Carlo histogram", "[ffpe]") {
    const AlphaScale p(0.5);
    const LevyFamily fam = LevyFamily::brownian(0.0, 1.0);
    SpaceGrid grid{8.0, 161};
    auto d = reference_density(fam, p, 1.0, grid);
    const std::size_t n = 400000;
    auto s = sample_ctrwl(fam, p, 1.0, n, StreamSpec{501, 0}, 4);
    auto h = histogram_density(s.values, grid, false);
    CHECK(l1_distance(d, h) <= 0.02);
}

TEST_CASE("symmetric stable reference density: mass and MC agreement", "[ffpe]") {
    const AlphaScale p(0.5);
    const LevyFamily fam = LevyFamily::symmetric_stable(1.5, 1.0);
    SpaceGrid grid{40.0, 401};
    auto d = reference_density(fam, p, 1.0, grid);
    CHECK_THAT(d.total_mass(), Catch::Matchers::WithinAbs(1.0, 2e-3)); // power tails leak a bit
    const std::size_t n = 200000;
    auto s = sample_ctrwl(fam, p, 1.0, n, StreamSpec{502, 0}, 4);
    auto h = histogram_density(s.values, grid, false);
    // compare only the continuous bulk; the far tail is noise-dominated
    double l1 = 0.0;
    for (std::size_t i = 0; i < d.nx(); ++i)
        if (std::abs(d.x(i)) <= 20.0) l1 += std::abs(d.values[i] - h.values[i]) * d.dx;
    CHECK(l1 <= 0.03);
}

TEST_CASE("aged density: kernel degeneration, mass split, atom value, MC check", "[ffpe]") {
    const AlphaScale p(0.5);
    const LevyFamily fam = LevyFamily::brownian(0.0, 1.0);
    SpaceGrid grid{8.0, 161};

    // t0 -> 0: continuous part approaches the un-aged density, atom vanishes
    auto nu0 = aged_density(fam, p, 1e-4, 1.0, grid);
    auto ref = reference_density(fam, p, 1.0, grid);
    CHECK(nu0.atom_mass < 5e-3);
    double l1 = 0.0;
    for (std::size_t i = 0; i < ref.nx(); ++i)
        l1 += std::abs(nu0.values[i] - ref.values[i]) * ref.dx;
    CHECK(l1 <= 5e-3);

    // t = t0 = 1: atom is exactly 1/2 and the continuous part carries the rest
    auto nu = aged_density(fam, p, 1.0, 1.0, grid);
    CHECK_THAT(nu.atom_mass, Catch::Matchers::WithinAbs(0.5, 1e-12));
    CHECK_THAT(nu.total_mass(), Catch::Matchers::WithinAbs(1.0, 1e-3));
    CHECK(nu.min_value() >= -1e-9);

    // continuous part against MC aging increments with the zeros stripped
    const std::size_t n = 400000;
    auto sets = sample_aging_increments(fam, p, 1.0, {1.0}, n, StreamSpec{503, 0}, 4);
    auto h = histogram_density(sets[0].values, grid, true);
    CHECK_THAT(h.atom_mass, Catch::Matchers::WithinAbs(0.5, 3.0 * std::sqrt(0.25 / n)));
    CHECK(l1_distance(nu, h) <= 0.02 + 3.0 * std::sqrt(0.25 / n));
}

TEST_CASE("ffpe solver: un-aged equation against the convolution route", "[ffpe]") {
    const AlphaScale p(0.5);
    const LevyFamily fam = LevyFamily::brownian(0.0, 1.0);
    SpaceGrid grid{6.0, 241};
    TimeGrid tg{1.0, 512};
    auto f = InitialDensity::gaussian(grid.x0(), grid.dx(), grid.nx, 0.0, 0.1);
    auto sol = solve_ffpe(fam, p, 0.0, f, grid, tg);
    for (double m : sol.mass_series) REQUIRE_THAT(m, Catch::Matchers::WithinAbs(1.0, 1e-3));
    auto target = convolve_initial(f, reference_density(fam, p, 1.0, grid));
    CHECK(l1_distance(sol.final_density, target) <= 0.03);
}

TEST_CASE("ffpe solver: aged equation with the exact kernel-tail source", "[ffpe]") {
    const AlphaScale p(0.5);
    const LevyFamily fam = LevyFamily::brownian(0.0, 1.0);
    SpaceGrid grid{6.0, 241};
    TimeGrid tg{1.0, 512};
    auto f = InitialDensity::gaussian(grid.x0(), grid.dx(), grid.nx, 0.0, 0.1);
    auto sol = solve_ffpe(fam, p, 1.0, f, grid, tg);
    for (double m : sol.mass_series) REQUIRE_THAT(m, Catch::Matchers::WithinAbs(1.0, 1e-3));
    auto target = convolve_initial(f, aged_density(fam, p, 1.0, 1.0, grid));
    CHECK(l1_distance(sol.final_density, target) <= 0.03);
    // source decays: by t = 20 t0 the kernel tail is well below its initial value
    AgingKernel k(0.5, 1.0);
    CHECK(k.tail(20.0) < k.tail(tg.dt()));
}

TEST_CASE("ffpe solver: symmetric stable generator", "[ffpe]") {
    const AlphaScale p(0.5);
    const LevyFamily fam = LevyFamily::symmetric_stable(1.5, 1.0);
    SpaceGrid grid{12.0, 241};
    TimeGrid tg{1.0, 384};
    auto f = InitialDensity::gaussian(grid.x0(), grid.dx(), grid.nx, 0.0, 0.1);
    auto sol = solve_ffpe(fam, p, 0.0, f, grid, tg);
    // heavier truncation loss than brownian, still near conservation
    CHECK_THAT(sol.mass_series.back(), Catch::Matchers::WithinAbs(1.0, 5e-3));
    auto target = convolve_initial(f, reference_density(fam, p, 1.0, grid));
    double l1 = 0.0;
    for (std::size_t i = 0; i < target.nx(); ++i)
        l1 += std::abs(sol.final_density.values[i] - target.values[i]) * target.dx;
    CHECK(l1 <= 0.05);
}

TEST_CASE("explicit stepping trips the norm-growth guard on a hostile grid", "[ffpe]") {
    const AlphaScale p(0.5);
    const LevyFamily fam = LevyFamily::brownian(0.0, 1.0);
    SpaceGrid grid{4.0, 401}; // fine dx
    TimeGrid tg{1.0, 64};     // coarse dt: dt^alpha >> dx^2
    auto f = InitialDensity::gaussian(grid.x0(), grid.dx(), grid.nx, 0.0, 0.1);
    try {
        solve_ffpe(fam, p, 0.0, f, grid, tg, TimeStepping::Explicit);
        FAIL("expected StabilityError");
    } catch (const StabilityError& e) {
        CHECK(e.suggested_dt < tg.dt());
    }
    // and the same configuration is fine implicitly
    auto sol = solve_ffpe(fam, p, 0.0, f, grid, tg, TimeStepping::Implicit);
    CHECK_THAT(sol.mass_series.back(), Catch::Matchers::WithinAbs(1.0, 1e-3));
}

TEST_CASE("grid refinement shrinks the solver error", "[ffpe]") {
    const AlphaScale p(0.5);
    const LevyFamily fam = LevyFamily::brownian(0.0, 1.0);
    auto run = [&](std::size_t nx, std::size_t nt) {
        SpaceGrid grid{6.0, nx};
        TimeGrid tg{1.0, nt};
        auto f = InitialDensity::gaussian(grid.x0(), grid.dx(), grid.nx, 0.0, 0.12);
        auto sol = solve_ffpe(fam, p, 0.0, f, grid, tg);
        auto target = convolve_initial(f, reference_density(fam, p, 1.0, grid));
        return l1_distance(sol.final_density, target);
    };
    const double coarse = run(121, 128);
    const double fine = run(241, 256);
    INFO("coarse " << coarse << " fine " << fine);
    CHECK(coarse / fine >= 1.5);
}

TEST_CASE("fourier-laplace residuals against the closed forms", "[ffpe]") {
    const AlphaScale p(0.5);
    const LevyFamily fam = LevyFamily::brownian(0.0, 1.0);
    FltChecker chk(fam, p, 1.0, {0.0, 0.5, 1.0, 2.0}, 24.0, 0.02, SpaceGrid{15.0, 301});

    // k = 0: pbar(0, s) = 1/s
    for (double s : {0.5, 1.0, 2.0})
        CHECK(std::abs(chk.flt_reference(0.0, s) - 1.0 / s) <= 1e-3);

    // frozen closed-form point: alpha=1/2, k=1, s=1 gives 1/(sqrt(s)(sqrt(s)+1/2)) = 2/3
    const std::complex<double> closed =
        std::pow(1.0, -0.5) / (std::pow(1.0, 0.5) + 0.5);
    CHECK_THAT(closed.real(), Catch::Matchers::WithinAbs(2.0 / 3.0, 1e-15));
    CHECK(std::abs(chk.flt_reference(1.0, 1.0) - closed) <= 5e-3);

    // full residual grid for the un-aged law and the aged identity
    for (double k : {0.5, 1.0, 2.0})
        for (double s : {0.5, 1.0, 2.0}) {
            INFO("k " << k << " s " << s);
            REQUIRE(std::abs(chk.reference_residual(k, s)) <= 5e-3);
            REQUIRE(std::abs(chk.aged_identity_residual(k, s)) <= 5e-3);
        }
}
