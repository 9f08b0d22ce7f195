#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "bohmflux/errors.hpp"
#include "bohmflux/rng.hpp"
#include "bohmflux/wavepacket.hpp"

using namespace bohmflux;

namespace {

// Independent oracle: brute-force 3D Riemann quadrature of |psi|² or of the
// Fourier integral on a fine grid (no FFT, no shared code path).
double brute_force_norm2(const GaussianSuperposition& psi, double half, int n) {
    const double h = 2.0 * half / n;
    double sum = 0.0;
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix) {
                const Vec3 x{-half + (ix + 0.5) * h, -half + (iy + 0.5) * h,
                             -half + (iz + 0.5) * h};
                sum += psi.density(x, 0.0);
            }
    return sum * h * h * h;
}

Complex brute_force_fourier(const GaussianSuperposition& psi, const Vec3& k,
                            double half, int n) {
    const double h = 2.0 * half / n;
    Complex sum{};
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix) {
                const Vec3 x{-half + (ix + 0.5) * h, -half + (iy + 0.5) * h,
                             -half + (iz + 0.5) * h};
                sum += psi.value(x, 0.0) * std::exp(Complex{0.0, -dot(k, x)});
            }
    return sum * (h * h * h) * std::pow(2.0 * M_PI, -1.5);
}

}

TEST_CASE("make_gaussian basics") {
    const auto psi = make_gaussian({0, 0, 0}, {0, 0, 0}, 1.0);

    // Peak value of the normalized Gaussian.
    CHECK(psi.value({0, 0, 0}, 0.0).real() == doctest::Approx(std::pow(2.0 * M_PI, -0.75)).epsilon(1e-12));
    CHECK(psi.value({0, 0, 0}, 0.0).imag() == doctest::Approx(0.0));

    CHECK(psi.norm() == doctest::Approx(1.0).epsilon(1e-12));

    // A boost is a pure phase: |psi| identical everywhere.
    const auto boosted = make_gaussian({0, 0, 0}, {0, 0, 4}, 1.0);
    for (const Vec3& x : {Vec3{0.3, -1.2, 0.7}, Vec3{2.0, 0.1, -0.5}, Vec3{0, 0, 3}})
        CHECK(std::abs(boosted.value(x, 0.0)) ==
              doctest::Approx(std::abs(psi.value(x, 0.0))).epsilon(1e-12));

    CHECK_THROWS_AS(make_gaussian({0, 0, 0}, {0, 0, 0}, 0.0), InvalidParameterError);
    CHECK_THROWS_AS(make_gaussian({0, 0, 0}, {0, 0, 0}, -1.0), InvalidParameterError);
}

TEST_CASE("momentum amplitude closed form") {
    const Vec3 k0{0.0, 0.0, 2.0};
    const auto psi = make_gaussian({0, 0, 0}, k0, 0.8);

    // Against the stated closed form.
    const double s2 = 0.64;
    for (const Vec3& k : {Vec3{0, 0, 2}, Vec3{0.5, -0.3, 1.5}, Vec3{0, 0, 0}}) {
        const double expected =
            std::pow(2.0 * s2 / M_PI, 0.75) * std::exp(-s2 * norm2(k - k0));
        CHECK(psi.momentum_amplitude(k).real() == doctest::Approx(expected).epsilon(1e-12));
        CHECK(psi.momentum_amplitude(k).imag() == doctest::Approx(0.0).epsilon(1e-14));
    }

    // Against brute-force quadrature of the Fourier integral (off-center
    // packet, so the phase factor matters).
    const auto shifted = make_gaussian({0.4, -0.2, 1.0}, k0, 0.8);
    const Vec3 kq{0.3, 0.1, 1.7};
    const Complex oracle = brute_force_fourier(shifted, kq, 8.0, 96);
    const Complex got = shifted.momentum_amplitude(kq);
    CHECK(std::abs(got - oracle) < 1e-6);

    // Shift theorem: translating psi by a multiplies psî by exp(-i k·a).
    const Vec3 a{0.9, 0.0, -0.4};
    const auto base = make_gaussian({0, 0, 0}, k0, 0.8);
    const auto moved = make_gaussian(a, k0, 0.8);
    for (const Vec3& k : {Vec3{0.2, 0.5, 1.0}, Vec3{1, 1, 1}}) {
        const Complex lhs = moved.momentum_amplitude(k);
        const Complex rhs = base.momentum_amplitude(k) * std::exp(Complex{0.0, -dot(k, a)});
        CHECK(std::abs(lhs - rhs) < 1e-12);
    }
}

TEST_CASE("momentum amplitude of grid matches analytic transform") {
    const auto psi = make_gaussian({0, 0, 0}, {0, 0, 1.5}, 1.0);
    GridField grid = make_centered_grid({0, 0, 0}, 8.0, 64);  // h = 0.25 = σ/4
    sample_onto_grid(grid, psi, 0.0);

    for (const Vec3& k : {Vec3{0, 0, 1.5}, Vec3{0.5, 0.5, 1.0}, Vec3{-1, 0.2, 2.2}}) {
        const Complex analytic = psi.momentum_amplitude(k);
        const Complex discrete = grid.momentum_amplitude(k);
        CHECK(std::abs(analytic - discrete) < 1e-6);
    }

    CHECK_THROWS_AS(grid.momentum_amplitude({0, 0, 100.0}), ResolutionError);
}

TEST_CASE("density and norms") {
    const auto psi = make_gaussian({0.5, 0, 0}, {0, 0, 3}, 1.0);
    CHECK(psi.density({1.0, 0.2, -0.3}, 0.0) >= 0.0);

    // Density independent of the plane phase.
    const auto still = make_gaussian({0.5, 0, 0}, {0, 0, 0}, 1.0);
    CHECK(psi.density({1.0, 0.2, -0.3}, 0.0) ==
          doctest::Approx(still.density({1.0, 0.2, -0.3}, 0.0)).epsilon(1e-12));

    // Grid norm of the sampled packet: box half-width 8σ, h = σ/4.
    GridField grid = make_centered_grid({0.5, 0, 0}, 8.0, 64);
    sample_onto_grid(grid, psi, 0.0);
    CHECK(grid.norm() == doctest::Approx(1.0).epsilon(1e-6));

    // Parseval on the same grid.
    CHECK(grid.momentum_norm_squared() == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("superposition norm against brute force") {
    GaussianSuperposition psi({
        {{0, 0, -2}, {0, 0, 1.5}, 1.0, Complex{0.8, 0.1}},
        {{0, 0, 2}, {0, 0, -1.5}, 1.2, Complex{0.4, -0.3}},
    });
    const double oracle = std::sqrt(brute_force_norm2(psi, 12.0, 120));
    CHECK(psi.norm() == doctest::Approx(oracle).epsilon(1e-5));

    const auto unit = psi.normalized();
    CHECK(unit.norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("grid round trip through disk") {
    const auto psi = make_gaussian({0, 0, 0}, {1, 0, 0}, 1.0);
    GridField grid = make_centered_grid({0, 0, 0}, 6.0, 16);
    sample_onto_grid(grid, psi, 0.0);

    const std::string path = "wavepacket_roundtrip.bin";
    grid.save(path);
    const GridField back = GridField::load(path);
    std::filesystem::remove(path);

    CHECK(back.nx() == grid.nx());
    CHECK(back.spacing() == doctest::Approx(grid.spacing()));
    CHECK(back.origin().z == doctest::Approx(grid.origin().z));
    double max_diff = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i)
        max_diff = std::max(max_diff, std::abs(grid.values()[i] - back.values()[i]));
    CHECK(max_diff == 0.0);
}

TEST_CASE("grid invariants") {
    CHECK_THROWS_AS(GridField({0, 0, 0}, 0.0, 16, 16, 16), InvalidParameterError);
    CHECK_THROWS_AS(GridField({0, 0, 0}, 0.1, 4, 16, 16), InvalidParameterError);
}

TEST_CASE("sample-and-transform-back reproduces the packet") {
    // box half-width >= 8σ and h <= σ/4 keeps both position and momentum
    // representations fully resolved.
    const auto psi = make_gaussian({0, 0, 0}, {0, 0, 2}, 1.0);
    GridField grid = make_centered_grid({0, 0, 0}, 8.0, 64);
    sample_onto_grid(grid, psi, 0.0);

    // round trip via the closed-form transform at grid momenta
    double worst = 0.0;
    for (const Vec3& k : {Vec3{0, 0, 2}, Vec3{0.7, 0, 2}, Vec3{0, -0.7, 1.3}}) {
        worst = std::max(worst,
                         std::abs(grid.momentum_amplitude(k) - psi.momentum_amplitude(k)));
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("inverse normal CDF sanity") {
    CHECK(inverse_normal_cdf(0.5) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(inverse_normal_cdf(0.975) == doctest::Approx(1.959963985).epsilon(1e-8));
    for (double p : {1e-10, 1e-4, 0.3, 0.7, 1.0 - 1e-6}) {
        const double x = inverse_normal_cdf(p);
        CHECK(0.5 * std::erfc(-x / M_SQRT2) == doctest::Approx(p).epsilon(1e-12));
    }
}
