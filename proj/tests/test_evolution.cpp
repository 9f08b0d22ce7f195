#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bohmflux/errors.hpp"
#include "bohmflux/evolution.hpp"
#include "bohmflux/fieldsource.hpp"

using namespace bohmflux;

TEST_CASE("free analytic evolution") {
    const auto psi = make_gaussian({0, 0, 0}, {0, 0, 0}, 1.0);

    SUBCASE("t=0 is the identity") {
        const auto st = free_evolve_analytic(psi, 0.0);
        for (const Vec3& x : {Vec3{0, 0, 0}, Vec3{1, -0.5, 0.2}})
            CHECK(std::abs(st.value(x) - psi.value(x, 0.0)) < 1e-15);
    }

    SUBCASE("spreading law sigma_t = sqrt(2) at t=2 for sigma=1") {
        // |psi_t(0)|² = (2π σ_t²)^{-3/2} pins σ_t through the peak density.
        const auto st = free_evolve_analytic(psi, 2.0);
        const double peak = st.density({0, 0, 0});
        const double sigma_t = std::sqrt(std::pow(peak, -2.0 / 3.0) / (2.0 * M_PI));
        CHECK(sigma_t == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
        CHECK(GaussianSuperposition::evolved_width(psi.components()[0], 2.0) ==
              doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    }

    SUBCASE("norm preserved, negative times allowed") {
        for (double t : {-3.0, 0.7, 12.0})
            CHECK(free_evolve_analytic(psi, t).psi.norm() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("analytic vs spectral free step") {
    const auto psi = make_gaussian({0, 0, 0}, {0, 0, 1}, 1.0);
    GridField grid = make_centered_grid({0, 0, 0}, 10.0, 80);
    sample_onto_grid(grid, psi, 0.0);

    const double t = 1.5;
    const GridField evolved = free_evolve_spectral(grid, t);

    double worst = 0.0;
    for (int iz = 20; iz < 60; iz += 7)
        for (int iy = 20; iy < 60; iy += 7)
            for (int ix = 20; ix < 60; ix += 7) {
                const Vec3 x = evolved.position(ix, iy, iz);
                worst = std::max(worst, std::abs(evolved.at(ix, iy, iz) - psi.value(x, t)));
            }
    CHECK(worst < 1e-6);

    SUBCASE("forward then backward returns the input") {
        const GridField back = free_evolve_spectral(evolved, -t);
        double diff = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i)
            diff = std::max(diff, std::abs(back.values()[i] - grid.values()[i]));
        CHECK(diff < 1e-12);
    }

    SUBCASE("norm preserved to 1e-12") {
        CHECK(std::abs(evolved.norm() - grid.norm()) < 1e-12);
    }

    SUBCASE("centroid moves by k0 t") {
        double zbar = 0.0, total = 0.0;
        for (int iz = 0; iz < evolved.nz(); ++iz)
            for (int iy = 0; iy < evolved.ny(); ++iy)
                for (int ix = 0; ix < evolved.nx(); ++ix) {
                    const double w = std::norm(evolved.at(ix, iy, iz));
                    zbar += w * evolved.position(ix, iy, iz).z;
                    total += w;
                }
        CHECK(zbar / total == doctest::Approx(1.0 * t).epsilon(1e-6));
    }

    SUBCASE("box overflow detected") {
        CHECK_THROWS_AS(free_evolve_spectral(grid, 500.0), BoxOverflowError);
    }
}

TEST_CASE("split step: V=0 equals the spectral propagator") {
    const auto psi = make_gaussian({0, 0, 0}, {0, 0, 1}, 1.0);
    GridField grid = make_centered_grid({0, 0, 0}, 10.0, 48);
    sample_onto_grid(grid, psi, 0.0);

    SplitStepOptions opts;
    opts.dt = 0.05;
    opts.n_steps = 20;
    opts.frame_stride = 20;
    const auto frames = split_step_frames(grid, Potential::none(), opts);

    const GridField direct = free_evolve_spectral(grid, 1.0);
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i)
        worst = std::max(worst, std::abs(frames.fields.back().values()[i] - direct.values()[i]));
    CHECK(worst < 1e-10);
}

TEST_CASE("split step: norm drift and NaN guard") {
    const auto psi = make_gaussian({0, 0, -2}, {0, 0, 1.2}, 0.9);
    GridField grid = make_centered_grid({0, 0, 0}, 10.0, 48);
    sample_onto_grid(grid, psi, 0.0);

    SplitStepOptions opts;
    opts.dt = 0.01;
    opts.n_steps = 100;
    opts.frame_stride = 10;
    SplitStepReport report;
    const auto frames = split_step_frames(grid, Potential::gaussian_bump(0.3, 1.0), opts,
                                          &report);
    CHECK(report.max_norm_drift < 1e-10 * opts.n_steps);  // unitary up to roundoff
    CHECK(frames.times.size() == 11);
    CHECK(frames.norms.front() == doctest::Approx(frames.norms.back()).epsilon(1e-10));
}

TEST_CASE("split step: second-order self convergence") {
    // Richardson-style order estimate against a dt/8 reference run on a
    // gaussian_bump scattering configuration.
    const auto psi = make_gaussian({0, 0, -2.5}, {0, 0, 2}, 0.8);
    GridField grid = make_centered_grid({0, 0, 0}, 8.0, 48);
    sample_onto_grid(grid, psi, 0.0);
    const Potential V = Potential::gaussian_bump(0.5, 0.8);
    const double T = 0.8;

    auto final_state = [&](double dt) {
        SplitStepOptions opts;
        opts.dt = dt;
        opts.n_steps = static_cast<int>(std::round(T / dt));
        opts.frame_stride = opts.n_steps;
        return split_step_frames(grid, V, opts).fields.back();
    };

    const GridField ref = final_state(0.0125);  // dt/8 reference
    auto err_against_ref = [&](const GridField& f) {
        double e2 = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i)
            e2 += std::norm(f.values()[i] - ref.values()[i]);
        return std::sqrt(e2 * f.cell_volume());
    };

    const double e1 = err_against_ref(final_state(0.1));
    const double e2 = err_against_ref(final_state(0.05));
    const double ratio = e1 / e2;
    CHECK(ratio > 3.3);   // second order: ratio → 4
    CHECK(ratio < 4.7);
}

TEST_CASE("split step: energy expectation constant") {
    const auto psi = make_gaussian({0, 0, -2.5}, {0, 0, 1.5}, 0.9);
    GridField grid = make_centered_grid({0, 0, 0}, 9.0, 64);
    sample_onto_grid(grid, psi, 0.0);
    const Potential V = Potential::gaussian_bump(0.2, 1.0);

    SplitStepOptions opts;
    opts.dt = 0.004;
    opts.n_steps = 250;
    opts.frame_stride = 50;
    const auto frames = split_step_frames(grid, V, opts);

    std::vector<double> energies;
    for (const auto& f : frames.fields) energies.push_back(energy_expectation(f, V));
    const double e0 = energies.front();
    for (double e : energies)
        CHECK(std::abs(e - e0) / std::abs(e0) < 1e-6);
}

TEST_CASE("continuity residual") {
    SUBCASE("plane wave on a periodic grid: both terms vanish") {
        // k on the DFT lattice keeps e^{ikx} exactly periodic.
        GridField grid = make_centered_grid({0, 0, 0}, 5.0, 32);
        const double k = 2.0 * M_PI / (grid.spacing() * 32) * 4.0;
        EvolutionFrames frames;
        for (int f = 0; f < 3; ++f) {
            const double t = 0.1 * f;
            GridField g = grid;
            for (int iz = 0; iz < g.nz(); ++iz)
                for (int iy = 0; iy < g.ny(); ++iy)
                    for (int ix = 0; ix < g.nx(); ++ix) {
                        const Vec3 x = g.position(ix, iy, iz);
                        g.at(ix, iy, iz) = std::exp(Complex{0.0, k * x.z - 0.5 * k * k * t});
                    }
            frames.times.push_back(t);
            frames.fields.push_back(std::move(g));
        }
        CHECK(continuity_residual(frames, 1) < 1e-10);
    }

    SUBCASE("free Gaussian: factor-4 drop when h and dt halve") {
        const auto psi = make_gaussian({0, 0, 0}, {0, 0, 1}, 1.0);
        auto residual_at = [&](int n, double dt) {
            GridField grid = make_centered_grid({0, 0, 0}, 10.0, n);
            sample_onto_grid(grid, psi, 0.0);
            SplitStepOptions opts;
            opts.dt = dt;
            opts.n_steps = static_cast<int>(std::round(1.0 / dt)) + 1;
            opts.frame_stride = 1;
            const auto frames = split_step_frames(grid, Potential::none(), opts);
            const int idx = static_cast<int>(std::round(1.0 / dt));
            return continuity_residual(frames, idx);
        };
        const double coarse = residual_at(64, 0.04);
        const double fine = residual_at(128, 0.02);
        const double factor = coarse / fine;
        CHECK(factor > 3.5);
        CHECK(factor < 4.5);
    }

    SUBCASE("needs bracketing frames") {
        EvolutionFrames frames;
        frames.times = {0.0};
        frames.fields.emplace_back(Vec3{0, 0, 0}, 0.5, 8, 8, 8);
        CHECK_THROWS_AS(continuity_residual(frames, 0), InvalidParameterError);
    }
}
