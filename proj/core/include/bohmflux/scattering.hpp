#ifndef BOHMFLUX_SCATTERING_HPP
#define BOHMFLUX_SCATTERING_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bohmflux/guidance.hpp"
#include "bohmflux/potential.hpp"
#include "bohmflux/stats.hpp"
#include "bohmflux/surfaces.hpp"
#include "bohmflux/wavepacket.hpp"

namespace bohmflux {

/// One scattering experiment: a far-prepared free packet, a short-range
/// potential, exit spheres, a solid-angle partition, and the Monte Carlo
/// budget. For V = none the evolution is analytic; otherwise split-step.
struct ScatteringScenario {
    GaussianSuperposition psi0;   // normalized initial state
    Potential potential = Potential::none();
    std::vector<double> sphere_radii;
    BinPartition bins;
    double t_max = 0.0;           // 0: use the T* = 4R/v_min default
    int n_traj = 1000;
    uint64_t seed = 1;

    // Grid/evolution parameters (used when potential is present).
    double grid_half_width = 0.0;  // 0: auto from the packet support
    int grid_n = 128;
    double dt = 0.02;
    int frame_stride = 8;
    bool enforce_overflow = false;  // scattering runs monitor the wall instead

    // Surface quadrature and flux-series resolution.
    int sphere_n_theta = 64;
    int sphere_n_phi = 128;
    double flux_dt = 0.25;

    IntegratorOptions integrator;
};

/// Far-preparation and precondition checks; throws InvalidParameterError.
void validate_scenario(const ScatteringScenario& s);

/// i.i.d. positions from |ψ|² at t = 0. Exact per-axis inverse CDF for a
/// single Gaussian; rejection against the |weight|²-mixture envelope for
/// superpositions. Deterministic given (seed); trajectory i uses substream
/// (seed, i).
std::vector<Vec3> sample_initial_positions(const GaussianSuperposition& psi, int n,
                                           uint64_t seed);

/// Rejection sampling from a grid density against a Gaussian envelope
/// matched to the field's moments. Throws EnvelopeFailureError if the
/// acceptance rate collapses below 1e-3.
std::vector<Vec3> sample_initial_positions(const GridField& psi, int n, uint64_t seed);

struct BinTally {
    long exits = 0;              // first exits binned by direction
    double sigma_hat = 0.0;      // exits / n_traj
    double se = 0.0;             // binomial standard error
    double signed_flux = 0.0;    // ∫∫ j·n over bin × [0, t_max]
    double abs_flux = 0.0;
    double momentum_prob = 0.0;  // ∫_bin |ψ̂|² d³v (incoming asymptote)
    // Per-bin crossing means (per trajectory) with standard errors.
    double mean_n = 0.0, se_n = 0.0;
    double mean_ns = 0.0, se_ns = 0.0;
};

struct EnsembleResult {
    double R = 0.0;
    long n_traj = 0;
    uint64_t seed = 0;
    std::vector<BinTally> bins;
    std::vector<long> first_exit_bin;   // per trajectory, -1 if none
    std::vector<double> exit_times;     // first exits only
    std::vector<Vec3> exit_directions;
    Histogram exit_time_hist;

    long exited = 0;
    long still_inside = 0;
    long aborted = 0;

    // Whole-sphere crossing statistics (per trajectory).
    double mean_n = 0.0, se_n = 0.0;
    double mean_np = 0.0, se_np = 0.0;
    double mean_nm = 0.0, se_nm = 0.0;
    double mean_ns = 0.0, se_ns = 0.0;

    double escape_fraction() const {
        return n_traj > 0 ? static_cast<double>(exited) / n_traj : 0.0;
    }
};

struct EnsembleRun {
    std::vector<EnsembleResult> per_radius;
    std::vector<FluxTimeSeries> flux_series;   // aligned with sphere_radii
    double t_max = 0.0;
    double norm_drift = 0.0;                   // grid runs
    double max_boundary_mass = 0.0;            // grid runs
    long node_aborts = 0;
    // Full paths, populated only when integrator.record_samples is set.
    std::vector<Trajectory> trajectories;
};

/// Runs the ensemble: samples |ψ₀|², integrates trajectories with crossing
/// detection on every sphere, accumulates per-bin tallies and per-bin flux.
/// Analytic path for V = none; streamed split-step otherwise (field frames
/// are reduced to flow frames on the fly and never all held in memory).
EnsembleRun run_ensemble(const ScatteringScenario& scenario);

struct CheckLine {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    bool pass = false;
};

struct CrossingExpectationReport {
    // Whole-sphere z-scores of E(N) vs ∫∫|j·n| and E(Ns) vs ∫∫ j·n.
    double z_total_n = 0.0;
    double z_total_ns = 0.0;
    std::vector<double> z_bins_n;
    std::vector<double> z_bins_ns;
    double pass_fraction = 0.0;  // bins with |z| <= 3 (both comparisons)
    bool pass = false;           // >= 95% of bins
    double n_minus_fraction = 0.0;
};

CrossingExpectationReport crossing_expectation_check(const EnsembleResult& res,
                                                     const FluxTimeSeries& series,
                                                     double t_max);

struct ExitLawReport {
    bool applicable = false;
    double negative_flux_fraction = 0.0;  // ∫∫max(-j·n,0) / ∫∫|j·n|
    long populated_cells = 0;
    long passing_cells = 0;
    double pass_fraction = 0.0;
    bool pass = false;  // applicable && >= 95% of populated cells within 3 se
};

/// Joint (exit direction × exit time) law against the flux measure
/// j·n dσ dt. Requires current positivity on the sphere; otherwise reports
/// "inapplicable" with the measured negative-flux fraction.
ExitLawReport exit_law_check(const EnsembleResult& res, const FluxTimeSeries& series,
                             const BinPartition& bins, double t_max,
                             double positivity_tol = 1e-3, int n_time_bins = 0);

struct InteractingCheckReport {
    std::vector<double> z_flux_vs_exits;  // per bin
    double max_abs_z = 0.0;
    bool flux_exit_consistent = false;    // all bins within 3 se
    double norm_drift = 0.0;
    std::vector<double> momentum_discrepancy;  // sigma_hat - ∫_bin|ψ̂|², info only
};

InteractingCheckReport interacting_fast_check(const EnsembleResult& res,
                                              const FluxTimeSeries& series,
                                              double t_max, double norm_drift);

}

#endif
