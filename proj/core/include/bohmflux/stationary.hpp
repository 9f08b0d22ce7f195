#ifndef BOHMFLUX_STATIONARY_HPP
#define BOHMFLUX_STATIONARY_HPP

#include <complex>
#include <vector>

#include "bohmflux/potential.hpp"

namespace bohmflux {

/// Spherical Bessel helpers (wrappers around the C++17 special functions
/// with derivative recurrences).
double sph_j(int l, double x);
double sph_y(int l, double x);
double sph_j_deriv(int l, double x);
double sph_y_deriv(int l, double x);

/// Legendre polynomial by upward recurrence.
double legendre_p(int l, double x);

struct RadialSolution {
    std::vector<double> r;
    std::vector<double> u;          // reduced wave u(r) = r R(r), unnormalized
    double log_derivative = 0.0;    // u'(r_max)/u(r_max)
    double step = 0.0;              // final step after the halving check
    double halving_disagreement = 0.0;
};

/// Fixed-step Numerov integration of u'' = [l(l+1)/r² + 2V - k²]u from
/// u ~ r^{l+1} near the origin out to r_max (plus a stencil margin for the
/// O(h⁴) derivative). The step is halved until the log-derivative settles
/// to `tol`; throws NumericalError if it will not.
RadialSolution radial_solve(const Potential& V, double k, int l, double r_max,
                            double h_init = 1e-3, double tol = 1e-8);

struct PhaseShiftTable {
    double k = 0.0;
    std::vector<double> deltas;  // δ_l, l = 0..l_max
    int l_max = 0;
    bool converged = false;      // |δ_{l_max}| < 1e-8
};

/// Phase shifts from log-derivative matching against Riccati–Bessel
/// functions at r_max; l grows until |δ_l| < 1e-8 (or l_cap, then the
/// table is flagged unconverged).
PhaseShiftTable phase_shifts(const Potential& V, double k, int l_cap = 64,
                             double r_max = 0.0);

/// f(θ) = (1/k) Σ (2l+1) e^{iδ_l} sin δ_l P_l(cosθ).
std::complex<double> scattering_amplitude(const PhaseShiftTable& table, double cos_theta);

/// dσ/dΩ = |f(θ)|².
double differential_cross_section(const PhaseShiftTable& table, double cos_theta);

/// σ_total = (4π/k²) Σ (2l+1) sin²δ_l.
double total_cross_section(const PhaseShiftTable& table);

struct OpticalTheoremReport {
    double lhs = 0.0;  // (4π/k) Im f(0)
    double rhs = 0.0;  // ∫ |f|² dΩ by quadrature
    double abs_diff = 0.0;
};

OpticalTheoremReport optical_theorem_check(const PhaseShiftTable& table);

struct LsAsymptoticsReport {
    std::vector<double> shell_radii;
    std::vector<double> shell_residuals;  // max |ψ - plane - f e^{ikr}/r| per shell
    double f_fit_max_error = 0.0;         // fitted f(θ) vs partial-wave f(θ)
    double f_scale = 0.0;                 // max |f| for relative comparisons
};

/// Reconstructs the stationary wave from partial waves on far shells
/// (r in [10, 20] × r_cut by default) and fits its scattered part to the
/// outgoing-spherical-wave form; reports fit residuals and the agreement
/// between the fitted and partial-wave amplitudes.
LsAsymptoticsReport lippmann_schwinger_asymptotics_check(
    const Potential& V, double k, double shell_lo_factor = 10.0,
    double shell_hi_factor = 20.0, int n_shells = 8);

}

#endif
