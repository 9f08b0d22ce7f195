#ifndef BOHMFLUX_SURFACES_HPP
#define BOHMFLUX_SURFACES_HPP

#include <functional>
#include <vector>

#include "bohmflux/fieldsource.hpp"
#include "bohmflux/vec3.hpp"
#include "bohmflux/wavepacket.hpp"

namespace bohmflux {

/// Sphere of radius R with a product quadrature: Gauss–Legendre in cosθ ×
/// uniform in φ. Node weights carry the R² surface factor and sum to 4πR².
struct SphereSpec {
    double radius = 1.0;
    int n_theta = 64;
    int n_phi = 128;

    struct Node {
        Vec3 unit;      // outward normal
        double weight;  // dσ weight including R²
        double mu;      // cosθ
        double phi;
    };
    std::vector<Node> nodes;

    static SphereSpec make(double R, int n_theta = 64, int n_phi = 128);
    double weight_sum() const;
};

/// Solid-angle cell: a (cosθ, φ) rectangle. A cap about +z is the special
/// case φ ∈ [0, 2π). φ bounds wrap modulo 2π.
struct ConeBin {
    double mu_lo = -1.0, mu_hi = 1.0;
    double phi_lo = 0.0, phi_hi = 2.0 * M_PI;

    bool contains(double mu, double phi) const;
    bool contains(const Vec3& unit) const;
    double solid_angle() const;

    static ConeBin full_sphere();
    static ConeBin cap(double half_angle_rad);  // about +z
};

/// Disjoint bins covering S².
struct BinPartition {
    std::vector<ConeBin> bins;

    int find(const Vec3& unit) const;  // index, or -1 (should not happen)
    std::size_t size() const { return bins.size(); }

    /// n_mu equal cosθ bands × n_phi equal φ sectors.
    static BinPartition bands(int n_mu, int n_phi);
    /// Forward cap (half-angle in degrees) + banded remainder; band i of the
    /// remainder is split into phi_counts[i] sectors.
    static BinPartition cap_bands(double cap_deg, const std::vector<double>& mu_edges,
                                  const std::vector<int>& phi_counts);
};

struct FluxResult {
    double signed_flux = 0.0;    // ∫∫ j·n dσ dt
    double absolute_flux = 0.0;  // ∫∫ |j·n|
    double inward_flux = 0.0;    // ∫∫ max(-j·n, 0)
    double quadrature_error = 0.0;
    bool converged = true;
};

struct FluxOptions {
    double rel_tol = 1e-7;
    double abs_tol = 1e-10;
    std::vector<double> time_seeds;  // initial subdivision knots
    bool check_node_doubling = false;  // re-run with doubled surface nodes
    double node_doubling_tol = 1e-4;   // relative disagreement flag level
};

/// Time-and-surface flux integral of a flow field over sphere ∩ bin.
/// Throws QuadratureError only on non-finite results; non-convergence is
/// reported through the flags.
FluxResult flux_across_surface(const FlowField& field, const SphereSpec& sphere,
                               const ConeBin& bin, double t0, double t1,
                               const FluxOptions& opts = {});

/// Per-bin flux sampled on a uniform time grid; integrals over sub-windows
/// come from composite panel quadrature on the cached samples.
struct FluxTimeSeries {
    std::vector<double> times;
    std::vector<std::vector<double>> signed_flux;  // [bin][time]
    std::vector<std::vector<double>> abs_flux;
    std::vector<std::vector<double>> neg_flux;     // max(-j·n, 0) part

    double integrate(const std::vector<double>& series, double ta, double tb) const;
    double integrate_bin_signed(int bin, double ta, double tb) const;
};

FluxTimeSeries compute_flux_series(const FlowField& field, const SphereSpec& sphere,
                                   const BinPartition& bins, double t0, double t1,
                                   double dt);

/// Large-time radial current j ≈ (x/t) t⁻³ |ψ̂(x/t)|², exactly parallel to x.
Vec3 asymptotic_current(const std::function<Complex(const Vec3&)>& psi_hat,
                        const Vec3& x, double t);

/// Position-space probability in a cone at time t (analytic state), by
/// radial × angular quadrature out to where the density is negligible.
double cone_probability(const GaussianSuperposition& psi, double t, const ConeBin& bin);

/// Grid version: direct sum over nodes inside the cone. Throws
/// NumericalError when cone mass touches the grid boundary shell.
double cone_probability(const GridField& psi, const ConeBin& bin,
                        double boundary_tol = 1e-6);

/// ∫_bin |ψ̂(v)|² d³v by Gauss–Legendre in (v, cosθ) × uniform φ.
double momentum_bin_integral(const GaussianSuperposition& psi, const ConeBin& bin,
                             int n_v = 128, int n_mu = 64, int n_phi = 64);

/// q-quantile of |v| under the |ψ̂|² speed distribution.
double velocity_quantile(const GaussianSuperposition& psi, double q);

/// Default horizon for [0,∞) truncation: T* = 4R / v_min with v_min the
/// 0.1% speed quantile.
double default_time_horizon(const GaussianSuperposition& psi, double R);

}

#endif
