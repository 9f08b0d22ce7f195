#ifndef BOHMFLUX_WAVEPACKET_HPP
#define BOHMFLUX_WAVEPACKET_HPP

#include <complex>
#include <string>
#include <vector>

#include "bohmflux/vec3.hpp"

namespace bohmflux {

// Units are hbar = m = 1 throughout; momenta double as velocities.

/// Isotropic Gaussian wave packet. At t = 0:
///   psi(x) = amplitude * (2πσ²)^{-3/4} exp(-|x-c|²/(4σ²)) exp(i k0·x)
/// and freely evolved values stay closed-form at any t (negative allowed).
struct GaussianPacket {
    Vec3 center{};
    Vec3 k0{};
    double sigma = 1.0;
    Complex amplitude{1.0, 0.0};
};

struct PsiAndGrad {
    Complex psi{};
    CVec3 grad{};
};

/// Weighted superposition of Gaussian packets with exact free evolution.
/// Norm is computed from pairwise overlaps, never assumed.
class GaussianSuperposition {
public:
    GaussianSuperposition() = default;
    explicit GaussianSuperposition(GaussianPacket p) : comps_{p} { validate(); }
    explicit GaussianSuperposition(std::vector<GaussianPacket> ps) : comps_(std::move(ps)) { validate(); }

    const std::vector<GaussianPacket>& components() const { return comps_; }

    Complex value(const Vec3& x, double t) const;
    PsiAndGrad value_and_grad(const Vec3& x, double t) const;
    double density(const Vec3& x, double t) const;

    /// Fourier transform with the symmetric (2π)^{-3/2} convention, at t = 0.
    /// Free evolution only multiplies it by exp(-i|k|²t/2).
    Complex momentum_amplitude(const Vec3& k) const;
    Complex momentum_amplitude(const Vec3& k, double t) const;

    /// L² norm from closed-form pairwise overlaps (t-independent).
    double norm() const;

    /// Returns a copy scaled to unit norm.
    GaussianSuperposition normalized() const;

    /// Upper bound on max_x |psi(x,t)|²; used to scale the node-guard floor.
    double peak_density_bound(double t) const;

    /// Spread of component i at time t: σ_t = σ √(1 + t²/(4σ⁴)).
    static double evolved_width(const GaussianPacket& p, double t);

private:
    void validate() const;
    std::vector<GaussianPacket> comps_;
};

/// make_gaussian: normalized single packet (throws on σ <= 0).
GaussianSuperposition make_gaussian(const Vec3& center, const Vec3& k0, double sigma);

/// Uniform cubic-cell complex field. Row-major storage, x fastest:
/// index = ix + nx*(iy + ny*iz); node position = origin + h*(ix,iy,iz).
class GridField {
public:
    GridField() = default;
    GridField(Vec3 origin, double spacing, int nx, int ny, int nz);

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    int nz() const { return nz_; }
    double spacing() const { return h_; }
    const Vec3& origin() const { return origin_; }
    std::size_t size() const { return values_.size(); }

    Complex& at(int ix, int iy, int iz) { return values_[index(ix, iy, iz)]; }
    const Complex& at(int ix, int iy, int iz) const { return values_[index(ix, iy, iz)]; }
    std::size_t index(int ix, int iy, int iz) const {
        return static_cast<std::size_t>(ix) +
               static_cast<std::size_t>(nx_) * (static_cast<std::size_t>(iy) +
               static_cast<std::size_t>(ny_) * static_cast<std::size_t>(iz));
    }

    std::vector<Complex>& values() { return values_; }
    const std::vector<Complex>& values() const { return values_; }

    Vec3 position(int ix, int iy, int iz) const {
        return {origin_.x + h_ * ix, origin_.y + h_ * iy, origin_.z + h_ * iz};
    }
    Vec3 max_corner() const {
        return {origin_.x + h_ * (nx_ - 1), origin_.y + h_ * (ny_ - 1), origin_.z + h_ * (nz_ - 1)};
    }

    /// True if x lies at least `margin_cells` cells inside the node hull.
    bool interior(const Vec3& x, double margin_cells = 1.0) const;

    double cell_volume() const { return h_ * h_ * h_; }

    /// Discrete L² norm sqrt(Σ|ψ|² h³).
    double norm() const;
    void normalize();

    /// Trilinear interpolation of ψ (for diagnostics and envelope sampling).
    Complex value_trilinear(const Vec3& x) const;

    /// |ψ|² mass within `shell` cells of the boundary, relative to total.
    double boundary_mass_fraction(int shell = 2) const;

    /// ψ̂(k) = (2π)^{-3/2} h³ Σ ψ(x) e^{-ik·x}; spectrally accurate for
    /// decaying fields; throws ResolutionError when |k| exceeds the grid
    /// Nyquist wavenumber π/h along any axis.
    Complex momentum_amplitude(const Vec3& k) const;

    /// Σ|ψ̂|² over the discrete momentum lattice (Parseval partner of norm²).
    double momentum_norm_squared() const;

    void save(const std::string& path) const;
    static GridField load(const std::string& path);

private:
    Vec3 origin_{};
    double h_ = 0.0;
    int nx_ = 0, ny_ = 0, nz_ = 0;
    std::vector<Complex> values_;
};

/// Cube of half-width `half` centered on `center`, n nodes per axis.
GridField make_centered_grid(const Vec3& center, double half_width, int n);

/// Sample an analytic state at time t onto the grid.
void sample_onto_grid(GridField& field, const GaussianSuperposition& psi, double t);

/// Default box half-width for a packet: |psi| < 1e-8 · peak at the boundary.
double default_box_half_width(const GaussianSuperposition& psi);

}

#endif
