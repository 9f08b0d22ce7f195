#ifndef BOHMFLUX_FIELDSOURCE_HPP
#define BOHMFLUX_FIELDSOURCE_HPP

#include <limits>
#include <memory>
#include <vector>

#include "bohmflux/evolution.hpp"
#include "bohmflux/potential.hpp"
#include "bohmflux/wavepacket.hpp"

namespace bohmflux {

/// Density and guidance velocity at a spacetime point; the quantum current
/// is j = rho * v.
struct Flow {
    double rho = 0.0;
    Vec3 v{};
};

/// Field view used by the trajectory integrator and the flux quadratures.
class FlowField {
public:
    virtual ~FlowField() = default;

    virtual Flow flow(const Vec3& x, double t) const = 0;
    virtual bool in_domain(const Vec3& x) const = 0;
    virtual double t_min() const = 0;
    virtual double t_max() const = 0;

    /// Scale used for the node guard (rho_floor = 1e-12 × this).
    virtual double peak_density(double t) const = 0;
};

/// Closed-form flow of a freely evolving Gaussian superposition.
class AnalyticFlowField : public FlowField {
public:
    explicit AnalyticFlowField(GaussianSuperposition psi) : psi_(std::move(psi)) {}

    Flow flow(const Vec3& x, double t) const override;
    bool in_domain(const Vec3&) const override { return true; }
    double t_min() const override { return -std::numeric_limits<double>::infinity(); }
    double t_max() const override { return std::numeric_limits<double>::infinity(); }
    double peak_density(double t) const override { return psi_.peak_density_bound(t); }

    const GaussianSuperposition& psi() const { return psi_; }

private:
    GaussianSuperposition psi_;
};

struct GridGeometry {
    Vec3 origin{};
    double h = 0.0;
    int nx = 0, ny = 0, nz = 0;

    std::size_t index(int ix, int iy, int iz) const {
        return static_cast<std::size_t>(ix) +
               static_cast<std::size_t>(nx) * (static_cast<std::size_t>(iy) +
               static_cast<std::size_t>(ny) * static_cast<std::size_t>(iz));
    }
    std::size_t size() const {
        return static_cast<std::size_t>(nx) * ny * nz;
    }
};

/// One propagation snapshot reduced to real flow fields: rho, v and their
/// time derivatives at every node. Built from ψ with spectral derivatives
/// (∂ψ/∂t comes from the Schrödinger equation), so a pair of these frames
/// supports cubic-Hermite interpolation in time and trilinear in space.
struct FlowFrame {
    double t = 0.0;
    GridGeometry geom;
    double peak_rho = 0.0;
    std::vector<double> rho, drho;
    std::vector<double> vx, vy, vz, dvx, dvy, dvz;
};

/// Spectral reduction of a wavefunction snapshot to a FlowFrame.
/// Velocity is zeroed where rho < rho_reg (deep vacuum / node core);
/// queries landing there fail the node guard downstream.
FlowFrame make_flow_frame(const GridField& psi, const Potential& V, double t,
                          double rho_reg);

/// Hermite-in-time / trilinear-in-space evaluation between two frames.
Flow eval_flow_segment(const FlowFrame& a, const FlowFrame& b,
                       const Vec3& x, double t);

/// In-memory sequence of flow frames (from EvolutionFrames).
class FrameFlowField : public FlowField {
public:
    FrameFlowField(const EvolutionFrames& frames, const Potential& V,
                   double node_reg_fraction = 1e-14);

    Flow flow(const Vec3& x, double t) const override;
    bool in_domain(const Vec3& x) const override;
    double t_min() const override { return frames_.front()->t; }
    double t_max() const override { return frames_.back()->t; }
    double peak_density(double) const override { return peak_rho_; }

private:
    std::vector<std::shared_ptr<const FlowFrame>> frames_;
    GridGeometry geom_;
    double peak_rho_ = 0.0;
};

}

#endif
