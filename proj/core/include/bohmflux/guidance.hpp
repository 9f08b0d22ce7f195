#ifndef BOHMFLUX_GUIDANCE_HPP
#define BOHMFLUX_GUIDANCE_HPP

#include <optional>
#include <vector>

#include "bohmflux/fieldsource.hpp"
#include "bohmflux/vec3.hpp"
#include "bohmflux/wavepacket.hpp"

namespace bohmflux {

/// Quantum current j = Im(ψ*∇ψ) of an analytic state at (x, t).
Vec3 current(const GaussianSuperposition& psi, const Vec3& x, double t);

/// Guidance velocity v = j/ρ = Im(∇ψ/ψ). Throws NodeProximityError when
/// ρ(x) <= rho_floor (the caller decides whether to abort or regularize).
Vec3 velocity(const GaussianSuperposition& psi, const Vec3& x, double t,
              double rho_floor);

/// Spectral-gradient view of one grid snapshot: ∇ψ fields are computed by
/// FFT once, then ψ and ∇ψ interpolate trilinearly.
class GridFieldGradients {
public:
    explicit GridFieldGradients(const GridField& psi);

    Complex value(const Vec3& x) const;
    CVec3 gradient(const Vec3& x) const;
    Vec3 current(const Vec3& x) const;
    Vec3 velocity(const Vec3& x, double rho_floor) const;
    double peak_density() const { return peak_rho_; }

private:
    GridField psi_;
    std::vector<Complex> gx_, gy_, gz_;
    double peak_rho_ = 0.0;
};

struct CrossingEvent {
    double t = 0.0;
    Vec3 x{};
    int sign = 0;  // +1 outward, -1 inward
    double radius = 0.0;
};

struct CrossingCounts {
    long n = 0, n_plus = 0, n_minus = 0, n_signed = 0;
};

/// N = N+ + N-, Ns = N+ - N- for one trajectory and one sphere.
CrossingCounts count_crossings(const std::vector<CrossingEvent>& events);

enum class TrajectoryStatus {
    AliveAtTmax,      // integrated through t_span without exiting
    Exited,           // crossed the exit sphere (t_e, x_e recorded)
    AbortedNearNode,  // density fell below the node floor
    LeftDomain,       // ran off the grid interior (grid sources only)
    StepUnderflow,    // adaptive step collapsed
};

struct Trajectory {
    Vec3 x0{};
    std::vector<double> times;
    std::vector<Vec3> positions;
    TrajectoryStatus status = TrajectoryStatus::AliveAtTmax;
    double exit_time = 0.0;   // valid when status == Exited
    Vec3 exit_position{};
    std::vector<CrossingEvent> crossings;  // all crossings, all spheres
};

struct IntegratorOptions {
    double rel_tol = 1e-8;
    double abs_tol = 1e-8;
    double h_init = 1e-3;
    double h_min = 1e-14;
    double h_max = 5.0;
    double node_floor_fraction = 1e-12;   // × field peak density
    double crossing_rel_tol = 1e-6;       // |x_e|-R refined to this × R
    long max_steps = 5'000'000;
    bool record_samples = false;
    double record_stride = 0.0;           // 0: every accepted step
};

/// Resumable Dormand–Prince 4(5) integrator of dx/dt = v(x,t) with sphere
/// crossing detection (sign change of |x|-R per accepted step, refined by
/// bisection on the step's dense output plus velocity polishing).
class TrajectoryStepper {
public:
    TrajectoryStepper(Vec3 x0, double t0, std::vector<double> sphere_radii,
                      const IntegratorOptions& opts);

    /// Advance to t_end using `field`, which must cover [current t, t_end].
    /// Returns false when the trajectory has terminated (node/domain/underflow).
    bool advance(const FlowField& field, double t_end);

    const Trajectory& trajectory() const { return traj_; }
    Trajectory take_trajectory() { return std::move(traj_); }
    double time() const { return t_; }
    const Vec3& position() const { return x_; }
    bool active() const { return active_; }
    /// Max |dx/dt - v| discrepancy accumulated at accepted-step endpoints;
    /// stays at the integrator-tolerance scale by construction.
    double guidance_residual() const { return guidance_residual_; }

private:
    struct VelocityResult {
        Vec3 v{};
        bool ok = false;
    };
    VelocityResult eval(const FlowField& field, const Vec3& x, double t) const;
    void handle_crossings(const FlowField& field, double t0, const Vec3& x0,
                          const Vec3& v0, double t1, const Vec3& x1, const Vec3& v1);
    void record(double t, const Vec3& x);
    void finish(TrajectoryStatus status);

    Vec3 x_;
    double t_;
    double h_;
    std::vector<double> radii_;
    IntegratorOptions opts_;
    Trajectory traj_;
    bool active_ = true;
    bool have_v0_ = false;
    Vec3 v0_cache_{};
    double last_record_t_;
    double guidance_residual_ = 0.0;
    long steps_ = 0;
};

/// One-shot integration over [t0, t1]: all crossings of |x| = R_exit are
/// detected; status and (t_e, x_e) follow the first-exit semantics.
Trajectory integrate_trajectory(const Vec3& x0, const FlowField& field,
                                double t0, double t1, double R_exit,
                                const IntegratorOptions& opts = {});

}

#endif
