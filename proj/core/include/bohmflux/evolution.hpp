#ifndef BOHMFLUX_EVOLUTION_HPP
#define BOHMFLUX_EVOLUTION_HPP

#include <functional>
#include <memory>
#include <vector>

#include "bohmflux/potential.hpp"
#include "bohmflux/wavepacket.hpp"

namespace bohmflux {

/// Result of exact free evolution of a Gaussian superposition: the packet
/// parameters plus the elapsed time (all closed-form, no discretization).
struct EvolvedPacketState {
    GaussianSuperposition psi;
    double time = 0.0;

    Complex value(const Vec3& x) const { return psi.value(x, time); }
    double density(const Vec3& x) const { return psi.density(x, time); }
};

/// Exact solution of the free Schrödinger equation at time t (t may be
/// negative). Norm and momentum amplitudes are preserved exactly.
EvolvedPacketState free_evolve_analytic(const GaussianSuperposition& psi, double t);

/// One-shot free propagation of a grid field: multiply momentum amplitudes
/// by exp(-i|k|²t/2). Throws BoxOverflowError if the boundary-shell mass of
/// the result exceeds `overflow_tol` (the packet has reached the wall).
GridField free_evolve_spectral(const GridField& field, double t,
                               double overflow_tol = 1e-6);

/// Time-ordered grid snapshots sharing one geometry.
struct EvolutionFrames {
    std::vector<double> times;
    std::vector<GridField> fields;
    std::vector<double> norms;  // recorded per frame
};

/// Streaming consumer of propagation frames. `on_frame` receives the state
/// at the requested stride, including the initial state (step 0).
class FrameSink {
public:
    virtual ~FrameSink() = default;
    virtual void on_frame(double t, const GridField& psi) = 0;
};

/// Collects frames in memory (small runs and tests).
class FrameCollector : public FrameSink {
public:
    void on_frame(double t, const GridField& psi) override;
    EvolutionFrames take() { return std::move(frames_); }
    const EvolutionFrames& frames() const { return frames_; }

private:
    EvolutionFrames frames_;
};

struct SplitStepOptions {
    double dt = 0.01;
    int n_steps = 100;
    int frame_stride = 1;       // emit every `frame_stride` steps
    double overflow_tol = 1e-6; // boundary-mass error threshold
    bool enforce_overflow = true;  // scattering runs monitor instead of abort
};

struct SplitStepReport {
    double initial_norm = 0.0;
    double final_norm = 0.0;
    double max_norm_drift = 0.0;          // max |norm(t)-norm(0)| over frames
    double max_boundary_mass = 0.0;       // largest boundary-shell fraction seen
    int frames_emitted = 0;
};

/// Strang-split propagation under a short-range potential:
/// half-kinetic, potential, half-kinetic per step (kinetic halves of
/// adjacent steps are merged internally). Unitary up to roundoff.
/// Throws NumericalError on NaN, BoxOverflowError when enforcing overflow.
SplitStepReport split_step_evolve(GridField& field, const Potential& V,
                                  const SplitStepOptions& opts, FrameSink& sink);

/// Convenience wrapper producing in-memory frames.
EvolutionFrames split_step_frames(GridField field, const Potential& V,
                                  const SplitStepOptions& opts,
                                  SplitStepReport* report = nullptr);

/// Max-norm of the discrete continuity residual |∂_t ρ + ∇·j| at frame
/// `t_index`, with centered differences in both time (across neighboring
/// frames) and space (order h² gradients of ψ and of j). Needs at least one
/// frame on each side.
double continuity_residual(const EvolutionFrames& frames, int t_index);

/// <ψ|H|ψ> with spectral kinetic part and pointwise potential part.
double energy_expectation(const GridField& field, const Potential& V);

}

#endif
