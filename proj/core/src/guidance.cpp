#include "bohmflux/guidance.hpp"

#include <algorithm>
#include <cmath>

#include "bohmflux/errors.hpp"
#include "bohmflux/fft3.hpp"

namespace bohmflux {

Vec3 current(const GaussianSuperposition& psi, const Vec3& x, double t) {
    const auto vg = psi.value_and_grad(x, t);
    return {std::imag(std::conj(vg.psi) * vg.grad.x),
            std::imag(std::conj(vg.psi) * vg.grad.y),
            std::imag(std::conj(vg.psi) * vg.grad.z)};
}

Vec3 velocity(const GaussianSuperposition& psi, const Vec3& x, double t,
              double rho_floor) {
    const auto vg = psi.value_and_grad(x, t);
    const double rho = std::norm(vg.psi);
    if (rho <= rho_floor)
        throw NodeProximityError("velocity: density below node floor");
    const Complex inv = 1.0 / vg.psi;
    return {std::imag(vg.grad.x * inv), std::imag(vg.grad.y * inv),
            std::imag(vg.grad.z * inv)};
}

GridFieldGradients::GridFieldGradients(const GridField& psi) : psi_(psi) {
    const int nx = psi.nx(), ny = psi.ny(), nz = psi.nz();
    const double h = psi.spacing();
    Fft3 fft(nx, ny, nz);

    std::vector<Complex> hat = psi.values();
    fft.forward(hat.data());

    auto derivative = [&](int axis) {
        std::vector<Complex> out(psi.size());
        for (int iz = 0; iz < nz; ++iz)
            for (int iy = 0; iy < ny; ++iy) {
                const std::size_t base = psi.index(0, iy, iz);
                for (int ix = 0; ix < nx; ++ix) {
                    const double k = axis == 0 ? fft_wavenumber(ix, nx, h)
                                   : axis == 1 ? fft_wavenumber(iy, ny, h)
                                               : fft_wavenumber(iz, nz, h);
                    out[base + ix] = hat[base + ix] * Complex{0.0, k};
                }
            }
        fft.inverse(out.data());
        return out;
    };
    gx_ = derivative(0);
    gy_ = derivative(1);
    gz_ = derivative(2);

    for (const auto& v : psi.values()) peak_rho_ = std::max(peak_rho_, std::norm(v));
}

namespace {

Complex trilinear(const GridField& ref, const std::vector<Complex>& f, const Vec3& x) {
    const double fx = (x.x - ref.origin().x) / ref.spacing();
    const double fy = (x.y - ref.origin().y) / ref.spacing();
    const double fz = (x.z - ref.origin().z) / ref.spacing();
    const int ix = std::clamp(static_cast<int>(std::floor(fx)), 0, ref.nx() - 2);
    const int iy = std::clamp(static_cast<int>(std::floor(fy)), 0, ref.ny() - 2);
    const int iz = std::clamp(static_cast<int>(std::floor(fz)), 0, ref.nz() - 2);
    const double tx = std::clamp(fx - ix, 0.0, 1.0);
    const double ty = std::clamp(fy - iy, 0.0, 1.0);
    const double tz = std::clamp(fz - iz, 0.0, 1.0);
    Complex acc{};
    for (int dz = 0; dz < 2; ++dz)
        for (int dy = 0; dy < 2; ++dy)
            for (int dx = 0; dx < 2; ++dx) {
                const double w = (dx ? tx : 1 - tx) * (dy ? ty : 1 - ty) * (dz ? tz : 1 - tz);
                acc += w * f[ref.index(ix + dx, iy + dy, iz + dz)];
            }
    return acc;
}

}

Complex GridFieldGradients::value(const Vec3& x) const {
    if (!psi_.interior(x, 0.0))
        throw InvalidParameterError("GridFieldGradients: x outside grid");
    return trilinear(psi_, psi_.values(), x);
}

CVec3 GridFieldGradients::gradient(const Vec3& x) const {
    if (!psi_.interior(x, 0.0))
        throw InvalidParameterError("GridFieldGradients: x outside grid");
    return {trilinear(psi_, gx_, x), trilinear(psi_, gy_, x), trilinear(psi_, gz_, x)};
}

Vec3 GridFieldGradients::current(const Vec3& x) const {
    const Complex p = value(x);
    const CVec3 g = gradient(x);
    return {std::imag(std::conj(p) * g.x), std::imag(std::conj(p) * g.y),
            std::imag(std::conj(p) * g.z)};
}

Vec3 GridFieldGradients::velocity(const Vec3& x, double rho_floor) const {
    const Complex p = value(x);
    const double rho = std::norm(p);
    if (rho <= rho_floor)
        throw NodeProximityError("GridFieldGradients::velocity: node proximity");
    const CVec3 g = gradient(x);
    const Complex inv = 1.0 / p;
    return {std::imag(g.x * inv), std::imag(g.y * inv), std::imag(g.z * inv)};
}

CrossingCounts count_crossings(const std::vector<CrossingEvent>& events) {
    CrossingCounts c;
    for (const auto& e : events) {
        if (e.sign > 0) ++c.n_plus;
        else if (e.sign < 0) ++c.n_minus;
    }
    c.n = c.n_plus + c.n_minus;
    c.n_signed = c.n_plus - c.n_minus;
    return c;
}

// ---- Dormand–Prince 4(5) ----------------------------------------------

namespace {

constexpr double kC[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
// 5th-order weights equal the last A row (FSAL); 4th-order embedded weights:
constexpr double kB4[7] = {5179.0 / 57600, 0.0,           7571.0 / 16695, 393.0 / 640,
                           -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

}

TrajectoryStepper::TrajectoryStepper(Vec3 x0, double t0, std::vector<double> radii,
                                     const IntegratorOptions& opts)
    : x_(x0), t_(t0), h_(opts.h_init), radii_(std::move(radii)), opts_(opts),
      last_record_t_(t0) {
    std::sort(radii_.begin(), radii_.end());
    traj_.x0 = x0;
    if (opts_.record_samples) {
        traj_.times.push_back(t0);
        traj_.positions.push_back(x0);
    }
    // Initial positions already outside a sphere exit at t0 by convention.
    for (double r : radii_) {
        if (norm(x0) >= r) {
            traj_.crossings.push_back({t0, x0, +1, r});
        }
    }
}

TrajectoryStepper::VelocityResult TrajectoryStepper::eval(const FlowField& field,
                                                          const Vec3& x, double t) const {
    VelocityResult r;
    if (!field.in_domain(x)) return r;
    const Flow f = field.flow(x, t);
    const double floor = opts_.node_floor_fraction * field.peak_density(t);
    if (f.rho <= floor) return r;
    r.v = f.v;
    r.ok = true;
    return r;
}

void TrajectoryStepper::record(double t, const Vec3& x) {
    if (!opts_.record_samples) return;
    if (opts_.record_stride > 0.0 && t - last_record_t_ < opts_.record_stride) return;
    traj_.times.push_back(t);
    traj_.positions.push_back(x);
    last_record_t_ = t;
}

void TrajectoryStepper::finish(TrajectoryStatus status) {
    active_ = false;
    traj_.status = status;
}

void TrajectoryStepper::handle_crossings(const FlowField& field, double t0,
                                         const Vec3& x0, const Vec3& v0, double t1,
                                         const Vec3& x1, const Vec3& v1) {
    const double r0 = norm(x0);
    const double r1 = norm(x1);
    const double dt = t1 - t0;

    // Dense output: cubic Hermite on the accepted step.
    auto hermite = [&](double s) -> Vec3 {
        const double s2 = s * s, s3 = s2 * s;
        const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
        const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
        return h00 * x0 + (h10 * dt) * v0 + h01 * x1 + (h11 * dt) * v1;
    };

    for (double R : radii_) {
        const double g0 = r0 - R;
        const double g1 = r1 - R;
        if (g0 == 0.0 || (g0 < 0) == (g1 < 0)) continue;  // no sign change

        // Bisection on the dense output to the refinement tolerance.
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 80; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double gm = norm(hermite(mid)) - R;
            if ((gm < 0) == (g0 < 0)) lo = mid; else hi = mid;
            if (std::abs(gm) < 0.5 * opts_.crossing_rel_tol * R) break;
        }
        const double s_cross = 0.5 * (lo + hi);
        const double t_cross = t0 + s_cross * dt;
        Vec3 x_cross = hermite(s_cross);
        // Project exactly onto the sphere; the Hermite point is already
        // within tolerance radially.
        x_cross = x_cross * (R / norm(x_cross));

        // Sign from the instantaneous radial velocity at the event; exact
        // tangency counts as no crossing (deterministic tie-break).
        const auto ve = eval(field, x_cross, t_cross);
        const Vec3 v_used = ve.ok ? ve.v : (v0 + v1) * 0.5;
        const double radial = dot(v_used, x_cross);
        if (radial == 0.0) continue;
        traj_.crossings.push_back({t_cross, x_cross, radial > 0.0 ? +1 : -1, R});
    }
}

bool TrajectoryStepper::advance(const FlowField& field, double t_end) {
    if (!active_) return false;

    auto v_start = have_v0_ ? VelocityResult{v0_cache_, true} : eval(field, x_, t_);
    if (!v_start.ok) {
        finish(field.in_domain(x_) ? TrajectoryStatus::AbortedNearNode
                                   : TrajectoryStatus::LeftDomain);
        return false;
    }

    while (t_ < t_end) {
        if (++steps_ > opts_.max_steps) {
            finish(TrajectoryStatus::StepUnderflow);
            return false;
        }
        double h = std::min({h_, t_end - t_, opts_.h_max});
        if (h < opts_.h_min) h = opts_.h_min;

        Vec3 k[7];
        k[0] = v_start.v;
        bool stage_ok = true;
        double max_speed = norm(k[0]);
        Vec3 x5{};
        for (int attempt = 0;; ++attempt) {
            stage_ok = true;
            for (int s = 1; s < 7 && stage_ok; ++s) {
                Vec3 xs = x_;
                for (int j = 0; j < s; ++j) xs += (h * kA[s][j]) * k[j];
                const auto vs = eval(field, xs, t_ + kC[s] * h);
                if (!vs.ok) { stage_ok = false; break; }
                k[s] = vs.v;
                max_speed = std::max(max_speed, norm(k[s]));
            }
            if (stage_ok) break;
            // A stage left the domain or hit a node: shrink toward the point.
            h *= 0.5;
            if (h < opts_.h_min) {
                // Can't resolve: decide from the state itself.
                const auto here = eval(field, x_, t_);
                finish(!here.ok
                           ? (field.in_domain(x_) ? TrajectoryStatus::AbortedNearNode
                                                  : TrajectoryStatus::LeftDomain)
                           : TrajectoryStatus::AbortedNearNode);
                return false;
            }
            if (attempt > 200) { finish(TrajectoryStatus::StepUnderflow); return false; }
        }

        // 5th-order solution (k[6] is v at the 5th-order endpoint, FSAL).
        x5 = x_;
        for (int j = 0; j < 6; ++j) x5 += (h * kA[6][j]) * k[j];
        Vec3 x4 = x_;
        for (int j = 0; j < 7; ++j) x4 += (h * kB4[j]) * k[j];

        const Vec3 diff = x5 - x4;
        const double scale = opts_.abs_tol +
                             opts_.rel_tol * std::max(norm(x_), norm(x5));
        const double err = norm(diff) / scale;

        if (err <= 1.0) {
            // Accepted. Guard the step-length invariant |Δx| ≤ max speed × h.
            if (norm(x5 - x_) > 1.1 * std::max(max_speed, 1e-300) * h) {
                h_ = 0.5 * h;
                continue;
            }
            const auto v_end = eval(field, x5, t_ + h);
            if (!v_end.ok) {
                // Terminal state just past the boundary/node: count crossings
                // using the endpoint velocity extrapolated from stages.
                handle_crossings(field, t_, x_, k[0], t_ + h, x5, k[6]);
                record(t_ + h, x5);
                x_ = x5;
                t_ += h;
                finish(field.in_domain(x5) ? TrajectoryStatus::AbortedNearNode
                                           : TrajectoryStatus::LeftDomain);
                return false;
            }
            guidance_residual_ = std::max(guidance_residual_, norm(v_end.v - k[6]));
            handle_crossings(field, t_, x_, k[0], t_ + h, x5, v_end.v);
            x_ = x5;
            t_ += h;
            record(t_, x_);
            v_start = v_end;
            have_v0_ = true;
            v0_cache_ = v_end.v;
            const double grow = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
            h_ = h * std::clamp(grow, 0.2, 5.0);
        } else {
            const double shrink = 0.9 * std::pow(err, -0.25);
            h_ = h * std::clamp(shrink, 0.1, 0.9);
            if (h_ < opts_.h_min) {
                finish(TrajectoryStatus::StepUnderflow);
                return false;
            }
        }
    }
    return true;
}

Trajectory integrate_trajectory(const Vec3& x0, const FlowField& field, double t0,
                                double t1, double R_exit, const IntegratorOptions& opts) {
    TrajectoryStepper stepper(x0, t0, {R_exit}, opts);
    stepper.advance(field, t1);

    Trajectory traj = stepper.take_trajectory();
    if (traj.status == TrajectoryStatus::AliveAtTmax || traj.status == TrajectoryStatus::LeftDomain) {
        // First-exit semantics: the first crossing of an inside-start is
        // necessarily outward.
        for (const auto& e : traj.crossings) {
            if (e.radius == R_exit) {
                traj.status = TrajectoryStatus::Exited;
                traj.exit_time = e.t;
                traj.exit_position = e.x;
                break;
            }
        }
    }
    return traj;
}

}
