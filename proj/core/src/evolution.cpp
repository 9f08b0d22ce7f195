#include "bohmflux/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bohmflux/errors.hpp"
#include "bohmflux/fft3.hpp"

namespace bohmflux {

EvolvedPacketState free_evolve_analytic(const GaussianSuperposition& psi, double t) {
    return EvolvedPacketState{psi, t};
}

GridField free_evolve_spectral(const GridField& field, double t, double overflow_tol) {
    GridField out = field;
    Fft3 fft(out.nx(), out.ny(), out.nz());
    fft.forward(out.values().data());

    const int nx = out.nx(), ny = out.ny(), nz = out.nz();
    const double h = out.spacing();
    std::vector<double> kx2(nx), ky2(ny), kz2(nz);
    for (int i = 0; i < nx; ++i) kx2[i] = std::pow(fft_wavenumber(i, nx, h), 2);
    for (int i = 0; i < ny; ++i) ky2[i] = std::pow(fft_wavenumber(i, ny, h), 2);
    for (int i = 0; i < nz; ++i) kz2[i] = std::pow(fft_wavenumber(i, nz, h), 2);

    auto& v = out.values();
    for (int iz = 0; iz < nz; ++iz)
        for (int iy = 0; iy < ny; ++iy) {
            const double kyz = ky2[iy] + kz2[iz];
            Complex* row = &v[out.index(0, iy, iz)];
            for (int ix = 0; ix < nx; ++ix)
                row[ix] *= std::exp(Complex{0.0, -0.5 * (kx2[ix] + kyz) * t});
        }
    fft.inverse(v.data());

    const double edge = out.boundary_mass_fraction();
    if (edge > overflow_tol)
        throw BoxOverflowError("free_evolve_spectral: boundary mass " +
                               std::to_string(edge) + " exceeds tolerance");
    return out;
}

void FrameCollector::on_frame(double t, const GridField& psi) {
    frames_.times.push_back(t);
    frames_.fields.push_back(psi);
    frames_.norms.push_back(psi.norm());
}

namespace {

void check_finite(const GridField& f, double t) {
    for (const auto& v : f.values())
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw NumericalError("split_step_evolve: NaN/Inf detected at t=" +
                                 std::to_string(t));
}

}

SplitStepReport split_step_evolve(GridField& field, const Potential& V,
                                  const SplitStepOptions& opts, FrameSink& sink) {
    if (!(opts.dt > 0.0)) throw InvalidParameterError("split_step_evolve: dt must be > 0");
    if (opts.n_steps < 1) throw InvalidParameterError("split_step_evolve: n_steps must be >= 1");
    if (opts.frame_stride < 1) throw InvalidParameterError("split_step_evolve: frame_stride >= 1");

    const int nx = field.nx(), ny = field.ny(), nz = field.nz();
    const double h = field.spacing();
    Fft3 fft(nx, ny, nz);

    // Phase tables. Half-kinetic phases are merged pairwise between steps
    // inside a stride block, so the work is 2 transforms per step.
    std::vector<double> kx2(nx), ky2(ny), kz2(nz);
    for (int i = 0; i < nx; ++i) kx2[i] = std::pow(fft_wavenumber(i, nx, h), 2);
    for (int i = 0; i < ny; ++i) ky2[i] = std::pow(fft_wavenumber(i, ny, h), 2);
    for (int i = 0; i < nz; ++i) kz2[i] = std::pow(fft_wavenumber(i, nz, h), 2);

    const std::vector<double> vgrid = V.sample(field);

    auto apply_kinetic = [&](double tau) {
        auto& vals = field.values();
        fft.forward(vals.data());
        for (int iz = 0; iz < nz; ++iz)
            for (int iy = 0; iy < ny; ++iy) {
                const double kyz = ky2[iy] + kz2[iz];
                Complex* row = &vals[field.index(0, iy, iz)];
                for (int ix = 0; ix < nx; ++ix)
                    row[ix] *= std::exp(Complex{0.0, -0.5 * (kx2[ix] + kyz) * tau});
            }
        fft.inverse(vals.data());
    };

    auto apply_potential = [&](double tau) {
        if (V.is_none()) return;
        auto& vals = field.values();
        for (std::size_t i = 0; i < vals.size(); ++i)
            vals[i] *= std::exp(Complex{0.0, -vgrid[i] * tau});
    };

    SplitStepReport report;
    report.initial_norm = field.norm();

    sink.on_frame(0.0, field);
    ++report.frames_emitted;

    int step = 0;
    while (step < opts.n_steps) {
        const int block = std::min(opts.frame_stride, opts.n_steps - step);
        // K/2 (V K)^{block-1} V K/2 over the block.
        apply_kinetic(0.5 * opts.dt);
        for (int s = 0; s < block; ++s) {
            apply_potential(opts.dt);
            apply_kinetic(s + 1 < block ? opts.dt : 0.5 * opts.dt);
        }
        step += block;
        const double t = step * opts.dt;

        check_finite(field, t);
        const double edge = field.boundary_mass_fraction();
        report.max_boundary_mass = std::max(report.max_boundary_mass, edge);
        if (opts.enforce_overflow && edge > opts.overflow_tol)
            throw BoxOverflowError("split_step_evolve: boundary mass " +
                                   std::to_string(edge) + " at t=" + std::to_string(t));

        const double n = field.norm();
        report.max_norm_drift = std::max(report.max_norm_drift,
                                         std::abs(n - report.initial_norm));
        sink.on_frame(t, field);
        ++report.frames_emitted;
    }
    report.final_norm = field.norm();
    return report;
}

EvolutionFrames split_step_frames(GridField field, const Potential& V,
                                  const SplitStepOptions& opts, SplitStepReport* report) {
    FrameCollector collector;
    auto rep = split_step_evolve(field, V, opts, collector);
    if (report) *report = rep;
    return collector.take();
}

double continuity_residual(const EvolutionFrames& frames, int t_index) {
    const int n = static_cast<int>(frames.fields.size());
    if (t_index < 1 || t_index + 1 >= n)
        throw InvalidParameterError(
            "continuity_residual: need frames on both sides of t_index");

    const GridField& prev = frames.fields[t_index - 1];
    const GridField& cur = frames.fields[t_index];
    const GridField& next = frames.fields[t_index + 1];
    const double dt_minus = frames.times[t_index] - frames.times[t_index - 1];
    const double dt_plus = frames.times[t_index + 1] - frames.times[t_index];
    if (!(dt_minus > 0.0) || !(dt_plus > 0.0))
        throw InvalidParameterError("continuity_residual: times must increase");

    const int nx = cur.nx(), ny = cur.ny(), nz = cur.nz();
    const double h = cur.spacing();
    const double inv2h = 1.0 / (2.0 * h);

    // j = Im(ψ* ∇ψ) with centered differences, at every interior node.
    std::vector<double> jx(cur.size()), jy(cur.size()), jz(cur.size());
    for (int iz = 1; iz < nz - 1; ++iz)
        for (int iy = 1; iy < ny - 1; ++iy)
            for (int ix = 1; ix < nx - 1; ++ix) {
                const Complex p = cur.at(ix, iy, iz);
                const Complex gx = (cur.at(ix + 1, iy, iz) - cur.at(ix - 1, iy, iz)) * inv2h;
                const Complex gy = (cur.at(ix, iy + 1, iz) - cur.at(ix, iy - 1, iz)) * inv2h;
                const Complex gz = (cur.at(ix, iy, iz + 1) - cur.at(ix, iy, iz - 1)) * inv2h;
                const std::size_t i = cur.index(ix, iy, iz);
                jx[i] = std::imag(std::conj(p) * gx);
                jy[i] = std::imag(std::conj(p) * gy);
                jz[i] = std::imag(std::conj(p) * gz);
            }

    // Centered time difference of ρ (uniform stride expected; a weighted
    // form keeps second order for mildly uneven strides).
    double max_res = 0.0;
    for (int iz = 2; iz < nz - 2; ++iz)
        for (int iy = 2; iy < ny - 2; ++iy)
            for (int ix = 2; ix < nx - 2; ++ix) {
                const double rho_prev = std::norm(prev.at(ix, iy, iz));
                const double rho_next = std::norm(next.at(ix, iy, iz));
                const double drho_dt = (rho_next - rho_prev) / (dt_minus + dt_plus);

                const double div_j =
                    (jx[cur.index(ix + 1, iy, iz)] - jx[cur.index(ix - 1, iy, iz)]) * inv2h +
                    (jy[cur.index(ix, iy + 1, iz)] - jy[cur.index(ix, iy - 1, iz)]) * inv2h +
                    (jz[cur.index(ix, iy, iz + 1)] - jz[cur.index(ix, iy, iz - 1)]) * inv2h;

                max_res = std::max(max_res, std::abs(drho_dt + div_j));
            }
    return max_res;
}

double energy_expectation(const GridField& field, const Potential& V) {
    const int nx = field.nx(), ny = field.ny(), nz = field.nz();
    const double h = field.spacing();

    std::vector<Complex> hat = field.values();
    Fft3 fft(nx, ny, nz);
    fft.forward(hat.data());

    double kinetic = 0.0, hat_norm = 0.0;
    for (int iz = 0; iz < nz; ++iz)
        for (int iy = 0; iy < ny; ++iy)
            for (int ix = 0; ix < nx; ++ix) {
                const double k2 = std::pow(fft_wavenumber(ix, nx, h), 2) +
                                  std::pow(fft_wavenumber(iy, ny, h), 2) +
                                  std::pow(fft_wavenumber(iz, nz, h), 2);
                const double w = std::norm(hat[field.index(ix, iy, iz)]);
                kinetic += 0.5 * k2 * w;
                hat_norm += w;
            }
    // DFT weights cancel in the ratio; scale by the field's actual norm².
    const double n2 = std::pow(field.norm(), 2);
    double e = hat_norm > 0.0 ? kinetic / hat_norm * n2 : 0.0;

    if (!V.is_none()) {
        const auto vgrid = V.sample(field);
        double pot = 0.0;
        for (std::size_t i = 0; i < vgrid.size(); ++i)
            pot += vgrid[i] * std::norm(field.values()[i]);
        e += pot * field.cell_volume();
    }
    return e;
}

}
