#include "bohmflux/fieldsource.hpp"

#include <algorithm>
#include <cmath>

#include "bohmflux/errors.hpp"
#include "bohmflux/fft3.hpp"

namespace bohmflux {

Flow AnalyticFlowField::flow(const Vec3& x, double t) const {
    const auto vg = psi_.value_and_grad(x, t);
    Flow f;
    f.rho = std::norm(vg.psi);
    if (f.rho > 0.0) {
        const Complex inv = 1.0 / vg.psi;
        f.v = {std::imag(vg.grad.x * inv), std::imag(vg.grad.y * inv),
               std::imag(vg.grad.z * inv)};
    }
    return f;
}

FlowFrame make_flow_frame(const GridField& psi, const Potential& V, double t,
                          double rho_reg) {
    const int nx = psi.nx(), ny = psi.ny(), nz = psi.nz();
    const double h = psi.spacing();
    const std::size_t total = psi.size();

    FlowFrame fr;
    fr.t = t;
    fr.geom = {psi.origin(), h, nx, ny, nz};

    Fft3 fft(nx, ny, nz);
    std::vector<Complex> hat = psi.values();
    fft.forward(hat.data());

    std::vector<double> kx(nx), ky(ny), kz(nz);
    for (int i = 0; i < nx; ++i) kx[i] = fft_wavenumber(i, nx, h);
    for (int i = 0; i < ny; ++i) ky[i] = fft_wavenumber(i, ny, h);
    for (int i = 0; i < nz; ++i) kz[i] = fft_wavenumber(i, nz, h);

    auto spectral_apply = [&](auto&& factor) {
        std::vector<Complex> out(total);
        for (int iz = 0; iz < nz; ++iz)
            for (int iy = 0; iy < ny; ++iy) {
                const std::size_t base = fr.geom.index(0, iy, iz);
                for (int ix = 0; ix < nx; ++ix)
                    out[base + ix] = hat[base + ix] * factor(kx[ix], ky[iy], kz[iz]);
            }
        fft.inverse(out.data());
        return out;
    };

    const Complex I{0.0, 1.0};
    std::vector<Complex> gx = spectral_apply([&](double a, double, double) { return I * a; });
    std::vector<Complex> gy = spectral_apply([&](double, double b, double) { return I * b; });
    std::vector<Complex> gz = spectral_apply([&](double, double, double c) { return I * c; });
    std::vector<Complex> lap =
        spectral_apply([&](double a, double b, double c) { return Complex{-(a * a + b * b + c * c), 0.0}; });

    // ∂ψ/∂t = i/2 Δψ - i V ψ (Schrödinger right-hand side).
    std::vector<Complex> dpsi(total);
    {
        const auto& vals = psi.values();
        if (V.is_none()) {
            for (std::size_t i = 0; i < total; ++i) dpsi[i] = 0.5 * I * lap[i];
        } else {
            const auto vgrid = V.sample(psi);
            for (std::size_t i = 0; i < total; ++i)
                dpsi[i] = 0.5 * I * lap[i] - I * vgrid[i] * vals[i];
        }
    }
    lap.clear();
    lap.shrink_to_fit();

    // ∇(∂ψ/∂t), again spectrally.
    std::vector<Complex> dhat = dpsi;
    fft.forward(dhat.data());
    hat.swap(dhat);
    dhat.clear();
    dhat.shrink_to_fit();
    std::vector<Complex> dgx = spectral_apply([&](double a, double, double) { return I * a; });
    std::vector<Complex> dgy = spectral_apply([&](double, double b, double) { return I * b; });
    std::vector<Complex> dgz = spectral_apply([&](double, double, double c) { return I * c; });
    hat.clear();
    hat.shrink_to_fit();

    fr.rho.resize(total);
    fr.drho.resize(total);
    fr.vx.resize(total);
    fr.vy.resize(total);
    fr.vz.resize(total);
    fr.dvx.resize(total);
    fr.dvy.resize(total);
    fr.dvz.resize(total);

    const auto& vals = psi.values();
    double peak = 0.0;
    for (std::size_t i = 0; i < total; ++i) {
        const Complex p = vals[i];
        const double rho = std::norm(p);
        peak = std::max(peak, rho);
        fr.rho[i] = rho;
        fr.drho[i] = 2.0 * std::real(std::conj(p) * dpsi[i]);
        if (rho > rho_reg) {
            const Complex inv = 1.0 / p;
            const Complex lx = gx[i] * inv, ly = gy[i] * inv, lz = gz[i] * inv;
            fr.vx[i] = std::imag(lx);
            fr.vy[i] = std::imag(ly);
            fr.vz[i] = std::imag(lz);
            // ∂v/∂t = Im(∇ψ̇/ψ - (∇ψ/ψ)(ψ̇/ψ))
            const Complex rdot = dpsi[i] * inv;
            fr.dvx[i] = std::imag(dgx[i] * inv - lx * rdot);
            fr.dvy[i] = std::imag(dgy[i] * inv - ly * rdot);
            fr.dvz[i] = std::imag(dgz[i] * inv - lz * rdot);
        }
    }
    fr.peak_rho = peak;
    return fr;
}

namespace {

struct CellWeights {
    std::size_t corner[8];
    double w[8];
};

bool cell_weights(const GridGeometry& g, const Vec3& x, CellWeights& cw) {
    const double fx = (x.x - g.origin.x) / g.h;
    const double fy = (x.y - g.origin.y) / g.h;
    const double fz = (x.z - g.origin.z) / g.h;
    if (fx < 0.0 || fy < 0.0 || fz < 0.0 ||
        fx > g.nx - 1 || fy > g.ny - 1 || fz > g.nz - 1)
        return false;
    const int ix = std::min(static_cast<int>(fx), g.nx - 2);
    const int iy = std::min(static_cast<int>(fy), g.ny - 2);
    const int iz = std::min(static_cast<int>(fz), g.nz - 2);
    const double tx = fx - ix, ty = fy - iy, tz = fz - iz;

    int c = 0;
    for (int dz = 0; dz < 2; ++dz)
        for (int dy = 0; dy < 2; ++dy)
            for (int dx = 0; dx < 2; ++dx, ++c) {
                cw.corner[c] = g.index(ix + dx, iy + dy, iz + dz);
                cw.w[c] = (dx ? tx : 1.0 - tx) * (dy ? ty : 1.0 - ty) * (dz ? tz : 1.0 - tz);
            }
    return true;
}

double lerp_field(const std::vector<double>& f, const CellWeights& cw) {
    double s = 0.0;
    for (int c = 0; c < 8; ++c) s += f[cw.corner[c]] * cw.w[c];
    return s;
}

}

Flow eval_flow_segment(const FlowFrame& a, const FlowFrame& b, const Vec3& x, double t) {
    CellWeights cw;
    if (!cell_weights(a.geom, x, cw)) return Flow{};  // rho=0 outside domain

    const double dt = b.t - a.t;
    if (!(dt > 0.0)) {
        // Degenerate segment: pure nodal evaluation of frame a.
        Flow f;
        f.rho = std::max(0.0, lerp_field(a.rho, cw));
        f.v = {lerp_field(a.vx, cw), lerp_field(a.vy, cw), lerp_field(a.vz, cw)};
        return f;
    }
    const double s = std::clamp((t - a.t) / dt, 0.0, 1.0);
    // Cubic Hermite basis.
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;

    auto hermite = [&](const std::vector<double>& fa, const std::vector<double>& da,
                       const std::vector<double>& fb, const std::vector<double>& db) {
        return h00 * lerp_field(fa, cw) + h10 * dt * lerp_field(da, cw) +
               h01 * lerp_field(fb, cw) + h11 * dt * lerp_field(db, cw);
    };

    Flow f;
    f.rho = std::max(0.0, hermite(a.rho, a.drho, b.rho, b.drho));
    f.v = {hermite(a.vx, a.dvx, b.vx, b.dvx),
           hermite(a.vy, a.dvy, b.vy, b.dvy),
           hermite(a.vz, a.dvz, b.vz, b.dvz)};
    return f;
}

FrameFlowField::FrameFlowField(const EvolutionFrames& frames, const Potential& V,
                               double node_reg_fraction) {
    if (frames.fields.size() < 2)
        throw InvalidParameterError("FrameFlowField: need at least two frames");

    // Regularization floor relative to the first frame's peak density.
    double peak0 = 0.0;
    for (const auto& v : frames.fields.front().values())
        peak0 = std::max(peak0, std::norm(v));

    for (std::size_t i = 0; i < frames.fields.size(); ++i) {
        auto fr = std::make_shared<FlowFrame>(
            make_flow_frame(frames.fields[i], V, frames.times[i], node_reg_fraction * peak0));
        peak_rho_ = std::max(peak_rho_, fr->peak_rho);
        frames_.push_back(std::move(fr));
    }
    geom_ = frames_.front()->geom;
}

bool FrameFlowField::in_domain(const Vec3& x) const {
    const double m = geom_.h;
    return x.x >= geom_.origin.x + m && x.x <= geom_.origin.x + geom_.h * (geom_.nx - 1) - m &&
           x.y >= geom_.origin.y + m && x.y <= geom_.origin.y + geom_.h * (geom_.ny - 1) - m &&
           x.z >= geom_.origin.z + m && x.z <= geom_.origin.z + geom_.h * (geom_.nz - 1) - m;
}

Flow FrameFlowField::flow(const Vec3& x, double t) const {
    // Locate the bracketing segment (frames are uniformly strided in
    // practice, so start from the proportional guess).
    const double t0 = frames_.front()->t, t1 = frames_.back()->t;
    const int nseg = static_cast<int>(frames_.size()) - 1;
    int i = static_cast<int>((t - t0) / (t1 - t0) * nseg);
    i = std::clamp(i, 0, nseg - 1);
    while (i > 0 && t < frames_[i]->t) --i;
    while (i < nseg - 1 && t > frames_[i + 1]->t) ++i;
    return eval_flow_segment(*frames_[i], *frames_[i + 1], x, t);
}

}
