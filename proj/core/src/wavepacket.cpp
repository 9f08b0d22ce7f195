#include "bohmflux/wavepacket.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "bohmflux/errors.hpp"
#include "bohmflux/fft3.hpp"

namespace bohmflux {

namespace {

constexpr double kPi = M_PI;

// 1D complex Gaussian integral ∫ exp(-a x² + b x) dx = sqrt(π/a) exp(b²/4a),
// valid for Re(a) > 0.
Complex gauss_integral_1d(Complex a, Complex b) {
    return std::sqrt(kPi / a) * std::exp(b * b / (4.0 * a));
}

}

void GaussianSuperposition::validate() const {
    for (const auto& p : comps_)
        if (!(p.sigma > 0.0))
            throw InvalidParameterError("GaussianPacket: sigma must be positive");
}

double GaussianSuperposition::evolved_width(const GaussianPacket& p, double t) {
    const double s2 = p.sigma * p.sigma;
    return p.sigma * std::sqrt(1.0 + t * t / (4.0 * s2 * s2));
}

Complex GaussianSuperposition::value(const Vec3& x, double t) const {
    Complex sum{};
    for (const auto& p : comps_) {
        const double s2 = p.sigma * p.sigma;
        const Complex alpha{1.0, t / (2.0 * s2)};
        const Vec3 u = x - p.center - p.k0 * t;
        const Complex envelope = -norm2(u) / (4.0 * s2 * alpha);
        const Complex phase{0.0, dot(p.k0, x) - 0.5 * norm2(p.k0) * t};
        const double n0 = std::pow(2.0 * kPi * s2, -0.75);
        sum += p.amplitude * n0 * std::pow(alpha, -1.5) * std::exp(envelope + phase);
    }
    return sum;
}

PsiAndGrad GaussianSuperposition::value_and_grad(const Vec3& x, double t) const {
    PsiAndGrad out;
    for (const auto& p : comps_) {
        const double s2 = p.sigma * p.sigma;
        const Complex alpha{1.0, t / (2.0 * s2)};
        const Vec3 u = x - p.center - p.k0 * t;
        const Complex envelope = -norm2(u) / (4.0 * s2 * alpha);
        const Complex phase{0.0, dot(p.k0, x) - 0.5 * norm2(p.k0) * t};
        const double n0 = std::pow(2.0 * kPi * s2, -0.75);
        const Complex val = p.amplitude * n0 * std::pow(alpha, -1.5) * std::exp(envelope + phase);

        // ∇log ψ_component = -u/(2σ²α) + i k0
        const Complex coef = -1.0 / (2.0 * s2 * alpha);
        const Complex ik{0.0, 1.0};
        out.psi += val;
        out.grad.x += val * (coef * u.x + ik * p.k0.x);
        out.grad.y += val * (coef * u.y + ik * p.k0.y);
        out.grad.z += val * (coef * u.z + ik * p.k0.z);
    }
    return out;
}

double GaussianSuperposition::density(const Vec3& x, double t) const {
    return std::norm(value(x, t));
}

Complex GaussianSuperposition::momentum_amplitude(const Vec3& k) const {
    Complex sum{};
    for (const auto& p : comps_) {
        const double s2 = p.sigma * p.sigma;
        const Vec3 dk = k - p.k0;
        const double mag = std::pow(2.0 * s2 / kPi, 0.75) * std::exp(-s2 * norm2(dk));
        const Complex phase{0.0, -dot(dk, p.center)};
        sum += p.amplitude * mag * std::exp(phase);
    }
    return sum;
}

Complex GaussianSuperposition::momentum_amplitude(const Vec3& k, double t) const {
    return momentum_amplitude(k) * std::exp(Complex{0.0, -0.5 * norm2(k) * t});
}

double GaussianSuperposition::norm() const {
    // <g_i, g_j> factorizes per axis into complex Gaussian integrals.
    Complex total{};
    for (const auto& pi : comps_) {
        for (const auto& pj : comps_) {
            const double si2 = pi.sigma * pi.sigma;
            const double sj2 = pj.sigma * pj.sigma;
            const double ni = std::pow(2.0 * kPi * si2, -0.75);
            const double nj = std::pow(2.0 * kPi * sj2, -0.75);
            const Complex a{1.0 / (4.0 * si2) + 1.0 / (4.0 * sj2), 0.0};
            Complex overlap{1.0, 0.0};
            double cexp = 0.0;
            for (int axis = 0; axis < 3; ++axis) {
                const double ci = pi.center[axis], cj = pj.center[axis];
                const Complex b{ci / (2.0 * si2) + cj / (2.0 * sj2),
                                pj.k0[axis] - pi.k0[axis]};
                overlap *= gauss_integral_1d(a, b);
                cexp += -ci * ci / (4.0 * si2) - cj * cj / (4.0 * sj2);
            }
            total += std::conj(pi.amplitude) * pj.amplitude * ni * nj * overlap * std::exp(cexp);
        }
    }
    return std::sqrt(std::max(0.0, total.real()));
}

GaussianSuperposition GaussianSuperposition::normalized() const {
    const double n = norm();
    if (n <= 0.0) throw InvalidParameterError("cannot normalize a null superposition");
    auto comps = comps_;
    for (auto& p : comps) p.amplitude /= n;
    return GaussianSuperposition(std::move(comps));
}

double GaussianSuperposition::peak_density_bound(double t) const {
    double amp = 0.0;
    for (const auto& p : comps_) {
        const double st = evolved_width(p, t);
        amp += std::abs(p.amplitude) * std::pow(2.0 * kPi * st * st, -0.75);
    }
    return amp * amp;
}

GaussianSuperposition make_gaussian(const Vec3& center, const Vec3& k0, double sigma) {
    if (!(sigma > 0.0))
        throw InvalidParameterError("make_gaussian: sigma must be positive");
    return GaussianSuperposition(GaussianPacket{center, k0, sigma, Complex{1.0, 0.0}});
}

GridField::GridField(Vec3 origin, double spacing, int nx, int ny, int nz)
    : origin_(origin), h_(spacing), nx_(nx), ny_(ny), nz_(nz) {
    if (!(spacing > 0.0)) throw InvalidParameterError("GridField: spacing must be positive");
    if (nx < 8 || ny < 8 || nz < 8)
        throw InvalidParameterError("GridField: dims must be >= 8 per axis");
    values_.assign(static_cast<std::size_t>(nx) * ny * nz, Complex{});
}

bool GridField::interior(const Vec3& x, double margin_cells) const {
    const double m = margin_cells * h_;
    const Vec3 hi = max_corner();
    return x.x >= origin_.x + m && x.x <= hi.x - m &&
           x.y >= origin_.y + m && x.y <= hi.y - m &&
           x.z >= origin_.z + m && x.z <= hi.z - m;
}

double GridField::norm() const {
    double s = 0.0;
    for (const auto& v : values_) s += std::norm(v);
    return std::sqrt(s * cell_volume());
}

void GridField::normalize() {
    const double n = norm();
    if (n <= 0.0) throw InvalidParameterError("GridField::normalize: zero field");
    const double inv = 1.0 / n;
    for (auto& v : values_) v *= inv;
}

Complex GridField::value_trilinear(const Vec3& x) const {
    const double fx = (x.x - origin_.x) / h_;
    const double fy = (x.y - origin_.y) / h_;
    const double fz = (x.z - origin_.z) / h_;
    const int ix = std::clamp(static_cast<int>(std::floor(fx)), 0, nx_ - 2);
    const int iy = std::clamp(static_cast<int>(std::floor(fy)), 0, ny_ - 2);
    const int iz = std::clamp(static_cast<int>(std::floor(fz)), 0, nz_ - 2);
    const double tx = std::clamp(fx - ix, 0.0, 1.0);
    const double ty = std::clamp(fy - iy, 0.0, 1.0);
    const double tz = std::clamp(fz - iz, 0.0, 1.0);

    Complex acc{};
    for (int dz = 0; dz < 2; ++dz)
        for (int dy = 0; dy < 2; ++dy)
            for (int dx = 0; dx < 2; ++dx) {
                const double w = (dx ? tx : 1.0 - tx) * (dy ? ty : 1.0 - ty) * (dz ? tz : 1.0 - tz);
                acc += w * at(ix + dx, iy + dy, iz + dz);
            }
    return acc;
}

double GridField::boundary_mass_fraction(int shell) const {
    double total = 0.0, edge = 0.0;
    for (int iz = 0; iz < nz_; ++iz)
        for (int iy = 0; iy < ny_; ++iy)
            for (int ix = 0; ix < nx_; ++ix) {
                const double d = std::norm(at(ix, iy, iz));
                total += d;
                const bool near = ix < shell || iy < shell || iz < shell ||
                                  ix >= nx_ - shell || iy >= ny_ - shell || iz >= nz_ - shell;
                if (near) edge += d;
            }
    return total > 0.0 ? edge / total : 0.0;
}

Complex GridField::momentum_amplitude(const Vec3& k) const {
    const double nyq = kPi / h_;
    if (std::abs(k.x) > nyq || std::abs(k.y) > nyq || std::abs(k.z) > nyq)
        throw ResolutionError("momentum_amplitude: |k| beyond grid Nyquist");

    // Precompute per-axis phases, then accumulate the separable product.
    std::vector<Complex> px(nx_), py(ny_), pz(nz_);
    for (int i = 0; i < nx_; ++i) px[i] = std::exp(Complex{0.0, -k.x * (origin_.x + h_ * i)});
    for (int i = 0; i < ny_; ++i) py[i] = std::exp(Complex{0.0, -k.y * (origin_.y + h_ * i)});
    for (int i = 0; i < nz_; ++i) pz[i] = std::exp(Complex{0.0, -k.z * (origin_.z + h_ * i)});

    Complex sum{};
    for (int iz = 0; iz < nz_; ++iz) {
        Complex plane{};
        for (int iy = 0; iy < ny_; ++iy) {
            Complex row{};
            const Complex* base = &values_[index(0, iy, iz)];
            for (int ix = 0; ix < nx_; ++ix) row += base[ix] * px[ix];
            plane += row * py[iy];
        }
        sum += plane * pz[iz];
    }
    return sum * cell_volume() * std::pow(2.0 * kPi, -1.5);
}

double GridField::momentum_norm_squared() const {
    std::vector<Complex> work = values_;
    Fft3 fft(nx_, ny_, nz_);
    fft.forward(work.data());
    // ψ̂ on the DFT lattice is (2π)^{-3/2} h³ e^{-ik·origin} · FFT value; the
    // phase drops out of |ψ̂|². The momentum-space cell is (2π/(n h))³.
    double s = 0.0;
    for (const auto& v : work) s += std::norm(v);
    const double amp_factor = cell_volume() * std::pow(2.0 * kPi, -1.5);
    const double dk3 = std::pow(2.0 * kPi, 3) /
                       (cell_volume() * static_cast<double>(nx_) * ny_ * nz_);
    return s * amp_factor * amp_factor * dk3;
}

namespace {

void write_le(std::ofstream& os, const void* p, std::size_t n) {
    os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

}

void GridField::save(const std::string& path) const {
    static_assert(std::endian::native == std::endian::little,
                  "binary format is little-endian");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw InvalidParameterError("GridField::save: cannot open " + path);

    const int64_t dims[3] = {nx_, ny_, nz_};
    const double geom[4] = {origin_.x, origin_.y, origin_.z, h_};
    write_le(os, dims, sizeof(dims));
    write_le(os, geom, sizeof(geom));
    write_le(os, values_.data(), values_.size() * sizeof(Complex));
    if (!os) throw InvalidParameterError("GridField::save: write failed: " + path);
}

GridField GridField::load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw InvalidParameterError("GridField::load: cannot open " + path);

    int64_t dims[3];
    double geom[4];
    is.read(reinterpret_cast<char*>(dims), sizeof(dims));
    is.read(reinterpret_cast<char*>(geom), sizeof(geom));
    if (!is) throw InvalidParameterError("GridField::load: truncated header: " + path);

    GridField f({geom[0], geom[1], geom[2]}, geom[3],
                static_cast<int>(dims[0]), static_cast<int>(dims[1]), static_cast<int>(dims[2]));
    is.read(reinterpret_cast<char*>(f.values_.data()),
            static_cast<std::streamsize>(f.values_.size() * sizeof(Complex)));
    if (!is) throw InvalidParameterError("GridField::load: truncated data: " + path);
    return f;
}

GridField make_centered_grid(const Vec3& center, double half_width, int n) {
    if (!(half_width > 0.0)) throw InvalidParameterError("make_centered_grid: half_width <= 0");
    // n nodes spanning [-half, half) so the FFT period is exactly 2*half.
    const double h = 2.0 * half_width / n;
    const Vec3 origin = center - Vec3{half_width, half_width, half_width};
    return GridField(origin, h, n, n, n);
}

void sample_onto_grid(GridField& field, const GaussianSuperposition& psi, double t) {
    for (int iz = 0; iz < field.nz(); ++iz)
        for (int iy = 0; iy < field.ny(); ++iy)
            for (int ix = 0; ix < field.nx(); ++ix)
                field.at(ix, iy, iz) = psi.value(field.position(ix, iy, iz), t);
}

double default_box_half_width(const GaussianSuperposition& psi) {
    // |psi|/peak = exp(-d²/(4σ²)) < 1e-8  =>  d > σ sqrt(4 ln 1e8) ≈ 8.58 σ.
    const double margin = std::sqrt(4.0 * std::log(1e8));
    double half = 0.0;
    for (const auto& p : psi.components()) {
        const double reach = norm(p.center) + margin * p.sigma;
        half = std::max(half, reach);
    }
    return half;
}

}
