#include "bohmflux/potential.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bohmflux/errors.hpp"

namespace bohmflux {

namespace {
constexpr double kTruncation = 1e-12;  // short-range enforcement level
}

Potential Potential::none() {
    Potential p;
    p.kind_ = Kind::None;
    p.r_cut_ = 0.0;
    return p;
}

Potential Potential::square_well(double depth, double radius) {
    if (!(radius > 0.0))
        throw InvalidParameterError("square_well: radius must be positive");
    Potential p;
    p.kind_ = Kind::SquareWell;
    p.v0_ = depth;
    p.width_ = radius;
    p.r_cut_ = radius;
    return p;
}

Potential Potential::gaussian_bump(double height, double width) {
    if (!(width > 0.0))
        throw InvalidParameterError("gaussian_bump: width must be positive");
    Potential p;
    p.kind_ = Kind::GaussianBump;
    p.v0_ = height;
    p.width_ = width;
    p.r_cut_ = height != 0.0
                   ? width * std::sqrt(std::log(std::abs(height) / kTruncation))
                   : 0.0;
    return p;
}

Potential Potential::from_grid(std::vector<double> values, Vec3 origin, double spacing,
                               int nx, int ny, int nz) {
    if (!(spacing > 0.0) || nx < 8 || ny < 8 || nz < 8)
        throw InvalidParameterError("grid potential: bad geometry");
    if (values.size() != static_cast<std::size_t>(nx) * ny * nz)
        throw InvalidParameterError("grid potential: value count mismatch");

    Potential p;
    p.kind_ = Kind::Grid;
    p.grid_values_ = std::move(values);
    p.grid_origin_ = origin;
    p.grid_h_ = spacing;
    p.gnx_ = nx;
    p.gny_ = ny;
    p.gnz_ = nz;

    // Short-range check: the outermost shell must be numerically zero, and
    // r_cut is the largest radius carrying a non-negligible value.
    double r_cut = 0.0;
    for (int iz = 0; iz < nz; ++iz)
        for (int iy = 0; iy < ny; ++iy)
            for (int ix = 0; ix < nx; ++ix) {
                const double v = p.grid_values_[static_cast<std::size_t>(ix) +
                                                static_cast<std::size_t>(nx) * (iy + static_cast<std::size_t>(ny) * iz)];
                if (std::abs(v) <= kTruncation) continue;
                const Vec3 x{origin.x + spacing * ix, origin.y + spacing * iy,
                             origin.z + spacing * iz};
                r_cut = std::max(r_cut, norm(x));
                if (ix == 0 || iy == 0 || iz == 0 || ix == nx - 1 || iy == ny - 1 || iz == nz - 1)
                    throw InvalidParameterError(
                        "grid potential: nonzero on the boundary shell (not short-range)");
            }
    p.r_cut_ = r_cut;
    return p;
}

double Potential::radial(double r) const {
    switch (kind_) {
        case Kind::None:
            return 0.0;
        case Kind::SquareWell:
            return r < width_ ? -v0_ : 0.0;
        case Kind::GaussianBump:
            return r <= r_cut_ ? v0_ * std::exp(-r * r / (width_ * width_)) : 0.0;
        case Kind::Grid:
            throw InvalidParameterError("radial(): grid potential is not central");
    }
    return 0.0;
}

double Potential::operator()(const Vec3& x) const {
    if (kind_ == Kind::Grid) {
        const double fx = (x.x - grid_origin_.x) / grid_h_;
        const double fy = (x.y - grid_origin_.y) / grid_h_;
        const double fz = (x.z - grid_origin_.z) / grid_h_;
        if (fx < 0 || fy < 0 || fz < 0 || fx > gnx_ - 1 || fy > gny_ - 1 || fz > gnz_ - 1)
            return 0.0;
        const int ix = std::min(static_cast<int>(fx), gnx_ - 2);
        const int iy = std::min(static_cast<int>(fy), gny_ - 2);
        const int iz = std::min(static_cast<int>(fz), gnz_ - 2);
        const double tx = fx - ix, ty = fy - iy, tz = fz - iz;
        double acc = 0.0;
        for (int dz = 0; dz < 2; ++dz)
            for (int dy = 0; dy < 2; ++dy)
                for (int dx = 0; dx < 2; ++dx) {
                    const double w =
                        (dx ? tx : 1 - tx) * (dy ? ty : 1 - ty) * (dz ? tz : 1 - tz);
                    acc += w * grid_values_[static_cast<std::size_t>(ix + dx) +
                                            static_cast<std::size_t>(gnx_) *
                                                ((iy + dy) + static_cast<std::size_t>(gny_) * (iz + dz))];
                }
        return acc;
    }
    return radial(norm(x));
}

std::vector<double> Potential::sample(const GridField& field) const {
    std::vector<double> out(field.size(), 0.0);
    if (is_none()) return out;
    for (int iz = 0; iz < field.nz(); ++iz)
        for (int iy = 0; iy < field.ny(); ++iy)
            for (int ix = 0; ix < field.nx(); ++ix)
                out[field.index(ix, iy, iz)] = (*this)(field.position(ix, iy, iz));
    return out;
}

std::string Potential::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case Kind::None: os << "none"; break;
        case Kind::SquareWell: os << "square_well(depth=" << v0_ << ", a=" << width_ << ")"; break;
        case Kind::GaussianBump: os << "gaussian_bump(V0=" << v0_ << ", w=" << width_ << ")"; break;
        case Kind::Grid: os << "grid(" << gnx_ << "x" << gny_ << "x" << gnz_ << ")"; break;
    }
    return os.str();
}

}
