#ifndef BOHMFLUX_POTENTIAL_HPP
#define BOHMFLUX_POTENTIAL_HPP

#include <string>
#include <vector>

#include "bohmflux/vec3.hpp"
#include "bohmflux/wavepacket.hpp"

namespace bohmflux {

/// Short-range potential: none, a central profile, or a grid-sampled field.
/// Beyond r_cut the potential is identically zero; r_cut must be finite
/// (long-range/Coulomb forms are rejected by construction).
class Potential {
public:
    enum class Kind { None, SquareWell, GaussianBump, Grid };

    static Potential none();
    /// V(r) = -depth for r < radius (depth > 0 is attractive), 0 outside.
    static Potential square_well(double depth, double radius);
    /// V(r) = height * exp(-r²/w²), truncated where |V| < 1e-12.
    static Potential gaussian_bump(double height, double width);
    /// Grid-sampled short-range field; throws unless it vanishes (|V|<1e-12)
    /// on the outermost shell.
    static Potential from_grid(std::vector<double> values, Vec3 origin, double spacing,
                               int nx, int ny, int nz);

    Kind kind() const { return kind_; }
    bool is_none() const { return kind_ == Kind::None; }
    double r_cut() const { return r_cut_; }

    /// Central profile value at radius r (None/SquareWell/GaussianBump).
    double radial(double r) const;

    /// Value at a point (any kind).
    double operator()(const Vec3& x) const;

    /// Sample onto the geometry of `field` (origin measured as distances
    /// from the coordinate origin, not from the grid corner).
    std::vector<double> sample(const GridField& field) const;

    double param_depth() const { return v0_; }
    double param_width() const { return width_; }

    std::string describe() const;

private:
    Potential() = default;

    Kind kind_ = Kind::None;
    double v0_ = 0.0;     // depth (well) or height (bump)
    double width_ = 0.0;  // radius (well) or width (bump)
    double r_cut_ = 0.0;

    // grid storage
    std::vector<double> grid_values_;
    Vec3 grid_origin_{};
    double grid_h_ = 0.0;
    int gnx_ = 0, gny_ = 0, gnz_ = 0;
};

}

#endif
