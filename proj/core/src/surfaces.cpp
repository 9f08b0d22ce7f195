#include "bohmflux/surfaces.hpp"

#include <algorithm>
#include <cmath>

#include "bohmflux/errors.hpp"
#include "bohmflux/quadrature.hpp"

namespace bohmflux {

namespace {
constexpr double kTwoPi = 2.0 * M_PI;

double wrap_phi(double phi) {
    double p = std::fmod(phi, kTwoPi);
    if (p < 0.0) p += kTwoPi;
    return p;
}
}

SphereSpec SphereSpec::make(double R, int n_theta, int n_phi) {
    if (!(R > 0.0)) throw InvalidParameterError("SphereSpec: radius must be positive");
    SphereSpec s;
    s.radius = R;
    s.n_theta = n_theta;
    s.n_phi = n_phi;

    const auto mu_rule = gauss_legendre(n_theta, -1.0, 1.0);
    const double dphi = kTwoPi / n_phi;
    s.nodes.reserve(static_cast<std::size_t>(n_theta) * n_phi);
    for (int i = 0; i < n_theta; ++i) {
        const double mu = mu_rule.nodes[i];
        const double wmu = mu_rule.weights[i];
        for (int j = 0; j < n_phi; ++j) {
            const double phi = (j + 0.5) * dphi;
            SphereSpec::Node node;
            node.unit = direction_from_angles(mu, phi);
            node.weight = R * R * wmu * dphi;
            node.mu = mu;
            node.phi = phi;
            s.nodes.push_back(node);
        }
    }
    return s;
}

double SphereSpec::weight_sum() const {
    double w = 0.0;
    for (const auto& n : nodes) w += n.weight;
    return w;
}

bool ConeBin::contains(double mu, double phi) const {
    if (mu < mu_lo || mu > mu_hi) return false;
    const double span = phi_hi - phi_lo;
    if (span >= kTwoPi - 1e-15) return true;
    const double p = wrap_phi(phi - phi_lo);
    return p < span;
}

bool ConeBin::contains(const Vec3& unit) const {
    const double mu = std::clamp(unit.z, -1.0, 1.0);
    return contains(mu, std::atan2(unit.y, unit.x));
}

double ConeBin::solid_angle() const {
    return (mu_hi - mu_lo) * std::min(phi_hi - phi_lo, kTwoPi);
}

ConeBin ConeBin::full_sphere() { return ConeBin{-1.0, 1.0, 0.0, kTwoPi}; }

ConeBin ConeBin::cap(double half_angle_rad) {
    return ConeBin{std::cos(half_angle_rad), 1.0, 0.0, kTwoPi};
}

int BinPartition::find(const Vec3& unit) const {
    const double mu = std::clamp(unit.z, -1.0, 1.0);
    const double phi = std::atan2(unit.y, unit.x);
    for (std::size_t i = 0; i < bins.size(); ++i) {
        const auto& b = bins[i];
        // Half-open in mu except at the top band, so bands tile exactly.
        const bool mu_in = (mu >= b.mu_lo && mu < b.mu_hi) ||
                           (b.mu_hi >= 1.0 - 1e-15 && mu >= b.mu_lo);
        if (!mu_in) continue;
        const double span = b.phi_hi - b.phi_lo;
        if (span >= kTwoPi - 1e-15 || wrap_phi(phi - b.phi_lo) < span)
            return static_cast<int>(i);
    }
    return -1;
}

BinPartition BinPartition::bands(int n_mu, int n_phi) {
    if (n_mu < 1 || n_phi < 1)
        throw InvalidParameterError("BinPartition::bands: counts must be positive");
    BinPartition p;
    for (int i = 0; i < n_mu; ++i) {
        const double lo = -1.0 + 2.0 * i / n_mu;
        const double hi = -1.0 + 2.0 * (i + 1) / n_mu;
        for (int j = 0; j < n_phi; ++j)
            p.bins.push_back({lo, hi, kTwoPi * j / n_phi, kTwoPi * (j + 1) / n_phi});
    }
    return p;
}

BinPartition BinPartition::cap_bands(double cap_deg, const std::vector<double>& mu_edges,
                                     const std::vector<int>& phi_counts) {
    const double mu_cap = std::cos(cap_deg * M_PI / 180.0);
    if (mu_edges.size() != phi_counts.size() + 1)
        throw InvalidParameterError("cap_bands: need one more mu edge than band count");
    if (std::abs(mu_edges.front() + 1.0) > 1e-12 || std::abs(mu_edges.back() - mu_cap) > 1e-12)
        throw InvalidParameterError("cap_bands: mu edges must span [-1, cos(cap)]");

    BinPartition p;
    for (std::size_t i = 0; i + 1 < mu_edges.size(); ++i) {
        const int nphi = phi_counts[i];
        if (nphi < 1) throw InvalidParameterError("cap_bands: phi count must be >= 1");
        for (int j = 0; j < nphi; ++j)
            p.bins.push_back({mu_edges[i], mu_edges[i + 1],
                              kTwoPi * j / nphi, kTwoPi * (j + 1) / nphi});
    }
    p.bins.push_back(ConeBin::cap(cap_deg * M_PI / 180.0));
    return p;
}

namespace {

struct SurfaceSample {
    double signed_flux, abs_flux, neg_flux;
};

SurfaceSample surface_flux_at(const FlowField& field, const SphereSpec& sphere,
                              const ConeBin& bin, double t) {
    SurfaceSample s{0.0, 0.0, 0.0};
    for (const auto& node : sphere.nodes) {
        if (!bin.contains(node.mu, node.phi)) continue;
        const Vec3 x = node.unit * sphere.radius;
        const Flow f = field.flow(x, t);
        const double jn = f.rho * dot(f.v, node.unit);
        s.signed_flux += jn * node.weight;
        s.abs_flux += std::abs(jn) * node.weight;
        if (jn < 0.0) s.neg_flux += -jn * node.weight;
    }
    return s;
}

}

FluxResult flux_across_surface(const FlowField& field, const SphereSpec& sphere,
                               const ConeBin& bin, double t0, double t1,
                               const FluxOptions& opts) {
    auto run = [&](const SphereSpec& sph) {
        FluxResult r;
        auto signed_f = [&](double t) {
            return surface_flux_at(field, sph, bin, t).signed_flux;
        };
        const auto main = integrate_adaptive(signed_f, t0, t1, opts.rel_tol,
                                             opts.abs_tol, opts.time_seeds);
        r.signed_flux = main.value;
        r.quadrature_error = main.error_estimate;
        r.converged = main.converged;

        // The absolute/inward integrals ride on a fixed refinement of the
        // same window (they only feed diagnostics and EXPECT comparisons).
        auto abs_f = [&](double t) { return surface_flux_at(field, sph, bin, t).abs_flux; };
        auto neg_f = [&](double t) { return surface_flux_at(field, sph, bin, t).neg_flux; };
        r.absolute_flux = integrate_adaptive(abs_f, t0, t1, opts.rel_tol * 10,
                                             opts.abs_tol, opts.time_seeds).value;
        r.inward_flux = integrate_adaptive(neg_f, t0, t1, opts.rel_tol * 10,
                                           opts.abs_tol, opts.time_seeds).value;
        return r;
    };

    FluxResult result = run(sphere);
    if (!std::isfinite(result.signed_flux))
        throw QuadratureError("flux_across_surface: non-finite integral");

    if (opts.check_node_doubling) {
        const SphereSpec dense = SphereSpec::make(sphere.radius, 2 * sphere.n_theta,
                                                  2 * sphere.n_phi);
        const FluxResult fine = run(dense);
        const double diff = std::abs(fine.signed_flux - result.signed_flux);
        const double scale = std::max(std::abs(fine.signed_flux), 1e-14);
        if (diff / scale > opts.node_doubling_tol) result.converged = false;
        result.quadrature_error = std::max(result.quadrature_error, diff);
        result.signed_flux = fine.signed_flux;
        result.absolute_flux = fine.absolute_flux;
        result.inward_flux = fine.inward_flux;
    }
    return result;
}

FluxTimeSeries compute_flux_series(const FlowField& field, const SphereSpec& sphere,
                                   const BinPartition& bins, double t0, double t1,
                                   double dt) {
    if (!(dt > 0.0) || !(t1 > t0))
        throw InvalidParameterError("compute_flux_series: bad time window");

    const int n_bins = static_cast<int>(bins.size());
    const int n_t = static_cast<int>(std::ceil((t1 - t0) / dt)) + 1;

    // Node→bin map once.
    std::vector<int> node_bin(sphere.nodes.size(), -1);
    for (std::size_t i = 0; i < sphere.nodes.size(); ++i)
        node_bin[i] = bins.find(sphere.nodes[i].unit);

    FluxTimeSeries series;
    series.times.resize(n_t);
    series.signed_flux.assign(n_bins, std::vector<double>(n_t, 0.0));
    series.abs_flux.assign(n_bins, std::vector<double>(n_t, 0.0));
    series.neg_flux.assign(n_bins, std::vector<double>(n_t, 0.0));

    for (int it = 0; it < n_t; ++it) {
        const double t = std::min(t0 + it * dt, t1);
        series.times[it] = t;
        for (std::size_t i = 0; i < sphere.nodes.size(); ++i) {
            const int b = node_bin[i];
            if (b < 0) continue;
            const auto& node = sphere.nodes[i];
            const Flow f = field.flow(node.unit * sphere.radius, t);
            const double jn = f.rho * dot(f.v, node.unit);
            series.signed_flux[b][it] += jn * node.weight;
            series.abs_flux[b][it] += std::abs(jn) * node.weight;
            if (jn < 0.0) series.neg_flux[b][it] += -jn * node.weight;
        }
    }
    return series;
}

double FluxTimeSeries::integrate(const std::vector<double>& series, double ta,
                                 double tb) const {
    // Trapezoid on the cached samples with exact handling of partial panels.
    ta = std::max(ta, times.front());
    tb = std::min(tb, times.back());
    if (!(tb > ta)) return 0.0;

    auto value_at = [&](double t, std::size_t seg) {
        const double u = (t - times[seg]) / (times[seg + 1] - times[seg]);
        return series[seg] * (1.0 - u) + series[seg + 1] * u;
    };

    std::size_t ia = 0;
    while (ia + 2 < times.size() && times[ia + 1] <= ta) ++ia;
    std::size_t ib = ia;
    while (ib + 2 < times.size() && times[ib + 1] < tb) ++ib;

    if (ia == ib)
        return 0.5 * (value_at(ta, ia) + value_at(tb, ia)) * (tb - ta);

    double sum = 0.5 * (value_at(ta, ia) + series[ia + 1]) * (times[ia + 1] - ta);
    for (std::size_t i = ia + 1; i < ib; ++i)
        sum += 0.5 * (series[i] + series[i + 1]) * (times[i + 1] - times[i]);
    sum += 0.5 * (series[ib] + value_at(tb, ib)) * (tb - times[ib]);
    return sum;
}

double FluxTimeSeries::integrate_bin_signed(int bin, double ta, double tb) const {
    return integrate(signed_flux[bin], ta, tb);
}

Vec3 asymptotic_current(const std::function<Complex(const Vec3&)>& psi_hat,
                        const Vec3& x, double t) {
    if (!(t > 0.0)) throw InvalidParameterError("asymptotic_current: t must be > 0");
    const Vec3 v = x / t;
    const double weight = std::norm(psi_hat(v)) / (t * t * t);
    return v * weight;
}

double cone_probability(const GaussianSuperposition& psi, double t, const ConeBin& bin) {
    // Radial reach where all components are negligible.
    double r_max = 0.0;
    for (const auto& p : psi.components()) {
        const double st = GaussianSuperposition::evolved_width(p, t);
        r_max = std::max(r_max, norm(p.center + p.k0 * t) + 10.0 * st);
    }

    const auto r_rule = gauss_legendre(200, 0.0, r_max);
    const auto mu_rule = gauss_legendre(64, bin.mu_lo, bin.mu_hi);
    const double span = std::min(bin.phi_hi - bin.phi_lo, kTwoPi);
    const int n_phi = 64;
    const double dphi = span / n_phi;

    double total = 0.0;
    for (int im = 0; im < 64; ++im) {
        for (int ip = 0; ip < n_phi; ++ip) {
            const double phi = bin.phi_lo + (ip + 0.5) * dphi;
            const Vec3 u = direction_from_angles(mu_rule.nodes[im], phi);
            double radial = 0.0;
            for (std::size_t ir = 0; ir < r_rule.nodes.size(); ++ir) {
                const double r = r_rule.nodes[ir];
                radial += r * r * psi.density(u * r, t) * r_rule.weights[ir];
            }
            total += radial * mu_rule.weights[im] * dphi;
        }
    }
    return total;
}

double cone_probability(const GridField& psi, const ConeBin& bin, double boundary_tol) {
    double inside = 0.0, edge = 0.0;
    const int shell = 2;
    for (int iz = 0; iz < psi.nz(); ++iz)
        for (int iy = 0; iy < psi.ny(); ++iy)
            for (int ix = 0; ix < psi.nx(); ++ix) {
                const Vec3 x = psi.position(ix, iy, iz);
                const double r = norm(x);
                if (r == 0.0) continue;
                if (!bin.contains(x / r)) continue;
                const double m = std::norm(psi.at(ix, iy, iz));
                inside += m;
                const bool near = ix < shell || iy < shell || iz < shell ||
                                  ix >= psi.nx() - shell || iy >= psi.ny() - shell ||
                                  iz >= psi.nz() - shell;
                if (near) edge += m;
            }
    inside *= psi.cell_volume();
    edge *= psi.cell_volume();
    if (edge > boundary_tol)
        throw NumericalError("cone_probability: cone mass touches grid boundary");
    return inside;
}

double momentum_bin_integral(const GaussianSuperposition& psi, const ConeBin& bin,
                             int n_v, int n_mu, int n_phi) {
    double v_max = 0.0;
    for (const auto& p : psi.components())
        v_max = std::max(v_max, norm(p.k0) + 8.0 / (2.0 * p.sigma));

    const auto v_rule = gauss_legendre(n_v, 0.0, v_max);
    const auto mu_rule = gauss_legendre(n_mu, bin.mu_lo, bin.mu_hi);
    const double span = std::min(bin.phi_hi - bin.phi_lo, kTwoPi);
    const double dphi = span / n_phi;

    double total = 0.0;
    for (int im = 0; im < n_mu; ++im)
        for (int ip = 0; ip < n_phi; ++ip) {
            const double phi = bin.phi_lo + (ip + 0.5) * dphi;
            const Vec3 u = direction_from_angles(mu_rule.nodes[im], phi);
            double radial = 0.0;
            for (int iv = 0; iv < n_v; ++iv) {
                const double v = v_rule.nodes[iv];
                radial += v * v * std::norm(psi.momentum_amplitude(u * v)) * v_rule.weights[iv];
            }
            total += radial * mu_rule.weights[im] * dphi;
        }
    return total;
}

double velocity_quantile(const GaussianSuperposition& psi, double q) {
    double v_max = 0.0;
    for (const auto& p : psi.components())
        v_max = std::max(v_max, norm(p.k0) + 8.0 / (2.0 * p.sigma));

    // Speed density p(v) ∝ v² ∫ dΩ |ψ̂(v u)|², tabulated then inverted.
    const int n_v = 400;
    const auto mu_rule = gauss_legendre(48, -1.0, 1.0);
    const int n_phi = 32;
    const double dphi = kTwoPi / n_phi;

    std::vector<double> pdf(n_v + 1, 0.0), cdf(n_v + 1, 0.0);
    const double dv = v_max / n_v;
    for (int iv = 0; iv <= n_v; ++iv) {
        const double v = iv * dv;
        double ang = 0.0;
        for (int im = 0; im < 48; ++im)
            for (int ip = 0; ip < n_phi; ++ip) {
                const Vec3 u = direction_from_angles(mu_rule.nodes[im], (ip + 0.5) * dphi);
                ang += std::norm(psi.momentum_amplitude(u * v)) * mu_rule.weights[im] * dphi;
            }
        pdf[iv] = v * v * ang;
        if (iv > 0) cdf[iv] = cdf[iv - 1] + 0.5 * (pdf[iv - 1] + pdf[iv]) * dv;
    }
    const double total = cdf[n_v];
    if (!(total > 0.0)) throw NumericalError("velocity_quantile: null spectrum");

    const double target = std::clamp(q, 0.0, 1.0) * total;
    for (int iv = 1; iv <= n_v; ++iv) {
        if (cdf[iv] >= target) {
            const double frac = (target - cdf[iv - 1]) / std::max(cdf[iv] - cdf[iv - 1], 1e-300);
            return (iv - 1 + frac) * dv;
        }
    }
    return v_max;
}

double default_time_horizon(const GaussianSuperposition& psi, double R) {
    const double v_min = velocity_quantile(psi, 1e-3);
    if (!(v_min > 0.0))
        throw NumericalError("default_time_horizon: vanishing minimum speed");
    return 4.0 * R / v_min;
}

}
