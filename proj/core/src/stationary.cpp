#include "bohmflux/stationary.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "bohmflux/errors.hpp"
#include "bohmflux/quadrature.hpp"

namespace bohmflux {

double sph_j(int l, double x) {
    if (x == 0.0) return l == 0 ? 1.0 : 0.0;
    return std::sph_bessel(static_cast<unsigned>(l), x);
}

double sph_y(int l, double x) {
    return std::sph_neumann(static_cast<unsigned>(l), x);
}

double sph_j_deriv(int l, double x) {
    if (x == 0.0) return l == 1 ? 1.0 / 3.0 : 0.0;
    return (l / x) * sph_j(l, x) - sph_j(l + 1, x);
}

double sph_y_deriv(int l, double x) {
    return (l / x) * sph_y(l, x) - sph_y(l + 1, x);
}

double legendre_p(int l, double x) {
    if (l == 0) return 1.0;
    double p0 = 1.0, p1 = x;
    for (int n = 2; n <= l; ++n) {
        const double p2 = ((2.0 * n - 1.0) * x * p1 - (n - 1.0) * p0) / n;
        p0 = p1;
        p1 = p2;
    }
    return p1;
}

namespace {

// One Numerov sweep at fixed step; returns (u at nodes, log-derivative at
// r_max via the 5-point O(h⁴) stencil). The solution is rescaled whenever
// it grows large; only ratios matter downstream.
struct NumerovSweep {
    std::vector<double> r, u;
    double log_derivative;
};

NumerovSweep numerov_sweep(const Potential& V, double k, int l, double r_max, double h) {
    const auto f = [&](double r) {
        return l * (l + 1) / (r * r) + 2.0 * V.radial(r) - k * k;
    };

    const int n_match = static_cast<int>(std::round(r_max / h));
    const int n_total = n_match + 2;  // stencil margin beyond r_max

    NumerovSweep out;
    out.r.resize(n_total + 1);
    out.u.assign(n_total + 1, 0.0);
    for (int i = 0; i <= n_total; ++i) out.r[i] = i * h;

    // u ~ r^{l+1} near the origin; computed in log space so large l does
    // not underflow (both starters share the scale, which cancels).
    const double log_scale = (l + 1) * std::log(out.r[1]);
    const double shift = -log_scale;  // normalize u(h) to 1
    out.u[1] = std::exp((l + 1) * std::log(out.r[1]) + shift);
    out.u[2] = std::exp((l + 1) * std::log(out.r[2]) + shift);

    const double h2_12 = h * h / 12.0;
    double f_prev = f(out.r[1]), f_cur = f(out.r[2]);
    for (int i = 2; i < n_total; ++i) {
        const double f_next = f(out.r[i + 1]);
        out.u[i + 1] = (out.u[i] * (2.0 + 10.0 * h2_12 * f_cur) -
                        out.u[i - 1] * (1.0 - h2_12 * f_prev)) /
                       (1.0 - h2_12 * f_next);
        f_prev = f_cur;
        f_cur = f_next;
        if (std::abs(out.u[i + 1]) > 1e200) {
            const double s = 1e-200;
            for (int j = 0; j <= i + 1; ++j) out.u[j] *= s;
        }
    }

    const int m = n_match;
    const double du = (out.u[m - 2] - 8.0 * out.u[m - 1] + 8.0 * out.u[m + 1] - out.u[m + 2]) /
                      (12.0 * h);
    out.log_derivative = du / out.u[m];
    return out;
}

double phase_from_log_derivative(double gamma, double k, int l, double r) {
    // u ∝ cosδ ĵ_l(kr) - sinδ ŷ_l(kr) with Riccati–Bessel ĵ(x) = x j_l(x).
    const double x = k * r;
    const double jj = x * sph_j(l, x);
    const double yy = x * sph_y(l, x);
    const double jj_d = sph_j(l, x) + x * sph_j_deriv(l, x);
    const double yy_d = sph_y(l, x) + x * sph_y_deriv(l, x);
    const double num = k * jj_d - gamma * jj;
    const double den = k * yy_d - gamma * yy;
    double delta = std::atan2(num, den);
    // δ_l is defined modulo π; report the principal (-π/2, π/2] branch.
    if (delta > M_PI_2) delta -= M_PI;
    if (delta <= -M_PI_2) delta += M_PI;
    return delta;
}

double default_r_max(const Potential& V, double k) {
    return std::max(V.r_cut(), 0.5) + std::max(2.0, 4.0 / k);
}

}

RadialSolution radial_solve(const Potential& V, double k, int l, double r_max,
                            double h_init, double tol) {
    if (!(k > 0.0)) throw InvalidParameterError("radial_solve: k must be positive");
    if (!(r_max > V.r_cut()))
        throw InvalidParameterError("radial_solve: r_max must exceed the potential cutoff");
    if (V.kind() == Potential::Kind::Grid)
        throw InvalidParameterError("radial_solve: central potentials only");

    double h = h_init;
    NumerovSweep sweep = numerov_sweep(V, k, l, r_max, h);
    double disagreement = 0.0;
    for (int halves = 0; halves < 8; ++halves) {
        const NumerovSweep finer = numerov_sweep(V, k, l, r_max, h * 0.5);
        // Compare through the phase angle, which is scale-free.
        const double d0 = phase_from_log_derivative(sweep.log_derivative, k, l, r_max);
        const double d1 = phase_from_log_derivative(finer.log_derivative, k, l, r_max);
        disagreement = std::abs(d0 - d1);
        if (disagreement > M_PI_2) disagreement = std::abs(disagreement - M_PI);
        sweep = finer;
        h *= 0.5;
        if (disagreement < tol) break;
    }
    if (disagreement >= tol)
        throw NumericalError("radial_solve: step-halving did not reach tolerance");

    RadialSolution sol;
    sol.r = std::move(sweep.r);
    sol.u = std::move(sweep.u);
    sol.log_derivative = sweep.log_derivative;
    sol.step = h;
    sol.halving_disagreement = disagreement;
    return sol;
}

PhaseShiftTable phase_shifts(const Potential& V, double k, int l_cap, double r_max) {
    if (!(k > 0.0)) throw InvalidParameterError("phase_shifts: k must be positive");
    if (r_max <= 0.0) r_max = default_r_max(V, k);

    PhaseShiftTable table;
    table.k = k;

    int consecutive_small = 0;
    for (int l = 0; l <= l_cap; ++l) {
        const auto sol = radial_solve(V, k, l, r_max);
        const double delta = phase_from_log_derivative(sol.log_derivative, k, l, r_max);
        table.deltas.push_back(delta);
        table.l_max = l;
        if (std::abs(delta) < 1e-8) {
            if (++consecutive_small >= 2) {
                table.converged = true;
                break;
            }
        } else {
            consecutive_small = 0;
        }
    }
    if (!table.converged && !table.deltas.empty() &&
        std::abs(table.deltas.back()) < 1e-8)
        table.converged = true;
    if (!table.converged)
        throw NumericalError("phase_shifts: partial-wave sum not converged at l_cap");
    return table;
}

std::complex<double> scattering_amplitude(const PhaseShiftTable& table, double cos_theta) {
    std::complex<double> f{};
    for (int l = 0; l <= table.l_max; ++l) {
        const double d = table.deltas[l];
        f += (2.0 * l + 1.0) * std::exp(std::complex<double>{0.0, d}) * std::sin(d) *
             legendre_p(l, cos_theta);
    }
    return f / table.k;
}

double differential_cross_section(const PhaseShiftTable& table, double cos_theta) {
    return std::norm(scattering_amplitude(table, cos_theta));
}

double total_cross_section(const PhaseShiftTable& table) {
    double s = 0.0;
    for (int l = 0; l <= table.l_max; ++l)
        s += (2.0 * l + 1.0) * std::pow(std::sin(table.deltas[l]), 2);
    return 4.0 * M_PI / (table.k * table.k) * s;
}

OpticalTheoremReport optical_theorem_check(const PhaseShiftTable& table) {
    OpticalTheoremReport rep;
    rep.lhs = 4.0 * M_PI / table.k * scattering_amplitude(table, 1.0).imag();

    // |f|² is a polynomial of degree 2 l_max in cosθ: the rule is exact.
    const auto rule = gauss_legendre(table.l_max + 2, -1.0, 1.0);
    double integral = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        integral += differential_cross_section(table, rule.nodes[i]) * rule.weights[i];
    rep.rhs = 2.0 * M_PI * integral;
    rep.abs_diff = std::abs(rep.lhs - rep.rhs);
    return rep;
}

namespace {

// Solve the 3x3 complex normal equations of the least-squares fit
// g(r) ≈ a0 + a1/r + a2/r² (tiny dense solve, partial pivoting).
std::array<std::complex<double>, 3> solve3(
    std::array<std::array<std::complex<double>, 3>, 3> A,
    std::array<std::complex<double>, 3> b) {
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int row = col + 1; row < 3; ++row)
            if (std::abs(A[row][col]) > std::abs(A[piv][col])) piv = row;
        std::swap(A[col], A[piv]);
        std::swap(b[col], b[piv]);
        for (int row = col + 1; row < 3; ++row) {
            const auto factor = A[row][col] / A[col][col];
            for (int j = col; j < 3; ++j) A[row][j] -= factor * A[col][j];
            b[row] -= factor * b[col];
        }
    }
    std::array<std::complex<double>, 3> x{};
    for (int row = 2; row >= 0; --row) {
        auto acc = b[row];
        for (int j = row + 1; j < 3; ++j) acc -= A[row][j] * x[j];
        x[row] = acc / A[row][row];
    }
    return x;
}

}

LsAsymptoticsReport lippmann_schwinger_asymptotics_check(const Potential& V, double k,
                                                         double shell_lo_factor,
                                                         double shell_hi_factor,
                                                         int n_shells) {
    const double base = std::max(V.r_cut(), 0.5);
    const double r_lo = shell_lo_factor * base;
    const double r_hi = shell_hi_factor * base;
    if (n_shells < 4)
        throw InvalidParameterError("ls_asymptotics: need at least 4 shells");

    const PhaseShiftTable table = phase_shifts(V, k);

    // Evaluation cutoff: enough partial waves that the truncated plane-wave
    // series itself converges at the outermost shell.
    int l_eval = table.l_max;
    for (int l = table.l_max;; ++l) {
        if ((2.0 * l + 1.0) * std::abs(sph_j(l, k * r_hi)) < 1e-12) {
            l_eval = l;
            break;
        }
        if (l > 4000) throw NumericalError("ls_asymptotics: l_eval runaway");
    }

    auto delta_of = [&](int l) {
        return l <= table.l_max ? table.deltas[l] : 0.0;
    };

    const int n_mu = 48;
    const auto mu_rule = gauss_legendre(n_mu, -1.0, 1.0);

    LsAsymptoticsReport rep;
    rep.shell_radii.resize(n_shells);
    for (int s = 0; s < n_shells; ++s)
        rep.shell_radii[s] = r_lo + (r_hi - r_lo) * s / (n_shells - 1);

    // g(θ, r) = (ψ_recon - plane wave) · r e^{-ikr}; fit a0 + a1/r + a2/r²
    // per θ and compare a0 against the partial-wave amplitude.
    std::vector<std::vector<std::complex<double>>> g(
        n_mu, std::vector<std::complex<double>>(n_shells));

    for (int s = 0; s < n_shells; ++s) {
        const double r = rep.shell_radii[s];
        const double x = k * r;
        std::vector<std::complex<double>> mode(l_eval + 1);
        for (int l = 0; l <= l_eval; ++l) {
            const double d = delta_of(l);
            const std::complex<double> il = std::pow(std::complex<double>{0.0, 1.0}, l);
            // radial part of the reconstructed wave minus the free one
            const std::complex<double> radial =
                std::exp(std::complex<double>{0.0, d}) *
                    (std::cos(d) * sph_j(l, x) - std::sin(d) * sph_y(l, x)) -
                sph_j(l, x);
            mode[l] = (2.0 * l + 1.0) * il * radial;
        }
        for (int im = 0; im < n_mu; ++im) {
            std::complex<double> scattered{};
            for (int l = 0; l <= l_eval; ++l)
                scattered += mode[l] * legendre_p(l, mu_rule.nodes[im]);
            g[im][s] = scattered * r * std::exp(std::complex<double>{0.0, -k * r});
        }
    }

    double f_scale = 0.0, f_err = 0.0;
    std::vector<std::complex<double>> f_fit(n_mu);
    for (int im = 0; im < n_mu; ++im) {
        std::array<std::array<std::complex<double>, 3>, 3> A{};
        std::array<std::complex<double>, 3> b{};
        for (int s = 0; s < n_shells; ++s) {
            const double r = rep.shell_radii[s];
            const double basis[3] = {1.0, 1.0 / r, 1.0 / (r * r)};
            for (int i = 0; i < 3; ++i) {
                for (int j = 0; j < 3; ++j) A[i][j] += basis[i] * basis[j];
                b[i] += basis[i] * g[im][s];
            }
        }
        const auto coef = solve3(A, b);
        f_fit[im] = coef[0];

        const auto f_pw = scattering_amplitude(table, mu_rule.nodes[im]);
        f_scale = std::max(f_scale, std::abs(f_pw));
        f_err = std::max(f_err, std::abs(coef[0] - f_pw));
    }
    rep.f_fit_max_error = f_err;
    rep.f_scale = f_scale;

    // Residual of the (plane + f e^{ikr}/r) form per shell, using the
    // fitted amplitude; reported as a max over the angular samples.
    rep.shell_residuals.resize(n_shells);
    for (int s = 0; s < n_shells; ++s) {
        const double r = rep.shell_radii[s];
        double worst = 0.0;
        for (int im = 0; im < n_mu; ++im) {
            const std::complex<double> model = f_fit[im];
            worst = std::max(worst, std::abs(g[im][s] - model) / r);
        }
        rep.shell_residuals[s] = worst;
    }
    return rep;
}

}
