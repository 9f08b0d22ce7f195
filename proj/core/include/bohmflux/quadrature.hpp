#ifndef BOHMFLUX_QUADRATURE_HPP
#define BOHMFLUX_QUADRATURE_HPP

#include <functional>
#include <vector>

namespace bohmflux {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Gauss–Legendre rule on [a, b]; nodes by Newton iteration on P_n.
QuadratureRule gauss_legendre(int n, double a, double b);

struct IntegrationResult {
    double value = 0.0;
    double error_estimate = 0.0;
    bool converged = true;
    int evaluations = 0;
};

/// Adaptive Gauss–Kronrod (G7,K15) over [a, b]. `seeds` forces initial
/// subdivision points, which keeps narrow bumps from being stepped over.
IntegrationResult integrate_adaptive(const std::function<double(double)>& f,
                                     double a, double b,
                                     double rel_tol = 1e-9,
                                     double abs_tol = 1e-12,
                                     const std::vector<double>& seeds = {},
                                     int max_intervals = 2000);

}

#endif
