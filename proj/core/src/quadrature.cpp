#include "bohmflux/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

namespace bohmflux {

QuadratureRule gauss_legendre(int n, double a, double b) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);

    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);

    // Roots come in symmetric pairs; solve the upper half with Newton.
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        // Tricomi-style initial guess.
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double p_prime = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            // Legendre recurrence: evaluates P_n(x) and P'_n(x).
            double p0 = 1.0, p1 = x;
            for (int l = 2; l <= n; ++l) {
                const double p2 = ((2.0 * l - 1.0) * x * p1 - (l - 1.0) * p0) / l;
                p0 = p1;
                p1 = p2;
            }
            p_prime = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = -p1 / p_prime;
            x += dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * p_prime * p_prime);
        rule.nodes[i] = mid - half * x;
        rule.nodes[n - 1 - i] = mid + half * x;
        rule.weights[i] = half * w;
        rule.weights[n - 1 - i] = half * w;
    }
    return rule;
}

namespace {

// Gauss–Kronrod 7-15 pair on [-1, 1] (Patterson's classical nodes).
constexpr double kKronrodNodes[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.000000000000000};
constexpr double kKronrodWeights[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
constexpr double kGaussWeights[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

struct PanelResult {
    double integral;
    double error;
};

PanelResult gk15(const std::function<double(double)>& f, double a, double b) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);

    const double fc = f(mid);
    double gauss = fc * kGaussWeights[3];
    double kron = fc * kKronrodWeights[7];
    for (int i = 0; i < 7; ++i) {
        const double dx = half * kKronrodNodes[i];
        const double fsum = f(mid - dx) + f(mid + dx);
        kron += fsum * kKronrodWeights[i];
        if (i % 2 == 1) gauss += fsum * kGaussWeights[i / 2];
    }
    const double integral = kron * half;
    const double err = std::abs((kron - gauss) * half);
    // Standard QUADPACK-style sharpening of the raw difference.
    const double scaled = err > 0.0 ? std::pow(200.0 * err / std::max(1e-300, std::abs(integral)), 1.5) : 0.0;
    return {integral, err * std::min(1.0, scaled > 0.0 ? scaled : 1.0)};
}

struct Interval {
    double a, b, integral, error;
    bool operator<(const Interval& o) const { return error < o.error; }
};

}

IntegrationResult integrate_adaptive(const std::function<double(double)>& f,
                                     double a, double b,
                                     double rel_tol, double abs_tol,
                                     const std::vector<double>& seeds,
                                     int max_intervals) {
    IntegrationResult out;
    if (a == b) return out;

    std::vector<double> knots{a, b};
    for (double s : seeds)
        if (s > a && s < b) knots.push_back(s);
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

    std::priority_queue<Interval> queue;
    double total = 0.0, total_err = 0.0;
    int evals = 0;
    for (size_t i = 0; i + 1 < knots.size(); ++i) {
        const auto r = gk15(f, knots[i], knots[i + 1]);
        evals += 15;
        queue.push({knots[i], knots[i + 1], r.integral, r.error});
        total += r.integral;
        total_err += r.error;
    }

    int used = static_cast<int>(queue.size());
    while (total_err > std::max(abs_tol, rel_tol * std::abs(total)) && used < max_intervals) {
        Interval top = queue.top();
        queue.pop();
        const double mid = 0.5 * (top.a + top.b);
        const auto left = gk15(f, top.a, mid);
        const auto right = gk15(f, mid, top.b);
        evals += 30;
        ++used;
        total += left.integral + right.integral - top.integral;
        total_err += left.error + right.error - top.error;
        queue.push({top.a, mid, left.integral, left.error});
        queue.push({mid, top.b, right.integral, right.error});
    }

    out.value = total;
    out.error_estimate = total_err;
    out.converged = total_err <= std::max(abs_tol, rel_tol * std::abs(total));
    out.evaluations = evals;
    return out;
}

}
