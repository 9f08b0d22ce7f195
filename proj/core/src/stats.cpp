#include "bohmflux/stats.hpp"
#include "bohmflux/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bohmflux {

double inverse_normal_cdf(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::invalid_argument("inverse_normal_cdf: p must be in (0,1)");

    // Acklam's rational approximation.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;

    double x;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }

    // Two Halley refinement steps against erfc bring this to ~1e-15.
    for (int i = 0; i < 2; ++i) {
        const double e = 0.5 * std::erfc(-x / M_SQRT2) - p;
        const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
        x -= u / (1.0 + 0.5 * x * u);
    }
    return x;
}

SampleMoments sample_moments(const std::vector<double>& xs) {
    SampleMoments m;
    m.n = xs.size();
    if (xs.empty()) return m;
    double sum = 0.0;
    for (double x : xs) sum += x;
    m.mean = sum / xs.size();
    double ss = 0.0;
    for (double x : xs) ss += (x - m.mean) * (x - m.mean);
    m.variance = xs.size() > 1 ? ss / (xs.size() - 1) : 0.0;
    return m;
}

double binomial_se(double p_hat, std::size_t n) {
    if (n == 0) return 0.0;
    return std::sqrt(std::max(0.0, p_hat * (1.0 - p_hat)) / static_cast<double>(n));
}

double proportion_z(double p_obs, double p_pred, std::size_t n) {
    if (n == 0) return 0.0;
    // Both sides empty within measure-zero tolerance: consistent by fiat.
    if (p_obs == 0.0 && std::abs(p_pred) < 1e-12) return 0.0;
    const double p0 = std::clamp(p_pred, 0.0, 1.0);
    double se = std::sqrt(p0 * (1.0 - p0) / static_cast<double>(n));
    // Guard the degenerate prediction by falling back to the observed spread.
    if (se == 0.0) se = std::max(binomial_se(p_obs, n), 1.0 / static_cast<double>(n));
    return (p_obs - p_pred) / se;
}

namespace {

double ks_q(double lambda) {
    // Kolmogorov asymptotic tail: Q(λ) = 2 Σ (-1)^{j-1} exp(-2 j² λ²).
    if (lambda < 1e-10) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = std::exp(-2.0 * j * j * lambda * lambda);
        sum += sign * term;
        if (term < 1e-12 * std::abs(sum)) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());

    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t ia = 0, ib = 0;
    double d = 0.0;
    while (ia < a.size() && ib < b.size()) {
        const double x = std::min(a[ia], b[ib]);
        while (ia < a.size() && a[ia] <= x) ++ia;
        while (ib < b.size() && b[ib] <= x) ++ib;
        d = std::max(d, std::abs(ia / na - ib / nb));
    }

    const double ne = std::sqrt(na * nb / (na + nb));
    KsResult r;
    r.statistic = d;
    r.p_value = ks_q((ne + 0.12 + 0.11 / ne) * d);
    return r;
}

Histogram histogram_fd(const std::vector<double>& xs, double width_override) {
    if (xs.empty()) throw std::invalid_argument("histogram_fd: empty sample");
    std::vector<double> sorted = xs;
    std::sort(sorted.begin(), sorted.end());
    const double lo = sorted.front();
    const double hi = sorted.back();

    double width = width_override;
    if (width <= 0.0) {
        const std::size_t n = sorted.size();
        const double q1 = sorted[n / 4];
        const double q3 = sorted[(3 * n) / 4];
        const double iqr = q3 - q1;
        width = 2.0 * iqr / std::cbrt(static_cast<double>(n));
        if (width <= 0.0) width = (hi - lo) / 32.0;
        if (width <= 0.0) width = 1.0;
    }

    const int bins = std::max(1, static_cast<int>(std::ceil((hi - lo) / width)));
    Histogram h;
    h.edges.resize(bins + 1);
    h.counts.assign(bins, 0);
    for (int i = 0; i <= bins; ++i) h.edges[i] = lo + i * width;
    for (double x : xs) {
        int idx = static_cast<int>((x - lo) / width);
        idx = std::clamp(idx, 0, bins - 1);
        ++h.counts[idx];
    }
    return h;
}

double quantile(std::vector<double> xs, double q) {
    if (xs.empty()) throw std::invalid_argument("quantile: empty sample");
    std::sort(xs.begin(), xs.end());
    const double pos = std::clamp(q, 0.0, 1.0) * (xs.size() - 1);
    const std::size_t i = static_cast<std::size_t>(pos);
    if (i + 1 >= xs.size()) return xs.back();
    const double frac = pos - i;
    return xs[i] * (1.0 - frac) + xs[i + 1] * frac;
}

uint64_t fnv1a64(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    uint64_t h = 0xcbf29ce484222325ull;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

}
