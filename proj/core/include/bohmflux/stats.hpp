#ifndef BOHMFLUX_STATS_HPP
#define BOHMFLUX_STATS_HPP

#include <cstdint>
#include <vector>

namespace bohmflux {

struct SampleMoments {
    double mean = 0.0;
    double variance = 0.0;  // unbiased
    std::size_t n = 0;
};

SampleMoments sample_moments(const std::vector<double>& xs);

/// Standard error of a binomial proportion estimate p_hat over n trials.
double binomial_se(double p_hat, std::size_t n);

/// z-score of an observed proportion against a predicted one; the yardstick
/// is the binomial error of the prediction (score-test convention). Returns
/// 0 when both sides are numerically empty.
double proportion_z(double p_obs, double p_pred, std::size_t n);

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// Two-sample Kolmogorov–Smirnov test with the asymptotic p-value.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

struct Histogram {
    std::vector<double> edges;   // size bins+1
    std::vector<std::size_t> counts;
};

/// Freedman–Diaconis bin width (falls back to Scott / fixed count when the
/// IQR degenerates); `width_override > 0` forces the width.
Histogram histogram_fd(const std::vector<double>& xs, double width_override = 0.0);

double quantile(std::vector<double> xs, double q);

/// FNV-1a 64-bit, used for config hashes embedded in reports.
uint64_t fnv1a64(const void* data, std::size_t len);

}

#endif
