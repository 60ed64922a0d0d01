#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace spdelab {

/// Deterministic pairwise (tree) summation; result is independent of scheduling.
double pairwise_sum(std::span<const double> values);

struct MeanEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    double variance = 0.0;  // unbiased sample variance
    std::size_t count = 0;
};

MeanEstimate mean_estimate(std::span<const double> values);

double normal_cdf(double x);

/// Kolmogorov-Smirnov statistic of the sample against N(mean, variance).
double ks_statistic_normal(std::vector<double> sample, double mean, double variance);

/// Asymptotic 1% critical value of the one-sample KS statistic.
double ks_critical_1pct(std::size_t n);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

/// Order p of y ~ C dt^p from values at dt, dt/2, dt/4, ... (refinement ladder).
double convergence_order(std::span<const double> dt, std::span<const double> err);

}  // namespace spdelab
