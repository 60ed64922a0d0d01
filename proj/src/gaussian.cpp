#include "spdelab/gaussian.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>

#include "spdelab/csv.hpp"
#include "spdelab/errors.hpp"
#include "spdelab/quadrature.hpp"
#include "spdelab/rng.hpp"
#include "spdelab/stats.hpp"

namespace spdelab {

GaussianMeasure::GaussianMeasure(State mean_, std::vector<double> variances_)
    : mean(std::move(mean_)), variances(std::move(variances_)) {
    require(mean.size() == variances.size(), ErrorKind::DimensionMismatch,
            "mean and variance lists differ in length");
    for (double v : variances) {
        require(v >= 0.0, ErrorKind::InvalidArgument, "variances must be nonnegative");
    }
}

GaussianMeasure GaussianMeasure::invariant(const SpectralOperator& op) {
    return GaussianMeasure(State(op.dim(), 0.0), covariance_qt(op, kInfiniteTime).coefficients);
}

GaussianMeasure GaussianMeasure::transition(const SpectralOperator& op, double t,
                                            std::span<const double> x) {
    return GaussianMeasure(semigroup_apply(op, t, x), covariance_qt(op, t).coefficients);
}

std::vector<State> sample(const GaussianMeasure& measure, std::size_t n, std::uint64_t seed) {
    require(n >= 1, ErrorKind::InvalidArgument, "sample count must be >= 1");
    const CounterRng rng(seed);
    const std::size_t m = measure.dim();
    std::vector<double> sd(m);
    for (std::size_t k = 0; k < m; ++k) sd[k] = std::sqrt(measure.variances[k]);
    std::vector<State> draws(n, State(m));
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < m; ++k) {
            const double z = rng.normal(Stream::GaussianSample, static_cast<std::uint32_t>(i),
                                        static_cast<std::uint32_t>(k),
                                        static_cast<std::uint32_t>(i >> 32));
            draws[i][k] = measure.mean[k] + sd[k] * z;
        }
    }
    return draws;
}

std::vector<State> halton_sample(const GaussianMeasure& measure, std::size_t n) {
    require(n >= 1, ErrorKind::InvalidArgument, "sample count must be >= 1");
    const std::size_t m = measure.dim();
    std::vector<std::uint64_t> primes;
    for (std::uint64_t c = 2; primes.size() < m; ++c) {
        bool prime = true;
        for (auto p : primes)
            if (c % p == 0) prime = false;
        if (prime) primes.push_back(c);
    }
    std::vector<State> points(n, State(m));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < m; ++k) {
            double f = 1.0, u = 0.0;
            for (std::uint64_t j = i + 1; j > 0; j /= primes[k]) {
                f /= static_cast<double>(primes[k]);
                u += f * static_cast<double>(j % primes[k]);
            }
            const double z = std::numbers::sqrt2 * boost::math::erf_inv(2.0 * u - 1.0);
            points[i][k] = measure.mean[k] + std::sqrt(measure.variances[k]) * z;
        }
    }
    return points;
}

void write_samples_csv(std::ostream& out, const std::vector<State>& draws) {
    const std::size_t m = draws.empty() ? 0 : draws.front().size();
    CsvWriter csv(out, mode_columns(m));
    for (const auto& d : draws) csv.row(d);
}

double ou_transition_log_density(const SpectralOperator& op, double t, std::span<const double> x,
                                 std::span<const double> y) {
    require(t > 0.0, ErrorKind::InvalidTime, "transition kernel is degenerate at t <= 0");
    require(x.size() == op.dim() && y.size() == op.dim(), ErrorKind::DimensionMismatch,
            "states must have length m");
    double acc = 0.0;
    for (std::size_t k = 0; k < op.dim(); ++k) {
        const double lam = op.eigenvalue(k);
        const double q = one_minus_exp2(t, lam) / (2.0 * lam);
        const double d = y[k] - std::exp(-lam * t) * x[k];
        acc -= d * d / (2.0 * q) + 0.5 * std::log(2.0 * std::numbers::pi * q);
    }
    return acc;
}

double kernel_lp_norm(const SpectralOperator& op, double t, double p_prime) {
    require(t > 0.0, ErrorKind::InvalidTime, "kernel norm needs t > 0");
    require(p_prime >= 1.0, ErrorKind::InvalidArgument, "p' must be >= 1");
    const double e1 = -0.5 + 0.5 / p_prime;
    const double e2 = -0.5 / p_prime;
    double log_norm = 0.0;
    for (std::size_t k = 0; k < op.dim(); ++k) {
        const double lam = op.eigenvalue(k);
        const double decay = std::exp(-2.0 * t * lam);
        log_norm += e1 * std::log(one_minus_exp2(t, lam)) + e2 * std::log1p((p_prime - 1.0) * decay);
    }
    return std::exp(log_norm);
}

IntegrabilityReport integrability_scan(const SpectralOperator& op, double p_prime, double horizon,
                                       double r_min) {
    require(p_prime > 1.0, ErrorKind::InvalidArgument, "integrability scan needs p' > 1");
    require(horizon > r_min && r_min > 0.0, ErrorKind::InvalidArgument,
            "integrability scan needs 0 < r_min < T");
    constexpr int kPoints = 16;
    std::vector<double> r(kPoints), v(kPoints);
    for (int i = 0; i < kPoints; ++i) {
        r[i] = r_min * std::pow(1e3, static_cast<double>(i) / (kPoints - 1));
        v[i] = kernel_lp_norm(op, r[i], p_prime);
    }
    IntegrabilityReport report;
    report.slope = loglog_slope(r, v);
    report.verdict = report.slope > -1.0 ? IntegrabilityVerdict::Finite
                                         : IntegrabilityVerdict::Divergent;
    report.integral_estimate = adaptive_simpson(
        [&](double t) { return kernel_lp_norm(op, t, p_prime); }, r_min, horizon, 1e-10, true);
    return report;
}

}  // namespace spdelab
