#include "spdelab/ou_semigroup.hpp"

#include <cmath>

#include "spdelab/errors.hpp"
#include "spdelab/quadrature.hpp"
#include "spdelab/rng.hpp"
#include "spdelab/stats.hpp"

namespace spdelab {

void QuadratureSpec::validate() const {
    require(mc_samples >= 2, ErrorKind::InvalidArgument, "mc_samples must be at least 2");
    require(time_nodes >= 8, ErrorKind::InvalidArgument, "time_nodes must be at least 8");
    require(tolerance > 0.0, ErrorKind::InvalidArgument, "tolerance must be positive");
}

namespace {

void check_point(const SpectralOperator& op, std::span<const double> x) {
    require(x.size() == op.dim(), ErrorKind::DimensionMismatch, "point dimension differs from operator");
}

// Common random numbers: sample i, mode k.
std::vector<double> normals(const QuadratureSpec& quad, std::size_t m) {
    CounterRng rng(quad.seed);
    std::vector<double> z(quad.mc_samples * m);
    for (std::size_t i = 0; i < quad.mc_samples; ++i)
        for (std::size_t k = 0; k < m; k += 2) {
            auto [a, b] = rng.normal_pair(Stream::Quadrature, static_cast<std::uint32_t>(i),
                                          static_cast<std::uint32_t>(k / 2), 0);
            z[i * m + k] = a;
            if (k + 1 < m) z[i * m + k + 1] = b;
        }
    return z;
}

struct TimeSlice {
    State mean;
    std::vector<double> sd;
    std::vector<double> lam;  // Lambda_t
};

TimeSlice slice(const SpectralOperator& op, double t, std::span<const double> x) {
    TimeSlice s;
    s.mean = semigroup_apply(op, t, x);
    auto q = covariance_qt(op, t);
    auto l = lambda_t_diag(op, t);
    for (std::size_t k = 0; k < op.dim(); ++k) s.sd.push_back(std::sqrt(q[k]));
    s.lam = l.coefficients;
    return s;
}

Estimate summarize(const std::vector<double>& v) {
    auto e = mean_estimate(v);
    return {e.mean, e.std_error};
}

}  // namespace

Estimate apply_rt(const SpectralOperator& op, const ScalarField& phi, double t,
                  std::span<const double> x, const QuadratureSpec& quad) {
    check_point(op, x);
    quad.validate();
    require(t >= 0.0 && std::isfinite(t), ErrorKind::InvalidTime, "t must be finite and >= 0");
    if (t == 0.0) return {phi(x), 0.0};
    const std::size_t m = op.dim();
    const auto z = normals(quad, m);
    const auto s = slice(op, t, x);
    std::vector<double> vals(quad.mc_samples);
    State y(m);
    for (std::size_t i = 0; i < quad.mc_samples; ++i) {
        for (std::size_t k = 0; k < m; ++k) y[k] = s.mean[k] + s.sd[k] * z[i * m + k];
        vals[i] = phi(y);
    }
    return summarize(vals);
}

Estimate gradient_rt(const SpectralOperator& op, const ScalarField& phi, double t,
                     std::span<const double> x, std::span<const double> h,
                     const QuadratureSpec& quad) {
    check_point(op, x);
    check_point(op, h);
    quad.validate();
    require(t > 0.0 && std::isfinite(t), ErrorKind::InvalidTime, "gradient needs t > 0");
    const std::size_t m = op.dim();
    const auto z = normals(quad, m);
    const auto s = slice(op, t, x);
    const double base = phi(s.mean);
    std::vector<double> vals(quad.mc_samples);
    State y(m);
    for (std::size_t i = 0; i < quad.mc_samples; ++i) {
        double w = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            y[k] = s.mean[k] + s.sd[k] * z[i * m + k];
            w += s.lam[k] * h[k] * z[i * m + k];
        }
        vals[i] = w * (phi(y) - base);
    }
    return summarize(vals);
}

namespace {

Estimate laplace_estimate(const SpectralOperator& op, const ScalarField& phi, double lambda,
                          std::span<const double> x, std::span<const double> h,
                          const QuadratureSpec& quad, bool gradient) {
    check_point(op, x);
    quad.validate();
    require(lambda > 0.0 && std::isfinite(lambda), ErrorKind::InvalidArgument, "lambda must be positive");
    const std::size_t m = op.dim();
    const auto z = normals(quad, m);
    const auto rule = laplace_rule(lambda, quad.time_nodes);
    std::vector<TimeSlice> slices;
    std::vector<double> base;
    for (double t : rule.nodes) {
        slices.push_back(slice(op, t, x));
        if (gradient) base.push_back(phi(slices.back().mean));
    }
    std::vector<double> vals(quad.mc_samples);
    State y(m);
    for (std::size_t i = 0; i < quad.mc_samples; ++i) {
        double acc = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const auto& s = slices[q];
            double w = 0.0;
            for (std::size_t k = 0; k < m; ++k) {
                y[k] = s.mean[k] + s.sd[k] * z[i * m + k];
                if (gradient) w += s.lam[k] * h[k] * z[i * m + k];
            }
            acc += rule.weights[q] * (gradient ? w * (phi(y) - base[q]) : phi(y));
        }
        vals[i] = acc;
    }
    return summarize(vals);
}

}  // namespace

Estimate resolvent(const SpectralOperator& op, const ScalarField& phi, double lambda,
                   std::span<const double> x, const QuadratureSpec& quad) {
    return laplace_estimate(op, phi, lambda, x, {}, quad, false);
}

Estimate resolvent_gradient(const SpectralOperator& op, const ScalarField& phi, double lambda,
                            std::span<const double> x, std::span<const double> h,
                            const QuadratureSpec& quad) {
    check_point(op, h);
    return laplace_estimate(op, phi, lambda, x, h, quad, true);
}

}  // namespace spdelab
