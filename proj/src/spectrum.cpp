#include "spdelab/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "spdelab/errors.hpp"
#include "spdelab/stats.hpp"

namespace spdelab {

SpectralOperator::SpectralOperator(std::vector<double> eigenvalues, double delta,
                                   std::optional<GrowthTag> growth)
    : eigenvalues_(std::move(eigenvalues)), delta_(delta), growth_(growth) {
    require(!eigenvalues_.empty(), ErrorKind::InvalidArgument, "truncation level m must be >= 1");
    require(delta_ > 0.0 && delta_ < 1.0, ErrorKind::InvalidArgument, "delta must lie in (0,1)");
    for (std::size_t k = 0; k < eigenvalues_.size(); ++k) {
        require(eigenvalues_[k] > 0.0 && std::isfinite(eigenvalues_[k]),
                ErrorKind::InvalidArgument, "eigenvalues must be finite and strictly positive");
        require(k == 0 || eigenvalues_[k] >= eigenvalues_[k - 1], ErrorKind::InvalidArgument,
                "eigenvalues must be non-decreasing");
    }
    if (growth_) {
        require(growth_->c > 0.0 && growth_->alpha > 0.0, ErrorKind::InvalidArgument,
                "growth tag needs c > 0 and alpha > 0");
    }
}

SpectralOperator SpectralOperator::power_law(std::size_t m, double c, double alpha, double delta) {
    std::vector<double> ev(m);
    for (std::size_t k = 0; k < m; ++k) ev[k] = c * std::pow(static_cast<double>(k + 1), alpha);
    return SpectralOperator(std::move(ev), delta, GrowthTag{c, alpha});
}

std::string SpectralOperator::serialize() const {
    std::ostringstream out;
    out << std::setprecision(17);
    out << dim() << ' ' << delta_ << '\n';
    for (double ev : eigenvalues_) out << ev << '\n';
    if (growth_) out << "growth " << growth_->c << ' ' << growth_->alpha << '\n';
    return out.str();
}

SpectralOperator SpectralOperator::parse(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::size_t m = 0;
    double delta = 0.0;
    require(static_cast<bool>(in >> m >> delta), ErrorKind::InvalidArgument,
            "spectral operator header must read `m delta`");
    std::vector<double> ev(m);
    for (std::size_t k = 0; k < m; ++k) {
        require(static_cast<bool>(in >> ev[k]), ErrorKind::InvalidArgument,
                "expected " + std::to_string(m) + " eigenvalues, got " + std::to_string(k));
    }
    std::optional<GrowthTag> growth;
    std::string word;
    if (in >> word) {
        require(word == "growth", ErrorKind::InvalidArgument, "unexpected token `" + word + "`");
        GrowthTag tag;
        require(static_cast<bool>(in >> tag.c >> tag.alpha), ErrorKind::InvalidArgument,
                "growth line must read `growth c alpha`");
        growth = tag;
    }
    return SpectralOperator(std::move(ev), delta, growth);
}

State semigroup_apply(const SpectralOperator& op, double t, std::span<const double> x) {
    require(x.size() == op.dim(), ErrorKind::DimensionMismatch, "state length differs from m");
    require(t >= 0.0, ErrorKind::InvalidTime, "semigroup time must be nonnegative");
    State out(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) out[k] = std::exp(-op.eigenvalue(k) * t) * x[k];
    return out;
}

DiagonalKernel covariance_qt(const SpectralOperator& op, double t) {
    require(t >= 0.0, ErrorKind::InvalidTime, "covariance time must be nonnegative");
    DiagonalKernel q{std::vector<double>(op.dim()), KernelRole::Covariance};
    for (std::size_t k = 0; k < op.dim(); ++k) {
        const double lam = op.eigenvalue(k);
        q.coefficients[k] = std::isinf(t) ? 0.5 / lam : one_minus_exp2(t, lam) / (2.0 * lam);
    }
    return q;
}

DiagonalKernel lambda_t_diag(const SpectralOperator& op, double t) {
    require(t > 0.0, ErrorKind::InvalidTime, "Lambda_t is singular at t <= 0");
    DiagonalKernel out{std::vector<double>(op.dim()), KernelRole::LambdaT};
    for (std::size_t k = 0; k < op.dim(); ++k) {
        const double lam = op.eigenvalue(k);
        out.coefficients[k] =
            std::sqrt(2.0 * lam) * std::exp(-t * lam) / std::sqrt(one_minus_exp2(t, lam));
    }
    return out;
}

double convolution_weight(double lambda, double dt) {
    if (lambda == 0.0) return dt;
    return -std::expm1(-lambda * dt) / lambda;
}

TraceReport trace_check(const SpectralOperator& op, double delta, bool asymptotic) {
    require(delta >= 0.0 && delta < 1.0, ErrorKind::InvalidArgument, "delta must lie in [0,1)");
    require(!asymptotic || op.growth().has_value(), ErrorKind::MissingGrowthTag,
            "asymptotic trace verdict requires a growth tag");
    const double power = 1.0 - delta;
    std::vector<double> terms(op.dim());
    for (std::size_t k = 0; k < op.dim(); ++k) terms[k] = std::pow(op.eigenvalue(k), -power);
    TraceReport report;
    report.partial_sum = pairwise_sum(terms);
    if (!asymptotic || !op.growth()) {
        report.truncated = true;
        report.verdict = TraceVerdict::Converges;
        return report;
    }
    const GrowthTag g = *op.growth();
    const double exponent = g.alpha * power;
    if (exponent > 1.0) {
        // sum_{k>m} (c k^alpha)^{-power} <= c^{-power} int_m^inf x^{-exponent} dx
        const double m = static_cast<double>(op.dim());
        report.verdict = TraceVerdict::Converges;
        report.tail_bound = std::pow(g.c, -power) * std::pow(m, 1.0 - exponent) / (exponent - 1.0);
    } else {
        report.verdict = TraceVerdict::Diverges;
        report.tail_bound = std::numeric_limits<double>::infinity();
    }
    return report;
}

double smoothing_profile(double s, double eps) {
    if (s <= 0.0) return eps == 0.0 ? 1.0 : 0.0;
    return std::pow(s, eps) * std::sqrt(2.0 * s) * std::exp(-s) / std::sqrt(-std::expm1(-2.0 * s));
}

double smoothing_constant(double eps) {
    require(eps >= 0.0, ErrorKind::InvalidArgument, "eps must be nonnegative");
    constexpr int kGrid = 2000;
    const double lo = std::log(1e-8), hi = std::log(50.0);
    int best = 0;
    double best_val = -1.0;
    for (int i = 0; i <= kGrid; ++i) {
        const double v = smoothing_profile(std::exp(lo + (hi - lo) * i / kGrid), eps);
        if (v > best_val) {
            best_val = v;
            best = i;
        }
    }
    // Golden section on the bracketing grid cells (in log s).
    double a = lo + (hi - lo) * std::max(best - 1, 0) / kGrid;
    double b = lo + (hi - lo) * std::min(best + 1, kGrid) / kGrid;
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - phi * (b - a), d = a + phi * (b - a);
    double fc = smoothing_profile(std::exp(c), eps), fd = smoothing_profile(std::exp(d), eps);
    for (int it = 0; it < 200 && b - a > 1e-14; ++it) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = smoothing_profile(std::exp(c), eps);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = smoothing_profile(std::exp(d), eps);
        }
    }
    best_val = std::max({best_val, fc, fd});
    if (eps == 0.0) best_val = std::max(best_val, smoothing_profile(0.0, 0.0));
    return best_val;
}

double c0() {
    static const double value = smoothing_constant(0.0);
    return value;
}

double c1_0() { return std::sqrt(std::numbers::pi) * c0(); }

}  // namespace spdelab
