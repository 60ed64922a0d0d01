#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace spdelab {

using State = std::vector<double>;

inline constexpr double kInfiniteTime = std::numeric_limits<double>::infinity();

/// Closed-form eigenvalue growth lambda_k = c k^alpha, used for tail analysis.
struct GrowthTag {
    double c = 1.0;
    double alpha = 2.0;
};

/// The diagonal operator A = -diag(lambda_k) on the first m eigenmodes.
class SpectralOperator {
public:
    SpectralOperator(std::vector<double> eigenvalues, double delta,
                     std::optional<GrowthTag> growth = std::nullopt);

    /// lambda_k = c k^alpha for k = 1..m, with the growth tag attached.
    static SpectralOperator power_law(std::size_t m, double c, double alpha, double delta);

    std::size_t dim() const { return eigenvalues_.size(); }
    double eigenvalue(std::size_t k) const { return eigenvalues_[k]; }
    const std::vector<double>& eigenvalues() const { return eigenvalues_; }
    double delta() const { return delta_; }
    const std::optional<GrowthTag>& growth() const { return growth_; }

    /// Text form: `m delta`, one eigenvalue per line, optional `growth c alpha`.
    std::string serialize() const;
    static SpectralOperator parse(std::string_view text);

private:
    std::vector<double> eigenvalues_;
    double delta_;
    std::optional<GrowthTag> growth_;
};

enum class KernelRole { Semigroup, Covariance, LambdaT };

struct DiagonalKernel {
    std::vector<double> coefficients;
    KernelRole role = KernelRole::Semigroup;

    double operator[](std::size_t k) const { return coefficients[k]; }
    std::size_t size() const { return coefficients.size(); }
};

/// Component k of e^{tA}x is e^{-lambda_k t} x_k.
State semigroup_apply(const SpectralOperator& op, double t, std::span<const double> x);

/// Q_t = (1 - e^{-2 t lambda_k}) / (2 lambda_k); t = kInfiniteTime gives the invariant covariance.
DiagonalKernel covariance_qt(const SpectralOperator& op, double t);

/// Lambda_t = Q_t^{-1/2} e^{tA}, coefficient sqrt(2 lambda_k) e^{-t lambda_k} (1 - e^{-2 t lambda_k})^{-1/2}.
DiagonalKernel lambda_t_diag(const SpectralOperator& op, double t);

/// Per-step integrated kernel (1 - e^{-lambda_k dt}) / lambda_k, the exact convolution of a
/// frozen drift over one step.
double convolution_weight(double lambda, double dt);

enum class TraceVerdict { Converges, Diverges };

struct TraceReport {
    TraceVerdict verdict = TraceVerdict::Converges;
    double partial_sum = 0.0;
    double tail_bound = 0.0;
    bool truncated = false;  // verdict speaks about the truncation only
};

/// Sum of lambda_k^{-(1-delta)} over the truncation, plus an integral tail bound from the growth
/// tag. With asymptotic = true the growth tag is mandatory.
TraceReport trace_check(const SpectralOperator& op, double delta, bool asymptotic = true);

/// s^eps sqrt(2s) e^{-s} (1 - e^{-2s})^{-1/2}: the mode-wise profile of t^{1/2+eps} (-A)^eps Lambda_t
/// as a function of s = lambda t.
double smoothing_profile(double s, double eps);

/// C_eps = sup_{s>0} smoothing_profile(s, eps), by log-grid scan on [1e-8, 50] and
/// golden-section refinement. For eps = 0 the supremum is the s -> 0+ limit, 1.
double smoothing_constant(double eps);

/// C_0 and C_{1,0} = sqrt(pi) C_0 (Laplace transform of C_0 t^{-1/2}, times lambda^{1/2}).
double c0();
double c1_0();

/// 1 - e^{-2 t lambda} without cancellation near t = 0.
inline double one_minus_exp2(double t, double lambda) { return -std::expm1(-2.0 * t * lambda); }

}  // namespace spdelab
