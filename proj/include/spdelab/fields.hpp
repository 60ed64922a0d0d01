#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spdelab/spectrum.hpp"

namespace spdelab {

enum class Smoothness { Measurable, Lipschitz, Smooth };

/// phi in B_b(H) restricted to the truncation.
struct ScalarField {
    std::function<double(std::span<const double>)> eval;
    double sup_norm_bound = std::numeric_limits<double>::infinity();
    Smoothness smoothness = Smoothness::Measurable;
    /// Optional gradient contract (needed by the mean-value check).
    std::function<State(std::span<const double>)> gradient;

    double operator()(std::span<const double> x) const { return eval(x); }

    static ScalarField constant(double c);
    /// x -> <e_k, x>; unbounded on H, bounded on any grid domain.
    static ScalarField coordinate(std::size_t k);
};

/// How a drift with a Dirichlet (indicator-of-irrationals) part is evaluated.
///   Pointwise: the function itself, rationality decided by the detector.
///   Generic:   its Lebesgue-a.e. representative (b_Dir == 1).
///   ZeroBranch: the Dirichlet part forced to 0 (constant-branch continuation).
/// Drifts without a Dirichlet part ignore the mode.
enum class BranchMode { Pointwise, Generic, ZeroBranch };

/// B in B_b(H, H) restricted to the truncation.
class DriftField {
public:
    using Rule = std::function<State(std::span<const double>, BranchMode)>;

    DriftField() = default;
    DriftField(std::size_t dim, double sup_norm_bound, Smoothness smoothness, Rule rule,
               std::string name = "drift");
    /// Convenience for drifts without a Dirichlet part.
    DriftField(std::size_t dim, double sup_norm_bound, Smoothness smoothness,
               std::function<State(std::span<const double>)> rule, std::string name = "drift");

    static DriftField zero(std::size_t dim);
    static DriftField constant(State value);

    std::size_t dim() const { return dim_; }
    double sup_norm_bound() const { return bound_; }
    Smoothness smoothness() const { return smoothness_; }
    const std::string& name() const { return name_; }
    bool is_zero() const { return is_zero_; }

    State operator()(std::span<const double> x, BranchMode mode = BranchMode::Pointwise) const;
    /// B^{(i)} = <B, e_i>.
    double component(std::span<const double> x, std::size_t i) const { return (*this)(x)[i]; }
    /// The drift as a scalar field for component i (used as the Kolmogorov right-hand side).
    ScalarField component_field(std::size_t i) const;

private:
    std::size_t dim_ = 0;
    double bound_ = 0.0;
    Smoothness smoothness_ = Smoothness::Measurable;
    Rule rule_;
    std::string name_;
    bool is_zero_ = false;
};

double norm(std::span<const double> v);

}  // namespace spdelab
