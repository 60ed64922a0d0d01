#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "spdelab/spectrum.hpp"

namespace spdelab {

struct AxisGrid {
    double lo = -1.0;
    double hi = 1.0;
    std::size_t n = 2;

    double step() const { return (hi - lo) / static_cast<double>(n - 1); }
    double node(std::size_t i) const { return lo + step() * static_cast<double>(i); }
};

/// Row-major tensor grid, axis 0 slowest.
class TensorGrid {
public:
    TensorGrid() = default;
    explicit TensorGrid(std::vector<AxisGrid> axes);
    /// Mode k spans [-c sigma_k, c sigma_k], sigma_k^2 = 1/(2 lambda_k) the invariant variance.
    static TensorGrid for_operator(const SpectralOperator& op, std::size_t points_per_axis,
                                   double half_width_sigmas);

    std::size_t dim() const { return axes_.size(); }
    std::size_t size() const { return size_; }
    const AxisGrid& axis(std::size_t k) const { return axes_[k]; }
    const std::vector<AxisGrid>& axes() const { return axes_; }
    std::size_t stride(std::size_t k) const { return strides_[k]; }
    State point(std::size_t flat) const;
    bool contains(std::span<const double> x) const;

private:
    std::vector<AxisGrid> axes_;
    std::vector<std::size_t> strides_;
    std::size_t size_ = 0;
};

/// Tensor natural cubic B-spline through grid values. Outside the box the argument is clamped
/// to the boundary (constant extension, zero derivative in the clamped direction).
class SplineInterpolant {
public:
    SplineInterpolant() = default;
    SplineInterpolant(const TensorGrid& grid, std::span<const double> values);

    double value(std::span<const double> x) const;
    State gradient(std::span<const double> x) const;
    double partial(std::span<const double> x, std::size_t axis) const;
    const TensorGrid& grid() const { return grid_; }

private:
    double eval(std::span<const double> x, int deriv_axis) const;

    TensorGrid grid_;
    std::vector<std::size_t> cstrides_;
    std::vector<double> coef_;
};

/// B-spline coefficient tensor (n_k + 2 per axis) of the natural cubic interpolant.
std::vector<double> spline_coefficients(const TensorGrid& grid, std::span<const double> values);

/// Cubic B-spline basis weights for coefficients first..first+3 at x (clamped).
struct BasisWeights {
    std::size_t first = 0;
    double w[4] = {0, 0, 0, 0};
    double dw[4] = {0, 0, 0, 0};
};
BasisWeights spline_basis(const AxisGrid& axis, double x);

/// Kernel of one axis at one time node: maps spline coefficients to values at grid nodes.
struct AxisKernel {
    Eigen::MatrixXd dense;
    Eigen::SparseMatrix<double, Eigen::RowMajor> sparse;
    bool is_dense = true;
};

/// The OU resolvent and its gradient as linear maps on grid functions: each grid function is
/// read through its spline interpolant, Gaussian expectations use Gauss-Hermite per mode and the
/// Laplace integral uses the Laplace time rule.
class OuGridOperator {
public:
    OuGridOperator(const SpectralOperator& op, const TensorGrid& grid, double lambda,
                   std::size_t time_nodes, std::size_t hermite_nodes);

    double lambda() const { return lambda_; }
    const TensorGrid& grid() const { return grid_; }
    /// (lambda - L)^{-1} psi at the grid nodes.
    std::vector<double> resolvent(const std::vector<double>& psi) const;
    /// d_k (lambda - L)^{-1} psi at the grid nodes, k = 0..m-1.
    std::vector<std::vector<double>> resolvent_gradient(const std::vector<double>& psi) const;

private:
    std::vector<double> apply(const std::vector<double>& coef, std::size_t q, int grad_axis) const;

    TensorGrid grid_;
    double lambda_;
    std::vector<double> weights_;
    // [node q][axis k]
    std::vector<std::vector<AxisKernel>> value_;
    std::vector<std::vector<AxisKernel>> grad_;
};

}  // namespace spdelab
