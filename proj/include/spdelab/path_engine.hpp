#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "spdelab/fields.hpp"
#include "spdelab/spectrum.hpp"

namespace spdelab {

/// Rates lambda_k >= 0 of the linear part. Unlike SpectralOperator this admits lambda = 0
/// (no regularizing operator), which the path engine can simulate but which lies outside the
/// uniqueness theory.
struct LinearDrift {
    std::vector<double> rates;

    LinearDrift(const SpectralOperator& op) : rates(op.eigenvalues()) {}  // NOLINT(implicit)
    explicit LinearDrift(std::vector<double> r);
    static LinearDrift zero(std::size_t m) { return LinearDrift(std::vector<double>(m, 0.0)); }
    std::size_t dim() const { return rates.size(); }
    bool regularizing() const;
};

struct TimeGrid {
    double horizon = 1.0;
    std::size_t steps = 1;

    TimeGrid(double T, std::size_t N);
    double dt() const { return horizon / static_cast<double>(steps); }
    double time(std::size_t j) const { return horizon * static_cast<double>(j) / static_cast<double>(steps); }
    std::size_t nodes() const { return steps + 1; }
};

/// Per-step coefficients: decay e^{-lambda dt}, frozen-drift convolution (1 - e^{-lambda dt})/lambda,
/// noise variance q(dt), all with the lambda -> 0 limits.
struct StepCoefficients {
    std::vector<double> decay, conv, var;
};
StepCoefficients step_coefficients(const LinearDrift& lin, double dt);

/// Noise for one path: Brownian increments dW_{j,k} and the matching exact OU convolution
/// increments eta_{j,k} = int_{t_j}^{t_{j+1}} e^{-lambda_k (t_{j+1}-s)} dW_k(s). Both come from two
/// standard normals per cell, keyed on (seed, path id, step, mode), so (dW, eta) has its exact joint law.
class NoisePanel {
public:
    static NoisePanel generate(const LinearDrift& lin, const TimeGrid& grid, std::uint64_t seed,
                               std::uint32_t path_id = 0);
    static NoisePanel zero(std::size_t m, const TimeGrid& grid);

    /// Aggregate `factor` consecutive steps: the exact increments of the coarser grid.
    NoisePanel coarsen(const LinearDrift& lin, std::size_t factor) const;

    std::size_t steps() const { return steps_; }
    std::size_t dim() const { return m_; }
    double dt() const { return dt_; }
    std::uint64_t seed() const { return seed_; }
    std::uint32_t path_id() const { return path_id_; }
    double dW(std::size_t j, std::size_t k) const { return dw_[j * m_ + k]; }
    double eta(std::size_t j, std::size_t k) const { return eta_[j * m_ + k]; }
    const std::vector<double>& dW_data() const { return dw_; }

private:
    std::size_t steps_ = 0, m_ = 0;
    double dt_ = 0.0;
    std::uint64_t seed_ = 0;
    std::uint32_t path_id_ = 0;
    std::vector<double> dw_, eta_;
    std::vector<double> rates_;
};

/// (q - c^2/dt)/dt for x = lambda dt: the conditional variance of eta given dW, scaled by dt.
double conditional_noise_variance(double x);

class Trajectory {
public:
    Trajectory(TimeGrid grid, std::size_t m);

    const TimeGrid& grid() const { return grid_; }
    std::size_t dim() const { return m_; }
    std::size_t nodes() const { return grid_.nodes(); }
    double at(std::size_t j, std::size_t k) const { return data_[j * m_ + k]; }
    double& at(std::size_t j, std::size_t k) { return data_[j * m_ + k]; }
    State state(std::size_t j) const;
    std::span<const double> row(std::size_t j) const { return {data_.data() + j * m_, m_}; }
    const std::vector<double>& data() const { return data_; }
    std::vector<State> states() const;

private:
    TimeGrid grid_;
    std::size_t m_;
    std::vector<double> data_;
};

enum class VariantKind { LeftNode, Forward, Midpoint, BranchSeeking, ConstantBranch };

/// How a candidate solution is constructed.
///   LeftNode:       drift at the left node.
///   Forward:        a.e. representative of the drift at the left node (Dirichlet part = 1).
///   Midpoint:       drift at the midpoint of the left node and a left-node predictor.
///   BranchSeeking:  pointwise drift at the left node, so the zero branch of b_Dir is taken whenever
///                   the state is detected rational; such nodes are recorded.
///   ConstantBranch: Forward before t_branch, Dirichlet part forced to 0 from t_branch on.
struct Variant {
    VariantKind kind = VariantKind::LeftNode;
    double t_branch = 0.0;

    static Variant parse(const std::string& name, double t_branch = 0.0);
    std::string name() const;
};

struct VariantPath {
    Trajectory trajectory;
    std::vector<std::size_t> branch_nodes;
};

VariantPath simulate_variant(const LinearDrift& lin, const DriftField& B, std::span<const double> x,
                             const TimeGrid& grid, const NoisePanel& noise, const Variant& variant);

/// Exact OU recursion X_{j+1} = e^{-lambda dt} X_j + eta_j.
Trajectory simulate_ou(const LinearDrift& lin, std::span<const double> x, const TimeGrid& grid,
                       std::uint64_t seed, std::uint32_t path_id = 0);

/// Exponential Euler with left-node drift; B == 0 reproduces simulate_ou bit for bit.
Trajectory simulate_mild(const LinearDrift& lin, const DriftField& B, std::span<const double> x,
                         const TimeGrid& grid, const NoisePanel& noise);

struct CoSimulation {
    VariantPath a, b;
    double sup_distance = 0.0;
};

/// Both variants consume one panel (zero panel when noisy = false).
CoSimulation co_simulate(const LinearDrift& lin, const DriftField& B, std::span<const double> x,
                         const TimeGrid& grid, std::uint64_t seed, const Variant& variant_a,
                         const Variant& variant_b, bool noisy = true, std::uint32_t path_id = 0);

double sup_distance(const Trajectory& a, const Trajectory& b);

struct MildResidual {
    std::vector<double> per_node;
    double sup = 0.0;
};

/// Residual of the mild integral equation along a trajectory: the drift integral uses
/// Gauss-Legendre points inside each step on the linear interpolant, evaluated in `mode`.
MildResidual mild_residual(const LinearDrift& lin, const DriftField& B, const Trajectory& path,
                           const NoisePanel& noise, BranchMode mode = BranchMode::Pointwise,
                           std::size_t gl_points = 4);

struct PathEnsemble {
    TimeGrid grid;
    std::vector<Trajectory> paths;
    std::vector<std::uint32_t> path_ids;
    std::uint64_t seed = 0;
    bool shared_noise = false;
    State initial;
};

/// n independent mild paths (path ids 0..n-1), panels regenerated from (seed, path id).
PathEnsemble simulate_ensemble(const LinearDrift& lin, const DriftField& B, std::span<const double> x,
                               const TimeGrid& grid, std::uint64_t seed, std::size_t n_paths);

/// `t, mode_1..mode_m`, with a leading `path_id` column when path_id is given.
void write_trajectory_csv(std::ostream& out, const Trajectory& path,
                          std::optional<std::uint32_t> path_id = std::nullopt, bool header = true);

}  // namespace spdelab
