#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "spdelab/fields.hpp"
#include "spdelab/ou_semigroup.hpp"
#include "spdelab/path_engine.hpp"

namespace spdelab {

enum class Direction { RemoveDrift, AddDrift };

/// Left is the predictable evaluation Girsanov needs. Right exists only to demonstrate the bias
/// that breaking adaptedness introduces.
enum class NodeChoice { Left, Right };

struct GirsanovWeight {
    double log_weight = 0.0;
    double integral_term = 0.0;   // sum <B(X_j), dW_j>
    double quadratic_term = 0.0;  // (1/2) sum |B(X_j)|^2 dt
    std::size_t segment_count = 1;

    double weight() const;
};

/// sum_j sum_k b_{j,k} dW_{j,k}; b holds one row of m values per step.
double stochastic_integral(std::span<const double> b_values, const NoisePanel& noise);

/// AddDrift:    log M = + int <B, dW> - (1/2) int |B|^2 dt  (drift-free paths -> drifted law).
/// RemoveDrift: log rho = - int <B, dW> - (1/2) int |B|^2 dt.
GirsanovWeight girsanov_weight(const Trajectory& path, const DriftField& B, const NoisePanel& noise,
                               Direction direction, NodeChoice node = NodeChoice::Left);

struct NovikovReport {
    std::size_t segments = 1;
    double exponent_bound = 0.0;  // (1/2)|B|_0^2 T / segments
    std::vector<Estimate> exp_moments;     // E exp((1/2) int_seg |B(Z)|^2)
    std::vector<Estimate> segment_means;   // E of the per-segment exponential martingale
    Estimate expected_weight;              // E M over the whole horizon
    bool passed = false;
};

/// Novikov on each of `segments` pieces of [0, T] along OU paths from x.
NovikovReport segmented_novikov_check(const LinearDrift& lin, const DriftField& B, std::span<const double> x,
                                      const TimeGrid& grid, std::size_t segments, std::size_t n_paths,
                                      std::uint64_t seed, NodeChoice node = NodeChoice::Left);

enum class PathFunctional { Terminal, Sup, TimeAverage };
PathFunctional parse_functional(const std::string& name);
double apply_functional(const ScalarField& f, const Trajectory& path, PathFunctional functional);

struct WeightedEstimate {
    double value = 0.0;
    double std_error = 0.0;
    double ess = 0.0;
    bool degenerate = false;  // ESS below 10
    std::string warning;
};

/// Self-normalized importance estimate sum w_i f_i / sum w_i with delta-method standard error.
WeightedEstimate weighted_expectation(std::span<const double> values, std::span<const double> log_weights);
WeightedEstimate weighted_expectation(const ScalarField& f, const PathEnsemble& ensemble,
                                      const std::vector<GirsanovWeight>& weights, PathFunctional functional);

struct DualEstimate {
    Estimate expected_weight;    // E M over weighted OU paths
    WeightedEstimate weighted;   // E f under add_drift-weighted OU paths
    Estimate direct;             // E f over mild paths (independent noise)
    double discrepancy_sigmas = 0.0;
};

/// Change-of-measure consistency without storing paths: OU paths use seed, mild paths seed + 1.
DualEstimate dual_estimator_check(const LinearDrift& lin, const DriftField& B, std::span<const double> x,
                                  const TimeGrid& grid, const ScalarField& f, PathFunctional functional,
                                  std::size_t n_paths, std::uint64_t seed);

/// `path_id, log_weight, integral_term, quadratic_term`.
void write_weight_csv(std::ostream& out, const std::vector<GirsanovWeight>& weights);

}  // namespace spdelab
