#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "spdelab/spectrum.hpp"

namespace spdelab {

/// Gaussian law in the eigenbasis with diagonal covariance.
struct GaussianMeasure {
    State mean;
    std::vector<double> variances;

    GaussianMeasure(State mean_, std::vector<double> variances_);

    std::size_t dim() const { return mean.size(); }

    /// mu = N(0, Q) with Q = -(1/2) A^{-1}.
    static GaussianMeasure invariant(const SpectralOperator& op);
    /// N(e^{tA}x, Q_t), the OU transition law.
    static GaussianMeasure transition(const SpectralOperator& op, double t, std::span<const double> x);
};

/// n i.i.d. draws; draw i, mode k uses the counter key (seed, i, k) so output is bit-identical
/// for a given seed regardless of threading.
std::vector<State> sample(const GaussianMeasure& measure, std::size_t n, std::uint64_t seed);

/// First n points of the Halton sequence (bases 2, 3, 5, ...) pushed through the normal quantile.
/// Index 0 is skipped so no coordinate sits at the median of every mode.
std::vector<State> halton_sample(const GaussianMeasure& measure, std::size_t n);

/// Header `mode_1..mode_m`, one row per draw.
void write_samples_csv(std::ostream& out, const std::vector<State>& draws);

/// log density of N(e^{tA}x, Q_t) at y (Lebesgue density in the m coefficients).
double ou_transition_log_density(const SpectralOperator& op, double t, std::span<const double> x,
                                 std::span<const double> y);

/// L^{p'}(mu) norm of the OU kernel k_t(0, .):
/// det(I - e^{2tA})^{-1/2 + 1/(2p')} det(I + (p'-1) e^{2tA})^{-1/(2p')}, evaluated in log space.
double kernel_lp_norm(const SpectralOperator& op, double t, double p_prime);

enum class IntegrabilityVerdict { Finite, Divergent };

struct IntegrabilityReport {
    IntegrabilityVerdict verdict = IntegrabilityVerdict::Finite;
    double slope = 0.0;              // d log(norm) / d log(r) as r -> 0
    double integral_estimate = 0.0;  // int_{r_min}^T kernel_lp_norm(r) dr
};

/// Finite iff the small-r log-log slope of kernel_lp_norm exceeds -1. The slope is fitted on
/// [r_min, 1e3 r_min].
IntegrabilityReport integrability_scan(const SpectralOperator& op, double p_prime, double horizon,
                                       double r_min = 1e-8);

}  // namespace spdelab
