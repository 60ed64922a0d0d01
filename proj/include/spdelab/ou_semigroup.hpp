#pragma once

#include <cstdint>

#include "spdelab/fields.hpp"
#include "spdelab/spectrum.hpp"

namespace spdelab {

enum class TimeTransform { ExpSpaced };

struct QuadratureSpec {
    std::size_t mc_samples = 4096;
    std::size_t time_nodes = 64;
    TimeTransform time_transform = TimeTransform::ExpSpaced;
    std::uint64_t seed = 1;
    double tolerance = 1e-3;
    // Grid solver resolution (kolmogorov_solver). grid_points = 0 picks a default by dimension.
    std::size_t grid_points = 0;
    double grid_half_width = 8.0;  // in invariant standard deviations per mode
    std::size_t hermite_nodes = 40;

    void validate() const;
};

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
};

// All estimators below draw the same standard normals z_i (keyed on seed and sample index only),
// so estimates are smooth in x, t and lambda and differences of estimates enjoy variance cancellation.

/// R_t phi(x) = E phi(e^{tA}x + Q_t^{1/2} Z). t = 0 returns phi(x) exactly.
Estimate apply_rt(const SpectralOperator& op, const ScalarField& phi, double t,
                  std::span<const double> x, const QuadratureSpec& quad);

/// <D R_t phi(x), h> = E[<Lambda_t h, Z> phi(e^{tA}x + Q_t^{1/2} Z)], with phi(e^{tA}x) subtracted as a
/// control variate (the weight is centred, so the mean is unchanged).
Estimate gradient_rt(const SpectralOperator& op, const ScalarField& phi, double t,
                     std::span<const double> x, std::span<const double> h,
                     const QuadratureSpec& quad);

/// (lambda - L)^{-1} phi(x) = int_0^inf e^{-lambda t} R_t phi(x) dt on the Laplace time rule.
Estimate resolvent(const SpectralOperator& op, const ScalarField& phi, double lambda,
                   std::span<const double> x, const QuadratureSpec& quad);

/// <D (lambda - L)^{-1} phi(x), h>: gradient_rt under the Laplace integral.
Estimate resolvent_gradient(const SpectralOperator& op, const ScalarField& phi, double lambda,
                            std::span<const double> x, std::span<const double> h,
                            const QuadratureSpec& quad);

}  // namespace spdelab
