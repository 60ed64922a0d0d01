#pragma once

#include <cstdint>
#include <vector>

#include "spdelab/fields.hpp"

namespace spdelab {

/// Floating-point numbers are all rational; "rational" here means within `tolerance` of some
/// p/q with q <= max_denominator, found by continued-fraction convergents.
struct RationalDetector {
    std::uint64_t max_denominator = 4096;
    double tolerance = 1e-12;

    bool is_rational(double x) const;
};

/// Indicator of the irrationals: 0 at detected rationals, 1 elsewhere.
double b_dir(double x, const RationalDetector& det = {});

enum class DirichletKind { BDir1d, BDirProduct, Composite44 };

struct DirichletParams {
    std::size_t dim = 1;
    /// B_dir_product: alpha_n for n = 1..dim (missing entries are 0).
    /// Composite44: the tail weights on modes 2..dim.
    std::vector<double> weights;
    /// Caller's assertion that sum alpha_n^2 < infinity for the full sequence.
    bool square_summable = true;
    double lambda1 = 1.0;
    RationalDetector detector;
};

/// b_dir_1d:    B(x) = b_Dir(x_1), dim 1.
/// B_dir_product: B_n(x) = alpha_n b_Dir(x_n).
/// Composite44: B_1(x) = clamp(lambda_1 x_1, -1, 1) + b_Dir(x_1), B_n = alpha_n b_Dir(x_n) for n >= 2,
///   so that -lambda_1 x_1 + B_1(x) = b_Dir(x_1) on |x_1| <= 1/lambda_1.
DriftField dirichlet_drift(DirichletKind kind, const DirichletParams& params);

}  // namespace spdelab
