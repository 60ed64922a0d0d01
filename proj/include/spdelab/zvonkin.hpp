#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "spdelab/kolmogorov.hpp"
#include "spdelab/path_engine.hpp"

namespace spdelab {

struct IdentityResidual {
    std::size_t component = 0;
    std::vector<double> per_node;  // zero before start_node
    std::size_t start_node = 0;
    double sup_residual = 0.0;
    double dt = 0.0;
    std::string provenance;
};

/// X^{(i)}_t minus the right-hand side of the modified mild formulation built from the vector
/// solution u: e^{-lambda_i t}(x_i + u^{(i)}(x)) - u^{(i)}(X_t) + (lambda + lambda_i) int e^{-lambda_i(t-s)} u^{(i)}(X_s) ds
/// + int e^{-lambda_i(t-s)} (dW^{(i)} + <Du^{(i)}(X_s), dW_s>). Integrands are frozen at left nodes and
/// integrated against the exact exponential; the dW^{(i)} term is the panel's exact convolution
/// increment, other modes use the conditional mean ((1 - e^{-lambda_i dt})/(lambda_i dt)) dW_k.
IdentityResidual modified_mild_residual(const SpectralOperator& op, const DriftField& B,
                                        const KolmogorovSolution& sol, const Trajectory& path,
                                        const NoisePanel& noise, double lambda, std::size_t i);

/// u(X_t) - u(X_r) - int_r^t (lambda u - B^{(i)})(X_s) ds - int_r^t <Du(X_s), dW_s>, left-node sums.
/// `sol` is the scalar solution for f = B^{(i)}, or a vector solution (component i is used).
IdentityResidual ito_identity_residual(const SpectralOperator& op, const DriftField& B,
                                       const KolmogorovSolution& sol, const Trajectory& path,
                                       const NoisePanel& noise, double lambda, std::size_t i, double r);

/// max |f(X) - f(Y) - int_0^1 <Df(rX + (1-r)Y), X - Y> dr| with 32-point Gauss-Legendre in r.
double mean_value_check(const ScalarField& f, const std::vector<std::pair<State, State>>& pairs);

/// int_0^inf e^{-lambda t} E B^{(i)}(X_t) dt along mild paths from x (left-node, exact exponential
/// weights, horizon 40/lambda). Equals u^{(i)}(x) in the continuum.
Estimate laplace_representation(const SpectralOperator& op, const DriftField& B, std::span<const double> x,
                                 double lambda, std::size_t i, double dt, std::size_t n_paths,
                                 std::uint64_t seed);

/// `t, residual`.
void write_residual_csv(std::ostream& out, const IdentityResidual& res);

}  // namespace spdelab
