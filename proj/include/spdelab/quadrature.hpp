#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace spdelab {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }
};

/// Gauss-Hermite rule for the standard normal law: sum_i w_i f(z_i) ~ E f(Z), weights sum to 1.
QuadratureRule gauss_hermite_normal(std::size_t n);

/// Gauss-Legendre rule on [-1, 1].
QuadratureRule gauss_legendre(std::size_t n);

/// Rule for the Laplace integral int_0^inf e^{-lambda t} g(t) dt, weights include the
/// exponential factor. Integrands may carry a t^{-1/2} singularity at 0, which disappears in
/// s = sqrt(t); the rule uses uniform 8-node Gauss-Legendre panels in s up to t_max = 40/lambda.
QuadratureRule laplace_rule(double lambda, std::size_t time_nodes);

/// Adaptive Simpson on [a, b]; a > 0 and log_spaced integrates in log t.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        bool log_spaced = false, int max_depth = 50);

}  // namespace spdelab
