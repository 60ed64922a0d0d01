#include "spdelab/zvonkin.hpp"

#include <algorithm>
#include <cmath>

#include "spdelab/csv.hpp"
#include "spdelab/errors.hpp"
#include "spdelab/quadrature.hpp"
#include "spdelab/stats.hpp"

namespace spdelab {

namespace {

void check_solution(const KolmogorovSolution& sol, double lambda) {
    if (std::abs(sol.lambda() - lambda) > 1e-12 * std::max(1.0, lambda))
        throw Error(ErrorKind::SolutionMismatch, "solution built for lambda = " + format_number(sol.lambda()) +
                                                     ", residual requested at " + format_number(lambda));
}

void check_path(const SpectralOperator& op, const Trajectory& path, const NoisePanel& noise, std::size_t i) {
    require(path.dim() == op.dim() && noise.dim() == op.dim() && noise.steps() == path.grid().steps,
            ErrorKind::DimensionMismatch, "path, noise and operator shapes differ");
    require(i < op.dim(), ErrorKind::DimensionMismatch, "component out of range");
}

}  // namespace

IdentityResidual modified_mild_residual(const SpectralOperator& op, const DriftField& B,
                                        const KolmogorovSolution& sol, const Trajectory& path,
                                        const NoisePanel& noise, double lambda, std::size_t i) {
    check_solution(sol, lambda);
    check_path(op, path, noise, i);
    require(sol.components() == op.dim(), ErrorKind::SolutionMismatch, "expected the vector solution");
    require(B.dim() == op.dim(), ErrorKind::DimensionMismatch, "drift dimension mismatch");
    const std::size_t m = op.dim();
    const double dt = path.grid().dt();
    const double li = op.eigenvalue(i);
    const double decay = std::exp(-li * dt);
    const double conv = -std::expm1(-li * dt) / li;

    IdentityResidual res;
    res.component = i;
    res.dt = dt;
    res.provenance = "modified_mild lambda=" + format_number(lambda);
    res.per_node.assign(path.nodes(), 0.0);
    double E = path.at(0, i) + sol.value(path.row(0), i);
    double J = 0.0, K = 0.0;
    for (std::size_t n = 0;; ++n) {
        const double un = sol.value(path.row(n), i);
        const double rhs = E - un + (lambda + li) * J + K;
        res.per_node[n] = path.at(n, i) - rhs;
        res.sup_residual = std::max(res.sup_residual, std::abs(res.per_node[n]));
        if (n == path.grid().steps) break;
        const auto du = sol.gradient(path.row(n), i);
        double stoch = noise.eta(n, i);
        for (std::size_t k = 0; k < m; ++k)
            stoch += du[k] * (k == i ? noise.eta(n, i) : (conv / dt) * noise.dW(n, k));
        E = decay * E;
        J = decay * J + conv * un;
        K = decay * K + stoch;
    }
    return res;
}

IdentityResidual ito_identity_residual(const SpectralOperator& op, const DriftField& B,
                                       const KolmogorovSolution& sol, const Trajectory& path,
                                       const NoisePanel& noise, double lambda, std::size_t i, double r) {
    check_solution(sol, lambda);
    check_path(op, path, noise, i);
    const double dt = path.grid().dt();
    require(r >= 0.0 && r < path.grid().horizon, ErrorKind::InvalidTime, "start time must lie in [0, T)");
    const std::size_t comp = sol.components() == 1 ? 0 : i;
    const auto start = static_cast<std::size_t>(std::llround(r / dt));

    IdentityResidual res;
    res.component = i;
    res.dt = dt;
    res.start_node = start;
    res.provenance = "ito_identity lambda=" + format_number(lambda) + " r=" + format_number(r);
    res.per_node.assign(path.nodes(), 0.0);
    const double u_r = sol.value(path.row(start), comp);
    double drift = 0.0, stoch = 0.0;
    for (std::size_t n = start;; ++n) {
        const double un = sol.value(path.row(n), comp);
        res.per_node[n] = un - u_r - drift - stoch;
        res.sup_residual = std::max(res.sup_residual, std::abs(res.per_node[n]));
        if (n == path.grid().steps) break;
        const auto du = sol.gradient(path.row(n), comp);
        drift += (lambda * un - B(path.row(n))[i]) * dt;
        for (std::size_t k = 0; k < du.size(); ++k) stoch += du[k] * noise.dW(n, k);
    }
    return res;
}

double mean_value_check(const ScalarField& f, const std::vector<std::pair<State, State>>& pairs) {
    require(static_cast<bool>(f.gradient), ErrorKind::InvalidArgument, "field has no gradient contract");
    static const auto gl = gauss_legendre(32);
    double worst = 0.0;
    for (const auto& [X, Y] : pairs) {
        require(X.size() == Y.size(), ErrorKind::DimensionMismatch, "pair states differ in dimension");
        State z(X.size());
        double integral = 0.0;
        for (std::size_t g = 0; g < gl.size(); ++g) {
            const double r = 0.5 * (gl.nodes[g] + 1.0);
            for (std::size_t k = 0; k < z.size(); ++k) z[k] = r * X[k] + (1.0 - r) * Y[k];
            const auto df = f.gradient(z);
            double dot = 0.0;
            for (std::size_t k = 0; k < z.size(); ++k) dot += df[k] * (X[k] - Y[k]);
            integral += 0.5 * gl.weights[g] * dot;
        }
        worst = std::max(worst, std::abs(f(X) - f(Y) - integral));
    }
    return worst;
}

Estimate laplace_representation(const SpectralOperator& op, const DriftField& B, std::span<const double> x,
                                double lambda, std::size_t i, double dt, std::size_t n_paths,
                                std::uint64_t seed) {
    require(lambda > 0.0 && dt > 0.0, ErrorKind::InvalidArgument, "lambda and dt must be positive");
    const auto steps = static_cast<std::size_t>(std::ceil(40.0 / (lambda * dt)));
    const TimeGrid grid(dt * static_cast<double>(steps), steps);
    const double w = -std::expm1(-lambda * dt) / lambda;
    std::vector<double> vals(n_paths);
#pragma omp parallel for schedule(static)
    for (std::size_t p = 0; p < n_paths; ++p) {
        const auto noise = NoisePanel::generate(op, grid, seed, static_cast<std::uint32_t>(p));
        const auto path = simulate_mild(op, B, x, grid, noise);
        double acc = 0.0;
        for (std::size_t j = 0; j < steps; ++j) acc += std::exp(-lambda * grid.time(j)) * w * B(path.row(j))[i];
        vals[p] = acc;
    }
    const auto e = mean_estimate(vals);
    return {e.mean, e.std_error};
}

void write_residual_csv(std::ostream& out, const IdentityResidual& res) {
    CsvWriter w(out, {"t", "residual"});
    for (std::size_t n = res.start_node; n < res.per_node.size(); ++n)
        w.row({res.dt * static_cast<double>(n), res.per_node[n]});
}

}  // namespace spdelab
