#include "spdelab/kolmogorov.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <ostream>

#include "spdelab/csv.hpp"
#include "spdelab/errors.hpp"
#include "spdelab/quadrature.hpp"
#include "spdelab/rng.hpp"
#include "spdelab/stats.hpp"

namespace spdelab {

KolmogorovSolution::KolmogorovSolution(double lambda, TensorGrid grid,
                                       std::vector<std::vector<double>> values,
                                       std::vector<std::vector<std::vector<double>>> gradients,
                                       SolverProvenance prov)
    : lambda_(lambda), grid_(std::move(grid)), values_(std::move(values)),
      gradients_(std::move(gradients)), prov_(std::move(prov)) {
    for (std::size_t c = 0; c < values_.size(); ++c) {
        value_splines_.emplace_back(grid_, values_[c]);
        std::vector<SplineInterpolant> g;
        for (std::size_t k = 0; k < grid_.dim(); ++k) g.emplace_back(grid_, gradients_[c][k]);
        gradient_splines_.push_back(std::move(g));
    }
}

double KolmogorovSolution::value(std::span<const double> x, std::size_t component) const {
    require(component < values_.size(), ErrorKind::DimensionMismatch, "solution component out of range");
    return value_splines_[component].value(x);
}

State KolmogorovSolution::value_vector(std::span<const double> x) const {
    State v(values_.size());
    for (std::size_t c = 0; c < v.size(); ++c) v[c] = value(x, c);
    return v;
}

State KolmogorovSolution::gradient(std::span<const double> x, std::size_t component) const {
    require(component < values_.size(), ErrorKind::DimensionMismatch, "solution component out of range");
    State g(grid_.dim());
    for (std::size_t k = 0; k < g.size(); ++k) g[k] = gradient_splines_[component][k].value(x);
    return g;
}

Eigen::MatrixXd KolmogorovSolution::jacobian(std::span<const double> x) const {
    Eigen::MatrixXd J(values_.size(), grid_.dim());
    for (std::size_t c = 0; c < values_.size(); ++c) {
        auto g = gradient(x, c);
        for (std::size_t k = 0; k < g.size(); ++k) J(c, k) = g[k];
    }
    return J;
}

double KolmogorovSolution::sup_value() const {
    double s = 0.0;
    for (const auto& v : values_)
        for (double a : v) s = std::max(s, std::abs(a));
    return s;
}

double KolmogorovSolution::sup_gradient() const {
    double s = 0.0;
    for (const auto& comp : gradients_)
        for (std::size_t i = 0; i < grid_.size(); ++i) {
            double n2 = 0.0;
            for (const auto& g : comp) n2 += g[i] * g[i];
            s = std::max(s, std::sqrt(n2));
        }
    return s;
}

DriftField mollify_drift(const SpectralOperator& op, const DriftField& B, std::size_t n,
                         const QuadratureSpec& quad) {
    require(n >= 1, ErrorKind::InvalidArgument, "mollification index must be >= 1");
    require(B.dim() == op.dim(), ErrorKind::DimensionMismatch, "drift and operator dimensions differ");
    quad.validate();
    const std::size_t m = op.dim();
    const double t = 1.0 / static_cast<double>(n);
    const auto q = covariance_qt(op, t);
    auto shifts = std::make_shared<std::vector<double>>(quad.mc_samples * m);
    CounterRng rng(quad.seed);
    for (std::size_t i = 0; i < quad.mc_samples; ++i)
        for (std::size_t k = 0; k < m; ++k)
            (*shifts)[i * m + k] =
                std::sqrt(q[k]) * rng.normal(Stream::Mollify, static_cast<std::uint32_t>(i),
                                             static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(n));
    std::vector<double> decay(m);
    for (std::size_t k = 0; k < m; ++k) decay[k] = std::exp(-op.eigenvalue(k) * t);
    const std::size_t K = quad.mc_samples;
    DriftField::Rule rule = [B, shifts, decay, m, K](std::span<const double> x, BranchMode mode) {
        std::vector<std::vector<double>> vals(m, std::vector<double>(K));
        State y(m);
        for (std::size_t i = 0; i < K; ++i) {
            for (std::size_t k = 0; k < m; ++k) y[k] = decay[k] * x[k] + (*shifts)[i * m + k];
            auto b = B(y, mode);
            for (std::size_t k = 0; k < m; ++k) vals[k][i] = b[k];
        }
        State out(m);
        for (std::size_t k = 0; k < m; ++k) out[k] = pairwise_sum(vals[k]) / static_cast<double>(K);
        return out;
    };
    return DriftField(m, B.sup_norm_bound(), Smoothness::Smooth, rule,
                      B.name() + "_mollified_" + std::to_string(n));
}

DriftField tabulate_drift(const DriftField& B, const TensorGrid& grid) {
    require(B.dim() == grid.dim(), ErrorKind::DimensionMismatch, "drift and grid dimensions differ");
    const std::size_t m = B.dim();
    std::vector<std::vector<double>> data(m, std::vector<double>(grid.size()));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        auto b = B(grid.point(i));
        for (std::size_t k = 0; k < m; ++k) data[k][i] = b[k];
    }
    auto splines = std::make_shared<std::vector<SplineInterpolant>>();
    for (std::size_t k = 0; k < m; ++k) splines->emplace_back(grid, data[k]);
    const double bound = B.sup_norm_bound();
    std::function<State(std::span<const double>)> rule = [splines, m, bound](std::span<const double> x) {
        State out(m);
        for (std::size_t k = 0; k < m; ++k) out[k] = (*splines)[k].value(x);
        const double n = norm(out);
        if (n > bound && n > 0.0)
            for (double& v : out) v *= bound / n;
        return out;
    };
    return DriftField(m, bound, Smoothness::Smooth, rule, B.name() + "_tabulated");
}

double lambda0(const SpectralOperator&, const DriftField& B) {
    const double b = B.sup_norm_bound();
    const double c = c1_0();
    return 4.0 * b * b * c * c;
}

Estimate apply_t_lambda(const SpectralOperator& op, const DriftField& B, double lambda,
                        const ScalarField& phi, std::span<const double> x, const QuadratureSpec& quad) {
    require(lambda > 0.0, ErrorKind::InvalidArgument, "lambda must be positive");
    const auto h = B(x);
    if (std::all_of(h.begin(), h.end(), [](double v) { return v == 0.0; })) return {0.0, 0.0};
    return resolvent_gradient(op, phi, lambda, x, h, quad);
}

TensorGrid solver_grid(const SpectralOperator& op, const QuadratureSpec& quad) {
    std::size_t n = quad.grid_points;
    if (n == 0) {
        switch (op.dim()) {
            case 1: n = 401; break;
            case 2: n = 41; break;
            case 3: n = 19; break;
            case 4: n = 11; break;
            default: break;
        }
    }
    require(n >= 4, ErrorKind::InvalidArgument,
            "grid solver supports m <= 4 (set grid_points explicitly to override)");
    return TensorGrid::for_operator(op, n, quad.grid_half_width);
}

namespace {

std::vector<std::vector<double>> drift_on_grid(const DriftField& B, const TensorGrid& grid) {
    std::vector<std::vector<double>> out(B.dim(), std::vector<double>(grid.size()));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        auto b = B(grid.point(i));
        for (std::size_t k = 0; k < b.size(); ++k) out[k][i] = b[k];
    }
    return out;
}

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s = std::max(s, std::abs(a[i] - b[i]));
    return s;
}

double sup_abs(const std::vector<double>& a) {
    double s = 0.0;
    for (double v : a) s = std::max(s, std::abs(v));
    return s;
}

void check_inputs(const SpectralOperator& op, const DriftField& B, double lambda) {
    require(B.dim() == op.dim(), ErrorKind::DimensionMismatch, "drift and operator dimensions differ");
    require(lambda > 0.0 && std::isfinite(lambda), ErrorKind::InvalidArgument, "lambda must be positive");
}

}  // namespace

KolmogorovSolution solve_scalar(const SpectralOperator& op, const DriftField& B, const ScalarField& f,
                                double lambda, const QuadratureSpec& quad, std::size_t max_iter,
                                double tol) {
    check_inputs(op, B, lambda);
    const double l0 = lambda0(op, B);
    if (lambda < l0)
        throw Error(ErrorKind::NotContractive,
                    "lambda = " + format_number(lambda) + " below lambda0 = " + format_number(l0));
    const auto grid = solver_grid(op, quad);
    const OuGridOperator R(op, grid, lambda, quad.time_nodes, quad.hermite_nodes);
    const auto bgrid = drift_on_grid(B, grid);
    std::vector<double> fgrid(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) fgrid[i] = f(grid.point(i));

    SolverProvenance prov;
    prov.quad = quad;
    prov.grid_points = grid.axis(0).n;
    auto psi = fgrid;
    const double scale = std::max(1.0, sup_abs(fgrid));
    bool converged = B.is_zero();
    while (!converged) {
        if (prov.iterations >= max_iter)
            throw Error(ErrorKind::NoConvergence, "scalar Neumann iteration did not reach tol");
        const auto g = R.resolvent_gradient(psi);
        auto next = fgrid;
        for (std::size_t k = 0; k < g.size(); ++k)
            for (std::size_t i = 0; i < next.size(); ++i) next[i] += bgrid[k][i] * g[k][i];
        const double change = sup_diff(next, psi);
        prov.residual_history.push_back(change);
        ++prov.iterations;
        psi.swap(next);
        converged = change <= tol * scale;
    }
    auto u = R.resolvent(psi);
    auto du = R.resolvent_gradient(psi);
    return KolmogorovSolution(lambda, grid, {std::move(u)}, {std::move(du)}, std::move(prov));
}

KolmogorovSolution solve_vector(const SpectralOperator& op, const DriftField& B, double lambda,
                                const QuadratureSpec& quad, std::size_t max_iter, double tol) {
    check_inputs(op, B, lambda);
    const double threshold = std::max(lambda0(op, B), 2.0 * B.sup_norm_bound());
    if (lambda < threshold)
        throw Error(ErrorKind::NotContractive,
                    "lambda = " + format_number(lambda) + " below max(lambda0, 2|B|_0) = " +
                        format_number(threshold));
    const auto grid = solver_grid(op, quad);
    const std::size_t m = op.dim();
    const OuGridOperator R(op, grid, lambda, quad.time_nodes, quad.hermite_nodes);
    const auto bgrid = drift_on_grid(B, grid);

    SolverProvenance prov;
    prov.quad = quad;
    prov.grid_points = grid.axis(0).n;
    // Iterate on Du: Du <- D R(B + <B, Du>), a contraction in sup norm for lambda above threshold.
    std::vector<std::vector<std::vector<double>>> du(
        m, std::vector<std::vector<double>>(m, std::vector<double>(grid.size(), 0.0)));
    std::vector<std::vector<double>> rhs = bgrid;
    if (!B.is_zero()) {
        const double scale = std::max(1.0, B.sup_norm_bound());
        for (;;) {
            if (prov.iterations >= max_iter)
                throw Error(ErrorKind::NoConvergence, "vector fixed-point iteration did not reach tol");
            double change = 0.0;
            for (std::size_t c = 0; c < m; ++c) {
                auto next = R.resolvent_gradient(rhs[c]);
                for (std::size_t k = 0; k < m; ++k) change = std::max(change, sup_diff(next[k], du[c][k]));
                du[c] = std::move(next);
            }
            for (std::size_t c = 0; c < m; ++c) {
                rhs[c] = bgrid[c];
                for (std::size_t k = 0; k < m; ++k)
                    for (std::size_t i = 0; i < grid.size(); ++i) rhs[c][i] += bgrid[k][i] * du[c][k][i];
            }
            prov.residual_history.push_back(change);
            ++prov.iterations;
            if (change <= tol * scale) break;
        }
    }
    std::vector<std::vector<double>> u(m);
    for (std::size_t c = 0; c < m; ++c) {
        u[c] = R.resolvent(rhs[c]);
        du[c] = R.resolvent_gradient(rhs[c]);
    }
    return KolmogorovSolution(lambda, grid, std::move(u), std::move(du), std::move(prov));
}

Eigen::MatrixXd hessian(const KolmogorovSolution& sol, std::span<const double> x, std::size_t component) {
    const std::size_t m = sol.dim();
    require(x.size() == m, ErrorKind::DimensionMismatch, "hessian point has wrong dimension");
    const double h = std::max(1e-4, 1e-3 * (1.0 + norm(x)));
    Eigen::MatrixXd H(m, m);
    State xp(x.begin(), x.end()), xm(x.begin(), x.end());
    for (std::size_t j = 0; j < m; ++j) {
        xp[j] = x[j] + h;
        xm[j] = x[j] - h;
        if (xp[j] == x[j] || xm[j] == x[j])
            throw Error(ErrorKind::StepUnderflow, "finite-difference step lost in rounding");
        const auto gp = sol.gradient(xp, component);
        const auto gm = sol.gradient(xm, component);
        for (std::size_t i = 0; i < m; ++i) H(i, j) = (gp[i] - gm[i]) / (xp[j] - xm[j]);
        xp[j] = x[j];
        xm[j] = x[j];
    }
    return 0.5 * (H + H.transpose());
}

void RegularityDiagnostics::validate(const SpectralOperator& op) const {
    require(q > 4.0, ErrorKind::InvariantViolation, "regularity diagnostics need q > 4");
    require(std::abs(gamma - q / 2.0) <= 1e-12 * q, ErrorKind::InvariantViolation, "gamma must equal q/2");
    require(std::abs(delta - op.delta()) <= 1e-12, ErrorKind::InvariantViolation,
            "diagnostics delta differs from the operator's delta");
    require(horizon > 0.0, ErrorKind::InvariantViolation, "horizon must be positive");
}

double regularity_integrand(const SpectralOperator& op, const KolmogorovSolution& sol,
                            std::span<const double> z, const RegularityDiagnostics& diag,
                            std::size_t modes) {
    const std::size_t n_max = std::min(modes, sol.components());
    double s = 0.0;
    for (std::size_t n = 0; n < n_max; ++n) {
        const auto H = hessian(sol, z, n);
        s += std::pow(op.eigenvalue(n), -(1.0 - diag.delta)) * H.squaredNorm();
    }
    return std::pow(s, diag.gamma);
}

double regularity_functional(const SpectralOperator& op, const KolmogorovSolution& sol,
                             const std::vector<State>& points, const RegularityDiagnostics& diag) {
    diag.validate(op);
    require(!points.empty(), ErrorKind::InvalidArgument, "no points supplied");
    std::vector<double> vals(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) vals[i] = regularity_integrand(op, sol, points[i], diag);
    return diag.horizon * pairwise_sum(vals) / static_cast<double>(points.size());
}

StoppingReport regularity_stopping(const SpectralOperator& op, const KolmogorovSolution& sol,
                                   const std::vector<State>& X, const std::vector<State>& Y, double dt,
                                   const RegularityDiagnostics& diag, std::size_t r_nodes) {
    diag.validate(op);
    require(X.size() == Y.size() && !X.empty(), ErrorKind::DimensionMismatch, "paths must align");
    const auto gl = gauss_legendre(r_nodes);
    StoppingReport rep;
    rep.running.assign(X.size(), 0.0);
    State z(op.dim());
    for (std::size_t j = 0; j + 1 < X.size(); ++j) {
        double inner = 0.0;
        for (std::size_t g = 0; g < gl.size(); ++g) {
            const double r = 0.5 * (gl.nodes[g] + 1.0);
            for (std::size_t k = 0; k < z.size(); ++k) z[k] = r * X[j][k] + (1.0 - r) * Y[j][k];
            inner += 0.5 * gl.weights[g] * regularity_integrand(op, sol, z, diag);
        }
        rep.running[j + 1] = rep.running[j] + dt * inner;
        if (std::isinf(rep.tau_R) && rep.running[j + 1] >= diag.R) rep.tau_R = dt * static_cast<double>(j + 1);
    }
    rep.S_T = rep.running.back();
    return rep;
}

void write_probe_csv(std::ostream& out, const KolmogorovSolution& sol, const std::vector<State>& probes,
                     std::size_t component) {
    auto header = mode_columns(sol.dim(), "x_");
    header.insert(header.end(), {"u", "|Du|", "hs_norm_D2u"});
    CsvWriter w(out, header);
    for (const auto& x : probes) {
        std::vector<double> row(x.begin(), x.end());
        row.push_back(sol.value(x, component));
        row.push_back(norm(sol.gradient(x, component)));
        row.push_back(hessian(sol, x, component).norm());
        w.row(row);
    }
}

}  // namespace spdelab
