#pragma once

#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "spdelab/fields.hpp"
#include "spdelab/ou_semigroup.hpp"
#include "spdelab/spline_grid.hpp"

namespace spdelab {

struct SolverProvenance {
    std::size_t iterations = 0;
    std::vector<double> residual_history;  // sup change between successive iterates
    QuadratureSpec quad;
    std::size_t grid_points = 0;
};

/// Solution of lambda u - L u - <B, Du> = f (scalar) or of the vector equation for u = (u^{(i)}).
/// Values and gradients live on a tensor grid and are read through spline interpolants.
class KolmogorovSolution {
public:
    KolmogorovSolution(double lambda, TensorGrid grid, std::vector<std::vector<double>> values,
                       std::vector<std::vector<std::vector<double>>> gradients, SolverProvenance prov);

    double lambda() const { return lambda_; }
    std::size_t components() const { return values_.size(); }
    std::size_t dim() const { return grid_.dim(); }
    const TensorGrid& grid() const { return grid_; }
    const SolverProvenance& provenance() const { return prov_; }

    double value(std::span<const double> x, std::size_t component = 0) const;
    State value_vector(std::span<const double> x) const;
    State gradient(std::span<const double> x, std::size_t component = 0) const;
    /// Row i is Du^{(i)}.
    Eigen::MatrixXd jacobian(std::span<const double> x) const;

    const std::vector<double>& value_grid(std::size_t component = 0) const { return values_[component]; }
    const std::vector<double>& gradient_grid(std::size_t component, std::size_t axis) const {
        return gradients_[component][axis];
    }
    double sup_value() const;
    double sup_gradient() const;

private:
    double lambda_;
    TensorGrid grid_;
    std::vector<std::vector<double>> values_;
    std::vector<std::vector<std::vector<double>>> gradients_;
    std::vector<SplineInterpolant> value_splines_;
    std::vector<std::vector<SplineInterpolant>> gradient_splines_;
    SolverProvenance prov_;
};

/// B_n(x) = E B(e^{A/n} x + Q_{1/n}^{1/2} Z), Monte Carlo over quad.mc_samples fixed draws.
DriftField mollify_drift(const SpectralOperator& op, const DriftField& B, std::size_t n,
                         const QuadratureSpec& quad);

/// Spline tabulation of B on a grid, for cheap evaluation along many paths. Values are
/// radially clipped to the sup bound of B.
DriftField tabulate_drift(const DriftField& B, const TensorGrid& grid);

/// 4 ||B||_0^2 C_{1,0}^2.
double lambda0(const SpectralOperator& op, const DriftField& B);

/// <B(x), D (lambda - L)^{-1} phi(x)> by Monte Carlo.
Estimate apply_t_lambda(const SpectralOperator& op, const DriftField& B, double lambda,
                        const ScalarField& phi, std::span<const double> x, const QuadratureSpec& quad);

/// Grid chosen from quad (grid_points, grid_half_width).
TensorGrid solver_grid(const SpectralOperator& op, const QuadratureSpec& quad);

/// u = (lambda - L)^{-1} psi with psi = f + T_lambda psi, iterated from psi = f.
KolmogorovSolution solve_scalar(const SpectralOperator& op, const DriftField& B, const ScalarField& f,
                                double lambda, const QuadratureSpec& quad, std::size_t max_iter = 200,
                                double tol = 1e-10);

/// Fixed point of u = int_0^inf e^{-lambda t} R_t(<B, Du> + B) dt, one component per mode. The
/// iteration runs on Du (kernel gradient of the resolvent), where the map contracts in sup norm.
KolmogorovSolution solve_vector(const SpectralOperator& op, const DriftField& B, double lambda,
                                const QuadratureSpec& quad, std::size_t max_iter = 200,
                                double tol = 1e-10);

/// Central differences of the gradient contract, h = max(1e-4, 1e-3 (1 + |x|)), symmetrized.
Eigen::MatrixXd hessian(const KolmogorovSolution& sol, std::span<const double> x,
                        std::size_t component = 0);

struct RegularityDiagnostics {
    double delta = 0.4;
    double q = 5.0;
    double gamma = 2.5;
    double theta = 0.5;
    double horizon = 1.0;
    double R = std::numeric_limits<double>::infinity();
    double S_value = 0.0;

    void validate(const SpectralOperator& op) const;
};

/// Integrand (sum_n lambda_n^{-(1-delta)} ||D^2 u^{(n)}(z)||_HS^2)^gamma at one point.
double regularity_integrand(const SpectralOperator& op, const KolmogorovSolution& sol,
                            std::span<const double> z, const RegularityDiagnostics& diag,
                            std::size_t modes = std::numeric_limits<std::size_t>::max());

/// horizon * average of the integrand over the supplied points.
double regularity_functional(const SpectralOperator& op, const KolmogorovSolution& sol,
                             const std::vector<State>& points, const RegularityDiagnostics& diag);

struct StoppingReport {
    std::vector<double> running;  // S at each node
    double S_T = 0.0;
    double tau_R = std::numeric_limits<double>::infinity();
};

/// Running S along two trajectories X, Y on a uniform grid of step dt (rows are nodes), with
/// Gauss-Legendre in r on Z^r = r X + (1 - r) Y, and the first node where S reaches R.
StoppingReport regularity_stopping(const SpectralOperator& op, const KolmogorovSolution& sol,
                                   const std::vector<State>& X, const std::vector<State>& Y, double dt,
                                   const RegularityDiagnostics& diag, std::size_t r_nodes = 8);

/// Probe report `x_1..x_m, u, |Du|, hs_norm_D2u`.
void write_probe_csv(std::ostream& out, const KolmogorovSolution& sol, const std::vector<State>& probes,
                     std::size_t component = 0);

}  // namespace spdelab
