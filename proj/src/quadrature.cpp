#include "spdelab/quadrature.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "spdelab/errors.hpp"

namespace spdelab {

QuadratureRule gauss_hermite_normal(std::size_t n) {
    require(n >= 1, ErrorKind::InvalidArgument, "Gauss-Hermite rule needs n >= 1");
    // Golub-Welsch on the Jacobi matrix of the probabilists' Hermite polynomials.
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t k = 1; k < n; ++k) {
        jacobi(k - 1, k) = jacobi(k, k - 1) = std::sqrt(static_cast<double>(k));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        rule.nodes[i] = eig.eigenvalues()(i);
        const double v = eig.eigenvectors()(0, i);
        rule.weights[i] = v * v;
    }
    // Enforce exact symmetry; the eigen-solver leaves ~1e-15 asymmetry.
    for (std::size_t i = 0; i < n / 2; ++i) {
        const std::size_t j = n - 1 - i;
        const double z = 0.5 * (rule.nodes[j] - rule.nodes[i]);
        const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
        rule.nodes[i] = -z;
        rule.nodes[j] = z;
        rule.weights[i] = rule.weights[j] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    double total = 0.0;
    for (double w : rule.weights) total += w;
    for (double& w : rule.weights) w /= total;
    return rule;
}

QuadratureRule gauss_legendre(std::size_t n) {
    require(n >= 1, ErrorKind::InvalidArgument, "Gauss-Legendre rule needs n >= 1");
    QuadratureRule rule;
    rule.nodes.assign(n, 0.0);
    rule.weights.assign(n, 0.0);
    if (n == 1) {
        rule.weights[0] = 2.0;
        return rule;
    }
    const double dn = static_cast<double>(n);
    // Legendre P_n and its derivative by the three-term recurrence.
    auto legendre = [n, dn](double x, double& dp) {
        double p0 = 1.0, p1 = x;
        for (std::size_t k = 2; k <= n; ++k) {
            const double dk = static_cast<double>(k);
            const double p2 = ((2.0 * dk - 1.0) * x * p1 - (dk - 1.0) * p0) / dk;
            p0 = p1;
            p1 = p2;
        }
        dp = dn * (x * p1 - p0) / (x * x - 1.0);
        return p1;
    };
    for (std::size_t i = 0; i < n / 2; ++i) {
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (dn + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            const double dx = legendre(x, dp) / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        legendre(x, dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = rule.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    if (n % 2 == 1) {
        double dp = 0.0;
        legendre(0.0, dp);
        rule.weights[n / 2] = 2.0 / (dp * dp);
    }
    return rule;
}

QuadratureRule laplace_rule(double lambda, std::size_t time_nodes) {
    require(lambda > 0.0, ErrorKind::InvalidArgument, "Laplace rule needs lambda > 0");
    require(time_nodes >= 8, ErrorKind::InvalidArgument, "Laplace rule needs >= 8 time nodes");
    constexpr std::size_t kPerPanel = 8;
    const std::size_t panels = (time_nodes + kPerPanel - 1) / kPerPanel;
    const double s_max = std::sqrt(40.0 / lambda);
    const QuadratureRule gl = gauss_legendre(kPerPanel);

    std::vector<double> edges(panels + 1);
    for (std::size_t p = 0; p <= panels; ++p) edges[p] = s_max * static_cast<double>(p) / static_cast<double>(panels);
    QuadratureRule rule;
    for (std::size_t p = 0; p < panels; ++p) {
        const double a = edges[p], b = edges[p + 1];
        const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
        for (std::size_t i = 0; i < kPerPanel; ++i) {
            const double s = mid + half * gl.nodes[i];
            const double t = s * s;
            rule.nodes.push_back(t);
            rule.weights.push_back(half * gl.weights[i] * 2.0 * s * std::exp(-lambda * t));
        }
    }
    return rule;
}

namespace {

double simpson_step(const std::function<double(double)>& g, double a, double b, double fa,
                    double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = g(lm), frm = g(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double diff = left + right - whole;
    if (depth <= 0 || std::abs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
    return simpson_step(g, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_step(g, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        bool log_spaced, int max_depth) {
    std::function<double(double)> g = f;
    if (log_spaced) {
        require(a > 0.0 && b > a, ErrorKind::InvalidArgument, "log-spaced Simpson needs 0 < a < b");
        g = [&f](double u) {
            const double t = std::exp(u);
            return f(t) * t;
        };
        a = std::log(a);
        b = std::log(b);
    }
    const double fa = g(a), fb = g(b), fm = g(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_step(g, a, b, fa, fm, fb, whole, tol, max_depth);
}

}  // namespace spdelab
