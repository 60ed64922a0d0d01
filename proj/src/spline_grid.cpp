#include "spdelab/spline_grid.hpp"

#include <algorithm>
#include <cmath>

#include "spdelab/errors.hpp"
#include "spdelab/quadrature.hpp"

namespace spdelab {

TensorGrid::TensorGrid(std::vector<AxisGrid> axes) : axes_(std::move(axes)) {
    require(!axes_.empty(), ErrorKind::InvalidArgument, "grid needs at least one axis");
    strides_.assign(axes_.size(), 1);
    size_ = 1;
    for (std::size_t k = axes_.size(); k-- > 0;) {
        require(axes_[k].n >= 4 && axes_[k].hi > axes_[k].lo, ErrorKind::InvalidArgument,
                "each grid axis needs n >= 4 and hi > lo");
        strides_[k] = size_;
        size_ *= axes_[k].n;
    }
}

TensorGrid TensorGrid::for_operator(const SpectralOperator& op, std::size_t points_per_axis,
                                    double half_width_sigmas) {
    std::vector<AxisGrid> axes;
    for (double lam : op.eigenvalues()) {
        const double L = half_width_sigmas / std::sqrt(2.0 * lam);
        axes.push_back({-L, L, points_per_axis});
    }
    return TensorGrid(std::move(axes));
}

State TensorGrid::point(std::size_t flat) const {
    State x(dim());
    for (std::size_t k = 0; k < dim(); ++k) x[k] = axes_[k].node((flat / strides_[k]) % axes_[k].n);
    return x;
}

bool TensorGrid::contains(std::span<const double> x) const {
    for (std::size_t k = 0; k < dim(); ++k)
        if (x[k] < axes_[k].lo || x[k] > axes_[k].hi) return false;
    return true;
}

namespace {

// Natural cubic spline coefficients c_{-1..n} (stored at 0..n+1) for data f_0..f_{n-1}.
void fit_line(const double* f, std::size_t n, std::size_t fstride, double* c, std::size_t cstride) {
    std::vector<double> cc(n + 2), diag(n), rhs(n);
    cc[1] = f[0];
    cc[n] = f[(n - 1) * fstride];
    // interior j = 1..n-2: c_{j-1} + 4 c_j + c_{j+1} = 6 f_j
    const std::size_t mcount = n - 2;
    std::vector<double> d(mcount), r(mcount);
    for (std::size_t j = 0; j < mcount; ++j) {
        d[j] = 4.0;
        r[j] = 6.0 * f[(j + 1) * fstride];
    }
    r[0] -= cc[1];
    r[mcount - 1] -= cc[n];
    for (std::size_t j = 1; j < mcount; ++j) {
        const double w = 1.0 / d[j - 1];
        d[j] -= w;
        r[j] -= w * r[j - 1];
    }
    cc[mcount + 1] = r[mcount - 1] / d[mcount - 1];
    for (std::size_t j = mcount - 1; j-- > 0;) cc[j + 2] = (r[j] - cc[j + 3]) / d[j];
    cc[0] = 2.0 * cc[1] - cc[2];
    cc[n + 1] = 2.0 * cc[n] - cc[n - 1];
    for (std::size_t j = 0; j < n + 2; ++j) c[j * cstride] = cc[j];
}

}  // namespace

BasisWeights spline_basis(const AxisGrid& axis, double x) {
    BasisWeights b;
    const double h = axis.step();
    bool clamped = false;
    if (x <= axis.lo) {
        x = axis.lo;
        clamped = true;
    } else if (x >= axis.hi) {
        x = axis.hi;
        clamped = true;
    }
    const double u = (x - axis.lo) / h;
    std::size_t cell = static_cast<std::size_t>(std::floor(u));
    if (cell > axis.n - 2) cell = axis.n - 2;
    const double t = u - static_cast<double>(cell);
    const double s = 1.0 - t;
    b.first = cell;  // coefficient index of c_{cell-1}
    b.w[0] = s * s * s / 6.0;
    b.w[1] = (3.0 * t * t * t - 6.0 * t * t + 4.0) / 6.0;
    b.w[2] = (-3.0 * t * t * t + 3.0 * t * t + 3.0 * t + 1.0) / 6.0;
    b.w[3] = t * t * t / 6.0;
    if (!clamped) {
        b.dw[0] = -0.5 * s * s / h;
        b.dw[1] = (1.5 * t * t - 2.0 * t) / h;
        b.dw[2] = (-1.5 * t * t + t + 0.5) / h;
        b.dw[3] = 0.5 * t * t / h;
    }
    return b;
}

std::vector<double> spline_coefficients(const TensorGrid& grid, std::span<const double> values) {
    require(values.size() == grid.size(), ErrorKind::DimensionMismatch, "spline data size differs from grid");
    const std::size_t m = grid.dim();
    // Fit axis by axis; the working array grows from n_k to n_k + 2 along each fitted axis.
    std::vector<std::size_t> shape(m);
    for (std::size_t k = 0; k < m; ++k) shape[k] = grid.axis(k).n;
    std::vector<double> cur(values.begin(), values.end());
    for (std::size_t k = 0; k < m; ++k) {
        std::size_t outer = 1, inner = 1;
        for (std::size_t j = 0; j < k; ++j) outer *= shape[j];
        for (std::size_t j = k + 1; j < m; ++j) inner *= shape[j];
        const std::size_t n = shape[k];
        std::vector<double> next(outer * (n + 2) * inner);
        for (std::size_t o = 0; o < outer; ++o)
            for (std::size_t in = 0; in < inner; ++in)
                fit_line(&cur[o * n * inner + in], n, inner, &next[o * (n + 2) * inner + in], inner);
        shape[k] = n + 2;
        cur.swap(next);
    }
    return cur;
}

SplineInterpolant::SplineInterpolant(const TensorGrid& grid, std::span<const double> values)
    : grid_(grid), coef_(spline_coefficients(grid, values)) {
    const std::size_t m = grid.dim();
    cstrides_.assign(m, 1);
    for (std::size_t k = m; k-- > 1;) cstrides_[k - 1] = cstrides_[k] * (grid.axis(k).n + 2);
}

double SplineInterpolant::eval(std::span<const double> x, int deriv_axis) const {
    const std::size_t m = grid_.dim();
    require(x.size() == m, ErrorKind::DimensionMismatch, "spline evaluated at wrong dimension");
    std::vector<BasisWeights> b(m);
    for (std::size_t k = 0; k < m; ++k) b[k] = spline_basis(grid_.axis(k), x[k]);
    std::size_t combos = 1;
    for (std::size_t k = 0; k < m; ++k) combos *= 4;
    double acc = 0.0;
    for (std::size_t c = 0; c < combos; ++c) {
        std::size_t rem = c, idx = 0;
        double w = 1.0;
        for (std::size_t k = m; k-- > 0;) {
            const std::size_t r = rem % 4;
            rem /= 4;
            idx += (b[k].first + r) * cstrides_[k];
            w *= (static_cast<int>(k) == deriv_axis) ? b[k].dw[r] : b[k].w[r];
        }
        acc += w * coef_[idx];
    }
    return acc;
}

double SplineInterpolant::value(std::span<const double> x) const { return eval(x, -1); }

double SplineInterpolant::partial(std::span<const double> x, std::size_t axis) const {
    return eval(x, static_cast<int>(axis));
}

State SplineInterpolant::gradient(std::span<const double> x) const {
    State g(grid_.dim());
    for (std::size_t k = 0; k < g.size(); ++k) g[k] = partial(x, k);
    return g;
}

template <class Matrix>
std::vector<double> mode_product(std::vector<std::size_t>& shape, std::size_t k, const Matrix& mat,
                                 const std::vector<double>& data) {
    const std::size_t n = shape[k];
    const std::size_t rows = static_cast<std::size_t>(mat.rows());
    std::size_t outer = 1, inner = 1;
    for (std::size_t j = 0; j < k; ++j) outer *= shape[j];
    for (std::size_t j = k + 1; j < shape.size(); ++j) inner *= shape[j];
    std::vector<double> out(outer * rows * inner);
    using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    for (std::size_t o = 0; o < outer; ++o) {
        Eigen::Map<const RowMat> X(&data[o * n * inner], n, inner);
        Eigen::Map<RowMat> Y(&out[o * rows * inner], rows, inner);
        Y.noalias() = mat * X;
    }
    shape[k] = rows;
    return out;
}

OuGridOperator::OuGridOperator(const SpectralOperator& op, const TensorGrid& grid, double lambda,
                               std::size_t time_nodes, std::size_t hermite_nodes)
    : grid_(grid), lambda_(lambda) {
    require(grid.dim() == op.dim(), ErrorKind::DimensionMismatch, "grid and operator dimensions differ");
    const auto rule = laplace_rule(lambda, time_nodes);
    const auto gh = gauss_hermite_normal(hermite_nodes);
    weights_ = rule.weights;
    const std::size_t m = op.dim();
    value_.resize(rule.size());
    grad_.resize(rule.size());
    using Triplet = Eigen::Triplet<double>;
    for (std::size_t q = 0; q < rule.size(); ++q) {
        const double t = rule.nodes[q];
        const auto lam_t = lambda_t_diag(op, t);
        for (std::size_t k = 0; k < m; ++k) {
            const auto& ax = grid.axis(k);
            const double lk = op.eigenvalue(k);
            const double decay = std::exp(-lk * t);
            const double sd = std::sqrt(one_minus_exp2(t, lk) / (2.0 * lk));
            std::vector<Triplet> ev, fv;
            for (std::size_t i = 0; i < ax.n; ++i) {
                const double a = decay * ax.node(i);
                const auto b0 = spline_basis(ax, a);
                for (std::size_t g = 0; g < gh.size(); ++g) {
                    const auto b = spline_basis(ax, a + sd * gh.nodes[g]);
                    const double wg = gh.weights[g];
                    const double wz = wg * gh.nodes[g] * lam_t[k];
                    for (int r = 0; r < 4; ++r) {
                        const auto row = static_cast<int>(i);
                        ev.emplace_back(row, static_cast<int>(b.first + r), wg * b.w[r]);
                        fv.emplace_back(row, static_cast<int>(b.first + r), wz * b.w[r]);
                        fv.emplace_back(row, static_cast<int>(b0.first + r), -wz * b0.w[r]);
                    }
                }
            }
            AxisKernel V, G;
            V.sparse.resize(static_cast<int>(ax.n), static_cast<int>(ax.n + 2));
            G.sparse.resize(static_cast<int>(ax.n), static_cast<int>(ax.n + 2));
            V.sparse.setFromTriplets(ev.begin(), ev.end());
            G.sparse.setFromTriplets(fv.begin(), fv.end());
            V.is_dense = G.is_dense = m > 1;
            if (V.is_dense) {
                V.dense = Eigen::MatrixXd(V.sparse);
                G.dense = Eigen::MatrixXd(G.sparse);
                V.sparse = {};
                G.sparse = {};
            }
            value_[q].push_back(std::move(V));
            grad_[q].push_back(std::move(G));
        }
    }
}

std::vector<double> OuGridOperator::apply(const std::vector<double>& coef, std::size_t q, int grad_axis) const {
    const std::size_t m = grid_.dim();
    std::vector<std::size_t> shape(m);
    for (std::size_t k = 0; k < m; ++k) shape[k] = grid_.axis(k).n + 2;
    std::vector<double> cur = coef;
    for (std::size_t k = 0; k < m; ++k) {
        const auto& K = static_cast<int>(k) == grad_axis ? grad_[q][k] : value_[q][k];
        cur = K.is_dense ? mode_product(shape, k, K.dense, cur) : mode_product(shape, k, K.sparse, cur);
    }
    return cur;
}

std::vector<double> OuGridOperator::resolvent(const std::vector<double>& psi) const {
    const auto coef = spline_coefficients(grid_, psi);
    std::vector<double> out(psi.size(), 0.0);
    for (std::size_t q = 0; q < weights_.size(); ++q) {
        const auto cur = apply(coef, q, -1);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += weights_[q] * cur[i];
    }
    return out;
}

std::vector<std::vector<double>> OuGridOperator::resolvent_gradient(const std::vector<double>& psi) const {
    const auto coef = spline_coefficients(grid_, psi);
    const std::size_t m = grid_.dim();
    std::vector<std::vector<double>> out(m, std::vector<double>(psi.size(), 0.0));
    for (std::size_t q = 0; q < weights_.size(); ++q)
        for (std::size_t d = 0; d < m; ++d) {
            const auto cur = apply(coef, q, static_cast<int>(d));
            for (std::size_t i = 0; i < psi.size(); ++i) out[d][i] += weights_[q] * cur[i];
        }
    return out;
}

}  // namespace spdelab
