#include "spdelab/dirichlet.hpp"

#include <algorithm>
#include <cmath>

#include "spdelab/errors.hpp"

namespace spdelab {

bool RationalDetector::is_rational(double x) const {
    if (!std::isfinite(x)) return false;
    const double a0 = std::floor(x);
    double frac = x - a0;
    if (frac <= tolerance || 1.0 - frac <= tolerance) return true;
    // Convergents h/k of frac; Legendre's theorem makes these the only candidates at this tolerance.
    double h_prev = 1.0, h = 0.0, k_prev = 0.0, k = 1.0;
    double r = frac;
    for (int iter = 0; iter < 64; ++iter) {
        const double inv = 1.0 / r;
        const double a = std::floor(inv);
        const double h_next = a * h + h_prev;
        const double k_next = a * k + k_prev;
        if (k_next > static_cast<double>(max_denominator)) return false;
        h_prev = h;
        h = h_next;
        k_prev = k;
        k = k_next;
        if (std::abs(frac - h / k) <= tolerance) return true;
        r = inv - a;
        if (r <= 0.0) return true;
    }
    return false;
}

double b_dir(double x, const RationalDetector& det) { return det.is_rational(x) ? 0.0 : 1.0; }

namespace {

double dirichlet_part(double x, BranchMode mode, const RationalDetector& det) {
    switch (mode) {
        case BranchMode::Generic: return 1.0;
        case BranchMode::ZeroBranch: return 0.0;
        case BranchMode::Pointwise: break;
    }
    return b_dir(x, det);
}

std::vector<double> padded(const std::vector<double>& w, std::size_t n) {
    std::vector<double> out(n, 0.0);
    std::copy_n(w.begin(), std::min(n, w.size()), out.begin());
    return out;
}

}  // namespace

DriftField dirichlet_drift(DirichletKind kind, const DirichletParams& params) {
    const auto det = params.detector;
    const std::size_t m = params.dim;
    require(m >= 1, ErrorKind::InvalidArgument, "dimension must be >= 1");
    if (kind == DirichletKind::BDir1d) {
        require(m == 1, ErrorKind::DimensionMismatch, "b_dir_1d is one-dimensional");
        DriftField::Rule rule = [det](std::span<const double> x, BranchMode mode) {
            return State{dirichlet_part(x[0], mode, det)};
        };
        return DriftField(1, 1.0, Smoothness::Measurable, rule, "b_dir_1d");
    }
    require(params.square_summable, ErrorKind::InvalidWeights, "weights not tagged square-summable");
    for (double a : params.weights)
        require(std::isfinite(a) && a >= 0.0, ErrorKind::InvalidWeights, "weights must be finite and >= 0");

    if (kind == DirichletKind::BDirProduct) {
        const auto alpha = padded(params.weights, m);
        double s = 0.0;
        for (double a : alpha) s += a * a;
        DriftField::Rule rule = [det, alpha, m](std::span<const double> x, BranchMode mode) {
            State out(m);
            for (std::size_t n = 0; n < m; ++n) out[n] = alpha[n] * dirichlet_part(x[n], mode, det);
            return out;
        };
        return DriftField(m, std::sqrt(s), Smoothness::Measurable, rule, "B_dir_product");
    }

    require(params.lambda1 > 0.0, ErrorKind::InvalidArgument, "lambda1 must be positive");
    const double l1 = params.lambda1;
    auto tail = padded(params.weights, m > 0 ? m - 1 : 0);
    double s = 4.0;
    for (double a : tail) s += a * a;
    DriftField::Rule rule = [det, tail, m, l1](std::span<const double> x, BranchMode mode) {
        State out(m);
        out[0] = std::clamp(l1 * x[0], -1.0, 1.0) + dirichlet_part(x[0], mode, det);
        for (std::size_t n = 1; n < m; ++n) out[n] = tail[n - 1] * dirichlet_part(x[n], mode, det);
        return out;
    };
    return DriftField(m, std::sqrt(s), Smoothness::Measurable, rule, "composite_4_4");
}

}  // namespace spdelab
