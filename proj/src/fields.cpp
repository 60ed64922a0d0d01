#include "spdelab/fields.hpp"

#include <cmath>

#include "spdelab/errors.hpp"

namespace spdelab {

ScalarField ScalarField::constant(double c) {
    ScalarField f;
    f.eval = [c](std::span<const double>) { return c; };
    f.sup_norm_bound = std::abs(c);
    f.smoothness = Smoothness::Smooth;
    f.gradient = [](std::span<const double> x) { return State(x.size(), 0.0); };
    return f;
}

ScalarField ScalarField::coordinate(std::size_t k) {
    ScalarField f;
    f.eval = [k](std::span<const double> x) { return x[k]; };
    f.smoothness = Smoothness::Smooth;
    f.gradient = [k](std::span<const double> x) {
        State g(x.size(), 0.0);
        g[k] = 1.0;
        return g;
    };
    return f;
}

DriftField::DriftField(std::size_t dim, double sup_norm_bound, Smoothness smoothness, Rule rule,
                       std::string name)
    : dim_(dim), bound_(sup_norm_bound), smoothness_(smoothness), rule_(std::move(rule)),
      name_(std::move(name)) {
    require(dim > 0, ErrorKind::InvalidArgument, "drift dimension must be positive");
    require(sup_norm_bound >= 0.0 && std::isfinite(sup_norm_bound), ErrorKind::InvalidArgument,
            "drift sup-norm bound must be finite and non-negative");
}

DriftField::DriftField(std::size_t dim, double sup_norm_bound, Smoothness smoothness,
                       std::function<State(std::span<const double>)> rule, std::string name)
    : DriftField(dim, sup_norm_bound, smoothness,
                 Rule([r = std::move(rule)](std::span<const double> x, BranchMode) { return r(x); }),
                 std::move(name)) {}

DriftField DriftField::zero(std::size_t dim) {
    DriftField b(dim, 0.0, Smoothness::Smooth,
                 std::function<State(std::span<const double>)>(
                     [dim](std::span<const double>) { return State(dim, 0.0); }),
                 "zero");
    b.is_zero_ = true;
    return b;
}

DriftField DriftField::constant(State value) {
    const std::size_t dim = value.size();
    const double bound = norm(value);
    return DriftField(dim, bound, Smoothness::Smooth,
                      std::function<State(std::span<const double>)>(
                          [value](std::span<const double>) { return value; }),
                      "constant");
}

State DriftField::operator()(std::span<const double> x, BranchMode mode) const {
    require(x.size() == dim_, ErrorKind::DimensionMismatch, "drift evaluated at wrong dimension");
    return rule_(x, mode);
}

ScalarField DriftField::component_field(std::size_t i) const {
    require(i < dim_, ErrorKind::DimensionMismatch, "drift component out of range");
    ScalarField f;
    DriftField self = *this;
    f.eval = [self, i](std::span<const double> x) { return self(x)[i]; };
    f.sup_norm_bound = bound_;
    f.smoothness = smoothness_;
    return f;
}

double norm(std::span<const double> v) {
    double s = 0.0;
    for (double a : v) s += a * a;
    return std::sqrt(s);
}

}  // namespace spdelab
