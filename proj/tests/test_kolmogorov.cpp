#include <doctest.h>

#include <cmath>
#include <numbers>

#include "spdelab/errors.hpp"
#include "spdelab/dirichlet.hpp"
#include "spdelab/gaussian.hpp"
#include "spdelab/kolmogorov.hpp"
#include "spdelab/spline_grid.hpp"

using namespace spdelab;

namespace {

DriftField smooth2() {
    return DriftField(2, 0.6, Smoothness::Smooth,
                      std::function<State(std::span<const double>)>([](std::span<const double> x) {
                          return State{0.4 * std::sin(2.0 * x[0]) + 0.2 * std::cos(x[1]), 0.3 * std::sin(x[0] + x[1])};
                      }),
                      "smooth2");
}

}  // namespace

TEST_CASE("spline interpolant reproduces affine functions") {
    const TensorGrid grid({AxisGrid{-2.0, 2.0, 9}, AxisGrid{-1.0, 1.0, 7}});
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto p = grid.point(i);
        v[i] = 1.0 + 2.0 * p[0] - 0.5 * p[1];
    }
    const SplineInterpolant s(grid, v);
    const State x{0.37, -0.61};
    CHECK(s.value(x) == doctest::Approx(1.0 + 0.74 + 0.305).epsilon(1e-12));
    CHECK(s.gradient(x)[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(s.partial(x, 1) == doctest::Approx(-0.5).epsilon(1e-12));
    // clamped outside the box
    CHECK(s.partial(State{5.0, 0.0}, 0) == 0.0);
}

TEST_CASE("scalar solve without drift matches the quadratic closed form") {
    // lambda u - (1/2) u'' + x u' = x^2 with lambda = 1 has u = (x^2 + 1)/3.
    const SpectralOperator op({1.0}, 0.5);
    ScalarField f;
    f.eval = [](std::span<const double> x) { return x[0] * x[0]; };
    f.sup_norm_bound = 1.0;
    const auto sol = solve_scalar(op, DriftField::zero(1), f, 1.0, QuadratureSpec{});
    for (double x : {0.0, 0.8, -1.5, 2.0}) {
        const State p{x};
        CHECK(sol.value(p) == doctest::Approx((x * x + 1.0) / 3.0).epsilon(1e-5));
        CHECK(sol.gradient(p)[0] == doctest::Approx(2.0 * x / 3.0).epsilon(1e-4));
    }
    CHECK(hessian(sol, State{0.5})(0, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-3));
}

TEST_CASE("solver thresholds") {
    const SpectralOperator op({1.0, 4.0}, 0.5);
    const auto B = smooth2();
    const double l0 = lambda0(op, B);
    CHECK(l0 == doctest::Approx(4.0 * 0.36 * std::numbers::pi));
    CHECK_THROWS_AS(solve_scalar(op, B, B.component_field(0), 0.9 * l0, QuadratureSpec{}), Error);
    CHECK_THROWS_AS(solve_vector(op, B, 0.9 * l0, QuadratureSpec{}), Error);
}

TEST_CASE("vector solution agrees with componentwise scalar solves") {
    const SpectralOperator op({1.0, 4.0}, 0.5);
    const auto B = smooth2();
    QuadratureSpec quad;
    const double lambda = 5.0;
    const auto vec = solve_vector(op, B, lambda, quad);
    const auto s0 = solve_scalar(op, B, B.component_field(0), lambda, quad);
    const auto s1 = solve_scalar(op, B, B.component_field(1), lambda, quad);
    for (const auto& x : sample(GaussianMeasure::invariant(op), 16, 3)) {
        CHECK(vec.value(x, 0) == doctest::Approx(s0.value(x)).epsilon(1e-6));
        CHECK(vec.value(x, 1) == doctest::Approx(s1.value(x)).epsilon(1e-6));
    }
    const auto zero = solve_vector(op, DriftField::zero(2), lambda, quad);
    CHECK(zero.sup_value() == 0.0);
    CHECK(zero.sup_gradient() == 0.0);
}

TEST_CASE("T_lambda Monte Carlo obeys the contraction bound") {
    const SpectralOperator op({1.0, 4.0}, 0.5);
    const auto B = DriftField::constant(State{1.0, 0.0});
    ScalarField phi;
    phi.eval = [](std::span<const double> y) { return y[0] > 0.0 ? 1.0 : -1.0; };
    phi.sup_norm_bound = 1.0;
    const double lambda = lambda0(op, B);
    const auto est = apply_t_lambda(op, B, lambda, phi, State{0.0, 0.0}, QuadratureSpec{});
    CHECK(std::abs(est.value) <= 0.5 + 5.0 * est.std_error);
    CHECK(est.value > 0.2);
}

TEST_CASE("mollification and tabulation") {
    const SpectralOperator op({1.0, 4.0}, 0.5);
    QuadratureSpec quad;
    quad.mc_samples = 256;
    const auto c = mollify_drift(op, DriftField::constant(State{0.3, -0.2}), 2, quad);
    const auto v = c(State{1.0, 1.0});
    CHECK(v[0] == doctest::Approx(0.3));
    CHECK(v[1] == doctest::Approx(-0.2));
    const auto tab = tabulate_drift(smooth2(), solver_grid(op, quad));
    const State x{0.2, 0.1};
    CHECK(tab(x)[0] == doctest::Approx(smooth2()(x)[0]).epsilon(1e-3));
    CHECK(norm(tab(State{3.0, -2.0})) <= tab.sup_norm_bound() + 1e-12);
}

TEST_CASE("regularity diagnostics validation") {
    const auto op = SpectralOperator::power_law(2, 1.0, 2.0, 0.4);
    RegularityDiagnostics d;
    CHECK_NOTHROW(d.validate(op));
    d.q = 3.0;
    d.gamma = 1.5;
    CHECK_THROWS_AS(d.validate(op), Error);
    RegularityDiagnostics wrong_gamma;
    wrong_gamma.gamma = 2.0;
    CHECK_THROWS_AS(wrong_gamma.validate(op), Error);
}

TEST_CASE("rational detection and Dirichlet drifts") {
    const RationalDetector det;
    CHECK(det.is_rational(0.3));
    CHECK(det.is_rational(-7.0 / 13.0));
    CHECK_FALSE(det.is_rational(std::sqrt(2.0)));
    CHECK_FALSE(det.is_rational(std::numbers::pi));
    CHECK(b_dir(0.5) == 0.0);
    CHECK(b_dir(std::numbers::e) == 1.0);

    DirichletParams p;
    p.dim = 2;
    p.weights = {0.5};
    const auto B = dirichlet_drift(DirichletKind::Composite44, p);
    const State irr{std::sqrt(2.0) - 1.0, std::numbers::pi / 10.0};
    CHECK(B(irr)[0] == doctest::Approx(irr[0] + 1.0));
    CHECK(B(irr)[1] == doctest::Approx(0.5));
    CHECK(B(State{0.25, 0.1})[0] == doctest::Approx(0.25));
    CHECK(B(State{0.25, 0.1}, BranchMode::Generic)[0] == doctest::Approx(1.25));
    CHECK(B(irr, BranchMode::ZeroBranch)[1] == 0.0);

    p.square_summable = false;
    CHECK_THROWS_AS(dirichlet_drift(DirichletKind::BDirProduct, p), Error);
    p.square_summable = true;
    p.weights = {-1.0};
    CHECK_THROWS_AS(dirichlet_drift(DirichletKind::BDirProduct, p), Error);
}
