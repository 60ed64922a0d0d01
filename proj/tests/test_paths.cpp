#include <doctest.h>

#include <cmath>

#include "spdelab/errors.hpp"
#include "spdelab/dirichlet.hpp"
#include "spdelab/girsanov.hpp"
#include "spdelab/path_engine.hpp"
#include "spdelab/stats.hpp"
#include "spdelab/zvonkin.hpp"

using namespace spdelab;

TEST_CASE("zero drift reproduces the exact OU recursion bit for bit") {
    const LinearDrift lin(std::vector<double>{1.0, 4.0, 9.0});
    const TimeGrid grid(0.5, 32);
    const State x{0.1, -0.2, 0.3};
    const auto ou = simulate_ou(lin, x, grid, 42, 7);
    const auto noise = NoisePanel::generate(lin, grid, 42, 7);
    const auto mild = simulate_mild(lin, DriftField::zero(3), x, grid, noise);
    CHECK(ou.data() == mild.data());
    CHECK(mild_residual(lin, DriftField::zero(3), mild, noise).sup < 1e-14);
}

TEST_CASE("noise panel joint law and coarsening") {
    const LinearDrift lin(std::vector<double>{3.0});
    const TimeGrid grid(1.0, 8);
    const auto c = step_coefficients(lin, grid.dt());
    std::vector<double> dw, eta, prod;
    for (std::uint32_t p = 0; p < 20000; ++p) {
        const auto panel = NoisePanel::generate(lin, grid, 9, p);
        dw.push_back(panel.dW(3, 0));
        eta.push_back(panel.eta(3, 0));
        prod.push_back(panel.dW(3, 0) * panel.eta(3, 0));
    }
    CHECK(mean_estimate(dw).variance == doctest::Approx(grid.dt()).epsilon(0.03));
    CHECK(mean_estimate(eta).variance == doctest::Approx(c.var[0]).epsilon(0.03));
    CHECK(mean_estimate(prod).mean == doctest::Approx(c.conv[0]).epsilon(0.03));

    const auto fine = NoisePanel::generate(lin, grid, 9, 0);
    const auto coarse = fine.coarsen(lin, 4);
    CHECK(coarse.steps() == 2);
    CHECK(coarse.dW(1, 0) == doctest::Approx(fine.dW(4, 0) + fine.dW(5, 0) + fine.dW(6, 0) + fine.dW(7, 0)));
    const double d = std::exp(-3.0 * grid.dt());
    CHECK(coarse.eta(0, 0) ==
          doctest::Approx(d * d * d * fine.eta(0, 0) + d * d * fine.eta(1, 0) + d * fine.eta(2, 0) + fine.eta(3, 0)));
    CHECK_THROWS_AS(fine.coarsen(lin, 3), Error);
}

TEST_CASE("conditional noise variance series and closed form agree") {
    const auto direct = [](double x) {
        return -std::expm1(-2.0 * x) / (2.0 * x) - std::pow(-std::expm1(-x) / x, 2);
    };
    CHECK(conditional_noise_variance(0.5) == doctest::Approx(direct(0.5)).epsilon(1e-12));
    CHECK(conditional_noise_variance(0.02) == doctest::Approx(direct(0.02)).epsilon(1e-8));
    CHECK(conditional_noise_variance(1e-4) == doctest::Approx(1e-8 / 12.0).epsilon(1e-3));
    CHECK(conditional_noise_variance(0.0) == 0.0);
}

TEST_CASE("deterministic Dirichlet example has several exact solutions") {
    DirichletParams p;
    const auto B = dirichlet_drift(DirichletKind::BDir1d, p);
    const auto lin = LinearDrift::zero(1);
    CHECK_FALSE(lin.regularizing());
    const TimeGrid grid(1.0, 64);
    const auto noise = NoisePanel::zero(1, grid);
    const State x{0.3};
    const auto fwd = simulate_variant(lin, B, x, grid, noise, Variant::parse("forward"));
    const auto seek = simulate_variant(lin, B, x, grid, noise, Variant::parse("branch_seeking"));
    const auto cb = simulate_variant(lin, B, x, grid, noise, Variant::parse("constant_branch", 0.5));
    CHECK(fwd.trajectory.at(64, 0) == doctest::Approx(1.3));
    CHECK(seek.trajectory.at(64, 0) == doctest::Approx(0.3));
    CHECK(cb.trajectory.at(64, 0) == doctest::Approx(0.8));
    CHECK(seek.branch_nodes.size() == 64);
    for (const auto* v : {&fwd, &seek, &cb}) CHECK(mild_residual(lin, B, v->trajectory, noise).sup < 1e-9);
    CHECK(sup_distance(fwd.trajectory, cb.trajectory) == doctest::Approx(0.5));
    CHECK_THROWS_AS(Variant::parse("sideways"), Error);
}

TEST_CASE("ensembles are deterministic and independent of thread count") {
    const LinearDrift lin(std::vector<double>{1.0, 4.0});
    const auto B = DriftField::constant(State{0.5, 0.0});
    const State x{0.0, 0.0};
    const TimeGrid grid(1.0, 16);
    const auto a = simulate_ensemble(lin, B, x, grid, 3, 50);
    const auto b = simulate_ensemble(lin, B, x, grid, 3, 50);
    for (std::size_t i = 0; i < 50; ++i) CHECK(a.paths[i].data() == b.paths[i].data());
}

TEST_CASE("girsanov weights") {
    const LinearDrift lin(std::vector<double>{1.0, 4.0});
    const TimeGrid grid(1.0, 10);
    const State x{0.2, 0.1};
    const auto noise = NoisePanel::generate(lin, grid, 5, 0);
    const auto path = simulate_ou(lin, x, grid, 5, 0);

    const auto w0 = girsanov_weight(path, DriftField::zero(2), noise, Direction::AddDrift);
    CHECK(w0.log_weight == 0.0);
    CHECK(w0.weight() == 1.0);

    const auto w = girsanov_weight(path, DriftField::constant(State{0.5, 0.0}), noise, Direction::AddDrift);
    double W = 0.0;
    for (std::size_t j = 0; j < grid.steps; ++j) W += noise.dW(j, 0);
    CHECK(w.log_weight == doctest::Approx(0.5 * W - 0.125).epsilon(1e-12));
    const auto r = girsanov_weight(path, DriftField::constant(State{0.5, 0.0}), noise, Direction::RemoveDrift);
    CHECK(r.log_weight == doctest::Approx(-0.5 * W - 0.125).epsilon(1e-12));

    const auto big = DriftField::constant(State{3.0, 0.0});
    CHECK_THROWS_AS(segmented_novikov_check(lin, big, x, grid, 1, 100, 1), Error);
    const auto rep = segmented_novikov_check(lin, DriftField::constant(State{0.8, 0.0}), x, grid, 1, 20000, 1);
    CHECK(std::abs(rep.expected_weight.value - 1.0) < 4.0 * rep.expected_weight.std_error);
}

TEST_CASE("self-normalized estimates") {
    const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
    const std::vector<double> flat(4, 0.7);
    CHECK(weighted_expectation(v, flat).value == doctest::Approx(2.5));
    CHECK(weighted_expectation(v, flat).ess == doctest::Approx(4.0));
    const std::vector<double> spike{0.0, 0.0, 0.0, 50.0};
    const auto e = weighted_expectation(v, spike);
    CHECK(e.degenerate);
    CHECK_FALSE(e.warning.empty());
    CHECK_THROWS_AS(parse_functional("median"), Error);
}

TEST_CASE("identity residual collapses for zero drift") {
    const SpectralOperator op({1.0, 4.0}, 0.5);
    const LinearDrift lin(op);
    const auto zero = DriftField::zero(2);
    const double lambda = 5.0;
    const auto sol = solve_vector(op, zero, lambda, QuadratureSpec{});
    const TimeGrid grid(1.0, 256);
    const auto noise = NoisePanel::generate(lin, grid, 3, 0);
    const auto path = simulate_mild(lin, zero, State{0.3, -0.2}, grid, noise);
    for (std::size_t i = 0; i < 2; ++i)
        CHECK(modified_mild_residual(op, zero, sol, path, noise, lambda, i).sup_residual <= 1e-12);
    CHECK_THROWS_AS(modified_mild_residual(op, zero, sol, path, noise, 6.0, 0), Error);
}

TEST_CASE("mean value check") {
    ScalarField lin;
    lin.eval = [](std::span<const double> x) { return 2.0 * x[0] - x[1]; };
    lin.gradient = [](std::span<const double>) { return State{2.0, -1.0}; };
    ScalarField quad;
    quad.eval = [](std::span<const double> x) { return x[0] * x[0] + x[0] * x[1]; };
    quad.gradient = [](std::span<const double> x) { return State{2.0 * x[0] + x[1], x[0]}; };
    const std::vector<std::pair<State, State>> pairs = {{{0.3, 1.0}, {-0.4, 2.0}}, {{1.5, -0.5}, {0.2, 0.2}}};
    CHECK(mean_value_check(lin, pairs) <= 1e-12);
    CHECK(mean_value_check(quad, pairs) <= 1e-12);
    CHECK(mean_value_check(quad, {{{0.3, 0.4}, {0.3, 0.4}}}) == 0.0);
}
