#include <doctest.h>

#include <cmath>
#include <numbers>

#include "spdelab/errors.hpp"
#include "spdelab/gaussian.hpp"
#include "spdelab/ou_semigroup.hpp"
#include "spdelab/spectrum.hpp"
#include "spdelab/stats.hpp"

using namespace spdelab;

TEST_CASE("operator construction and serialization") {
    const auto op = SpectralOperator::power_law(5, 1.0, 2.0, 0.4);
    CHECK(op.eigenvalue(2) == 9.0);
    const auto back = SpectralOperator::parse(op.serialize());
    CHECK(back.eigenvalues() == op.eigenvalues());
    CHECK(back.delta() == op.delta());
    REQUIRE(back.growth().has_value());
    CHECK(back.growth()->alpha == 2.0);
    CHECK_THROWS_AS(SpectralOperator({1.0, -1.0}, 0.5), Error);
    CHECK_THROWS_AS(SpectralOperator({1.0}, 1.5), Error);
}

TEST_CASE("covariance and Lambda_t closed forms") {
    const SpectralOperator op({1.0, 4.0}, 0.5);
    const auto q = covariance_qt(op, 0.5);
    CHECK(q[1] == doctest::Approx(-std::expm1(-4.0) / 8.0).epsilon(1e-15));
    const auto qinf = covariance_qt(op, kInfiniteTime);
    CHECK(qinf[0] == doctest::Approx(0.5));
    CHECK(qinf[1] == doctest::Approx(0.125));
    const auto lt = lambda_t_diag(op, 0.3);
    CHECK(lt[1] == doctest::Approx(std::sqrt(8.0) * std::exp(-1.2) / std::sqrt(1.0 - std::exp(-2.4))));
    CHECK_THROWS_AS(lambda_t_diag(op, 0.0), Error);
    CHECK(convolution_weight(0.0, 0.25) == 0.25);
    CHECK(convolution_weight(2.0, 0.25) == doctest::Approx(-std::expm1(-0.5) / 2.0));
}

TEST_CASE("trace check verdicts") {
    const auto ok = SpectralOperator::power_law(50, 1.0, 2.0, 0.4);
    CHECK(trace_check(ok, 0.4).verdict == TraceVerdict::Converges);
    CHECK(trace_check(ok, 0.6).verdict == TraceVerdict::Diverges);
    const SpectralOperator untagged({1.0, 4.0}, 0.4);
    CHECK_THROWS_AS(trace_check(untagged, 0.4), Error);
    CHECK(trace_check(untagged, 0.4, false).truncated);
}

TEST_CASE("smoothing constants") {
    CHECK(c0() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(c1_0() == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-12));
    const double c3 = smoothing_constant(0.3);
    CHECK(c3 == doctest::Approx(0.62).epsilon(0.01));
    for (double s : {0.01, 0.3, 0.7, 2.0, 10.0}) CHECK(smoothing_profile(s, 0.3) <= c3 + 1e-12);
    CHECK(smoothing_profile(1.0, 0.0) < 1.0);
}

TEST_CASE("kernel L^p' norms") {
    const SpectralOperator op({1.0}, 0.5);
    for (double t : {0.05, 0.7, 4.0}) CHECK(kernel_lp_norm(op, t, 1.0) == 1.0);
    CHECK(std::abs(kernel_lp_norm(op, 0.5 * std::numbers::ln2, 2.0) - std::pow(4.0 / 3.0, 0.25)) < 1e-12);
    const SpectralOperator op5(std::vector<double>(5, 1.0), 0.5);
    CHECK(integrability_scan(op5, 1.5, 1.0).verdict == IntegrabilityVerdict::Finite);
    CHECK(integrability_scan(op5, 2.0, 1.0).verdict == IntegrabilityVerdict::Divergent);
    CHECK_THROWS_AS(kernel_lp_norm(op, 0.0, 2.0), Error);
}

TEST_CASE("gaussian sampling and densities") {
    const auto op = SpectralOperator::power_law(3, 1.0, 2.0, 0.4);
    const auto mu = GaussianMeasure::invariant(op);
    const auto a = sample(mu, 20000, 5);
    CHECK(a == sample(mu, 20000, 5));
    std::vector<double> col;
    for (const auto& x : a) col.push_back(x[2]);
    CHECK(mean_estimate(col).variance == doctest::Approx(1.0 / 18.0).epsilon(0.05));

    const auto h = halton_sample(mu, 512);
    col.clear();
    for (const auto& x : h) col.push_back(x[0]);
    CHECK(std::abs(mean_estimate(col).mean) < 0.01);
    CHECK(mean_estimate(col).variance == doctest::Approx(0.5).epsilon(0.05));

    const State x{0.2, -0.1, 0.0};
    const auto law = GaussianMeasure::transition(op, 0.4, x);
    double expect = 0.0;
    for (double v : law.variances) expect -= 0.5 * std::log(2.0 * std::numbers::pi * v);
    CHECK(ou_transition_log_density(op, 0.4, x, law.mean) == doctest::Approx(expect));
}

TEST_CASE("OU semigroup estimators") {
    const SpectralOperator op({1.0, 4.0}, 0.5);
    QuadratureSpec quad;
    const State x{0.7, -0.3};
    const auto phi = ScalarField::coordinate(0);
    CHECK(apply_rt(op, phi, 0.0, x, quad).value == 0.7);

    const auto r = apply_rt(op, phi, 0.5, x, quad);
    CHECK(std::abs(r.value - 0.7 * std::exp(-0.5)) < 5.0 * r.std_error + 1e-12);

    const State h{1.0, 0.0};
    const auto g = gradient_rt(op, phi, 0.5, x, h, quad);
    CHECK(std::abs(g.value - std::exp(-0.5)) < 5.0 * g.std_error);

    const auto c = resolvent(op, ScalarField::constant(3.0), 2.0, x, quad);
    CHECK(c.value == doctest::Approx(1.5).epsilon(1e-10));
    CHECK_THROWS_AS(resolvent(op, phi, -1.0, x, quad), Error);
}
