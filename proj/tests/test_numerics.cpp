#include <doctest.h>

#include <cmath>
#include <numbers>

#include "spdelab/errors.hpp"
#include "spdelab/quadrature.hpp"
#include "spdelab/rng.hpp"
#include "spdelab/stats.hpp"

using namespace spdelab;

TEST_CASE("philox known answers") {
    using A4 = std::array<std::uint32_t, 4>;
    CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
          A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
          A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("counter rng is a pure function of its key") {
    const CounterRng a(7), b(7), c(8);
    CHECK(a.normal(Stream::Test, 1, 2, 3) == b.normal(Stream::Test, 1, 2, 3));
    CHECK(a.normal(Stream::Test, 1, 2, 3) != c.normal(Stream::Test, 1, 2, 3));
    CHECK(a.normal(Stream::Test, 1, 2, 3) != a.normal(Stream::Noise, 1, 2, 3));

    std::vector<double> z;
    for (std::uint32_t i = 0; i < 20000; ++i) {
        auto [x, y] = a.normal_pair(Stream::Test, i, 0, 0);
        z.push_back(x);
        z.push_back(y);
    }
    const auto est = mean_estimate(z);
    CHECK(std::abs(est.mean) < 4.0 * est.std_error);
    CHECK(est.variance == doctest::Approx(1.0).epsilon(0.03));
    CHECK(ks_statistic_normal(z, 0.0, 1.0) < ks_critical_1pct(z.size()));
}

TEST_CASE("gauss-hermite reproduces normal moments") {
    const auto r = gauss_hermite_normal(20);
    double m0 = 0, m2 = 0, m4 = 0, m6 = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double z = r.nodes[i];
        m0 += r.weights[i];
        m2 += r.weights[i] * z * z;
        m4 += r.weights[i] * std::pow(z, 4);
        m6 += r.weights[i] * std::pow(z, 6);
    }
    CHECK(m0 == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(m2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m4 == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(m6 == doctest::Approx(15.0).epsilon(1e-12));
}

TEST_CASE("gauss-legendre is exact for degree 2n - 1") {
    const auto r = gauss_legendre(5);
    double s = 0;
    for (std::size_t i = 0; i < r.size(); ++i) s += r.weights[i] * std::pow(r.nodes[i], 8);
    CHECK(s == doctest::Approx(2.0 / 9.0).epsilon(1e-13));
}

TEST_CASE("laplace rule") {
    const double lambda = 2.0;
    const auto r = laplace_rule(lambda, 64);
    double one = 0, sing = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        one += r.weights[i];
        sing += r.weights[i] / std::sqrt(r.nodes[i]);
    }
    CHECK(one == doctest::Approx(1.0 / lambda).epsilon(1e-12));
    CHECK(sing == doctest::Approx(std::sqrt(std::numbers::pi / lambda)).epsilon(1e-10));
    CHECK_THROWS(laplace_rule(lambda, 4));
}

TEST_CASE("pairwise sum and convergence order") {
    std::vector<double> v(1000, 0.1);
    CHECK(pairwise_sum(v) == doctest::Approx(100.0).epsilon(1e-14));
    std::vector<double> dt{0.1, 0.05, 0.025, 0.0125}, err;
    for (double h : dt) err.push_back(3.0 * std::pow(h, 0.7));
    CHECK(convergence_order(dt, err) == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5));
}
