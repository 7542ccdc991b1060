// SPDX-License-Identifier: MIT

#include <catch2/catch_amalgamated.hpp>

#include "imcap/core.hpp"
#include "imcap/rng.hpp"

using namespace imcap;
using Catch::Approx;

TEST_CASE("sigma_vector maps column norms through gamma", "[core]") {
    ChannelMatrix id = ChannelMatrix::Identity(2, 2);
    const auto s = sigma_vector(id, 1.0);
    REQUIRE(s.t() == 2);
    REQUIRE(s.values[0] == Approx(2.0));
    REQUIRE(s.values[1] == Approx(2.0));

    SECTION("zero gamma gives the all-ones vector") {
        ChannelMatrix h(2, 3);
        h.setRandom();
        const auto z = sigma_vector(h, 0.0);
        for (int l = 0; l < z.t(); ++l) REQUIRE(z.values[l] == 1.0);
    }

    SECTION("direct arithmetic on known norms") {
        ChannelMatrix h(1, 2);
        h(0, 0) = {1.0, 0.0};                 // ||h1||^2 = 1
        h(0, 1) = {1.0, std::sqrt(2.0)};      // ||h2||^2 = 3
        const auto v = sigma_vector(h, 2.0);
        REQUIRE(v.values[0] == Approx(3.0));
        REQUIRE(v.values[1] == Approx(7.0));
    }

    SECTION("componentwise nondecreasing in gamma") {
        Rng rng(3);
        ChannelMatrix h(3, 4);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 4; ++j) h(i, j) = rng.cnormal(1.0);
        double gamma = 0.0;
        Eigen::VectorXd prev = sigma_vector(h, gamma).values;
        for (int k = 0; k < 6; ++k) {
            gamma = gamma * 3.0 + 0.1;
            const Eigen::VectorXd cur = sigma_vector(h, gamma).values;
            for (int l = 0; l < 4; ++l) REQUIRE(cur[l] >= prev[l]);
            prev = cur;
        }
    }

    SECTION("non-finite entries are rejected") {
        ChannelMatrix h = ChannelMatrix::Identity(2, 2);
        h(0, 0) = {std::numeric_limits<double>::infinity(), 0.0};
        REQUIRE_THROWS_AS(sigma_vector(h, 1.0), std::domain_error);
        h(0, 0) = {std::numeric_limits<double>::quiet_NaN(), 0.0};
        REQUIRE_THROWS_AS(sigma_vector(h, 1.0), std::domain_error);
    }

    SECTION("negative gamma is rejected") {
        REQUIRE_THROWS_AS(sigma_vector(id, -0.5), std::domain_error);
    }
}

TEST_CASE("means computes arithmetic and harmonic averages", "[core]") {
    Eigen::VectorXd equal(2);
    equal << 2.0, 2.0;
    auto m = means(equal);
    REQUIRE(m.arithmetic == Approx(2.0));
    REQUIRE(m.harmonic == Approx(2.0));

    Eigen::VectorXd v(2);
    v << 2.0, 4.0;
    m = means(v);
    REQUIRE(m.arithmetic == Approx(3.0));
    REQUIRE(m.harmonic == Approx(8.0 / 3.0));

    SECTION("harmonic never exceeds arithmetic; equality only for equal entries") {
        Rng rng(7);
        for (int trial = 0; trial < 50; ++trial) {
            Eigen::VectorXd x(4);
            for (int i = 0; i < 4; ++i) x[i] = 0.1 + 10.0 * rng.uniform();
            const auto mm = means(x);
            REQUIRE(mm.harmonic <= mm.arithmetic + 1e-14);
        }
        Eigen::VectorXd same = Eigen::VectorXd::Constant(5, 3.25);
        const auto ms = means(same);
        REQUIRE(ms.arithmetic == Approx(ms.harmonic).epsilon(1e-15));
    }

    SECTION("non-positive entries are rejected") {
        Eigen::VectorXd bad(2);
        bad << 1.0, 0.0;
        REQUIRE_THROWS_AS(means(bad), std::domain_error);
        bad << 1.0, -2.0;
        REQUIRE_THROWS_AS(means(bad), std::domain_error);
    }
}

TEST_CASE("power_means agrees with means on each power vector", "[core]") {
    Eigen::VectorXd s2(3);
    s2 << 1.5, 2.0, 5.0;
    const auto pm = power_means(s2);
    const auto m2 = means(s2);
    const auto m4 = means(s2.array().square().matrix());
    const auto m6 = means(s2.array().cube().matrix());
    REQUIRE(pm.a2 == Approx(m2.arithmetic));
    REQUIRE(pm.h2 == Approx(m2.harmonic));
    REQUIRE(pm.a4 == Approx(m4.arithmetic));
    REQUIRE(pm.h4 == Approx(m4.harmonic));
    REQUIRE(pm.a6 == Approx(m6.arithmetic));
    REQUIRE(pm.h6 == Approx(m6.harmonic));
}

TEST_CASE("double_factorial on the supported range", "[core]") {
    REQUIRE(double_factorial(-1) == 1.0);
    REQUIRE(double_factorial(0) == 1.0);
    REQUIRE(double_factorial(1) == 1.0);
    REQUIRE(double_factorial(2) == 2.0);
    REQUIRE(double_factorial(3) == 3.0);
    REQUIRE(double_factorial(5) == 15.0);
    REQUIRE(double_factorial(7) == 105.0);
    REQUIRE_THROWS_AS(double_factorial(31), std::domain_error);
    REQUIRE_THROWS_AS(double_factorial(-2), std::domain_error);
}

TEST_CASE("gaussian_central_moment follows the double-factorial law", "[core]") {
    // Per-component variance S/2 of a complex variance S enters as sd.
    const double S = 1.7;
    const double sd = std::sqrt(S / 2.0);
    REQUIRE(gaussian_central_moment(2, sd) == Approx(S / 2.0));
    REQUIRE(gaussian_central_moment(3, sd) == 0.0);
    REQUIRE(gaussian_central_moment(4, sd) == Approx(3.0 * S * S / 4.0));
    REQUIRE(gaussian_central_moment(0, sd) == 1.0);

    SECTION("even orders are positive, odd orders exactly zero") {
        for (int n = 0; n <= 12; ++n) {
            const double v = gaussian_central_moment(n, 0.8);
            if (n % 2 == 0) REQUIRE(v > 0.0);
            else REQUIRE(v == 0.0);
        }
    }

    SECTION("negative order is rejected") {
        REQUIRE_THROWS_AS(gaussian_central_moment(-1, 1.0), std::domain_error);
    }
}

TEST_CASE("method_name covers every estimator", "[core]") {
    REQUIRE(std::string(method_name(Method::order0)) == "order0");
    REQUIRE(std::string(method_name(Method::order2)) == "order2");
    REQUIRE(std::string(method_name(Method::order4)) == "order4");
    REQUIRE(std::string(method_name(Method::quadrature)) == "quadrature");
    REQUIRE(std::string(method_name(Method::montecarlo)) == "montecarlo");
}
