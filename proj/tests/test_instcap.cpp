// SPDX-License-Identifier: MIT

#include <catch2/catch_amalgamated.hpp>

#include "imcap/instcap.hpp"
#include "imcap/rng.hpp"
#include "oracles.hpp"

using namespace imcap;
using Catch::Approx;

namespace {

SigmaVector make_sigma(std::initializer_list<double> values) {
    SigmaVector s;
    s.values.resize(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double v : values) s.values[i++] = v;
    s.gamma = 1.0;
    return s;
}

Eigen::VectorXd random_s2(Rng &rng, int t, double lo = 0.5, double hi = 5.0) {
    Eigen::VectorXd s2(t);
    for (int l = 0; l < t; ++l) s2[l] = lo + (hi - lo) * rng.uniform();
    return s2;
}

// The mixture exponent whose y1-derivatives the closed forms claim to match.
// Constant factors (pi, the 1/t prior) shift g by a constant, so they drop
// out of every derivative and are omitted here.
oracles::LdFn g_slice(const Eigen::VectorXd &s2, double y2) {
    return [s2, y2](long double y1) {
        long double acc = 0.0L;
        for (Eigen::Index l = 0; l < s2.size(); ++l) {
            const long double v = static_cast<long double>(s2[l]);
            acc += (1.0L / v) * std::exp(-(y1 * y1 + static_cast<long double>(y2) * y2) / v);
        }
        return std::log(acc) / static_cast<long double>(ln2);
    };
}

} // namespace

TEST_CASE("mutual_info_symbol averages the per-hop log variances", "[instcap]") {
    REQUIRE(mutual_info_symbol(make_sigma({2.0, 2.0})) == Approx(1.0));
    REQUIRE(mutual_info_symbol(make_sigma({1.0})) == 0.0);
    REQUIRE(mutual_info_symbol(make_sigma({2.0, 4.0})) == Approx(1.5));
    REQUIRE_THROWS_AS(mutual_info_symbol(make_sigma({1.0, 0.0})), std::domain_error);
}

TEST_CASE("second derivative of g at the origin", "[instcap]") {
    Eigen::VectorXd one(1);
    one << 1.0;
    REQUIRE(g_deriv2_at0(one) == Approx(-2.0 / ln2));

    Eigen::VectorXd two(2);
    two << 2.0, 2.0;
    REQUIRE(g_deriv2_at0(two) == Approx(-1.0 / ln2));

    SECTION("always negative") {
        Rng rng(5);
        for (int trial = 0; trial < 25; ++trial) {
            REQUIRE(g_deriv2_at0(random_s2(rng, 2 + trial % 4)) < 0.0);
        }
    }

    SECTION("matches a high-precision finite difference") {
        Rng rng(6);
        for (int trial = 0; trial < 5; ++trial) {
            const Eigen::VectorXd s2 = random_s2(rng, 3);
            const double fd = static_cast<double>(oracles::fd_derivative(g_slice(s2, 0.0), 2, 1e-3));
            REQUIRE(g_deriv2_at0(s2) == Approx(fd).epsilon(1e-6));
        }
    }
}

TEST_CASE("fourth derivative of g at the origin", "[instcap]") {
    SECTION("zero for a single hop or equal variances") {
        Eigen::VectorXd one(1);
        one << 3.0;
        REQUIRE(g_deriv4_at0(one) == Approx(0.0).margin(1e-14));
        Eigen::VectorXd eq = Eigen::VectorXd::Constant(4, 2.5);
        REQUIRE(g_deriv4_at0(eq) == Approx(0.0).margin(1e-13));
    }

    SECTION("hand value for variances (2, 4)") {
        Eigen::VectorXd s2(2);
        s2 << 2.0, 4.0;
        // H2 = 8/3, H4 = 32/5, H6 = 128/9; the bracket collapses to 1/72
        REQUIRE(g_deriv4_at0(s2) == Approx((12.0 / ln2) / 72.0).epsilon(1e-12));
    }

    SECTION("matches a high-precision finite difference") {
        Rng rng(8);
        for (int trial = 0; trial < 5; ++trial) {
            const Eigen::VectorXd s2 = random_s2(rng, 3);
            const double h = std::max(1e-3, 1e-2 * std::sqrt(s2.mean()));
            const double fd = static_cast<double>(oracles::fd_derivative(g_slice(s2, 0.0), 4, h));
            REQUIRE(g_deriv4_at0(s2) == Approx(fd).epsilon(1e-5));
        }
    }
}

TEST_CASE("capacity_closed_form truncation orders", "[instcap]") {
    SECTION("single hop: order 2 and 4 reduce to the symbol term") {
        const auto s = make_sigma({1.0});
        REQUIRE(capacity_closed_form(s, 2).value == Approx(0.0).margin(1e-14));
        REQUIRE(capacity_closed_form(s, 4).value == Approx(0.0).margin(1e-14));
        REQUIRE(capacity_closed_form(s, 0).value == Approx(-1.0 / ln2));
    }

    SECTION("equal variances collapse every order above zero to log2 sigma^2") {
        const auto s = make_sigma({2.0, 2.0});
        REQUIRE(capacity_closed_form(s, 2).value == Approx(1.0).epsilon(1e-14));
        REQUIRE(capacity_closed_form(s, 4).value == Approx(1.0).epsilon(1e-14));
    }

    SECTION("distinct variances (2, 4)") {
        const auto s = make_sigma({2.0, 4.0});
        REQUIRE(capacity_closed_form(s, 2).value == Approx(1.775711259501084).epsilon(1e-12));
        REQUIRE(capacity_closed_form(s, 4).value == Approx(1.625430526075150).epsilon(1e-12));
        REQUIRE(capacity_closed_form(s, 0).value ==
                Approx(std::log2(8.0 / 3.0) - 1.0 / ln2).epsilon(1e-12));
    }

    SECTION("method tags identify the order") {
        const auto s = make_sigma({2.0, 4.0});
        REQUIRE(capacity_closed_form(s, 0).method == Method::order0);
        REQUIRE(capacity_closed_form(s, 2).method == Method::order2);
        REQUIRE(capacity_closed_form(s, 4).method == Method::order4);
    }

    SECTION("unsupported orders are rejected") {
        const auto s = make_sigma({2.0, 4.0});
        REQUIRE_THROWS_AS(capacity_closed_form(s, 1), std::invalid_argument);
        REQUIRE_THROWS_AS(capacity_closed_form(s, 3), std::invalid_argument);
        REQUIRE_THROWS_AS(capacity_closed_form(s, 6), std::invalid_argument);
    }

    SECTION("order-2 capacity grows about one bit per SNR doubling at high SNR") {
        Rng rng(12);
        ChannelMatrix h(2, 2);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) h(i, j) = rng.cnormal(1.0 / std::sqrt(2.0));
        std::vector<double> lg, cap;
        for (double db = 40.0; db <= 60.0; db += 5.0) {
            const double gamma = std::pow(10.0, db / 10.0);
            lg.push_back(std::log2(gamma));
            cap.push_back(capacity_closed_form(sigma_vector(h, gamma), 2).value);
        }
        const double slope = oracles::ls_slope(lg, cap);
        REQUIRE(slope > 0.9);
        REQUIRE(slope < 1.1);
    }
}

TEST_CASE("g_derivatives_at away from the origin", "[instcap]") {
    Rng rng(9);

    SECTION("odd derivatives vanish at the origin and the even ones match the closed forms") {
        for (int trial = 0; trial < 5; ++trial) {
            const Eigen::VectorXd s2 = random_s2(rng, 4);
            const auto d = g_derivatives_at(s2, 0.0, 0.0);
            REQUIRE(d.d1 == Approx(0.0).margin(1e-14));
            REQUIRE(d.d3 == Approx(0.0).margin(1e-14));
            REQUIRE(d.d2 == Approx(g_deriv2_at0(s2)).epsilon(1e-12));
            REQUIRE(d.d4 == Approx(g_deriv4_at0(s2)).epsilon(1e-10));
        }
    }

    SECTION("equal variances keep the third and fourth derivatives at zero everywhere") {
        Eigen::VectorXd eq = Eigen::VectorXd::Constant(3, 1.7);
        for (double y1 : {0.0, 0.3, 1.1}) {
            const auto d = g_derivatives_at(eq, y1, 0.6);
            REQUIRE(d.d3 == Approx(0.0).margin(1e-12));
            REQUIRE(d.d4 == Approx(0.0).margin(1e-12));
            // A pure Gaussian exponent has constant curvature -2/(sigma^2 ln 2).
            REQUIRE(d.d2 == Approx(-2.0 / (1.7 * ln2)).epsilon(1e-12));
            REQUIRE(d.d1 == Approx(-2.0 * y1 / (1.7 * ln2)).epsilon(1e-12));
        }
    }

    SECTION("all four derivatives match high-precision finite differences") {
        for (int trial = 0; trial < 4; ++trial) {
            const Eigen::VectorXd s2 = random_s2(rng, 3);
            const double y1 = -0.8 + 1.6 * rng.uniform();
            const double y2 = -0.8 + 1.6 * rng.uniform();
            const auto d = g_derivatives_at(s2, y1, y2);
            const auto g = g_slice(s2, y2);
            const double sbar = std::sqrt(s2.mean());
            const double fd1 = static_cast<double>(oracles::fd_derivative_at(g, 1, y1, std::max(1e-3, 1e-3 * sbar)));
            const double fd2 = static_cast<double>(oracles::fd_derivative_at(g, 2, y1, std::max(1e-3, 1e-3 * sbar)));
            const double fd3 = static_cast<double>(oracles::fd_derivative_at(g, 3, y1, std::max(1e-3, 1e-2 * sbar)));
            const double fd4 = static_cast<double>(oracles::fd_derivative_at(g, 4, y1, std::max(1e-3, 1e-2 * sbar)));
            REQUIRE(d.d1 == Approx(fd1).epsilon(1e-6).margin(1e-9));
            REQUIRE(d.d2 == Approx(fd2).epsilon(1e-6).margin(1e-9));
            REQUIRE(d.d3 == Approx(fd3).epsilon(1e-5).margin(1e-7));
            REQUIRE(d.d4 == Approx(fd4).epsilon(1e-5).margin(1e-7));
        }
    }

    SECTION("remains finite deep in the mixture tail") {
        Eigen::VectorXd s2(2);
        s2 << 1.0, 3.0;
        const auto d = g_derivatives_at(s2, 40.0, 0.0);
        REQUIRE(std::isfinite(d.d1));
        REQUIRE(std::isfinite(d.d2));
        REQUIRE(std::isfinite(d.d3));
        REQUIRE(std::isfinite(d.d4));
    }

    SECTION("empty and non-positive variance vectors are rejected") {
        Eigen::VectorXd empty(0);
        REQUIRE_THROWS_AS(g_derivatives_at(empty, 0.0, 0.0), std::domain_error);
        Eigen::VectorXd bad(2);
        bad << 1.0, -1.0;
        REQUIRE_THROWS_AS(g_derivatives_at(bad, 0.0, 0.0), std::domain_error);
    }
}

TEST_CASE("remainder_estimate of the order-2 truncation", "[instcap]") {
    SECTION("zero for equal variances and at zero SNR") {
        Eigen::VectorXd eq = Eigen::VectorXd::Constant(3, 4.0);
        REQUIRE(remainder_estimate(eq, 0.0, 0.0) == Approx(0.0).margin(1e-12));
        REQUIRE(remainder_estimate(eq, 0.5, -0.2) == Approx(0.0).margin(1e-12));
        Eigen::VectorXd ones = Eigen::VectorXd::Ones(4);
        REQUIRE(remainder_estimate(ones, 0.0, 0.0) == Approx(0.0).margin(1e-12));
    }

    SECTION("hand value for variances (2, 4) at the origin") {
        Eigen::VectorXd s2(2);
        s2 << 2.0, 4.0;
        // A4 = 10, d4(0) = (12/ln2)/72 along each axis
        const double expect = (10.0 / 32.0) * 2.0 * (12.0 / ln2) / 72.0;
        REQUIRE(remainder_estimate(s2, 0.0, 0.0) == Approx(expect).epsilon(1e-12));
    }

    SECTION("scale invariance pins the high-SNR plateau") {
        Eigen::VectorXd k2(2);
        k2 << 1.0, 3.0;
        auto at_gamma = [&](double gamma) {
            Eigen::VectorXd s2 = (1.0 + gamma * k2.array()).matrix();
            return remainder_estimate(s2, 0.0, 0.0);
        };
        const double limit = remainder_estimate(k2, 0.0, 0.0);
        const double r4 = at_gamma(1e4);
        const double r6 = at_gamma(1e6);
        REQUIRE(std::abs(r4 - r6) < 0.01 * std::abs(r6));
        REQUIRE(r6 == Approx(limit).epsilon(1e-4));
    }
}
