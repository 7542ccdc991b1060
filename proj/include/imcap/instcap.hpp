// SPDX-License-Identifier: MIT

#ifndef IMCAP_INSTCAP_HPP
#define IMCAP_INSTCAP_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "imcap/core.hpp"

namespace imcap {

// I1: average per-hop information carried by the transmitted symbol
inline double mutual_info_symbol(const SigmaVector &s) {
    double acc = 0.0;
    for (Eigen::Index l = 0; l < s.values.size(); ++l) {
        if (!(s.values[l] > 0.0)) throw std::domain_error("mutual_info_symbol: variances must be positive");
        acc += std::log2(s.values[l]);
    }
    return acc / static_cast<double>(s.values.size());
}

// d^2 g / dy1^2 at the origin: -(2/ln 2) H(sigma^2)/H(sigma^4)
inline double g_deriv2_at0(const Eigen::VectorXd &s2) {
    const auto m = power_means(s2);
    return -(2.0 / ln2) * m.h2 / m.h4;
}

// d^4 g / dy1^4 at the origin:
// (12/ln 2) (H(sigma^2)/H(sigma^6) - H(sigma^2)^2/H(sigma^4)^2)
inline double g_deriv4_at0(const Eigen::VectorXd &s2) {
    const auto m = power_means(s2);
    return (12.0 / ln2) * (m.h2 / m.h6 - (m.h2 * m.h2) / (m.h4 * m.h4));
}

// Truncated-series capacity approximation of order 0, 2 or 4 (bits/use).
// Order 0 may be negative at low SNR; it is deliberately not clipped so the
// approximation's failure mode stays visible.
inline CapacityEstimate capacity_closed_form(const SigmaVector &s, int order) {
    if (order != 0 && order != 2 && order != 4) throw std::invalid_argument("capacity_closed_form: order must be 0, 2 or 4");
    const auto m = power_means(s.values);
    double c = std::log2(m.h2);
    if (order == 0) return {c - 1.0 / ln2, Method::order0, std::numeric_limits<double>::quiet_NaN()};
    c -= (1.0 / ln2) * (1.0 - m.a2 * m.h2 / m.h4);
    if (order == 2) return {c, Method::order2, std::numeric_limits<double>::quiet_NaN()};
    c -= (3.0 / (4.0 * ln2)) * m.a4 * (m.h2 / m.h6 - (m.h2 * m.h2) / (m.h4 * m.h4));
    return {c, Method::order4, std::numeric_limits<double>::quiet_NaN()};
}

struct GDerivs {
    double d1, d2, d3, d4; // partial derivatives of g along y1
};

// Partial derivatives of g(y) = log2 f_2(y) along y1 at an arbitrary point,
// where f_n(y) = sum_l (pi sigma_l^n)^{-1} exp(-(y1^2+y2^2)/sigma_l^2).
// The f_n ratios are evaluated in the log domain (max-shifted), so the result
// is finite even where every mixture component underflows.
inline GDerivs g_derivatives_at(const Eigen::VectorXd &s2, double y1, double y2) {
    const Eigen::Index t = s2.size();
    if (t < 1) throw std::domain_error("g_derivatives_at: empty variance vector");
    const double rho = y1 * y1 + y2 * y2;

    // a_l = -rho/sigma_l^2 - (n/2) ln sigma_l^2 differs between f_n only via
    // the ln term, so one shifted exponential set per n is enough.
    auto log_f = [&](double n_half) {
        double mx = -std::numeric_limits<double>::infinity();
        for (Eigen::Index l = 0; l < t; ++l) {
            if (!(s2[l] > 0.0)) throw std::domain_error("g_derivatives_at: variances must be positive");
            mx = std::max(mx, -rho / s2[l] - n_half * std::log(s2[l]));
        }
        double acc = 0.0;
        for (Eigen::Index l = 0; l < t; ++l) acc += std::exp(-rho / s2[l] - n_half * std::log(s2[l]) - mx);
        return mx + std::log(acc); // ln(pi f_n) + ln pi cancels in every ratio
    };

    const double l2 = log_f(1.0);
    const double r4 = std::exp(log_f(2.0) - l2);  // f4/f2
    const double r6 = std::exp(log_f(3.0) - l2);  // f6/f2
    const double r8 = std::exp(log_f(4.0) - l2);  // f8/f2
    const double r10 = std::exp(log_f(5.0) - l2); // f10/f2

    const double y1sq = y1 * y1;
    GDerivs d;
    d.d1 = -(2.0 * y1 / ln2) * r4;
    d.d2 = (2.0 / ln2) * ((2.0 * y1sq * r6 - r4) - 2.0 * y1sq * r4 * r4);
    d.d3 = (4.0 * y1 / ln2) *
           ((3.0 * r6 - 2.0 * y1sq * r8) + 3.0 * r4 * (2.0 * y1sq * r6 - r4) - 4.0 * y1sq * r4 * r4 * r4);
    const double b2 = 2.0 * y1sq * r6 - r4;
    d.d4 = (4.0 / ln2) * ((3.0 * r6 - 12.0 * y1sq * r8 + 4.0 * y1sq * y1sq * r10) +
                          (8.0 * y1sq * r4 * (3.0 * r6 - 2.0 * y1sq * r8) - 3.0 * b2 * b2) +
                          24.0 * y1sq * r4 * r4 * b2 - 24.0 * y1sq * y1sq * r4 * r4 * r4 * r4);
    return d;
}

// Lagrange-remainder estimate of the order-2 truncation at expansion point xi:
// (A(sigma^4)/32) (d4g/dy1^4 + d4g/dy2^4)(xi). The y2 derivative equals the
// y1 derivative with swapped coordinates.
inline double remainder_estimate(const Eigen::VectorXd &s2, double xi1, double xi2) {
    const auto m = power_means(s2);
    const double d4_y1 = g_derivatives_at(s2, xi1, xi2).d4;
    const double d4_y2 = g_derivatives_at(s2, xi2, xi1).d4;
    return (m.a4 / 32.0) * (d4_y1 + d4_y2);
}

} // namespace imcap

#endif
