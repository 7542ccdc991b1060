// SPDX-License-Identifier: MIT

#ifndef IMCAP_CORE_HPP
#define IMCAP_CORE_HPP

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

namespace imcap {

inline constexpr double ln2 = 0.69314718055994530941723212145818;

// r x t complex channel; column l is the receive signature of hop l
using ChannelMatrix = Eigen::MatrixXcd;

enum class Method { order0, order2, order4, quadrature, montecarlo };

inline const char *method_name(Method m) {
    switch (m) {
    case Method::order0: return "order0";
    case Method::order2: return "order2";
    case Method::order4: return "order4";
    case Method::quadrature: return "quadrature";
    case Method::montecarlo: return "montecarlo";
    }
    return "unknown";
}

// Capacity value in bits per channel use, tagged with how it was computed.
// std_error is NaN unless the estimator is sampling-based.
struct CapacityEstimate {
    double value = 0.0;
    Method method = Method::order2;
    double std_error = std::numeric_limits<double>::quiet_NaN();
};

// Per-hop received-signal variances sigma_l^2 = 1 + gamma * ||h_l||^2
struct SigmaVector {
    Eigen::VectorXd values;
    double gamma = 0.0;
    int t() const { return static_cast<int>(values.size()); }
};

inline SigmaVector sigma_vector(const ChannelMatrix &h, double gamma) {
    if (h.rows() < 1 || h.cols() < 1) throw std::domain_error("sigma_vector: channel matrix is empty");
    if (!(gamma >= 0.0)) throw std::domain_error("sigma_vector: gamma must be nonnegative");
    SigmaVector s;
    s.gamma = gamma;
    s.values.resize(h.cols());
    for (Eigen::Index l = 0; l < h.cols(); ++l) {
        s.values[l] = 1.0 + gamma * h.col(l).squaredNorm();
        if (!std::isfinite(s.values[l])) throw std::domain_error("sigma_vector: channel entries must be finite");
    }
    return s;
}

struct Means {
    double arithmetic;
    double harmonic;
};

inline Means means(const Eigen::VectorXd &v) {
    if (v.size() < 1) throw std::domain_error("means: empty vector");
    double sum = 0.0, inv = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (!(v[i] > 0.0)) throw std::domain_error("means: entries must be positive");
        sum += v[i];
        inv += 1.0 / v[i];
    }
    const double n = static_cast<double>(v.size());
    return {sum / n, n / inv};
}

// Arithmetic and harmonic means of (sigma^2), (sigma^2)^2 and (sigma^2)^3,
// computed in one pass; every closed-form capacity expression reads these.
struct PowerMeans {
    double a2, h2; // of sigma_l^2
    double a4, h4; // of sigma_l^4
    double a6, h6; // of sigma_l^6
};

inline PowerMeans power_means(const Eigen::VectorXd &s2) {
    if (s2.size() < 1) throw std::domain_error("power_means: empty vector");
    double a2 = 0, a4 = 0, a6 = 0, i2 = 0, i4 = 0, i6 = 0;
    for (Eigen::Index i = 0; i < s2.size(); ++i) {
        const double v = s2[i];
        if (!(v > 0.0)) throw std::domain_error("power_means: entries must be positive");
        const double v2 = v * v, v3 = v2 * v;
        a2 += v;
        a4 += v2;
        a6 += v3;
        i2 += 1.0 / v;
        i4 += 1.0 / v2;
        i6 += 1.0 / v3;
    }
    const double n = static_cast<double>(s2.size());
    return {a2 / n, n / i2, a4 / n, n / i4, a6 / n, n / i6};
}

// n!! for n in [-1, 30]; larger arguments are rejected rather than silently
// losing precision in double.
inline double double_factorial(int n) {
    if (n < -1 || n > 30) throw std::domain_error("double_factorial: n must be in [-1, 30]");
    double p = 1.0;
    for (int k = n; k > 1; k -= 2) p *= k;
    return p;
}

// E{X^n} for X ~ N(0, sd^2): zero for odd n, (n-1)!! sd^n for even n
inline double gaussian_central_moment(int n, double sd) {
    if (n < 0) throw std::domain_error("gaussian_central_moment: order must be nonnegative");
    if (!(sd >= 0.0)) throw std::domain_error("gaussian_central_moment: sd must be nonnegative");
    if (n % 2 == 1) return 0.0;
    return double_factorial(n - 1) * std::pow(sd, n);
}

} // namespace imcap

#endif
