// SPDX-License-Identifier: MIT

#ifndef IMCAP_REFERENCE_HPP
#define IMCAP_REFERENCE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "imcap/core.hpp"
#include "imcap/errors.hpp"
#include "imcap/instcap.hpp"
#include "imcap/quad.hpp"
#include "imcap/rng.hpp"

namespace imcap {

struct QuadratureSettings {
    double rel_tol = 1e-8;
    int max_subdivisions = 2000;
    double radial_cutoff_sigmas = 12.0;
};

inline void validate(const QuadratureSettings &q) {
    if (!(q.rel_tol > 0.0) || q.rel_tol > 1e-2)
        throw std::domain_error("QuadratureSettings: rel_tol must be in (0, 1e-2]");
    if (q.max_subdivisions < 1) throw std::domain_error("QuadratureSettings: max_subdivisions must be positive");
    if (!(q.radial_cutoff_sigmas > 0.0))
        throw std::domain_error("QuadratureSettings: radial_cutoff_sigmas must be positive");
}

namespace detail {

// a_l = ln of the l-th mixture component density in radial form,
// a_l = -rho/sigma_l^2 - ln sigma_l^2; returns ln sum_l e^{a_l} (max-shifted)
inline double mixture_log_terms(const Eigen::VectorXd &s2, const Eigen::VectorXd &log_s2, double rho,
                                Eigen::VectorXd &a) {
    double mx = -std::numeric_limits<double>::infinity();
    for (Eigen::Index l = 0; l < s2.size(); ++l) {
        a[l] = -rho / s2[l] - log_s2[l];
        mx = std::max(mx, a[l]);
    }
    double acc = 0.0;
    for (Eigen::Index l = 0; l < s2.size(); ++l) acc += std::exp(a[l] - mx);
    return mx + std::log(acc);
}

} // namespace detail

// I2 = I(y;l) in bits. The 2-D mixture integrals are circularly symmetric, so
// they reduce to one radial coordinate rho = |y|^2 with per-hop density
// e^{-rho/sigma_l^2}/sigma_l^2. The integrand used here is the radial mixture
// mass times (ln t - entropy of the posterior over l), which is pointwise
// nonnegative; integrating it instead of the H(Y) - H(Y|L) difference keeps
// the relative-tolerance contract meaningful at high SNR, where the two
// entropies are large and nearly cancel.
inline double index_mi_quadrature(const SigmaVector &sigma, const QuadratureSettings &settings = {}) {
    validate(settings);
    const Eigen::Index t = sigma.values.size();
    if (t < 1) throw std::domain_error("index_mi_quadrature: empty variance vector");
    if (t == 1) return 0.0;
    const double td = static_cast<double>(t);
    const double log2t = std::log2(td);
    const double lnt = std::log(td);

    Eigen::VectorXd log_s2(t), a(t);
    double smax = 0.0;
    for (Eigen::Index l = 0; l < t; ++l) {
        if (!(sigma.values[l] > 0.0)) throw std::domain_error("index_mi_quadrature: variances must be positive");
        log_s2[l] = std::log(sigma.values[l]);
        smax = std::max(smax, sigma.values[l]);
    }

    auto integrand = [&](double rho) {
        const double lsew = detail::mixture_log_terms(sigma.values, log_s2, rho, a);
        double mean_a = 0.0;
        for (Eigen::Index l = 0; l < t; ++l) mean_a += std::exp(a[l] - lsew) * a[l];
        const double ent = lsew - mean_a; // posterior entropy, <= ln t
        const double val = (std::exp(lsew) / td) * (lnt - ent) / ln2;
        return val > 0.0 ? val : 0.0;
    };

    // The configured cutoff acts as a floor; the span is widened until the
    // tail bound mass * log2 t sits well below the relative tolerance.
    const double span =
        std::max(settings.radial_cutoff_sigmas, 4.0 - std::log(settings.rel_tol) + std::log1p(log2t));
    const double cutoff = span * smax;
    double mass_tail = 0.0;
    for (Eigen::Index l = 0; l < t; ++l) mass_tail += std::exp(-cutoff / sigma.values[l]);
    mass_tail /= td;
    // Tail contribution lies in [0, mass * log2 t]; take the midpoint and
    // carry the half-width as part of the error estimate.
    const double tail_mid = 0.5 * mass_tail * log2t;

    double tol_abs = settings.rel_tol;
    double value = 0.0, err = 0.0;
    for (int attempt = 0;; ++attempt) {
        const auto res = detail::integrate_adaptive(integrand, 0.0, cutoff, tol_abs, settings.max_subdivisions);
        value = res.value + tail_mid;
        err = res.error + tail_mid;
        const double target = settings.rel_tol * std::max(value, 0.05);
        if (err <= target) break;
        if (attempt >= 2 || res.subdivisions >= settings.max_subdivisions)
            throw accuracy_error("index_mi_quadrature: tolerance not met within the subdivision budget",
                                 err / std::max(value, std::numeric_limits<double>::min()));
        tol_abs = 0.5 * (target - tail_mid);
    }

    // Clamp onto the entropy bounds only when already inside tolerance of them.
    const double band = settings.rel_tol * std::max(1.0, log2t);
    if (value < 0.0 && value > -band) value = 0.0;
    if (value > log2t && value < log2t + band) value = log2t;
    return value;
}

struct McEstimate {
    double value;
    double std_error;
};

// Direct sampling of the same mutual information: draw the hop index l
// uniformly, draw rho from the exponential radial law of hop l, and average
// the log-likelihood ratio. Samples are generated in fixed-size blocks, each
// on its own derived stream, so the result depends only on (seed, n_samples)
// and not on how blocks might be scheduled.
inline McEstimate index_mi_montecarlo(const SigmaVector &sigma, std::int64_t n_samples, std::uint64_t seed) {
    const Eigen::Index t = sigma.values.size();
    if (t < 1) throw std::domain_error("index_mi_montecarlo: empty variance vector");
    if (n_samples < 1000) throw std::domain_error("index_mi_montecarlo: n_samples must be >= 1000");
    Eigen::VectorXd log_s2(t), a(t);
    for (Eigen::Index l = 0; l < t; ++l) {
        if (!(sigma.values[l] > 0.0)) throw std::domain_error("index_mi_montecarlo: variances must be positive");
        log_s2[l] = std::log(sigma.values[l]);
    }
    const double lnt = std::log(static_cast<double>(t));

    constexpr std::int64_t block = 4096;
    double sum = 0.0, sumsq = 0.0;
    for (std::int64_t b = 0, done = 0; done < n_samples; ++b) {
        Rng rng(seed, stream_tag::mi_mc, static_cast<std::uint64_t>(b));
        const std::int64_t m = std::min(block, n_samples - done);
        for (std::int64_t i = 0; i < m; ++i) {
            const Eigen::Index l = rng.uniform_index(t);
            const double rho = rng.exponential(sigma.values[l]);
            const double lsew = detail::mixture_log_terms(sigma.values, log_s2, rho, a);
            const double x = (a[l] - (lsew - lnt)) / ln2;
            sum += x;
            sumsq += x * x;
        }
        done += m;
    }
    const double n = static_cast<double>(n_samples);
    const double mean = sum / n;
    const double var = std::max(0.0, (sumsq - n * mean * mean) / (n - 1.0));
    return {mean, std::sqrt(var / n)};
}

// Full reference capacity: the exact symbol term plus the quadrature index term.
inline CapacityEstimate capacity_integral(const ChannelMatrix &h, double gamma,
                                          const QuadratureSettings &settings = {}) {
    const auto s = sigma_vector(h, gamma);
    const double c = mutual_info_symbol(s) + index_mi_quadrature(s, settings);
    return {c, Method::quadrature, std::numeric_limits<double>::quiet_NaN()};
}

// Capacity of the same channel when every antenna transmits (no CSIT, uniform
// power split): sum of log2(1 + (gamma/t) lambda_n) over the eigenvalues of
// H^H H. Eigenvalues below 1e-12 of the largest are treated as zero rank.
inline double mimo_capacity(const ChannelMatrix &h, double gamma) {
    if (h.rows() < 1 || h.cols() < 1) throw std::domain_error("mimo_capacity: channel matrix is empty");
    if (!(gamma >= 0.0)) throw std::domain_error("mimo_capacity: gamma must be nonnegative");
    const Eigen::MatrixXcd gram = h.adjoint() * h;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw std::runtime_error("mimo_capacity: eigensolver failed");
    const Eigen::VectorXd ev = es.eigenvalues();
    const double lmax = ev.maxCoeff();
    if (!(lmax > 0.0)) return 0.0;
    const double scale = gamma / static_cast<double>(h.cols());
    double c = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev[i] < 1e-12 * lmax) continue;
        c += std::log2(1.0 + scale * ev[i]);
    }
    return c;
}

struct CurvePair {
    Eigen::VectorXd snr_grid; // dB, ascending
    Eigen::VectorXd approx;
    Eigen::VectorXd reference;
};

inline void validate(const CurvePair &c) {
    if (c.snr_grid.size() < 1 || c.approx.size() != c.snr_grid.size() || c.reference.size() != c.snr_grid.size())
        throw std::domain_error("CurvePair: grids must be nonempty and of equal length");
    for (Eigen::Index i = 1; i < c.snr_grid.size(); ++i)
        if (!(c.snr_grid[i] > c.snr_grid[i - 1])) throw std::domain_error("CurvePair: snr_grid must be ascending");
}

// Curve-level figure of merit: |sum of signed differences|^2 / |sum of
// reference|^2. The differences are summed before squaring, so opposite-sign
// errors cancel; that is a property of the metric, not a bug here.
inline double normalized_error(const CurvePair &curves) {
    validate(curves);
    const double diff = (curves.approx - curves.reference).sum();
    const double ref = curves.reference.sum();
    if (ref == 0.0) throw std::domain_error("normalized_error: reference curve sums to zero");
    return (diff * diff) / (ref * ref);
}

// Per-point mean squared error over the same curve pair.
inline double mean_squared_error(const CurvePair &curves) {
    validate(curves);
    return (curves.approx - curves.reference).squaredNorm() / static_cast<double>(curves.approx.size());
}

} // namespace imcap

#endif
