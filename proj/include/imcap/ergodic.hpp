// SPDX-License-Identifier: MIT

#ifndef IMCAP_ERGODIC_HPP
#define IMCAP_ERGODIC_HPP

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "imcap/core.hpp"
#include "imcap/errors.hpp"
#include "imcap/specfun.hpp"

namespace imcap {

enum class Fading { rayleigh, rice, nakagami };

// Channel ensemble for one column: Rayleigh uses varrho, Rice uses (nu,
// varrho), Nakagami uses (m, omega). r is the receive dimension. varrho and
// nu are per-component (real/imaginary) scale and mean, so E{|h|^2} is
// 2 varrho^2 for Rayleigh and 2(nu^2 + varrho^2) for Rice.
struct FadingSpec {
    Fading kind = Fading::rayleigh;
    int r = 2;
    double varrho = 0.70710678118654752440;
    double nu = 0.0;
    double m = 1.0;
    double omega = 1.0;
};

inline void validate(const FadingSpec &f) {
    if (f.r < 1) throw std::domain_error("FadingSpec: r must be >= 1");
    switch (f.kind) {
    case Fading::rayleigh:
        if (!(f.varrho > 0.0)) throw std::domain_error("FadingSpec: varrho must be positive");
        break;
    case Fading::rice:
        if (!(f.varrho > 0.0)) throw std::domain_error("FadingSpec: varrho must be positive");
        if (!(f.nu >= 0.0)) throw std::domain_error("FadingSpec: nu must be nonnegative");
        break;
    case Fading::nakagami:
        if (!(f.m >= 0.5)) throw std::domain_error("FadingSpec: m must be >= 0.5");
        if (!(f.omega > 0.0)) throw std::domain_error("FadingSpec: omega must be positive");
        break;
    }
}

// The three ensemble expectations the two-hop ergodic capacity is built from:
// e1 = E{log2 sigma^2}, e2 = E{log2(sigma_1^2 + sigma_2^2)} over independent
// hops, e3 = E{sigma_1^2 / sigma_2^2} = E{sigma^2} E{1/sigma^2}.
struct ErgodicTerms {
    double e1;
    double e2;
    double e3;
};

namespace detail {

struct PoissonWeights {
    int kmin;
    std::vector<double> w;
};

// Weights e^{-p} p^k / k! starting at the mode and expanding both ways until
// the captured mass reaches 1 - series_tol. Started from the mode in the log
// domain so large p cannot underflow the anchor term.
inline PoissonWeights poisson_weights(double p, double series_tol) {
    if (p == 0.0) return {0, {1.0}}; // 0^0 := 1, all mass at k = 0
    const int k0 = static_cast<int>(std::floor(p));
    const int max_terms = static_cast<int>(10.0 * p) + 200;
    const double w0 = std::exp(-p + k0 * std::log(p) - std::lgamma(static_cast<double>(k0) + 1.0));
    std::vector<double> up{w0}, down;
    double total = w0;
    double wu = w0, wd = w0;
    int ku = k0, kd = k0;
    while (total < 1.0 - series_tol) {
        if (static_cast<int>(up.size() + down.size()) >= max_terms)
            throw accuracy_error("poisson_weights: mixture did not reach the target mass", 1.0 - total);
        // grow whichever frontier term is larger
        const double next_up = wu * p / (ku + 1);
        const double next_down = kd > 0 ? wd * kd / p : -1.0;
        if (next_up >= next_down) {
            wu = next_up;
            up.push_back(wu);
            ++ku;
        } else {
            wd = next_down;
            down.push_back(wd);
            --kd;
        }
        total += (next_up >= next_down) ? wu : wd;
    }
    PoissonWeights out;
    out.kmin = kd;
    out.w.reserve(up.size() + down.size());
    for (auto it = down.rbegin(); it != down.rend(); ++it) out.w.push_back(*it);
    for (double v : up) out.w.push_back(v);
    return out;
}

inline bool near_integer(double x) { return std::abs(x - std::round(x)) <= 1e-9 * std::max(1.0, std::abs(x)); }

// E{ln(1 + x/beta)} for x ~ Gamma(shape, 1) with real shape: closed form for
// integer shape, Gauss-Laguerre at the documented 1e-8 target otherwise.
inline double expected_log_term(double shape, double beta) {
    if (near_integer(shape)) return upsilon(static_cast<int>(std::llround(shape)), beta);
    return expected_log1p_gamma(shape, beta, 1e-8);
}

inline ErgodicTerms nakagami_terms(double m, double omega, int r, double gamma) {
    const double mr = m * static_cast<double>(r);
    if (!near_integer(mr) && mr > 170.0)
        throw std::range_error("ergodic_terms: non-integer m*r above 170 is not supported");
    const double beta = m / (gamma * omega);
    ErgodicTerms t;
    t.e1 = expected_log_term(mr, beta) / ln2;
    t.e2 = 1.0 + expected_log_term(2.0 * mr, 2.0 * beta) / ln2;
    t.e3 = (1.0 + mr / beta) * upper_incomplete_gamma_scaled(1.0 - mr, beta);
    return t;
}

inline ErgodicTerms rice_terms(double nu, double varrho, int r, double gamma, double series_tol) {
    const double rho2 = varrho * varrho;
    // ||h||^2 / varrho^2 is noncentral chi-squared with 2r degrees of freedom
    // and noncentrality 2 r nu^2 / varrho^2, i.e. a Poisson(lambda/2) mixture
    // of Gamma(r + k, 1) / beta variables.
    const double lambda = 2.0 * r * nu * nu / rho2;
    const double beta = 1.0 / (2.0 * gamma * rho2);

    const auto pw1 = poisson_weights(0.5 * lambda, series_tol);
    UpsilonLadder lad1(r + pw1.kmin, beta);
    double s1 = 0.0;
    for (std::size_t i = 0; i < pw1.w.size(); ++i) {
        if (i > 0) lad1.advance();
        s1 += pw1.w[i] * lad1.value();
    }

    // sigma_1^2 + sigma_2^2 - 2 is gamma times a sum of two independent
    // noncentral chi-squares: degrees of freedom and noncentrality both
    // double, so the mixture index is Poisson(lambda) over shapes 2r + k.
    const auto pw2 = poisson_weights(lambda, series_tol);
    UpsilonLadder lad2(2 * r + pw2.kmin, 2.0 * beta);
    double s2 = 0.0;
    for (std::size_t i = 0; i < pw2.w.size(); ++i) {
        if (i > 0) lad2.advance();
        s2 += pw2.w[i] * lad2.value();
    }

    // e3 factorizes over the two independent hops: the mean factor sits
    // outside the mixture, only E{1/sigma^2} mixes over the Poisson index.
    const double mean_sigma2 = 1.0 + (lambda + 2.0 * r) / (2.0 * beta);
    double q = upper_incomplete_gamma_scaled(1.0 - static_cast<double>(r + pw1.kmin), beta);
    double s3 = pw1.w[0] * q;
    for (std::size_t i = 1; i < pw1.w.size(); ++i) {
        const int k = pw1.kmin + static_cast<int>(i) - 1; // index being left
        q = beta * (q - 1.0) / static_cast<double>(-r - k);
        s3 += pw1.w[i] * q;
    }

    ErgodicTerms t;
    t.e1 = s1 / ln2;
    t.e2 = 1.0 + s2 / ln2;
    t.e3 = mean_sigma2 * s3;
    return t;
}

} // namespace detail

inline ErgodicTerms ergodic_terms(const FadingSpec &spec, double gamma, double series_tol = 1e-8) {
    validate(spec);
    if (!(gamma > 0.0)) throw std::domain_error("ergodic_terms: gamma must be positive");
    if (!(series_tol > 0.0) || series_tol > 1e-3)
        throw std::domain_error("ergodic_terms: series_tol must be in (0, 1e-3]");
    switch (spec.kind) {
    case Fading::nakagami: return detail::nakagami_terms(spec.m, spec.omega, spec.r, gamma);
    case Fading::rayleigh: return detail::nakagami_terms(1.0, 2.0 * spec.varrho * spec.varrho, spec.r, gamma);
    case Fading::rice: return detail::rice_terms(spec.nu, spec.varrho, spec.r, gamma, series_tol);
    }
    throw std::logic_error("ergodic_terms: unreachable");
}

// Two-hop (t = 2) ergodic capacity assembled from the three expectations.
inline CapacityEstimate ergodic_capacity(const FadingSpec &spec, double gamma, double series_tol = 1e-8) {
    const auto t = ergodic_terms(spec, gamma, series_tol);
    const double c = 1.0 + 2.0 * t.e1 - t.e2 - (1.0 - t.e3) / ln2;
    return {c, Method::order2, std::numeric_limits<double>::quiet_NaN()};
}

} // namespace imcap

#endif
