// SPDX-License-Identifier: MIT

#ifndef IMCAP_SPECFUN_HPP
#define IMCAP_SPECFUN_HPP

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "imcap/errors.hpp"

namespace imcap {

namespace detail {

inline constexpr double dbl_eps = 2.220446049250313e-16;

// E1(x) by power series, for x < 1.5
inline double e1_series(double x) {
    constexpr double egamma = 0.57721566490153286060651209008240;
    double sum = 0.0, term = 1.0;
    for (int k = 1; k < 80; ++k) {
        term *= x / k;
        const double add = term / k;
        sum += (k % 2 ? add : -add);
        if (add < 1e-18 * (std::abs(sum) + 1.0)) break;
    }
    return -egamma - std::log(x) + sum;
}

// Modified Lentz evaluation of the continued fraction F with
// Gamma(s,x) = e^{-x} x^s F. Reliable for x >= ~1.5 and x not far below |s|.
inline double gamma_cf(double s, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - s;
    double c = 1.0 / tiny;
    double d = 1.0 / (b == 0.0 ? tiny : b);
    double f = d;
    for (int i = 1; i <= 20000; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - s);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        f *= delta;
        if (std::abs(delta - 1.0) < 4.0 * dbl_eps) return f;
    }
    throw accuracy_error("incomplete gamma: continued fraction did not converge",
                         std::numeric_limits<double>::quiet_NaN());
}

// T = sum_{n>=0} x^n / (s (s+1) ... (s+n)); gamma_low(s,x) = x^s e^{-x} T
inline double gamma_series_t(double s, double x) {
    double term = 1.0 / s, sum = term;
    for (int n = 1; n < 10000; ++n) {
        term *= x / (s + n);
        sum += term;
        if (std::abs(term) < dbl_eps * std::abs(sum)) return sum;
    }
    throw accuracy_error("incomplete gamma: series did not converge", std::numeric_limits<double>::quiet_NaN());
}

// ln Gamma(s,x) for s > 0, x >= 0
inline double log_gamma_upper_pos(double s, double x) {
    if (x == 0.0) return std::lgamma(s);
    const double threshold = (s <= 1.0) ? 1.5 : s + 1.0;
    if (x >= threshold) return -x + s * std::log(x) + std::log(gamma_cf(s, x));
    const double lg = std::lgamma(s);
    const double log_low = s * std::log(x) - x + std::log(gamma_series_t(s, x));
    const double ratio = std::exp(log_low - lg);
    if (ratio >= 1.0) return -std::numeric_limits<double>::infinity();
    return lg + std::log1p(-ratio);
}

// Q(s,x) = x^{1-s} e^x Gamma(s,x) for s <= 1, x > 0. Bounded in (0, 1] for
// s <= 1, so the downward recurrence Q(s-1) = x (Q(s) - 1)/(s - 1) is stable.
inline double gamma_q_le1(double s, double x) {
    if (s == 1.0) return 1.0; // Gamma(1,x) = e^{-x}
    if (x >= 1.5 && x >= -s + 2.0) {
        // direct continued fraction, no recurrence needed
        return x * gamma_cf(s, x);
    }
    double q, cur;
    const double fl = std::floor(s);
    const double frac = s - fl;
    if (frac == 0.0) {
        // integer anchor at s0 = 0 via E1
        const double e1 = (x < 1.5) ? e1_series(x) : std::exp(-x) * gamma_cf(0.0, x);
        q = x * std::exp(x) * e1;
        cur = 0.0;
    } else {
        // fractional anchor in [0.5, 1.5), away from the Gamma(s0 -> 0) blowup
        const double s0 = (frac < 0.5) ? frac + 1.0 : frac;
        if (x >= 1.5) {
            q = x * gamma_cf(s0, x);
        } else {
            const double upper = std::tgamma(s0) - std::pow(x, s0) * std::exp(-x) * gamma_series_t(s0, x);
            q = std::pow(x, 1.0 - s0) * std::exp(x) * upper;
        }
        cur = s0;
    }
    while (cur > s + 0.5) {
        q = x * (q - 1.0) / (cur - 1.0);
        cur -= 1.0;
    }
    return q;
}

// Gauss-Laguerre nodes/weights for weight x^alpha e^{-x}, as the Jacobi-matrix
// eigensystem. Weights are normalized to sum to 1 (the Gamma(alpha+1, 1)
// probability weights), which avoids overflow for large alpha.
inline void laguerre_rule(int n, double alpha, Eigen::VectorXd &x, Eigen::VectorXd &w) {
    Eigen::VectorXd diag(n), sub(n - 1);
    for (int k = 0; k < n; ++k) diag[k] = 2.0 * k + alpha + 1.0;
    for (int k = 1; k < n; ++k) sub[k - 1] = std::sqrt(static_cast<double>(k) * (k + alpha));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    if (es.info() != Eigen::Success)
        throw accuracy_error("laguerre_rule: eigensolver failed", std::numeric_limits<double>::quiet_NaN());
    x = es.eigenvalues();
    w = es.eigenvectors().row(0).transpose().array().square();
}

// E{ln(1 + x/beta)} for x ~ Gamma(shape, 1), by Gauss-Laguerre with node
// doubling until two consecutive rules agree to tol (relative).
inline double expected_log1p_gamma(double shape, double beta, double tol) {
    if (!(shape > 0.0) || !(beta > 0.0)) throw std::domain_error("expected_log1p_gamma: domain");
    double prev = std::numeric_limits<double>::quiet_NaN();
    double val = 0.0, delta = 0.0;
    Eigen::VectorXd x, w;
    for (int n : {32, 64, 128, 256, 512}) {
        laguerre_rule(n, shape - 1.0, x, w);
        val = 0.0;
        for (int i = 0; i < n; ++i) val += w[i] * std::log1p(x[i] / beta);
        if (!std::isnan(prev)) {
            delta = std::abs(val - prev);
            if (delta <= tol * std::max(std::abs(val), 1e-300)) return val;
        }
        prev = val;
    }
    throw accuracy_error("expected_log1p_gamma: quadrature did not converge",
                         delta / std::max(std::abs(val), 1e-300));
}

struct TrackedSum {
    double value;
    double abs_sum;
};

// sum_{j=0}^{rr-1} (-beta)^j / j!, compensated, with |term| tracking
inline TrackedSum alt_exp_partial(int rr, double beta) {
    double sum = 0.0, comp = 0.0, abss = 0.0, term = 1.0;
    for (int j = 0; j < rr; ++j) {
        const double y = term - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        abss += std::abs(term);
        term *= -beta / (j + 1);
    }
    return {sum, abss};
}

struct UpsTracked {
    double value;
    double abs_sum;
    bool usable;
};

// e^beta Ei(-beta), stable for all beta > 0
inline double exp_scaled_ei_neg(double beta) { return -gamma_q_le1(0.0, beta) / beta; }

} // namespace detail

// Gamma(s, x) = int_x^inf t^{s-1} e^{-t} dt. Domain: |s| <= 200; x > 0, or
// x >= 0 when s > 0. Throws range_error if the value is not representable.
inline double upper_incomplete_gamma(double s, double x) {
    if (std::abs(s) > 200.0) throw std::domain_error("upper_incomplete_gamma: |s| must be <= 200");
    if (!(x >= 0.0)) throw std::domain_error("upper_incomplete_gamma: x must be nonnegative");
    if (x == 0.0) {
        if (s > 0.0) return std::tgamma(s);
        throw std::domain_error("upper_incomplete_gamma: x must be positive for s <= 0");
    }
    double log_val;
    if (s > 0.0) {
        log_val = detail::log_gamma_upper_pos(s, x);
    } else {
        const double q = detail::gamma_q_le1(s, x);
        log_val = std::log(q) + (s - 1.0) * std::log(x) - x;
    }
    if (log_val > 709.0) throw std::range_error("upper_incomplete_gamma: result overflows double");
    return std::exp(log_val);
}

// Q(s,x) = x^{1-s} e^x Gamma(s,x), the scaled form that stays representable
// for large x (and for very negative s where the raw value underflows).
inline double upper_incomplete_gamma_scaled(double s, double x) {
    if (std::abs(s) > 200.0) throw std::domain_error("upper_incomplete_gamma_scaled: |s| must be <= 200");
    if (!(x > 0.0)) throw std::domain_error("upper_incomplete_gamma_scaled: x must be positive");
    if (s <= 1.0) return detail::gamma_q_le1(s, x);
    const double log_q = detail::log_gamma_upper_pos(s, x) + (1.0 - s) * std::log(x) + x;
    if (log_q > 709.0) throw std::range_error("upper_incomplete_gamma_scaled: result overflows double");
    return std::exp(log_q);
}

// Ei(-x) = -Gamma(0, x) for x > 0
inline double ei_neg(double x) {
    if (!(x > 0.0)) throw std::domain_error("ei_neg: x must be positive");
    if (x < 1.5) return -detail::e1_series(x);
    return -std::exp(-x) * detail::gamma_cf(0.0, x);
}

// E_s(rr, beta) = e^beta Ei(-beta) sum_{j=0}^{rr-1} (-beta)^j / j!.
// The partial exponential sum alternates; if its cancellation cannot be
// certified below 1e-8 relative, an accuracy_error is thrown.
inline double e_sub_s(int rr, double beta) {
    if (rr < 1 || rr > 200) throw std::domain_error("e_sub_s: rr must be in [1, 200]");
    if (!(beta > 0.0)) throw std::domain_error("e_sub_s: beta must be positive");
    const auto ts = detail::alt_exp_partial(rr, beta);
    if (ts.value == 0.0) return 0.0; // exact alternating cancellation (e.g. rr=2, beta=1)
    const double est = detail::dbl_eps * ts.abs_sum / std::abs(ts.value);
    if (est > 1e-8) throw accuracy_error("e_sub_s: catastrophic cancellation", est);
    return detail::exp_scaled_ei_neg(beta) * ts.value;
}

namespace detail {

// Closed-form Upsilon with cancellation tracking; usable=false means the
// magnitudes overflow and the caller must use the quadrature route.
inline UpsTracked upsilon_exact(int rr, double beta) {
    const double log_beta = std::log(beta);
    double jsum = 0.0, jcomp = 0.0, jabs = 0.0, lgj = 0.0;
    for (int j = 1; j < rr; ++j) {
        lgj += std::log(static_cast<double>(j)); // ln j!
        const double lt = (j - 1) * log_beta - lgj;
        if (lt > 680.0) return {0.0, 0.0, false};
        double term = std::exp(lt); // (k-1)!/j! (-beta)^{j-k} at k=1
        if ((j - 1) % 2) term = -term;
        double bsum = 0.0, babs = 0.0;
        for (int k = 1; k <= j; ++k) {
            bsum += term;
            babs += std::abs(term);
            term *= k / (-beta);
        }
        const double y = bsum - jcomp;
        const double t = jsum + y;
        jcomp = (t - jsum) - y;
        jsum = t;
        jabs += babs;
    }
    const auto es = alt_exp_partial(rr, beta);
    const double pref = exp_scaled_ei_neg(beta);
    return {jsum - pref * es.value, jabs + std::abs(pref) * es.abs_sum, true};
}

} // namespace detail

// Upsilon(rr, beta) = E{ln(1 + x/beta)} for x ~ Gamma(rr, 1), rr integer.
// Uses the exact finite form when its cancellation is certifiable below 1e-9
// relative, otherwise an internal quadrature evaluation at 1e-10.
inline double upsilon(int rr, double beta) {
    if (rr < 1) throw std::domain_error("upsilon: rr must be >= 1");
    if (!(beta > 0.0)) throw std::domain_error("upsilon: beta must be positive");
    if (rr <= 170) {
        const auto r = detail::upsilon_exact(rr, beta);
        if (r.usable && r.value > 0.0 && detail::dbl_eps * r.abs_sum <= 1e-9 * r.value) return r.value;
    }
    return detail::expected_log1p_gamma(static_cast<double>(rr), beta, 1e-10);
}

// Incremental evaluation of Upsilon(s, beta), Upsilon(s+1, beta), ... .
// advance() extends the finite sums by one shape instead of recomputing them,
// which the Poisson-mixture expectations rely on.
class UpsilonLadder {
  public:
    UpsilonLadder(int first_shape, double beta) : beta_(beta), log_beta_(std::log(beta)) {
        if (first_shape < 1) throw std::domain_error("UpsilonLadder: shape must be >= 1");
        if (!(beta > 0.0)) throw std::domain_error("UpsilonLadder: beta must be positive");
        pref_ = detail::exp_scaled_ei_neg(beta);
        // state at shape 1: empty j-sum, exponential partial has the j=0 term
        shape_ = 1;
        esum_ = 1.0;
        esabs_ = 1.0;
        esterm_ = -beta;
        while (shape_ < first_shape) advance();
    }

    int shape() const { return shape_; }

    void advance() {
        add_block(shape_); // j = current shape joins the double sum
        esum_ += esterm_;
        esabs_ += std::abs(esterm_);
        esterm_ *= -beta_ / (shape_ + 1);
        ++shape_;
    }

    double value() const {
        if (!overflowed_ && shape_ <= 170) {
            const double v = jsum_ - pref_ * esum_;
            const double abss = jabs_ + std::abs(pref_) * esabs_;
            if (v > 0.0 && detail::dbl_eps * abss <= 1e-9 * v) return v;
        }
        return detail::expected_log1p_gamma(static_cast<double>(shape_), beta_, 1e-10);
    }

  private:
    void add_block(int j) {
        lgj_ += std::log(static_cast<double>(j));
        const double lt = (j - 1) * log_beta_ - lgj_;
        if (lt > 680.0) {
            overflowed_ = true;
            return;
        }
        double term = std::exp(lt);
        if ((j - 1) % 2) term = -term;
        double bsum = 0.0, babs = 0.0;
        for (int k = 1; k <= j; ++k) {
            bsum += term;
            babs += std::abs(term);
            term *= k / (-beta_);
        }
        const double y = bsum - jcomp_;
        const double t = jsum_ + y;
        jcomp_ = (t - jsum_) - y;
        jsum_ = t;
        jabs_ += babs;
    }

    int shape_;
    double beta_, log_beta_, pref_;
    double jsum_ = 0.0, jcomp_ = 0.0, jabs_ = 0.0, lgj_ = 0.0;
    double esum_, esabs_, esterm_;
    bool overflowed_ = false;
};

} // namespace imcap

#endif
