// SPDX-License-Identifier: MIT

#ifndef IMCAP_CHANNELS_HPP
#define IMCAP_CHANNELS_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <exception>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "imcap/core.hpp"
#include "imcap/ergodic.hpp"
#include "imcap/errors.hpp"
#include "imcap/instcap.hpp"
#include "imcap/reference.hpp"
#include "imcap/rng.hpp"

namespace imcap {

// ---------------------------------------------------------------------------
// Antenna correlation
// ---------------------------------------------------------------------------

enum class CorrelationLevel { none, medium, high };

enum class Side { transmit, receive };

struct CorrelationProfile {
    CorrelationLevel level;
    double alpha;  // transmit-side base
    double beta_c; // receive-side base
};

inline CorrelationProfile correlation_profile(CorrelationLevel level) {
    switch (level) {
    case CorrelationLevel::none: return {level, 0.0, 0.0};
    case CorrelationLevel::medium: return {level, 0.3, 0.9};
    case CorrelationLevel::high: return {level, 0.9, 0.9};
    }
    throw std::logic_error("correlation_profile: unreachable");
}

inline CorrelationLevel parse_correlation_level(const std::string &name) {
    if (name == "none") return CorrelationLevel::none;
    if (name == "medium") return CorrelationLevel::medium;
    if (name == "high") return CorrelationLevel::high;
    throw std::invalid_argument("correlation level must be none, medium or high, got '" + name + "'");
}

inline const char *correlation_level_name(CorrelationLevel level) {
    switch (level) {
    case CorrelationLevel::none: return "none";
    case CorrelationLevel::medium: return "medium";
    case CorrelationLevel::high: return "high";
    }
    return "unknown";
}

// Tabulated correlation matrix for 1, 2 or 4 antennas: entrywise base^E with
// the fixed exponent pattern {0, 1/9, 4/9, 1}. base^0 is 1 even at base 0,
// so level none yields the exact identity.
inline Eigen::MatrixXcd correlation_matrix(CorrelationLevel level, int n, Side side) {
    const auto prof = correlation_profile(level);
    const double base = (side == Side::transmit) ? prof.alpha : prof.beta_c;
    if (n == 1) return Eigen::MatrixXcd::Identity(1, 1);
    if (n == 2) {
        Eigen::MatrixXcd m(2, 2);
        m << 1.0, base, base, 1.0;
        return m;
    }
    if (n == 4) {
        const double e1 = 1.0 / 9.0, e4 = 4.0 / 9.0;
        const double exps[4][4] = {{0.0, e1, e4, 1.0}, {e1, 0.0, e1, e4}, {e4, e1, 0.0, e1}, {1.0, e4, e1, 0.0}};
        Eigen::MatrixXcd m(4, 4);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) m(i, j) = std::pow(base, exps[i][j]);
        return m;
    }
    throw std::invalid_argument("correlation_matrix: supported sizes are 1, 2 and 4");
}

// R_rx^{1/2} H R_tx^{1/2} with Hermitian principal square roots. Eigenvalues
// below -1e-10 mean the matrix is not a correlation matrix; tiny negatives
// are clipped to zero.
inline ChannelMatrix apply_kronecker(const ChannelMatrix &h, const Eigen::MatrixXcd &r_tx,
                                     const Eigen::MatrixXcd &r_rx) {
    if (r_tx.rows() != r_tx.cols() || r_tx.rows() != h.cols())
        throw std::domain_error("apply_kronecker: transmit correlation size must match columns of H");
    if (r_rx.rows() != r_rx.cols() || r_rx.rows() != h.rows())
        throw std::domain_error("apply_kronecker: receive correlation size must match rows of H");

    auto sqrt_psd = [](const Eigen::MatrixXcd &r, const char *side_name) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(r);
        if (es.info() != Eigen::Success) throw std::runtime_error("apply_kronecker: eigensolver failed");
        Eigen::VectorXd ev = es.eigenvalues();
        for (Eigen::Index i = 0; i < ev.size(); ++i) {
            if (ev[i] < -1e-10)
                throw std::domain_error(std::string("apply_kronecker: ") + side_name +
                                        " correlation matrix is not positive semidefinite");
            ev[i] = std::sqrt(std::max(ev[i], 0.0));
        }
        return Eigen::MatrixXcd(es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint());
    };

    ChannelMatrix out = h;
    if (!r_rx.isIdentity(0.0)) out = sqrt_psd(r_rx, "receive") * out;
    if (!r_tx.isIdentity(0.0)) out = out * sqrt_psd(r_tx, "transmit");
    return out;
}

// ---------------------------------------------------------------------------
// I.i.d. fading generator
// ---------------------------------------------------------------------------

// r x t matrix of independent entries following the given fading law. Entries
// are drawn column by column, row-major inside a column, so the layout of the
// draw sequence is part of the determinism contract.
inline ChannelMatrix gen_iid(const FadingSpec &spec, int t, std::uint64_t seed) {
    validate(spec);
    if (t < 1) throw std::domain_error("gen_iid: t must be >= 1");
    Rng rng(seed);
    ChannelMatrix h(spec.r, t);
    constexpr double two_pi = 6.283185307179586476925286766559;
    for (int l = 0; l < t; ++l) {
        for (int i = 0; i < spec.r; ++i) {
            switch (spec.kind) {
            case Fading::rayleigh: h(i, l) = rng.cnormal(spec.varrho); break;
            case Fading::rice: h(i, l) = rng.cnormal(spec.varrho, spec.nu); break;
            case Fading::nakagami: {
                // Gamma-distributed power with uniform phase; the capacity
                // functionals depend on |h| only, so the phase law is free.
                const double power = rng.gamma(spec.m, spec.omega / spec.m);
                const double phase = two_pi * rng.uniform();
                h(i, l) = std::polar(std::sqrt(power), phase);
                break;
            }
            }
        }
    }
    return h;
}

// ---------------------------------------------------------------------------
// Frequency-selective (tapped delay line) generator
// ---------------------------------------------------------------------------

struct Tap {
    double delay_ns;
    double power_db;
};

// Extended Typical Urban power-delay profile (3GPP TS 36.101 Annex B.2):
// 9 taps, delays 0..5000 ns, relative powers -7..0 dB. Normalized to unit
// total power before use.
inline std::vector<Tap> etu_taps() {
    return {{0.0, -1.0},    {50.0, -1.0},   {120.0, -1.0}, {200.0, 0.0},  {230.0, 0.0},
            {500.0, 0.0},   {1600.0, -3.0}, {2300.0, -5.0}, {5000.0, -7.0}};
}

struct EtuSpec {
    int n_subcarriers = 600;
    double spacing_hz = 15000.0;
    int separation_rb = 1; // 1 resource block = 180 kHz
    int r = 2;             // receive dimension (independent tap draws)
    int t = 2;             // number of selected subcarriers
    std::vector<Tap> taps = etu_taps();
};

inline void validate(const EtuSpec &spec) {
    if (spec.n_subcarriers < 1) throw std::domain_error("EtuSpec: n_subcarriers must be >= 1");
    if (!(spec.spacing_hz > 0.0)) throw std::domain_error("EtuSpec: spacing_hz must be positive");
    if (spec.separation_rb < 0) throw std::domain_error("EtuSpec: separation_rb must be >= 0");
    if (spec.r < 1 || spec.t < 1) throw std::domain_error("EtuSpec: r and t must be >= 1");
    if (spec.taps.empty()) throw std::domain_error("EtuSpec: tap profile is empty");
    for (const auto &tap : spec.taps)
        if (!std::isfinite(tap.delay_ns) || tap.delay_ns < 0.0 || !std::isfinite(tap.power_db))
            throw std::domain_error("EtuSpec: taps must have finite power and nonnegative delay");
}

// Subcarrier step between selected columns.
inline int etu_separation_subcarriers(const EtuSpec &spec) {
    return static_cast<int>(std::llround(spec.separation_rb * 180000.0 / spec.spacing_hz));
}

// "delay_ns power_db" per line; '#' starts a comment.
inline std::vector<Tap> load_tap_profile(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("tap profile '" + path + "': cannot open file");
    std::vector<Tap> taps;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        double delay, power;
        if (!(ls >> delay)) {
            std::string word;
            std::istringstream probe(line);
            if (!(probe >> word)) continue; // blank line
            throw std::runtime_error("tap profile '" + path + "' line " + std::to_string(lineno) +
                                     ": expected numeric delay_ns");
        }
        if (!(ls >> power))
            throw std::runtime_error("tap profile '" + path + "' line " + std::to_string(lineno) +
                                     ": expected numeric power_db after delay");
        std::string extra;
        if (ls >> extra)
            throw std::runtime_error("tap profile '" + path + "' line " + std::to_string(lineno) +
                                     ": unexpected trailing token '" + extra + "'");
        taps.push_back({delay, power});
    }
    if (taps.empty()) throw std::runtime_error("tap profile '" + path + "': no taps found");
    return taps;
}

// Columns are the frequency responses of one tapped-delay-line draw at t
// subcarriers spaced separation_rb resource blocks apart; rows are
// independent draws of the tap gains. Per-subcarrier average power is the
// (normalized) total tap power, i.e. exactly 1.
inline ChannelMatrix gen_etu_fmod(const EtuSpec &spec, std::uint64_t seed) {
    validate(spec);
    const int sep_sc = etu_separation_subcarriers(spec);
    if ((static_cast<long long>(spec.t) - 1) * sep_sc > spec.n_subcarriers - 1)
        throw std::domain_error("gen_etu_fmod: selected subcarriers fall outside the band");

    const std::size_t np = spec.taps.size();
    std::vector<double> power(np), tau(np);
    double total = 0.0;
    for (std::size_t p = 0; p < np; ++p) {
        power[p] = std::pow(10.0, spec.taps[p].power_db / 10.0);
        tau[p] = spec.taps[p].delay_ns * 1e-9;
        total += power[p];
    }
    for (auto &pw : power) pw /= total;

    Rng rng(seed);
    std::vector<std::complex<double>> gains(static_cast<std::size_t>(spec.r) * np);
    for (int j = 0; j < spec.r; ++j)
        for (std::size_t p = 0; p < np; ++p) gains[j * np + p] = rng.cnormal(std::sqrt(power[p] / 2.0));

    constexpr double two_pi = 6.283185307179586476925286766559;
    ChannelMatrix h(spec.r, spec.t);
    for (int c = 0; c < spec.t; ++c) {
        const double freq = static_cast<double>(c) * sep_sc * spec.spacing_hz;
        for (int j = 0; j < spec.r; ++j) {
            std::complex<double> acc = 0.0;
            for (std::size_t p = 0; p < np; ++p)
                acc += gains[j * np + p] * std::polar(1.0, -two_pi * freq * tau[p]);
            h(j, c) = acc;
        }
    }
    return h;
}

// ---------------------------------------------------------------------------
// Dual-polarization generator
// ---------------------------------------------------------------------------

// Parametric two-polarization channel: a deterministic direct ray per
// polarization (Ricean K-factors k_v, k_h), an optional deterministic
// specular ray in phase quadrature with it, and a diffuse part whose
// cross-polar leakage is set by xpd_db and whose inter-polarization
// correlation is diffuse_corr. Average column power is 1 + specular_gain^2.
struct DualPolSpec {
    double k_v = 15.0;
    double k_h = 12.0;
    double xpd_db = 12.0;
    double specular_gain = 0.0;
    double diffuse_corr = 0.2;
};

inline void validate(const DualPolSpec &spec) {
    if (!(spec.k_v >= 0.0) || !(spec.k_h >= 0.0)) throw std::domain_error("DualPolSpec: K-factors must be >= 0");
    if (!std::isfinite(spec.xpd_db)) throw std::domain_error("DualPolSpec: xpd_db must be finite");
    if (!(spec.specular_gain >= 0.0)) throw std::domain_error("DualPolSpec: specular_gain must be >= 0");
    if (!(spec.diffuse_corr >= 0.0) || spec.diffuse_corr >= 1.0)
        throw std::domain_error("DualPolSpec: diffuse_corr must be in [0, 1)");
}

inline ChannelMatrix gen_dualpol(const DualPolSpec &spec, std::uint64_t seed) {
    validate(spec);
    Rng rng(seed);
    const double xpd = std::pow(10.0, spec.xpd_db / 10.0);
    const double co = std::sqrt(xpd / (1.0 + xpd)); // co-polar share of diffuse power
    const double cx = std::sqrt(1.0 / (1.0 + xpd)); // cross-polar share
    const double comp_sd = std::sqrt(0.5);          // unit-power complex Gaussians

    const std::complex<double> u1 = rng.cnormal(comp_sd);
    const std::complex<double> u2 = rng.cnormal(comp_sd);
    const std::complex<double> v1 = rng.cnormal(comp_sd);
    const std::complex<double> v2 = rng.cnormal(comp_sd);
    const double rho = spec.diffuse_corr;
    const double orth = std::sqrt(1.0 - rho * rho);
    const std::complex<double> w1 = rho * u1 + orth * v1;
    const std::complex<double> w2 = rho * u2 + orth * v2;

    const double sv = std::sqrt(1.0 / (spec.k_v + 1.0));
    const double sh = std::sqrt(1.0 / (spec.k_h + 1.0));
    const std::complex<double> quadrature_ray(0.0, spec.specular_gain);

    ChannelMatrix h(2, 2);
    h(0, 0) = std::sqrt(spec.k_v / (spec.k_v + 1.0)) + quadrature_ray + sv * co * u1;
    h(1, 0) = sv * cx * u2;
    h(0, 1) = sh * cx * w1;
    h(1, 1) = std::sqrt(spec.k_h / (spec.k_h + 1.0)) + quadrature_ray + sh * co * w2;
    return h;
}

// ---------------------------------------------------------------------------
// Ensemble dispatch and the Monte-Carlo ergodic estimator
// ---------------------------------------------------------------------------

enum class EnsembleKind { iid, etu, dualpol };

struct EnsembleSpec {
    EnsembleKind kind = EnsembleKind::iid;
    // iid ensembles
    FadingSpec fading;
    int t = 2;
    CorrelationLevel correlation = CorrelationLevel::none;
    // frequency-selective ensembles
    EtuSpec etu;
    // dual-polarization ensembles
    DualPolSpec dualpol;
};

inline void validate(const EnsembleSpec &ens) {
    switch (ens.kind) {
    case EnsembleKind::iid:
        validate(ens.fading);
        if (ens.t < 1) throw std::domain_error("EnsembleSpec: t must be >= 1");
        break;
    case EnsembleKind::etu: validate(ens.etu); break;
    case EnsembleKind::dualpol: validate(ens.dualpol); break;
    }
}

inline int ensemble_t(const EnsembleSpec &ens) {
    switch (ens.kind) {
    case EnsembleKind::iid: return ens.t;
    case EnsembleKind::etu: return ens.etu.t;
    case EnsembleKind::dualpol: return 2;
    }
    return 0;
}

// Draw `index` of the ensemble under `seed`. Each index gets its own derived
// stream, so draws can be evaluated in any order or split across workers
// without changing any of them.
inline ChannelMatrix draw_channel(const EnsembleSpec &ens, std::uint64_t seed, std::uint64_t index) {
    validate(ens);
    const std::uint64_t sub = derive_stream(seed, stream_tag::channel, index);
    switch (ens.kind) {
    case EnsembleKind::iid: {
        ChannelMatrix h = gen_iid(ens.fading, ens.t, sub);
        if (ens.correlation == CorrelationLevel::none) return h;
        return apply_kronecker(h, correlation_matrix(ens.correlation, ens.t, Side::transmit),
                               correlation_matrix(ens.correlation, ens.fading.r, Side::receive));
    }
    case EnsembleKind::etu: return gen_etu_fmod(ens.etu, sub);
    case EnsembleKind::dualpol: return gen_dualpol(ens.dualpol, sub);
    }
    throw std::logic_error("draw_channel: unreachable");
}

namespace detail {

struct McBlock {
    double sum = 0.0;
    double sumsq = 0.0;
};

} // namespace detail

// Ergodic capacity by averaging one instantaneous method over n_draws channel
// draws. Draws are grouped into fixed blocks; workers take blocks round-robin
// and the block partials are merged in block order, so the result is
// bit-identical for every n_workers. Errors are rethrown for the lowest
// failing draw index, which keeps failure behavior scheduling-independent
// too.
inline CapacityEstimate ergodic_mc(const EnsembleSpec &ens, double gamma, Method method, std::int64_t n_draws,
                                   std::uint64_t seed, int n_workers = 1,
                                   const QuadratureSettings &settings = {}) {
    validate(ens);
    if (n_draws < 100) throw std::domain_error("ergodic_mc: n_draws must be >= 100");
    if (!(gamma >= 0.0)) throw std::domain_error("ergodic_mc: gamma must be nonnegative");
    if (n_workers < 1) throw std::domain_error("ergodic_mc: n_workers must be >= 1");
    if (method == Method::montecarlo)
        throw std::invalid_argument("ergodic_mc: per-draw method must be a closed form or quadrature");

    constexpr std::int64_t block_size = 256;
    const std::int64_t n_blocks = (n_draws + block_size - 1) / block_size;
    std::vector<detail::McBlock> blocks(static_cast<std::size_t>(n_blocks));

    struct Failure {
        std::int64_t draw = -1;
        std::exception_ptr error;
    };
    std::vector<Failure> failures(static_cast<std::size_t>(n_workers));

    auto run_worker = [&](int worker) {
        for (std::int64_t b = worker; b < n_blocks; b += n_workers) {
            auto &out = blocks[static_cast<std::size_t>(b)];
            const std::int64_t first = b * block_size;
            const std::int64_t last = std::min(first + block_size, n_draws);
            for (std::int64_t i = first; i < last; ++i) {
                try {
                    const ChannelMatrix h = draw_channel(ens, seed, static_cast<std::uint64_t>(i));
                    const auto s = sigma_vector(h, gamma);
                    double c;
                    if (method == Method::quadrature)
                        c = mutual_info_symbol(s) + index_mi_quadrature(s, settings);
                    else
                        c = capacity_closed_form(s, method == Method::order0 ? 0 : method == Method::order2 ? 2 : 4)
                                .value;
                    out.sum += c;
                    out.sumsq += c * c;
                } catch (...) {
                    auto &f = failures[static_cast<std::size_t>(worker)];
                    if (f.draw < 0 || i < f.draw) {
                        f.draw = i;
                        f.error = std::current_exception();
                    }
                    return;
                }
            }
        }
    };

    if (n_workers == 1) {
        run_worker(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_workers));
        for (int w = 0; w < n_workers; ++w) pool.emplace_back(run_worker, w);
        for (auto &th : pool) th.join();
    }

    const Failure *worst = nullptr;
    for (const auto &f : failures)
        if (f.draw >= 0 && (!worst || f.draw < worst->draw)) worst = &f;
    if (worst) std::rethrow_exception(worst->error);

    double sum = 0.0, sumsq = 0.0;
    for (const auto &b : blocks) {
        sum += b.sum;
        sumsq += b.sumsq;
    }
    const double n = static_cast<double>(n_draws);
    const double mean = sum / n;
    const double var = std::max(0.0, (sumsq - n * mean * mean) / (n - 1.0));
    return {mean, method, std::sqrt(var / n)};
}

} // namespace imcap

#endif
