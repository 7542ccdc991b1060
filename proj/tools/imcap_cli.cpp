// SPDX-License-Identifier: MIT
//
// Command line front end. Every subcommand resolves its configuration in the
// same order: built-in preset (or plain defaults), then --config FILE, then
// individual flags. The emitted table is byte-identical across runs with the
// same inputs.
//
// Exit codes: 0 all requested cells produced, 2 usage or configuration
// error, 3 a numeric estimate missed its accuracy target (cell left as nan).

#include <complex>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "imcap/imcap.hpp"
#include "presets_gen.hpp"

namespace {

using namespace imcap;

// --------------------------------------------------------------------------
// Configuration plumbing

SweepConfig base_config(const char *preset_text, const std::string &preset_name, const std::string &config_path) {
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw std::runtime_error("config '" + config_path + "': cannot open file");
        return parse_config(in, config_path);
    }
    std::istringstream in(preset_text);
    return parse_config(in, preset_name);
}

// Flag values shared by the sweep-style subcommands. A flag only overrides
// the config when it was actually given, so "was it set" is checked through
// CLI11 rather than through sentinel values.
struct CommonOpts {
    std::string config;
    std::string snr;
    std::string methods;
    std::string format;
    std::string output;
    std::string tap_profile;
    std::int64_t draws = 0;
    std::int64_t mc_samples = 0;
    std::uint64_t seed = 0;
};

void add_common(CLI::App *sub, CommonOpts &c, bool with_methods = true) {
    sub->add_option("--config", c.config, "Config file replacing the built-in preset")->check(CLI::ExistingFile);
    sub->add_option("--snr", c.snr, "SNR grid in dB: START:STEP:STOP or a comma list");
    if (with_methods)
        sub->add_option("--methods", c.methods, "Comma list of order0, order2, order4, integral, mc");
    sub->add_option("--draws", c.draws, "Number of channel draws to average");
    sub->add_option("--mc-samples", c.mc_samples, "Samples per Monte Carlo estimate");
    sub->add_option("--seed", c.seed, "Base RNG seed");
    sub->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--output", c.output, "Output path, '-' for stdout");
    sub->add_option("--tap-profile", c.tap_profile, "Delay profile file replacing the built-in taps")
        ->check(CLI::ExistingFile);
}

void apply_common(const CLI::App *sub, const CommonOpts &c, SweepConfig &cfg, bool with_methods = true) {
    if (sub->count("--snr")) cfg.snr_db = parse_snr_spec(c.snr);
    if (with_methods && sub->count("--methods")) cfg.methods = parse_method_list(c.methods);
    if (sub->count("--draws")) cfg.draws = c.draws;
    if (sub->count("--mc-samples")) cfg.mc_samples = c.mc_samples;
    if (sub->count("--seed")) cfg.seed = c.seed;
    if (sub->count("--format")) cfg.format = c.format == "json" ? OutFormat::json : OutFormat::csv;
    if (sub->count("--output")) cfg.output = c.output;
    if (sub->count("--tap-profile")) cfg.tap_profile = c.tap_profile;
}

int emit_table(const SweepTable &table, const SweepConfig &cfg) {
    std::ofstream file;
    std::ostream *out = &std::cout;
    if (cfg.output != "-") {
        file.open(cfg.output, std::ios::binary);
        if (!file) {
            std::cerr << "error: cannot open output file '" << cfg.output << "'\n";
            return 2;
        }
        out = &file;
    }
    write_table(table, cfg.format, *out);
    out->flush();
    if (!*out) {
        std::cerr << "error: failed writing to '" << cfg.output << "'\n";
        return 2;
    }
    for (const auto &flag : table.accuracy_flags) std::cerr << "warning: " << flag << '\n';
    return table.all_cells_produced ? 0 : 3;
}

// --------------------------------------------------------------------------
// Matrix files: whitespace separated complex entries, one matrix row per
// line, '#' comments. Entries look like 1.5, -2e-3, 1+2i, 3i, 2.5-i, i.

std::complex<double> parse_complex_token(const std::string &tok) {
    const auto bad = [&]() -> std::complex<double> {
        throw std::invalid_argument("bad complex entry '" + tok + "'");
    };
    const char *s = tok.c_str();
    char *end = nullptr;
    const double a = std::strtod(s, &end);
    if (end == s) {
        double sign = 1.0;
        const char *p = s;
        if (*p == '+') ++p;
        else if (*p == '-') {
            sign = -1.0;
            ++p;
        }
        if (std::string(p) == "i") return {0.0, sign};
        return bad();
    }
    if (*end == '\0') return {a, 0.0};
    if (std::string(end) == "i") return {0.0, a};
    const char *rest = end;
    if (*rest != '+' && *rest != '-') return bad();
    char *end2 = nullptr;
    const double b = std::strtod(rest, &end2);
    if (end2 == rest) {
        if (std::string(rest + 1) == "i") return {a, *rest == '-' ? -1.0 : 1.0};
        return bad();
    }
    if (std::string(end2) == "i") return {a, b};
    return bad();
}

ChannelMatrix load_matrix(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("matrix file '" + path + "': cannot open file");
    std::vector<std::vector<std::complex<double>>> rows;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::vector<std::complex<double>> row;
        std::string tok;
        while (ls >> tok) {
            std::complex<double> v;
            try {
                v = parse_complex_token(tok);
            } catch (const std::invalid_argument &e) {
                throw std::runtime_error("matrix file '" + path + "' row " + std::to_string(rows.size() + 1) +
                                         " column " + std::to_string(row.size() + 1) + ": " + e.what());
            }
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                throw std::runtime_error("matrix file '" + path + "' row " + std::to_string(rows.size() + 1) +
                                         " column " + std::to_string(row.size() + 1) + ": entry is not finite");
            row.push_back(v);
        }
        if (row.empty()) continue;
        if (!rows.empty() && row.size() != rows.front().size())
            throw std::runtime_error("matrix file '" + path + "' row " + std::to_string(rows.size() + 1) +
                                     ": expected " + std::to_string(rows.front().size()) + " entries, got " +
                                     std::to_string(row.size()));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error("matrix file '" + path + "': no entries");
    ChannelMatrix h(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows.front().size(); ++j) h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return h;
}

// --------------------------------------------------------------------------
// Subcommand bodies

int run_sweep_like(const SweepConfig &cfg) { return emit_table(run_sweep(cfg), cfg); }

int run_instcap(const SweepConfig &cfg, const std::string &matrix_path, double gamma) {
    const ChannelMatrix h = load_matrix(matrix_path);
    const SigmaVector s = sigma_vector(h, gamma);

    SweepTable table;
    table.columns.push_back("gamma");
    std::vector<double> row{gamma};
    bool has_mc = false;
    double mc_se = 0.0;
    for (Method m : cfg.methods) {
        table.columns.push_back(method_column_name(m));
        double value = 0.0;
        switch (m) {
        case Method::order0: value = capacity_closed_form(s, 0).value; break;
        case Method::order2: value = capacity_closed_form(s, 2).value; break;
        case Method::order4: value = capacity_closed_form(s, 4).value; break;
        case Method::quadrature: value = mutual_info_symbol(s) + index_mi_quadrature(s, cfg.quad); break;
        case Method::montecarlo: {
            const auto est = index_mi_montecarlo(s, cfg.mc_samples, derive_stream(cfg.seed, stream_tag::generic, 0));
            value = mutual_info_symbol(s) + est.value;
            has_mc = true;
            mc_se = est.std_error;
            break;
        }
        }
        row.push_back(value);
    }
    if (has_mc) {
        table.columns.push_back("mc_se");
        row.push_back(mc_se);
    }
    table.rows.push_back(std::move(row));
    return emit_table(table, cfg);
}

int run_ergodic_closed(const FadingSpec &spec, double series_tol, const std::vector<double> &snr_db,
                       const SweepConfig &cfg) {
    SweepTable table;
    table.columns = {"snr_db", "capacity", "e1", "e2", "e3"};
    for (double snr : snr_db) {
        const double gamma = std::pow(10.0, snr / 10.0);
        const ErgodicTerms terms = ergodic_terms(spec, gamma, series_tol);
        const double cap = ergodic_capacity(spec, gamma, series_tol).value;
        table.rows.push_back({snr, cap, terms.e1, terms.e2, terms.e3});
    }
    return emit_table(table, cfg);
}

int run_error_analysis(SweepConfig cfg) {
    cfg.methods = {Method::order0, Method::order2, Method::order4, Method::quadrature};
    const SweepTable sweep = run_sweep(cfg);

    const auto n = static_cast<Eigen::Index>(sweep.rows.size());
    Eigen::VectorXd grid(n), ref(n);
    std::vector<Eigen::VectorXd> approx(3, Eigen::VectorXd(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto &row = sweep.rows[static_cast<std::size_t>(i)];
        grid[i] = row[0];
        for (int k = 0; k < 3; ++k) approx[static_cast<std::size_t>(k)][i] = row[static_cast<std::size_t>(k) + 1];
        ref[i] = row[4];
    }

    SweepTable out;
    out.columns = {"order", "normalized_error", "mse"};
    const double orders[3] = {0.0, 2.0, 4.0};
    for (std::size_t k = 0; k < 3; ++k) {
        const CurvePair pair{grid, approx[k], ref};
        out.rows.push_back({orders[k], normalized_error(pair), mean_squared_error(pair)});
    }
    out.accuracy_flags = sweep.accuracy_flags;
    out.all_cells_produced = sweep.all_cells_produced;
    return emit_table(out, cfg);
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Capacity tables for index-modulated transmission"};
    app.require_subcommand(1);

    // sweep: fully config-driven SNR sweep over a channel ensemble.
    auto *sweep_sub = app.add_subcommand("sweep", "Average capacity estimates over an SNR grid");
    CommonOpts sweep_opts;
    add_common(sweep_sub, sweep_opts);

    // instcap: closed forms and references for one explicit channel matrix.
    auto *inst_sub = app.add_subcommand("instcap", "Capacity of a single channel matrix");
    std::string inst_matrix;
    double inst_gamma = 1.0;
    CommonOpts inst_opts;
    inst_sub->add_option("--matrix", inst_matrix, "File with complex entries, one matrix row per line")
        ->required()
        ->check(CLI::ExistingFile);
    inst_sub->add_option("--gamma", inst_gamma, "Per-antenna SNR (linear)")->required()->check(CLI::NonNegativeNumber);
    inst_sub->add_option("--methods", inst_opts.methods, "Comma list of order0, order2, order4, integral, mc");
    inst_sub->add_option("--mc-samples", inst_opts.mc_samples, "Samples for the mc method");
    inst_sub->add_option("--seed", inst_opts.seed, "Base RNG seed");
    inst_sub->add_option("--format", inst_opts.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    inst_sub->add_option("--output", inst_opts.output, "Output path, '-' for stdout");

    // ergodic-closed: fading-averaged capacity from the series expressions.
    auto *erg_sub = app.add_subcommand("ergodic-closed", "Closed-form ergodic capacity over an SNR grid");
    std::string erg_fading = "rayleigh", erg_snr = "-10:5:30";
    FadingSpec erg_spec;
    double erg_series_tol = 1e-8;
    CommonOpts erg_opts;
    erg_sub->add_option("--fading", erg_fading, "Fading family")
        ->check(CLI::IsMember({"rayleigh", "rice", "nakagami"}));
    erg_sub->add_option("--r", erg_spec.r, "Receive dimension");
    erg_sub->add_option("--varrho", erg_spec.varrho, "Per-component scale (rayleigh, rice)");
    erg_sub->add_option("--nu", erg_spec.nu, "Per-component specular mean (rice)");
    erg_sub->add_option("--m", erg_spec.m, "Shape parameter (nakagami)");
    erg_sub->add_option("--omega", erg_spec.omega, "Spread parameter (nakagami)");
    erg_sub->add_option("--series-tol", erg_series_tol, "Series truncation tolerance");
    erg_sub->add_option("--snr", erg_snr, "SNR grid in dB: START:STEP:STOP or a comma list");
    erg_sub->add_option("--format", erg_opts.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    erg_sub->add_option("--output", erg_opts.output, "Output path, '-' for stdout");

    // error-analysis: closed-form orders against the integral reference.
    auto *err_sub = app.add_subcommand("error-analysis", "Curve-level error of each closed-form order");
    CommonOpts err_opts;
    add_common(err_sub, err_opts, /*with_methods=*/false);

    // smod: spatial index modulation study (iid columns, receive correlation).
    auto *smod_sub = app.add_subcommand("smod", "Spatial-domain study preset");
    CommonOpts smod_opts;
    int smod_t = 0, smod_r = 0;
    std::string smod_corr;
    add_common(smod_sub, smod_opts);
    smod_sub->add_option("--t", smod_t, "Number of transmit candidates");
    smod_sub->add_option("--r", smod_r, "Receive dimension");
    smod_sub->add_option("--correlation", smod_corr, "Antenna correlation level")
        ->check(CLI::IsMember({"none", "medium", "high"}));

    // pmod: polarization study (dual-polarized 2x2 channel).
    auto *pmod_sub = app.add_subcommand("pmod", "Polarization-domain study preset");
    CommonOpts pmod_opts;
    double pmod_gain = 0.0, pmod_kv = 0.0, pmod_kh = 0.0, pmod_xpd = 0.0, pmod_corr = 0.0;
    add_common(pmod_sub, pmod_opts);
    pmod_sub->add_option("--specular-gain", pmod_gain, "Common specular amplitude added to both copolar taps");
    pmod_sub->add_option("--k-v", pmod_kv, "Vertical Rician K-factor (linear)");
    pmod_sub->add_option("--k-h", pmod_kh, "Horizontal Rician K-factor (linear)");
    pmod_sub->add_option("--xpd", pmod_xpd, "Cross-polar discrimination in dB");
    pmod_sub->add_option("--diffuse-corr", pmod_corr, "Correlation of the diffuse components");

    // fmod: frequency study (tapped delay line, spaced subcarriers).
    auto *fmod_sub = app.add_subcommand("fmod", "Frequency-domain study preset");
    CommonOpts fmod_opts;
    int fmod_sep = 0, fmod_nsc = 0;
    double fmod_spacing = 0.0;
    add_common(fmod_sub, fmod_opts);
    fmod_sub->add_option("--separation-rb", fmod_sep, "Subcarrier separation in resource blocks");
    fmod_sub->add_option("--n-subcarriers", fmod_nsc, "Occupied band size in subcarriers");
    fmod_sub->add_option("--spacing-hz", fmod_spacing, "Subcarrier spacing in Hz");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*sweep_sub) {
            SweepConfig cfg;
            if (!sweep_opts.config.empty()) cfg = base_config(nullptr, "", sweep_opts.config);
            apply_common(sweep_sub, sweep_opts, cfg);
            return run_sweep_like(cfg);
        }
        if (*inst_sub) {
            SweepConfig cfg;
            cfg.methods = {Method::order2};
            if (inst_sub->count("--methods")) cfg.methods = parse_method_list(inst_opts.methods);
            if (inst_sub->count("--mc-samples")) cfg.mc_samples = inst_opts.mc_samples;
            if (inst_sub->count("--seed")) cfg.seed = inst_opts.seed;
            if (inst_sub->count("--format")) cfg.format = inst_opts.format == "json" ? OutFormat::json : OutFormat::csv;
            if (inst_sub->count("--output")) cfg.output = inst_opts.output;
            if (cfg.mc_samples < 1000) throw std::domain_error("mc_samples must be >= 1000");
            return run_instcap(cfg, inst_matrix, inst_gamma);
        }
        if (*erg_sub) {
            if (erg_fading == "rice") erg_spec.kind = Fading::rice;
            else if (erg_fading == "nakagami") erg_spec.kind = Fading::nakagami;
            else erg_spec.kind = Fading::rayleigh;
            SweepConfig cfg;
            if (erg_sub->count("--format")) cfg.format = erg_opts.format == "json" ? OutFormat::json : OutFormat::csv;
            if (erg_sub->count("--output")) cfg.output = erg_opts.output;
            return run_ergodic_closed(erg_spec, erg_series_tol, parse_snr_spec(erg_snr), cfg);
        }
        if (*err_sub) {
            SweepConfig cfg = base_config(presets::error_study, "builtin:error_study", err_opts.config);
            apply_common(err_sub, err_opts, cfg, /*with_methods=*/false);
            return run_error_analysis(cfg);
        }
        if (*smod_sub) {
            SweepConfig cfg = base_config(presets::smod, "builtin:smod", smod_opts.config);
            apply_common(smod_sub, smod_opts, cfg);
            if (smod_sub->count("--t")) {
                cfg.ensemble.t = smod_t;
                cfg.ensemble.etu.t = smod_t;
            }
            if (smod_sub->count("--r")) {
                cfg.ensemble.fading.r = smod_r;
                cfg.ensemble.etu.r = smod_r;
            }
            if (smod_sub->count("--correlation")) cfg.ensemble.correlation = parse_correlation_level(smod_corr);
            return run_sweep_like(cfg);
        }
        if (*pmod_sub) {
            SweepConfig cfg = base_config(presets::pmod_specular, "builtin:pmod_specular", pmod_opts.config);
            apply_common(pmod_sub, pmod_opts, cfg);
            if (pmod_sub->count("--specular-gain")) cfg.ensemble.dualpol.specular_gain = pmod_gain;
            if (pmod_sub->count("--k-v")) cfg.ensemble.dualpol.k_v = pmod_kv;
            if (pmod_sub->count("--k-h")) cfg.ensemble.dualpol.k_h = pmod_kh;
            if (pmod_sub->count("--xpd")) cfg.ensemble.dualpol.xpd_db = pmod_xpd;
            if (pmod_sub->count("--diffuse-corr")) cfg.ensemble.dualpol.diffuse_corr = pmod_corr;
            return run_sweep_like(cfg);
        }
        if (*fmod_sub) {
            SweepConfig cfg = base_config(presets::fmod, "builtin:fmod", fmod_opts.config);
            apply_common(fmod_sub, fmod_opts, cfg);
            if (fmod_sub->count("--separation-rb")) cfg.ensemble.etu.separation_rb = fmod_sep;
            if (fmod_sub->count("--n-subcarriers")) cfg.ensemble.etu.n_subcarriers = fmod_nsc;
            if (fmod_sub->count("--spacing-hz")) cfg.ensemble.etu.spacing_hz = fmod_spacing;
            return run_sweep_like(cfg);
        }
    } catch (const accuracy_error &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
