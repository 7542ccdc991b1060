// SPDX-License-Identifier: MIT

#ifndef IMCAP_SWEEP_HPP
#define IMCAP_SWEEP_HPP

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "imcap/channels.hpp"
#include "imcap/core.hpp"
#include "imcap/errors.hpp"
#include "imcap/instcap.hpp"
#include "imcap/reference.hpp"
#include "imcap/rng.hpp"

namespace imcap {

enum class OutFormat { csv, json };

// Declarative SNR sweep: which ensemble, which capacity methods, how many
// channel draws, where the table goes. Everything that affects the emitted
// bytes lives here.
struct SweepConfig {
    std::vector<double> snr_db;
    std::vector<Method> methods;
    std::int64_t draws = 2000;
    std::int64_t mc_samples = 100000;
    std::uint64_t seed = 20170301;
    OutFormat format = OutFormat::csv;
    std::string output = "-";
    std::string tap_profile; // empty keeps the built-in profile
    EnsembleSpec ensemble;
    QuadratureSettings quad;
};

inline void validate(const SweepConfig &cfg) {
    if (cfg.snr_db.empty()) throw std::domain_error("SweepConfig: snr grid is empty");
    for (std::size_t i = 1; i < cfg.snr_db.size(); ++i)
        if (!(cfg.snr_db[i] > cfg.snr_db[i - 1])) throw std::domain_error("SweepConfig: snr grid must be ascending");
    if (cfg.methods.empty()) throw std::domain_error("SweepConfig: methods list is empty");
    if (cfg.draws < 1) throw std::domain_error("SweepConfig: draws must be >= 1");
    if (cfg.mc_samples < 1000) throw std::domain_error("SweepConfig: mc_samples must be >= 1000");
    validate(cfg.ensemble);
    validate(cfg.quad);
}

// Method labels as they appear in configs, flags and column headers.
inline const char *method_column_name(Method m) {
    switch (m) {
    case Method::order0: return "order0";
    case Method::order2: return "order2";
    case Method::order4: return "order4";
    case Method::quadrature: return "integral";
    case Method::montecarlo: return "mc";
    }
    return "unknown";
}

inline Method parse_method(const std::string &name) {
    if (name == "order0") return Method::order0;
    if (name == "order2") return Method::order2;
    if (name == "order4") return Method::order4;
    if (name == "integral") return Method::quadrature;
    if (name == "mc") return Method::montecarlo;
    throw std::invalid_argument("unknown method '" + name + "' (expected order0, order2, order4, integral or mc)");
}

namespace detail {

inline std::string trim(const std::string &s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string &s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(trim(cur));
    if (!s.empty() && s.back() == sep) out.push_back("");
    return out;
}

inline double parse_double_str(const std::string &s, const std::string &what) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw std::invalid_argument(what + ": expected a number, got '" + s + "'");
    }
}

inline std::int64_t parse_int_str(const std::string &s, const std::string &what) {
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw std::invalid_argument(what + ": expected an integer, got '" + s + "'");
    }
}

inline std::uint64_t parse_uint_str(const std::string &s, const std::string &what) {
    try {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(s, &pos);
        if (pos != s.size() || s.find('-') != std::string::npos) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw std::invalid_argument(what + ": expected an unsigned integer, got '" + s + "'");
    }
}

} // namespace detail

// "START:STEP:STOP" (inclusive, STEP > 0) or a comma-separated ascending list.
inline std::vector<double> parse_snr_spec(const std::string &spec) {
    std::vector<double> grid;
    if (spec.find(':') != std::string::npos) {
        const auto parts = detail::split(spec, ':');
        if (parts.size() != 3) throw std::invalid_argument("snr spec must be START:STEP:STOP, got '" + spec + "'");
        const double start = detail::parse_double_str(parts[0], "snr start");
        const double step = detail::parse_double_str(parts[1], "snr step");
        const double stop = detail::parse_double_str(parts[2], "snr stop");
        if (!(step > 0.0)) throw std::invalid_argument("snr step must be positive");
        if (stop < start) throw std::invalid_argument("snr stop must be >= start");
        for (int k = 0;; ++k) {
            const double v = start + step * k;
            if (v > stop + 1e-9 * step) break;
            grid.push_back(v);
        }
    } else {
        for (const auto &tok : detail::split(spec, ',')) {
            if (tok.empty()) throw std::invalid_argument("snr list has an empty entry in '" + spec + "'");
            grid.push_back(detail::parse_double_str(tok, "snr value"));
        }
    }
    if (grid.empty()) throw std::invalid_argument("snr spec '" + spec + "' produced an empty grid");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw std::invalid_argument("snr grid must be strictly ascending");
    return grid;
}

inline std::vector<Method> parse_method_list(const std::string &spec) {
    std::vector<Method> out;
    for (const auto &tok : detail::split(spec, ',')) {
        if (tok.empty()) throw std::invalid_argument("methods list has an empty entry in '" + spec + "'");
        const Method m = parse_method(tok);
        for (Method seen : out)
            if (seen == m) throw std::invalid_argument("method '" + tok + "' listed twice");
        out.push_back(m);
    }
    return out;
}

// Flat INI-style config: [sweep] and [ensemble] sections of key = value
// lines, '#' comments. Unknown sections or keys are rejected with the line
// number so typos cannot silently fall back to defaults.
inline SweepConfig parse_config(std::istream &in, const std::string &name) {
    SweepConfig cfg;
    cfg.snr_db.clear();
    cfg.methods.clear();
    std::string line, section;
    int lineno = 0;

    auto fail = [&](const std::string &msg) -> void {
        throw std::runtime_error("config '" + name + "' line " + std::to_string(lineno) + ": " + msg);
    };

    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail("unterminated section header");
            section = detail::trim(line.substr(1, line.size() - 2));
            if (section != "sweep" && section != "ensemble") fail("unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail("expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        if (key.empty()) fail("empty key");
        if (val.empty()) fail("key '" + key + "' has an empty value");
        if (section.empty()) fail("key '" + key + "' appears before any section header");

        try {
            if (section == "sweep") {
                if (key == "snr_db") cfg.snr_db = parse_snr_spec(val);
                else if (key == "methods") cfg.methods = parse_method_list(val);
                else if (key == "draws") cfg.draws = detail::parse_int_str(val, key);
                else if (key == "mc_samples") cfg.mc_samples = detail::parse_int_str(val, key);
                else if (key == "seed") cfg.seed = detail::parse_uint_str(val, key);
                else if (key == "format") {
                    if (val == "csv") cfg.format = OutFormat::csv;
                    else if (val == "json") cfg.format = OutFormat::json;
                    else fail("format must be csv or json, got '" + val + "'");
                } else if (key == "output") cfg.output = val;
                else if (key == "tap_profile") cfg.tap_profile = val;
                else if (key == "rel_tol") cfg.quad.rel_tol = detail::parse_double_str(val, key);
                else if (key == "max_subdivisions")
                    cfg.quad.max_subdivisions = static_cast<int>(detail::parse_int_str(val, key));
                else if (key == "radial_cutoff_sigmas")
                    cfg.quad.radial_cutoff_sigmas = detail::parse_double_str(val, key);
                else fail("unknown key '" + key + "' in [sweep]");
            } else {
                auto &ens = cfg.ensemble;
                if (key == "kind") {
                    if (val == "iid") ens.kind = EnsembleKind::iid;
                    else if (val == "etu") ens.kind = EnsembleKind::etu;
                    else if (val == "dualpol") ens.kind = EnsembleKind::dualpol;
                    else fail("kind must be iid, etu or dualpol, got '" + val + "'");
                } else if (key == "fading") {
                    if (val == "rayleigh") ens.fading.kind = Fading::rayleigh;
                    else if (val == "rice") ens.fading.kind = Fading::rice;
                    else if (val == "nakagami") ens.fading.kind = Fading::nakagami;
                    else fail("fading must be rayleigh, rice or nakagami, got '" + val + "'");
                } else if (key == "t") {
                    const int t = static_cast<int>(detail::parse_int_str(val, key));
                    ens.t = t;
                    ens.etu.t = t;
                } else if (key == "r") {
                    const int r = static_cast<int>(detail::parse_int_str(val, key));
                    ens.fading.r = r;
                    ens.etu.r = r;
                } else if (key == "varrho") ens.fading.varrho = detail::parse_double_str(val, key);
                else if (key == "nu") ens.fading.nu = detail::parse_double_str(val, key);
                else if (key == "m") ens.fading.m = detail::parse_double_str(val, key);
                else if (key == "omega") ens.fading.omega = detail::parse_double_str(val, key);
                else if (key == "correlation") ens.correlation = parse_correlation_level(val);
                else if (key == "n_subcarriers")
                    ens.etu.n_subcarriers = static_cast<int>(detail::parse_int_str(val, key));
                else if (key == "spacing_hz") ens.etu.spacing_hz = detail::parse_double_str(val, key);
                else if (key == "separation_rb")
                    ens.etu.separation_rb = static_cast<int>(detail::parse_int_str(val, key));
                else if (key == "k_v") ens.dualpol.k_v = detail::parse_double_str(val, key);
                else if (key == "k_h") ens.dualpol.k_h = detail::parse_double_str(val, key);
                else if (key == "xpd_db") ens.dualpol.xpd_db = detail::parse_double_str(val, key);
                else if (key == "specular_gain") ens.dualpol.specular_gain = detail::parse_double_str(val, key);
                else if (key == "diffuse_corr") ens.dualpol.diffuse_corr = detail::parse_double_str(val, key);
                else fail("unknown key '" + key + "' in [ensemble]");
            }
        } catch (const std::invalid_argument &e) {
            fail(e.what());
        }
    }
    return cfg;
}

// Fixed 9-significant-digit formatting shared by both writers; negative zero
// is normalized so equal values can never print differently.
inline std::string format_sig9(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) return "0";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

struct SweepTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::vector<std::string> accuracy_flags; // one line per failed cell
    bool all_cells_produced = true;
};

// Averages every requested method over a common set of channel draws, one
// cell per (snr, method). A cell whose estimator raises an accuracy error is
// reported as nan and flagged instead of aborting the run.
inline SweepTable run_sweep(const SweepConfig &cfg) {
    validate(cfg);
    EnsembleSpec ens = cfg.ensemble;
    if (!cfg.tap_profile.empty()) {
        ens.etu.taps = load_tap_profile(cfg.tap_profile);
        validate(ens);
    }
    const std::size_t n_snr = cfg.snr_db.size();
    const std::size_t n_m = cfg.methods.size();

    struct Cell {
        double sum = 0.0;
        double sumsq = 0.0;
        double mc_se = 0.0; // internal estimator error, reported when draws == 1
        bool failed = false;
        std::string flag;
    };
    std::vector<Cell> cells(n_snr * n_m);
    std::vector<double> gammas(n_snr);
    for (std::size_t j = 0; j < n_snr; ++j) gammas[j] = std::pow(10.0, cfg.snr_db[j] / 10.0);

    for (std::int64_t i = 0; i < cfg.draws; ++i) {
        const ChannelMatrix h = draw_channel(ens, cfg.seed, static_cast<std::uint64_t>(i));
        const std::uint64_t draw_seed = derive_stream(cfg.seed, stream_tag::generic, static_cast<std::uint64_t>(i));
        for (std::size_t j = 0; j < n_snr; ++j) {
            const auto s = sigma_vector(h, gammas[j]);
            for (std::size_t k = 0; k < n_m; ++k) {
                Cell &cell = cells[j * n_m + k];
                if (cell.failed) continue;
                double value;
                try {
                    switch (cfg.methods[k]) {
                    case Method::order0: value = capacity_closed_form(s, 0).value; break;
                    case Method::order2: value = capacity_closed_form(s, 2).value; break;
                    case Method::order4: value = capacity_closed_form(s, 4).value; break;
                    case Method::quadrature:
                        value = mutual_info_symbol(s) + index_mi_quadrature(s, cfg.quad);
                        break;
                    case Method::montecarlo: {
                        const std::uint64_t cell_seed = derive_stream(draw_seed, stream_tag::generic, j);
                        const McEstimate est = index_mi_montecarlo(s, cfg.mc_samples, cell_seed);
                        value = mutual_info_symbol(s) + est.value;
                        cell.mc_se = est.std_error;
                        break;
                    }
                    default: throw std::logic_error("run_sweep: unreachable method");
                    }
                } catch (const accuracy_error &e) {
                    cell.failed = true;
                    cell.flag = "accuracy: snr_db=" + format_sig9(cfg.snr_db[j]) +
                                " method=" + method_column_name(cfg.methods[k]) + " " + e.what() +
                                " (achieved " + format_sig9(e.achieved()) + ")";
                    continue;
                }
                cell.sum += value;
                cell.sumsq += value * value;
            }
        }
    }

    SweepTable table;
    table.columns.push_back("snr_db");
    for (Method m : cfg.methods) table.columns.push_back(method_column_name(m));
    // Standard errors are reported for stochastic estimators only; the
    // closed forms and the quadrature are deterministic per draw.
    std::vector<std::size_t> se_methods;
    for (std::size_t k = 0; k < n_m; ++k)
        if (cfg.methods[k] == Method::montecarlo) se_methods.push_back(k);
    for (std::size_t k : se_methods)
        table.columns.push_back(std::string(method_column_name(cfg.methods[k])) + "_se");

    const double n = static_cast<double>(cfg.draws);
    for (std::size_t j = 0; j < n_snr; ++j) {
        std::vector<double> row;
        row.reserve(table.columns.size());
        row.push_back(cfg.snr_db[j]);
        for (std::size_t k = 0; k < n_m; ++k) {
            const Cell &cell = cells[j * n_m + k];
            row.push_back(cell.failed ? std::numeric_limits<double>::quiet_NaN() : cell.sum / n);
        }
        for (std::size_t k : se_methods) {
            const Cell &cell = cells[j * n_m + k];
            if (cell.failed) {
                row.push_back(std::numeric_limits<double>::quiet_NaN());
                continue;
            }
            if (cfg.draws == 1) {
                row.push_back(cell.mc_se);
                continue;
            }
            const double mean = cell.sum / n;
            const double var = std::max(0.0, (cell.sumsq - n * mean * mean) / (n - 1.0));
            row.push_back(std::sqrt(var / n));
        }
        table.rows.push_back(std::move(row));
    }
    for (const auto &cell : cells) {
        if (!cell.failed) continue;
        table.accuracy_flags.push_back(cell.flag);
        table.all_cells_produced = false;
    }
    return table;
}

inline void write_csv(const SweepTable &table, std::ostream &out) {
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (c) out << ',';
        out << table.columns[c];
    }
    out << '\n';
    for (const auto &row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out << ',';
            out << format_sig9(row[c]);
        }
        out << '\n';
    }
    for (const auto &flag : table.accuracy_flags) out << "# " << flag << '\n';
}

namespace detail {

inline std::string json_escape(const std::string &s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (char ch : s) {
        switch (ch) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        case '\r': out += "\\r"; break;
        default:
            if (static_cast<unsigned char>(ch) < 0x20) {
                char buf[8];
                std::snprintf(buf, sizeof(buf), "\\u%04x", ch);
                out += buf;
            } else {
                out += ch;
            }
        }
    }
    return out;
}

} // namespace detail

inline void write_json(const SweepTable &table, std::ostream &out) {
    out << "{\n  \"columns\": [";
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (c) out << ", ";
        out << '"' << detail::json_escape(table.columns[c]) << '"';
    }
    out << "],\n  \"rows\": [\n";
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        out << "    [";
        const auto &row = table.rows[r];
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out << ", ";
            out << (std::isfinite(row[c]) ? format_sig9(row[c]) : "null");
        }
        out << (r + 1 < table.rows.size() ? "],\n" : "]\n");
    }
    out << "  ],\n  \"warnings\": [";
    for (std::size_t f = 0; f < table.accuracy_flags.size(); ++f) {
        if (f) out << ", ";
        out << '"' << detail::json_escape(table.accuracy_flags[f]) << '"';
    }
    out << "]\n}\n";
}

inline void write_table(const SweepTable &table, OutFormat format, std::ostream &out) {
    if (format == OutFormat::csv) write_csv(table, out);
    else write_json(table, out);
}

} // namespace imcap

#endif
