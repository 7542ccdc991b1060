// SPDX-License-Identifier: MIT

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "imcap/sweep.hpp"

using namespace imcap;
using Catch::Approx;

namespace {

SweepConfig small_config() {
    SweepConfig cfg;
    cfg.snr_db = {0.0};
    cfg.methods = {Method::order2};
    cfg.draws = 100;
    cfg.ensemble.kind = EnsembleKind::iid;
    cfg.ensemble.t = 2;
    cfg.ensemble.fading.r = 2;
    return cfg;
}

} // namespace

TEST_CASE("parse_snr_spec grids", "[sweep]") {
    SECTION("range form is inclusive on both ends") {
        const auto grid = parse_snr_spec("-10:5:30");
        REQUIRE(grid.size() == 9);
        REQUIRE(grid.front() == Approx(-10.0));
        REQUIRE(grid[1] == Approx(-5.0));
        REQUIRE(grid.back() == Approx(30.0));
    }

    SECTION("list form") {
        const auto grid = parse_snr_spec("0,3,7.5");
        REQUIRE(grid == std::vector<double>{0.0, 3.0, 7.5});
    }

    SECTION("single value") {
        REQUIRE(parse_snr_spec("12").size() == 1);
        REQUIRE(parse_snr_spec("5:10:5") == std::vector<double>{5.0});
    }

    SECTION("malformed specs are rejected") {
        REQUIRE_THROWS_AS(parse_snr_spec("1:5"), std::invalid_argument);
        REQUIRE_THROWS_AS(parse_snr_spec("1:0:5"), std::invalid_argument);
        REQUIRE_THROWS_AS(parse_snr_spec("5:1:1"), std::invalid_argument);
        REQUIRE_THROWS_AS(parse_snr_spec("3,2"), std::invalid_argument);
        REQUIRE_THROWS_AS(parse_snr_spec("1,,2"), std::invalid_argument);
        REQUIRE_THROWS_AS(parse_snr_spec("abc"), std::invalid_argument);
    }
}

TEST_CASE("parse_method_list names and duplicates", "[sweep]") {
    const auto m = parse_method_list("order0,order2,order4,integral,mc");
    REQUIRE(m == std::vector<Method>{Method::order0, Method::order2, Method::order4,
                                     Method::quadrature, Method::montecarlo});
    REQUIRE_THROWS_AS(parse_method_list("order2,order2"), std::invalid_argument);
    REQUIRE_THROWS_AS(parse_method_list("order1"), std::invalid_argument);
    REQUIRE_THROWS_AS(parse_method_list("order2,"), std::invalid_argument);

    SECTION("column names round-trip") {
        for (Method method : m) REQUIRE(parse_method(method_column_name(method)) == method);
    }
}

TEST_CASE("parse_config reads both sections", "[sweep]") {
    std::istringstream in(
        "# comment line\n"
        "[sweep]\n"
        "snr_db = -10:10:10\n"
        "methods = order2,integral   # trailing comment\n"
        "draws = 42\n"
        "mc_samples = 5000\n"
        "seed = 7\n"
        "format = json\n"
        "output = table.json\n"
        "rel_tol = 1e-6\n"
        "\n"
        "[ensemble]\n"
        "kind = iid\n"
        "fading = nakagami\n"
        "t = 4\n"
        "r = 3\n"
        "m = 2.5\n"
        "omega = 1.5\n"
        "correlation = medium\n");
    const SweepConfig cfg = parse_config(in, "inline");
    REQUIRE(cfg.snr_db == std::vector<double>{-10.0, 0.0, 10.0});
    REQUIRE(cfg.methods == std::vector<Method>{Method::order2, Method::quadrature});
    REQUIRE(cfg.draws == 42);
    REQUIRE(cfg.mc_samples == 5000);
    REQUIRE(cfg.seed == 7);
    REQUIRE(cfg.format == OutFormat::json);
    REQUIRE(cfg.output == "table.json");
    REQUIRE(cfg.quad.rel_tol == Approx(1e-6));
    REQUIRE(cfg.ensemble.kind == EnsembleKind::iid);
    REQUIRE(cfg.ensemble.fading.kind == Fading::nakagami);
    REQUIRE(cfg.ensemble.t == 4);
    REQUIRE(cfg.ensemble.fading.r == 3);
    REQUIRE(cfg.ensemble.fading.m == Approx(2.5));
    REQUIRE(cfg.ensemble.fading.omega == Approx(1.5));
    REQUIRE(cfg.ensemble.correlation == CorrelationLevel::medium);

    SECTION("errors carry the config name and line number") {
        auto expect_error = [](const std::string &text, const std::string &needle) {
            std::istringstream bad(text);
            try {
                parse_config(bad, "bad.cfg");
                FAIL("expected a config error for: " + text);
            } catch (const std::runtime_error &e) {
                const std::string what = e.what();
                REQUIRE(what.find("bad.cfg") != std::string::npos);
                REQUIRE(what.find(needle) != std::string::npos);
            }
        };
        expect_error("[sweep]\nfoo = 1\n", "line 2");
        expect_error("[sweep]\nfoo = 1\n", "unknown key 'foo'");
        expect_error("draws = 1\n", "before any section");
        expect_error("[sweep]\ndraws =\n", "empty value");
        expect_error("[typo]\n", "unknown section");
        expect_error("[sweep\n", "unterminated section");
        expect_error("[sweep]\nnot a pair\n", "expected key = value");
        expect_error("[sweep]\nsnr_db = 3,2\n", "line 2");
        expect_error("[ensemble]\nkind = weird\n", "kind must be");
    }
}

TEST_CASE("format_sig9 canonical number text", "[sweep]") {
    REQUIRE(format_sig9(1.0) == "1");
    REQUIRE(format_sig9(0.0) == "0");
    REQUIRE(format_sig9(-0.0) == "0");
    REQUIRE(format_sig9(0.1) == "0.1");
    REQUIRE(format_sig9(std::numeric_limits<double>::quiet_NaN()) == "nan");
    REQUIRE(format_sig9(std::numeric_limits<double>::infinity()) == "inf");
    REQUIRE(format_sig9(-std::numeric_limits<double>::infinity()) == "-inf");
    REQUIRE(format_sig9(1.775711259501084) == "1.77571126");
    REQUIRE(format_sig9(1e10) == "1e+10");
    REQUIRE(format_sig9(-2.5) == "-2.5");
}

TEST_CASE("run_sweep table shape and determinism", "[sweep]") {
    SECTION("deterministic methods produce no error columns") {
        const SweepConfig cfg = small_config();
        const SweepTable table = run_sweep(cfg);
        REQUIRE(table.columns == std::vector<std::string>{"snr_db", "order2"});
        REQUIRE(table.rows.size() == 1);
        REQUIRE(table.rows[0].size() == 2);
        REQUIRE(table.rows[0][0] == 0.0);
        REQUIRE(std::isfinite(table.rows[0][1]));
        REQUIRE(table.all_cells_produced);
        REQUIRE(table.accuracy_flags.empty());
    }

    SECTION("the sampling method gains exactly one error column") {
        SweepConfig cfg = small_config();
        cfg.methods = {Method::order2, Method::montecarlo};
        cfg.draws = 3;
        cfg.mc_samples = 2000;
        const SweepTable table = run_sweep(cfg);
        REQUIRE(table.columns == std::vector<std::string>{"snr_db", "order2", "mc", "mc_se"});
        REQUIRE(table.rows[0].size() == 4);
        REQUIRE(table.rows[0][3] > 0.0);
    }

    SECTION("a single draw reports the internal estimator error") {
        SweepConfig cfg = small_config();
        cfg.methods = {Method::montecarlo};
        cfg.draws = 1;
        cfg.mc_samples = 2000;
        const SweepTable table = run_sweep(cfg);
        REQUIRE(table.columns == std::vector<std::string>{"snr_db", "mc", "mc_se"});
        REQUIRE(table.rows[0][2] > 0.0);
        REQUIRE(table.rows[0][2] < 0.1);
    }

    SECTION("identical configs produce byte-identical output") {
        SweepConfig cfg = small_config();
        cfg.snr_db = {0.0, 10.0};
        cfg.methods = {Method::order2, Method::quadrature};
        cfg.draws = 25;
        const SweepTable a = run_sweep(cfg);
        const SweepTable b = run_sweep(cfg);
        REQUIRE(a.rows == b.rows);
        std::ostringstream sa, sb;
        write_csv(a, sa);
        write_csv(b, sb);
        REQUIRE(sa.str() == sb.str());
        REQUIRE(sa.str().substr(0, 23) == "snr_db,order2,integral\n");
    }

    SECTION("validation rejects degenerate configs") {
        SweepConfig cfg = small_config();
        cfg.snr_db.clear();
        REQUIRE_THROWS_AS(run_sweep(cfg), std::domain_error);
        cfg = small_config();
        cfg.snr_db = {5.0, 5.0};
        REQUIRE_THROWS_AS(run_sweep(cfg), std::domain_error);
        cfg = small_config();
        cfg.methods.clear();
        REQUIRE_THROWS_AS(run_sweep(cfg), std::domain_error);
        cfg = small_config();
        cfg.draws = 0;
        REQUIRE_THROWS_AS(run_sweep(cfg), std::domain_error);
        cfg = small_config();
        cfg.mc_samples = 10;
        REQUIRE_THROWS_AS(run_sweep(cfg), std::domain_error);
    }
}

TEST_CASE("run_sweep flags failing cells instead of aborting", "[sweep]") {
    SweepConfig cfg = small_config();
    cfg.snr_db = {0.0, 20.0};
    cfg.methods = {Method::order2, Method::quadrature};
    cfg.draws = 2;
    cfg.quad.rel_tol = 1e-12; // unreachable with a subdivision budget of one
    cfg.quad.max_subdivisions = 1;
    const SweepTable table = run_sweep(cfg);

    REQUIRE_FALSE(table.all_cells_produced);
    REQUIRE_FALSE(table.accuracy_flags.empty());
    REQUIRE(table.accuracy_flags[0].find("accuracy:") != std::string::npos);
    REQUIRE(table.accuracy_flags[0].find("method=integral") != std::string::npos);
    REQUIRE(table.rows.size() == 2);
    for (const auto &row : table.rows) {
        REQUIRE(std::isfinite(row[1]));   // closed form still fills its cells
        REQUIRE(std::isnan(row[2]));      // the failed estimator is nan
    }

    SECTION("writers render the failure consistently") {
        std::ostringstream csv;
        write_csv(table, csv);
        REQUIRE(csv.str().find(",nan") != std::string::npos);
        REQUIRE(csv.str().find("# accuracy:") != std::string::npos);

        std::ostringstream json;
        write_json(table, json);
        REQUIRE(json.str().find("null") != std::string::npos);
        REQUIRE(json.str().find("\"warnings\": [\"accuracy:") != std::string::npos);
    }
}

TEST_CASE("run_sweep applies an external tap profile", "[sweep]") {
    SweepConfig cfg;
    cfg.snr_db = {10.0};
    cfg.methods = {Method::order2};
    cfg.draws = 20;
    cfg.ensemble.kind = EnsembleKind::etu;

    const SweepTable builtin = run_sweep(cfg);

    SECTION("a profile equal to the built-in one changes nothing") {
        const std::string path = "imcap_sweep_taps_same.txt";
        {
            std::ofstream out(path);
            for (const auto &tap : etu_taps()) out << tap.delay_ns << ' ' << tap.power_db << '\n';
        }
        cfg.tap_profile = path;
        const SweepTable same = run_sweep(cfg);
        REQUIRE(same.rows == builtin.rows);
        std::remove(path.c_str());
    }

    SECTION("a flat single-tap profile changes the ensemble") {
        const std::string path = "imcap_sweep_taps_flat.txt";
        {
            std::ofstream out(path);
            out << "0 0\n";
        }
        cfg.tap_profile = path;
        const SweepTable flat = run_sweep(cfg);
        REQUIRE(flat.rows[0][1] != builtin.rows[0][1]);
        std::remove(path.c_str());
    }
}
