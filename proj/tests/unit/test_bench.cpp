#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "prowl/bench.hpp"

using namespace prowl;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

SweepConfig tiny_sweep(const std::string& out) {
    SweepConfig cfg;
    cfg.mode = SweepConfig::Mode::Rho;
    cfg.scenario = 1;
    cfg.rho_grid = {1.0};
    cfg.fixed_n = 40;
    cfg.n_test = 500;
    cfg.inner_draws = 32;
    cfg.reps = 1;
    cfg.seed = 5;
    cfg.methods = {"qlearn:R"};
    cfg.out_path = out;
    cfg.timing = false;
    return cfg;
}

}  // namespace

TEST_CASE("run_sweep: one cell, one rep, one method yields one row each") {
    const std::string out = "bench_one.csv";
    const std::vector<MetricsRecord> rows = run_sweep(tiny_sweep(out));
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].method == "qlearn");
    CHECK(rows[0].reward_family == "R");
    CHECK(rows[0].n == 40);
    CHECK(!rows[0].lcb.has_value());

    const std::vector<MetricsRecord> parsed = metrics_from_csv(out);
    CHECK(parsed.size() == 1);
    int summary_rows = 0;
    std::ifstream in(summary_path_for(out));
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] != '#') ++summary_rows;
    }
    CHECK(summary_rows == 2);  // header + one cell
    std::remove(out.c_str());
    std::remove(summary_path_for(out).c_str());
}

TEST_CASE("run_sweep: byte-identical across reruns and across thread counts") {
    SweepConfig cfg = tiny_sweep("bench_serial.csv");
    cfg.rho_grid = SweepConfig{}.rho_grid;  // the full nine-point grid
    cfg.reps = 2;
    cfg.methods = {"prowl", "owl:uR"};
    cfg.threads = 1;
    run_sweep(cfg);
    cfg.out_path = "bench_rerun.csv";
    run_sweep(cfg);
    CHECK(slurp("bench_serial.csv") == slurp("bench_rerun.csv"));
    cfg.out_path = "bench_parallel.csv";
    cfg.threads = 4;
    run_sweep(cfg);
    CHECK(slurp("bench_serial.csv") == slurp("bench_parallel.csv"));
    for (const char* p : {"bench_serial.csv", "bench_rerun.csv", "bench_parallel.csv"}) {
        std::remove(p);
        std::remove(summary_path_for(p).c_str());
    }
}

TEST_CASE("run_sweep: prowl rows carry an LCB, ablation pairs share seeds") {
    SweepConfig cfg = tiny_sweep("bench_ablation.csv");
    cfg.mode = SweepConfig::Mode::Ablation;
    cfg.n_grid = {60};
    cfg.fixed_rho = 1.5;
    cfg.reps = 2;
    cfg.methods.clear();
    const std::vector<MetricsRecord> rows = run_sweep(cfg);
    REQUIRE(rows.size() == 4);
    for (const MetricsRecord& r : rows) {
        CHECK((r.method == "prowl" || r.method == "prowl-split"));
        CHECK(r.lcb.has_value());
    }
    // Paired rows share the replicate and hence the dataset diagnostics.
    CHECK(rows[0].replicate == rows[1].replicate);
    CHECK(rows[0].e_u == rows[1].e_u);
    CHECK(rows[0].valid_rate == rows[1].valid_rate);
    std::remove("bench_ablation.csv");
    std::remove(summary_path_for("bench_ablation.csv").c_str());
}

TEST_CASE("run_sweep rejects malformed method tokens") {
    SweepConfig cfg = tiny_sweep("bench_bad.csv");
    cfg.methods = {"owl"};
    CHECK_THROWS(run_sweep(cfg));
    cfg.methods = {"prowl:R"};
    CHECK_THROWS(run_sweep(cfg));
    cfg.methods = {"mystery"};
    CHECK_THROWS(run_sweep(cfg));
}

TEST_CASE("run_sweep budget guard flags rows instead of hanging") {
    SweepConfig cfg = tiny_sweep("bench_budget.csv");
    cfg.reps = 2;
    cfg.budget_seconds = 1e-12;
    const std::vector<MetricsRecord> rows = run_sweep(cfg);
    REQUIRE(rows.size() == 2);
    for (const MetricsRecord& r : rows) {
        CHECK(r.runtime_seconds == -1.0);
        CHECK(std::isnan(r.target_regret));
    }
    std::remove("bench_budget.csv");
    std::remove(summary_path_for("bench_budget.csv").c_str());
}

TEST_CASE("run_diagnostics covers both scenarios and hits the known cell") {
    SweepConfig cfg;
    cfg.mode = SweepConfig::Mode::Diagnostics;
    cfg.scenario = 0;
    cfg.rho_grid = {1.5};
    cfg.diag_n = 1000;
    cfg.n_test = 2000;
    cfg.reps = 5;
    cfg.seed = 9;
    cfg.out_path = "bench_diag.csv";
    const std::vector<DiagnosticsRow> rows = run_diagnostics(cfg);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].scenario == 1);
    CHECK(rows[1].scenario == 2);
    CHECK(std::abs(rows[0].e_u - 0.045) <= 0.003);
    CHECK(rows[0].valid_rate == 1.0);
    CHECK(rows[0].clip_rate == 0.0);
    std::remove("bench_diag.csv");
}

TEST_CASE("emit_plots: errors on empty data, draws one polyline per method") {
    const std::string empty_csv = "bench_empty.csv";
    {
        std::ofstream out(empty_csv);
        out << kMetricsCsvHeader << "\n";
    }
    CHECK_THROWS(emit_plots(empty_csv, "target_regret", "bench_empty.svg"));
    CHECK(!std::ifstream("bench_empty.svg").good());
    std::remove(empty_csv.c_str());

    SweepConfig cfg = tiny_sweep("bench_plot.csv");
    cfg.rho_grid = {0.5, 1.5};
    run_sweep(cfg);
    emit_plots("bench_plot.csv", "target_regret", "bench_plot.svg");
    const std::string svg = slurp("bench_plot.svg");
    std::size_t polylines = 0, pos = 0;
    while ((pos = svg.find("<polyline", pos)) != std::string::npos) {
        ++polylines;
        ++pos;
    }
    CHECK(polylines == 1);
    // Two grid points -> two vertices on the single series.
    const std::size_t pts = svg.find("points=\"");
    REQUIRE(pts != std::string::npos);
    const std::string coords = svg.substr(pts + 8, svg.find('"', pts + 8) - pts - 8);
    std::size_t commas = 0;
    for (char c : coords) {
        if (c == ',') ++commas;
    }
    CHECK(commas == 2);

    emit_plots("bench_plot.csv", "target_regret", "bench_plot2.svg");
    CHECK(slurp("bench_plot.svg") == slurp("bench_plot2.svg"));
    CHECK_THROWS(emit_plots("bench_plot.csv", "no_such_metric", "bench_plot3.svg"));
    for (const char* p : {"bench_plot.csv", "bench_plot.svg", "bench_plot2.svg"}) std::remove(p);
    std::remove(summary_path_for("bench_plot.csv").c_str());
}

TEST_CASE("default epsilon tracks the scenario") {
    CHECK(default_epsilon(1) == 0.5);
    CHECK(default_epsilon(2) == 0.01);
}
