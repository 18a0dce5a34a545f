#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "asap/error.hpp"
#include "asap/runner.hpp"
#include "asap/synth.hpp"
#include "support/helpers.hpp"

using asap::ErrorCode;
using asap::RunConfig;
using asap::RunMode;

namespace {

asap::AttentionStack report_stack() {
    asap::SynthConfig sc;
    sc.n = 20;
    sc.l = 12;
    sc.d = 4;
    sc.margin = 0.25;
    sc.sink_index = 6;
    sc.seed = 2;
    return asap::gen_sink_stack(sc);
}

ErrorCode validate_code(const RunConfig& cfg) {
    try {
        cfg.validate();
    } catch (const asap::Error& e) {
        return e.code();
    }
    FAIL("expected validation to fail");
    return ErrorCode::ConfigError;
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("run modes parse and print") {
    for (RunMode m : {RunMode::Pool, RunMode::Prune, RunMode::Hybrid, RunMode::ReportOnly}) {
        CHECK(asap::parse_run_mode(asap::to_string(m)) == m);
    }
    CHECK_THROWS_AS(asap::parse_run_mode("merge"), asap::Error);
}

TEST_CASE("prune and hybrid require a budget") {
    RunConfig cfg;
    cfg.mode = RunMode::Hybrid;
    CHECK(validate_code(cfg) == ErrorCode::ConfigError);
    cfg.mode = RunMode::Prune;
    CHECK(validate_code(cfg) == ErrorCode::ConfigError);
    cfg.budget = 4;
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("config validation reaches the walk and cluster checks") {
    RunConfig cfg;
    cfg.walk.alpha = 0.0;
    CHECK(validate_code(cfg) == ErrorCode::AlphaOutOfRange);
    cfg.walk.alpha = 0.5;
    cfg.k = 3;
    cfg.p = 3;
    CHECK(validate_code(cfg) == ErrorCode::BadClusterCounts);
    cfg.p = 1;
    cfg.mode = RunMode::ReportOnly;
    cfg.mask_csv = "m.csv";
    CHECK(validate_code(cfg) == ErrorCode::ConfigError);
}

TEST_CASE("pool report lists K cluster sizes summing to N-1") {
    RunConfig cfg;
    const auto art = asap::run_on_stack(report_stack(), cfg);
    const auto& r = art.report;
    CHECK(r["schema"] == "asap-report");
    CHECK(r["schema_version"] == asap::kReportSchemaVersion);
    CHECK(r["sink_report"]["detected"] == true);
    CHECK(r["sink_report"]["sink_index"] == 6);
    CHECK(r["sink_report"]["t_star"].get<std::size_t>() >= 1);
    const auto sizes = r["cluster_sizes"].get<std::vector<std::size_t>>();
    CHECK(sizes.size() == 6);
    CHECK(std::accumulate(sizes.begin(), sizes.end(), std::size_t{0}) == 19);
    CHECK(r["output_length"] == r["reduced_token_set"].size());
    CHECK(r["reduced_token_set"][0]["provenance"] == "cls");
    CHECK(r["timings_per_stage_ms"].contains("distances"));
    CHECK(art.distances_csv.rfind("index,raw,normalized,cluster\n", 0) == 0);
    CHECK(std::count(art.distances_csv.begin(), art.distances_csv.end(), '\n') == 20);
    CHECK(std::count(art.mask_csv.begin(), art.mask_csv.end(), '\n') == 21);
}

TEST_CASE("report-only without early stop records the full history") {
    RunConfig cfg;
    cfg.mode = RunMode::ReportOnly;
    cfg.walk.early_stop = false;
    const auto art = asap::run_on_stack(report_stack(), cfg);
    CHECK(art.report["column_sum_history"].size() == 12);
    CHECK_FALSE(art.report.contains("reduced_token_set"));
    CHECK(art.distances_csv.empty());
}

TEST_CASE("hybrid report carries the prune trace") {
    RunConfig cfg;
    cfg.mode = RunMode::Hybrid;
    cfg.budget = 3;
    const auto r = asap::run_on_stack(report_stack(), cfg).report;
    REQUIRE(r.contains("hybrid"));
    CHECK(r["budget_used"].get<std::size_t>() <= 3);
    CHECK(r["output_length"].get<std::size_t>() <= 5);
}

TEST_CASE("prune mode marks sampled runs") {
    RunConfig cfg;
    cfg.mode = RunMode::Prune;
    cfg.budget = 1;
    const auto r = asap::run_on_stack(report_stack(), cfg).report;
    CHECK(r["budget_used"].get<std::size_t>() <= 1);
    CHECK(r["output_length"].get<std::size_t>() <= 3);
}

TEST_CASE("run writes the report and dumps to disk") {
    const auto input = testing_support::temp_path("in.atnb");
    const auto report = testing_support::temp_path("report.json");
    const auto mask = testing_support::temp_path("mask.csv");
    asap::write_stack(report_stack(), input);
    RunConfig cfg;
    cfg.input = input;
    cfg.output = report;
    cfg.mask_csv = mask;
    const auto returned = asap::run(cfg);
    CHECK(nlohmann::json::parse(slurp(report)) == returned);
    CHECK(slurp(mask).rfind("index,state\n0,cls\n", 0) == 0);
    for (const auto& p : {input, report, mask}) {
        std::filesystem::remove(p);
    }
}

TEST_CASE("validate summarizes a good file and rejects a bad one") {
    const auto path = testing_support::temp_path("v.atnb");
    asap::write_stack(report_stack(), path);
    const auto summary = asap::validate_file(path);
    CHECK(summary["valid"] == true);
    CHECK(summary["tokens"] == 20);
    CHECK(summary["renormalization_warning"] == false);
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << "NOPE";
    }
    CHECK_THROWS_AS(asap::validate_file(path), asap::Error);
    std::filesystem::remove(path);
}

TEST_CASE("bench produces one row per stage and size") {
    asap::BenchConfig cfg;
    cfg.sizes = {16, 32};
    cfg.warmup = 0;
    cfg.iterations = 2;
    cfg.min_sample_ms = 0.1;
    const auto rows = asap::bench(cfg);
    CHECK(rows.size() == 6);
    for (const auto& r : rows) {
        CHECK(r.median_ms > 0.0);
    }
    const auto csv = asap::bench_csv(rows);
    CHECK(csv.rfind("n,stage,median_ms,calls_per_sample\n", 0) == 0);
}

TEST_CASE("log-log slope recovers a known power law") {
    std::vector<asap::BenchRow> rows;
    for (std::size_t n : {64, 128, 256, 512}) {
        rows.push_back({n, "x", 1e-6 * static_cast<double>(n * n * n), 1});
    }
    CHECK(asap::loglog_slope(rows, "x") == doctest::Approx(3.0));
    CHECK_THROWS_AS(asap::loglog_slope(rows, "missing"), asap::Error);
}
