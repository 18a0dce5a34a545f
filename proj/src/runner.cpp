#include "asap/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "asap/error.hpp"
#include "asap/parallel.hpp"
#include "asap/synth.hpp"

namespace asap {

using nlohmann::json;

namespace {

json sink_to_json(const SinkReport& s) {
    return {{"t_star", s.t_star},
            {"sink_index", s.sink_index},
            {"trigger_value", s.trigger_value},
            {"detected", s.detected},
            {"column_sum_argmax", s.column_sum_argmax}};
}

json timings_to_json(const StageTimings& timings) {
    json out = json::object();
    for (const auto& [stage, ms] : timings) {
        out[stage] = ms;
    }
    return out;
}

json tokens_to_json(const ReducedTokenSet& set) {
    json out = json::array();
    for (std::size_t pos = 0; pos < set.tokens.size(); ++pos) {
        const auto& token = set.tokens[pos];
        json entry = {{"position", pos}, {"provenance", to_string(token.provenance.kind)}};
        if (token.provenance.kind == ProvenanceKind::PooledBackground) {
            entry["members"] = token.provenance.members;
        } else {
            entry["index"] = token.provenance.index;
        }
        entry["features"] = token.features;
        out.push_back(std::move(entry));
    }
    return out;
}

std::string distances_csv(const CoreAnalysis& a) {
    std::ostringstream out;
    out << std::setprecision(17) << "index,raw,normalized,cluster\n";
    for (std::size_t i = 0; i < a.field.patch_count(); ++i) {
        out << i + 1 << ',' << a.field.raw[i] << ',' << a.field.normalized[i] << ',' << a.clusters.labels[i] << '\n';
    }
    return out.str();
}

std::string mask_csv(const ReducedTokenSet& set, std::size_t tokens) {
    std::ostringstream out;
    out << "index,state\n";
    const auto fates = token_fates(set, tokens);
    for (std::size_t i = 0; i < fates.size(); ++i) {
        out << i << ',' << to_string(fates[i]) << '\n';
    }
    return out.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
    }
    out << text;
    if (!out) {
        throw Error(ErrorCode::IoFailure, "write to " + path.string() + " failed");
    }
}

json analysis_to_json(const CoreAnalysis& a) {
    return {{"anchor", a.anchor},
            {"feature_layer", a.feature_layer},
            {"cluster_sizes", a.clusters.sizes()},
            {"background_size", a.pool.members.size()},
            {"pool_weights", a.pool.weights},
            {"distance_range", {a.field.d_min, a.field.d_max}}};
}

}  // namespace

std::string_view to_string(RunMode mode) noexcept {
    switch (mode) {
    case RunMode::Pool: return "pool";
    case RunMode::Prune: return "prune";
    case RunMode::Hybrid: return "hybrid";
    case RunMode::ReportOnly: return "report-only";
    }
    return "unknown";
}

RunMode parse_run_mode(std::string_view name) {
    for (RunMode m : {RunMode::Pool, RunMode::Prune, RunMode::Hybrid, RunMode::ReportOnly}) {
        if (name == to_string(m)) {
            return m;
        }
    }
    throw Error(ErrorCode::ConfigError, "unknown mode '" + std::string(name) + "'");
}

void RunConfig::validate() const {
    walk.validate();
    if (mode != RunMode::ReportOnly) {
        ReduceConfig rc;
        rc.k = k;
        rc.p = p;
        rc.budget = budget;
        rc.validate();
    }
    if ((mode == RunMode::Hybrid || mode == RunMode::Prune) && !budget) {
        throw Error(ErrorCode::ConfigError, std::string(to_string(mode)) + " mode requires --budget");
    }
    if (budget && *budget < 1) {
        throw Error(ErrorCode::ConfigError, "budget must be at least 1");
    }
    if (removal_batch && *removal_batch < 1) {
        throw Error(ErrorCode::ConfigError, "removal batch must be at least 1");
    }
    if (walk.max_layers && *walk.max_layers == 0) {
        throw Error(ErrorCode::ConfigError, "max layers must be at least 1");
    }
    if (mode == RunMode::ReportOnly && (distances_csv || mask_csv)) {
        throw Error(ErrorCode::ConfigError, "report-only mode produces no distance or mask dumps");
    }
}

json config_to_json(const RunConfig& cfg) {
    json out = {{"input", cfg.input.string()},
                {"mode", to_string(cfg.mode)},
                {"alpha", cfg.walk.alpha},
                {"tau", cfg.walk.tau},
                {"early_stop", cfg.walk.early_stop},
                {"k", cfg.k},
                {"p", cfg.p},
                {"anchor", cfg.anchor == AnchorMode::Kind::Sink ? "sink" : "random"},
                {"metric", to_string(cfg.metric)},
                {"seed", cfg.seed},
                {"threads", thread_count()}};
    out["max_layers"] = cfg.walk.max_layers ? json(*cfg.walk.max_layers) : json(nullptr);
    out["budget"] = cfg.budget ? json(*cfg.budget) : json(nullptr);
    out["removal_batch"] = cfg.removal_batch ? json(*cfg.removal_batch) : json(nullptr);
    out["feature_layer"] = cfg.feature_layer ? json(*cfg.feature_layer) : json(nullptr);
    return out;
}

RunArtifacts run_on_stack(const AttentionStack& stack, const RunConfig& cfg) {
    cfg.validate();
    RunArtifacts out;
    json& report = out.report;
    report["schema"] = "asap-report";
    report["schema_version"] = kReportSchemaVersion;
    report["config"] = config_to_json(cfg);
    report["input"] = {{"layers", stack.layers()},
                       {"heads", stack.heads()},
                       {"tokens", stack.tokens()},
                       {"feature_dim", stack.feature_dim()},
                       {"max_row_drift", stack.max_row_drift()},
                       {"meta", stack.meta()}};

    if (cfg.mode == RunMode::ReportOnly) {
        const auto t0 = std::chrono::steady_clock::now();
        const WalkState walk = accumulate(stack, cfg.walk);
        const auto t1 = std::chrono::steady_clock::now();
        const SinkReport sink = locate_sink(walk, cfg.walk);
        const auto t2 = std::chrono::steady_clock::now();
        report["sink_report"] = sink_to_json(sink);
        report["column_sum_history"] = walk.column_sum_history;
        report["column_argmax_history"] = walk.column_argmax_history;
        report["warnings"] = json::array();
        report["timings_per_stage_ms"] = {
            {"accumulate", std::chrono::duration<double, std::milli>(t1 - t0).count()},
            {"locate_sink", std::chrono::duration<double, std::milli>(t2 - t1).count()}};
        return out;
    }

    ReduceConfig rc;
    rc.k = cfg.k;
    rc.p = cfg.p;
    rc.anchor = {cfg.anchor, cfg.seed};
    rc.feature_layer = cfg.feature_layer;

    const CoreAnalysis* analysis = nullptr;
    const ReducedTokenSet* output = nullptr;
    CoreResult core;
    HybridResult hybrid;
    bool sampled = false;
    if (cfg.mode == RunMode::Hybrid) {
        HybridConfig hc;
        hc.target = *cfg.budget;
        hc.removal_batch = cfg.removal_batch;
        hc.metric = cfg.metric;
        hybrid = run_hybrid(stack, cfg.walk, rc, hc);
        analysis = &hybrid.analysis;
        output = &hybrid.output;
        json rounds = json::array();
        for (const auto& r : hybrid.prune.rounds) {
            rounds.push_back({{"round", r.round}, {"removed", r.removed}, {"scores", r.scores}, {"remaining", r.remaining}});
        }
        report["hybrid"] = {{"foreground_size", hybrid.foreground.size()},
                            {"after_topk", hybrid.after_topk.size()},
                            {"removal_batch", hybrid.prune.removal_batch},
                            {"prune_rounds", rounds},
                            {"budget_note", "output holds cls + at most T survivors + one pooled background token"}};
    } else {
        rc.budget = cfg.budget;
        core = reduce_stack(stack, cfg.walk, rc);
        analysis = &core.analysis;
        output = &core.output;
        sampled = core.sample.constrained;
    }

    report["sink_report"] = sink_to_json(analysis->sink);
    report["column_sum_history"] = analysis->walk.column_sum_history;
    report["column_argmax_history"] = analysis->walk.column_argmax_history;
    report["analysis"] = analysis_to_json(*analysis);
    report["cluster_sizes"] = analysis->clusters.sizes();
    report["budget_used"] = output->budget_used;
    report["output_length"] = output->size();
    report["sampled"] = sampled;
    report["reduced_token_set"] = tokens_to_json(*output);
    report["warnings"] = analysis->warnings;
    report["timings_per_stage_ms"] = timings_to_json(analysis->timings_ms);

    out.distances_csv = distances_csv(*analysis);
    out.mask_csv = mask_csv(*output, stack.tokens());
    return out;
}

json run(const RunConfig& cfg) {
    cfg.validate();
    if (cfg.threads > 0) {
        set_thread_count(cfg.threads);
    }
    const AttentionStack stack = read_stack(cfg.input);
    RunArtifacts artifacts = run_on_stack(stack, cfg);
    if (cfg.distances_csv) {
        write_text(*cfg.distances_csv, artifacts.distances_csv);
    }
    if (cfg.mask_csv) {
        write_text(*cfg.mask_csv, artifacts.mask_csv);
    }
    const std::string text = artifacts.report.dump(2) + "\n";
    if (cfg.output.empty() || cfg.output == "-") {
        std::cout << text;
    } else {
        write_text(cfg.output, text);
    }
    return std::move(artifacts.report);
}

json validate_file(const std::filesystem::path& path) {
    const AttentionStack stack = read_stack(path);
    return {{"valid", true},
            {"layers", stack.layers()},
            {"heads", stack.heads()},
            {"tokens", stack.tokens()},
            {"feature_dim", stack.feature_dim()},
            {"max_row_drift", stack.max_row_drift()},
            {"renormalization_warning", stack.max_row_drift() > 1e-5},
            {"meta", stack.meta()}};
}

std::vector<BenchRow> bench(const BenchConfig& cfg) {
    using Clock = std::chrono::steady_clock;
    std::vector<BenchRow> rows;
    volatile double keep = 0.0;

    for (std::size_t n : cfg.sizes) {
        SynthConfig sc;
        sc.n = n;
        sc.l = 2;
        sc.h = 1;
        sc.d = 4;
        sc.seed = cfg.seed + n;
        const AttentionStack stack = gen_sink_stack(sc);
        WalkConfig wc;
        wc.early_stop = false;
        wc.tau = 1e300;
        const WalkState walk = accumulate(stack, wc);
        const std::size_t anchor = argmax_patch(walk.cumulative.row(0));
        const DistanceField field = diffusion_distances(walk.cumulative, anchor);

        const auto measure = [&](const char* stage, auto&& call) {
            const auto once = [&] {
                const auto t0 = Clock::now();
                call();
                return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
            };
            const double first = std::max(once(), 1e-6);
            const std::size_t reps = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(cfg.min_sample_ms / first)));
            const auto sample = [&] {
                const auto t0 = Clock::now();
                for (std::size_t r = 0; r < reps; ++r) {
                    call();
                }
                return std::chrono::duration<double, std::milli>(Clock::now() - t0).count() / static_cast<double>(reps);
            };
            for (std::size_t w = 0; w < cfg.warmup; ++w) {
                sample();
            }
            std::vector<double> times;
            times.reserve(cfg.iterations);
            for (std::size_t it = 0; it < std::max<std::size_t>(1, cfg.iterations); ++it) {
                times.push_back(sample());
            }
            std::nth_element(times.begin(), times.begin() + times.size() / 2, times.end());
            rows.push_back({n, stage, times[times.size() / 2], reps});
        };

        measure("accumulate", [&] { keep = keep + accumulate(stack, wc).cumulative(0, 0); });
        measure("distances", [&] { keep = keep + diffusion_distances(walk.cumulative, anchor).d_max; });
        measure("cluster_sort", [&] {
            const auto clusters = radial_cluster(field, 6, 1);
            keep = keep + static_cast<double>(stride_sample(clusters, field, std::max<std::size_t>(1, n / 4)).survivors.size());
        });
    }
    return rows;
}

std::string bench_csv(std::span<const BenchRow> rows) {
    std::ostringstream out;
    out << std::setprecision(9) << "n,stage,median_ms,calls_per_sample\n";
    for (const auto& r : rows) {
        out << r.n << ',' << r.stage << ',' << r.median_ms << ',' << r.calls_per_sample << '\n';
    }
    return out.str();
}

double loglog_slope(std::span<const BenchRow> rows, std::string_view stage) {
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& r : rows) {
        if (r.stage == stage && r.median_ms > 0.0) {
            xs.push_back(std::log(static_cast<double>(r.n)));
            ys.push_back(std::log(r.median_ms));
        }
    }
    if (xs.size() < 2) {
        throw Error(ErrorCode::TooShort, "need at least two sizes for a slope");
    }
    const double m = static_cast<double>(xs.size());
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
    }
    const double mx = sx / m;
    const double my = sy / m;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    return sxy / sxx;
}

}  // namespace asap
