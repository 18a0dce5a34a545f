// Command line front end: run | synth | bench | validate.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "asap/error.hpp"
#include "asap/parallel.hpp"
#include "asap/runner.hpp"
#include "asap/synth.hpp"

namespace {

int report_error(const asap::Error& e) {
    const nlohmann::json err = {{"error", asap::to_string(e.code())},
                                {"message", e.what()},
                                {"exit_status", asap::exit_status(e.code())}};
    std::cerr << err.dump() << '\n';
    return asap::exit_status(e.code());
}

void apply_thread_env(std::size_t& threads) {
    if (const char* env = std::getenv("ASAP_THREADS")) {
        try {
            threads = static_cast<std::size_t>(std::stoul(env));
        } catch (const std::exception&) {
            throw asap::Error(asap::ErrorCode::ConfigError, "ASAP_THREADS must be a nonnegative integer");
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sink-anchored token reduction over ViT attention stacks"};
    app.require_subcommand(1);

    // run
    asap::RunConfig run_cfg;
    std::string mode = "pool";
    std::string anchor = "sink";
    std::string metric = "diffusion";
    std::optional<std::size_t> max_layers;
    std::optional<std::size_t> budget;
    std::optional<std::size_t> removal_batch;
    std::optional<std::size_t> feature_layer;
    std::optional<std::string> dump_distances;
    std::optional<std::string> mask_csv;
    std::string output = "-";
    bool no_early_stop = false;
    auto* run = app.add_subcommand("run", "Reduce one ATNB stack and emit a JSON report");
    run->add_option("-i,--input", run_cfg.input, "ATNB input file")->required();
    run->add_option("--mode", mode, "pool | prune | hybrid | report-only")->capture_default_str();
    run->add_option("--alpha", run_cfg.walk.alpha, "Lazy walk attention weight in (0,1)")->capture_default_str();
    run->add_option("--tau", run_cfg.walk.tau, "Column-sum trigger (> 1)")->capture_default_str();
    run->add_flag("--no-early-stop", no_early_stop, "Accumulate every layer; keep the full column-sum history");
    run->add_option("--max-layers", max_layers, "Cap on accumulation depth");
    run->add_option("-k,--clusters", run_cfg.k, "Radial cluster count K")->capture_default_str();
    run->add_option("-p,--background-clusters", run_cfg.p, "Clusters pooled as background")->capture_default_str();
    run->add_option("--budget", budget, "Token budget T");
    run->add_option("--removal-batch", removal_batch, "Tokens removed per bipartite round (hybrid)");
    run->add_option("--anchor", anchor, "sink | random")->capture_default_str();
    run->add_option("--metric", metric, "diffusion | cosine (hybrid redundancy metric)")->capture_default_str();
    run->add_option("--feature-layer", feature_layer, "0-based layer whose features are pooled (default t*-1)");
    run->add_option("--seed", run_cfg.seed, "Seed for the random anchor")->capture_default_str();
    run->add_option("-o,--output", output, "Report path, '-' for stdout")->capture_default_str();
    run->add_option("--dump-distances", dump_distances, "Write index,raw,normalized,cluster CSV");
    run->add_option("--mask-csv", mask_csv, "Write index,state (cls/keep/pool/drop) CSV");
    run->add_option("--threads", run_cfg.threads, "Worker threads (0 = machine default)");

    // synth
    asap::SynthConfig synth_cfg;
    std::string kind = "planted";
    std::optional<std::size_t> planted_sink;
    std::string synth_out;
    auto* synth = app.add_subcommand("synth", "Write a synthetic ATNB stack");
    synth->add_option("-o,--out", synth_out, "Output ATNB path")->required();
    synth->add_option("--kind", kind, "planted | random | uniform | identity")->capture_default_str();
    synth->add_option("-n,--tokens", synth_cfg.n, "Tokens including CLS")->capture_default_str();
    synth->add_option("-l,--layers", synth_cfg.l, "Layers")->capture_default_str();
    synth->add_option("--heads", synth_cfg.h, "Heads per layer")->capture_default_str();
    synth->add_option("-d,--dim", synth_cfg.d, "Feature dimension (0 = none)")->capture_default_str();
    synth->add_option("--margin", synth_cfg.margin, "Sink margin above 1/n")->capture_default_str();
    synth->add_option("--sink", planted_sink, "Planted sink index (default 1 for --kind planted)");
    synth->add_option("--sink-self", synth_cfg.sink_self, "Self weight of the sink row")->capture_default_str();
    synth->add_option("--noise", synth_cfg.noise, "Dirichlet concentration off the sink")->capture_default_str();
    synth->add_option("--seed", synth_cfg.seed, "Generator seed")->capture_default_str();

    // bench
    asap::BenchConfig bench_cfg;
    std::string bench_out = "-";
    auto* bench = app.add_subcommand("bench", "Per-stage scaling timings as CSV");
    bench->add_option("--sizes", bench_cfg.sizes, "Token counts")->delimiter(',')->capture_default_str();
    bench->add_option("--warmup", bench_cfg.warmup, "Warmup samples")->capture_default_str();
    bench->add_option("--iterations", bench_cfg.iterations, "Measured samples (median reported)")->capture_default_str();
    bench->add_option("--seed", bench_cfg.seed, "Generator seed")->capture_default_str();
    bench->add_option("-o,--out", bench_out, "CSV path, '-' for stdout")->capture_default_str();
    std::size_t bench_threads = 0;
    bench->add_option("--threads", bench_threads, "Worker threads (0 = machine default)");

    // validate
    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "Check an ATNB file and print a JSON summary");
    validate->add_option("path", validate_path, "ATNB file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            run_cfg.mode = asap::parse_run_mode(mode);
            run_cfg.walk.early_stop = !no_early_stop;
            run_cfg.walk.max_layers = max_layers;
            run_cfg.budget = budget;
            run_cfg.removal_batch = removal_batch;
            run_cfg.feature_layer = feature_layer;
            if (anchor == "sink") {
                run_cfg.anchor = asap::AnchorMode::Kind::Sink;
            } else if (anchor == "random") {
                run_cfg.anchor = asap::AnchorMode::Kind::Random;
            } else {
                throw asap::Error(asap::ErrorCode::ConfigError, "unknown anchor '" + anchor + "'");
            }
            if (metric == "diffusion") {
                run_cfg.metric = asap::PruneMetric::Diffusion;
            } else if (metric == "cosine") {
                run_cfg.metric = asap::PruneMetric::Cosine;
            } else {
                throw asap::Error(asap::ErrorCode::ConfigError, "unknown metric '" + metric + "'");
            }
            if (dump_distances) {
                run_cfg.distances_csv = *dump_distances;
            }
            if (mask_csv) {
                run_cfg.mask_csv = *mask_csv;
            }
            run_cfg.output = output;
            apply_thread_env(run_cfg.threads);
            asap::run(run_cfg);
        } else if (*synth) {
            asap::AttentionStack stack = [&] {
                if (kind == "planted") {
                    synth_cfg.sink_index = planted_sink.value_or(1);
                    return asap::gen_sink_stack(synth_cfg);
                }
                if (kind == "random") {
                    synth_cfg.sink_index.reset();
                    synth_cfg.margin = 0.0;
                    return asap::gen_sink_stack(synth_cfg);
                }
                if (kind == "uniform") {
                    return asap::gen_uniform_stack(synth_cfg);
                }
                if (kind == "identity") {
                    return asap::gen_identity_stack(synth_cfg);
                }
                throw asap::Error(asap::ErrorCode::ConfigError, "unknown kind '" + kind + "'");
            }();
            asap::write_stack(stack, synth_out);
        } else if (*bench) {
            apply_thread_env(bench_threads);
            if (bench_threads > 0) {
                asap::set_thread_count(bench_threads);
            }
            const auto rows = asap::bench(bench_cfg);
            const std::string csv = asap::bench_csv(rows);
            if (bench_out == "-") {
                std::cout << csv;
            } else {
                std::ofstream out(bench_out, std::ios::trunc);
                if (!(out << csv)) {
                    throw asap::Error(asap::ErrorCode::IoFailure, "cannot write " + bench_out);
                }
            }
            if (bench_cfg.sizes.size() >= 2) {
                for (const char* stage : {"accumulate", "distances", "cluster_sort"}) {
                    std::cerr << stage << " log-log slope: " << asap::loglog_slope(rows, stage) << '\n';
                }
            }
        } else if (*validate) {
            std::cout << asap::validate_file(validate_path).dump(2) << '\n';
        }
    } catch (const asap::Error& e) {
        return report_error(e);
    } catch (const std::exception& e) {
        std::cerr << nlohmann::json{{"error", "Internal"}, {"message", e.what()}, {"exit_status", 1}}.dump() << '\n';
        return 1;
    }
    return 0;
}
