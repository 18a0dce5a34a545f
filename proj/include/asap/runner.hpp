#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "asap/hybrid.hpp"
#include "asap/reduce.hpp"
#include "asap/walk.hpp"

namespace asap {

inline constexpr int kReportSchemaVersion = 1;

enum class RunMode { Pool, Prune, Hybrid, ReportOnly };

std::string_view to_string(RunMode mode) noexcept;
/// Throws ConfigError for an unknown name.
RunMode parse_run_mode(std::string_view name);

struct RunConfig {
    std::filesystem::path input;
    RunMode mode = RunMode::Pool;
    WalkConfig walk;
    std::size_t k = 6;
    std::size_t p = 1;
    std::optional<std::size_t> budget;
    std::optional<std::size_t> removal_batch;
    AnchorMode::Kind anchor = AnchorMode::Kind::Sink;
    PruneMetric metric = PruneMetric::Diffusion;
    std::optional<std::size_t> feature_layer;
    /// Report destination; "-" or empty writes to stdout.
    std::filesystem::path output;
    std::optional<std::filesystem::path> distances_csv;
    std::optional<std::filesystem::path> mask_csv;
    /// Single source of randomness (random anchor).
    std::uint64_t seed = 0;
    /// 0 keeps the machine default.
    std::size_t threads = 0;

    /// Mode-specific checks; throws ConfigError (and the walk/cluster range errors)
    /// before any compute happens.
    void validate() const;
};

nlohmann::json config_to_json(const RunConfig& cfg);

/// Runs one pipeline over an ATNB file and returns the report. Writes the
/// report and the optional CSV dumps when paths are configured.
nlohmann::json run(const RunConfig& cfg);

/// Report without touching the filesystem (input stack supplied directly).
struct RunArtifacts {
    nlohmann::json report;
    std::string distances_csv;
    std::string mask_csv;
};
RunArtifacts run_on_stack(const AttentionStack& stack, const RunConfig& cfg);

/// Validation summary of a container file.
nlohmann::json validate_file(const std::filesystem::path& path);

struct BenchConfig {
    std::vector<std::size_t> sizes{64, 128, 256, 512, 1024};
    std::size_t warmup = 5;
    std::size_t iterations = 20;
    /// Calls are batched until one sample takes at least this long.
    double min_sample_ms = 2.0;
    std::uint64_t seed = 0;
};

struct BenchRow {
    std::size_t n = 0;
    std::string stage;
    double median_ms = 0.0;
    std::size_t calls_per_sample = 1;
};

/// Median wall time per call of the accumulate (2-layer product), distances
/// and cluster_sort stages on random stacks of each size.
std::vector<BenchRow> bench(const BenchConfig& cfg);

std::string bench_csv(std::span<const BenchRow> rows);

/// Least-squares slope of log(time) against log(n) for one stage.
double loglog_slope(std::span<const BenchRow> rows, std::string_view stage);

}  // namespace asap
