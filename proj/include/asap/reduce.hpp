#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "asap/attnio.hpp"
#include "asap/geometry.hpp"
#include "asap/sink.hpp"
#include "asap/walk.hpp"

namespace asap {

/// Radial level sets of the distance field. Cluster ids run 0..k-1 from the
/// anchor outward; ids below p form the background.
struct ClusterAssignment {
    std::size_t k = 0;
    std::size_t p = 0;
    /// labels[i-1] is the cluster of patch token i.
    std::vector<std::size_t> labels;
    /// Token indices per cluster, ascending.
    std::vector<std::vector<std::size_t>> members;

    std::vector<std::size_t> background() const;
    std::vector<std::size_t> foreground() const;
    std::vector<std::size_t> sizes() const;
};

/// label = clamp(floor(normalized * k), 0, k-1). Tokens at d_max land in k-1
/// unless the field is flat, i.e. d_max - d_min is below epsilon_norm. Throws BadClusterCounts unless k >= 2 and 1 <= p < k.
ClusterAssignment radial_cluster(const DistanceField& field, std::size_t k, std::size_t p);

struct PoolResult {
    std::vector<double> pooled;
    /// Softmax weights, aligned with members.
    std::vector<double> weights;
    std::vector<std::size_t> members;
};

/// Collapses the background into one token: weights are a softmax of the raw
/// (unnormalized) distances, so tokens farther from the anchor weigh more.
/// Throws EmptyBackground, MissingFeatures or ShapeMismatch.
PoolResult transition_weight_pool(const ClusterAssignment& clusters, const DistanceField& field,
                                  const Matrix& features);

struct SampleResult {
    /// Surviving foreground tokens, cluster by cluster from the anchor outward,
    /// ascending token index inside each cluster.
    std::vector<std::size_t> survivors;
    /// True when the foreground exceeded the budget and stride sampling ran.
    bool constrained = false;
};

/// Budget-proportional stride sampling over foreground clusters, nearest
/// cluster first. Inside a cluster tokens are ordered by normalized distance
/// (ties by index) and every stride-th one is taken, where
/// stride = floor(|C| / floor(T * |C| / |C_fg|)), falling back to 1.
/// Picks are capped at the remaining budget so at most T tokens survive.
SampleResult stride_sample(const ClusterAssignment& clusters, const DistanceField& field, std::size_t budget);

enum class ProvenanceKind { Cls, Survivor, PooledBackground };

std::string_view to_string(ProvenanceKind kind) noexcept;

struct Provenance {
    ProvenanceKind kind = ProvenanceKind::Cls;
    /// Original token index for Cls (0) and Survivor.
    std::size_t index = 0;
    /// Pooled token indices for PooledBackground.
    std::vector<std::size_t> members;
};

struct ReducedToken {
    std::vector<double> features;
    Provenance provenance;
};

struct ReducedTokenSet {
    std::vector<ReducedToken> tokens;
    /// Number of survivor tokens (the part that counts against the budget).
    std::size_t budget_used = 0;

    std::size_t size() const noexcept { return tokens.size(); }
};

/// [cls] ++ survivors ++ [pooled background].
ReducedTokenSet assemble(std::span<const double> cls, std::span<const std::size_t> survivors,
                         const Matrix& features, const PoolResult& pool);

struct AnchorMode {
    enum class Kind { Sink, Random };
    Kind kind = Kind::Sink;
    /// Seed for Kind::Random; the anchor is uniform over 1..N-1.
    std::uint64_t seed = 0;
};

struct ReduceConfig {
    std::size_t k = 6;
    std::size_t p = 1;
    /// Token budget T for stride sampling; no sampling when empty.
    std::optional<std::size_t> budget;
    AnchorMode anchor;
    /// Layer whose features feed pooling and assembly. Defaults to the
    /// reduction layer t* (0-based index t* - 1).
    std::optional<std::size_t> feature_layer;

    void validate() const;
};

using StageTimings = std::vector<std::pair<std::string, double>>;

/// Everything up to and including background pooling, shared by the core and
/// hybrid pipelines.
struct CoreAnalysis {
    WalkState walk;
    SinkReport sink;
    std::size_t anchor = 1;
    DistanceField field;
    ClusterAssignment clusters;
    std::size_t feature_layer = 0;
    Matrix features;
    PoolResult pool;
    std::vector<std::string> warnings;
    StageTimings timings_ms;
};

CoreAnalysis analyze_stack(const AttentionStack& stack, const WalkConfig& walk_cfg, const ReduceConfig& cfg);

struct CoreResult {
    CoreAnalysis analysis;
    SampleResult sample;
    ReducedTokenSet output;
};

/// Full single-shot reduction: walk, sink, distances, clustering, pooling,
/// optional stride sampling and assembly.
CoreResult reduce_stack(const AttentionStack& stack, const WalkConfig& walk_cfg, const ReduceConfig& cfg);

enum class TokenFate { Cls, Keep, Pool, Drop };

std::string_view to_string(TokenFate fate) noexcept;

/// Per-token fate over all N original tokens, derived from an assembled set.
std::vector<TokenFate> token_fates(const ReducedTokenSet& set, std::size_t tokens);

}  // namespace asap
