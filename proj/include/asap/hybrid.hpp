#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "asap/reduce.hpp"

namespace asap {

enum class PruneMetric { Diffusion, Cosine };

std::string_view to_string(PruneMetric metric) noexcept;

struct HybridConfig {
    /// Final foreground budget T.
    std::size_t target = 1;
    /// Tokens removed per bipartite round; defaults to max(1, |S| / 8).
    std::optional<std::size_t> removal_batch;
    /// Diffusion distance on P rows, or cosine distance on features (ablation).
    PruneMetric metric = PruneMetric::Diffusion;
    /// CLS top-k gate keeps at most kTopkMultiplier * target tokens.
    static constexpr std::size_t kTopkMultiplier = 3;

    void validate() const;
};

/// Keeps the `limit` survivors with the largest CLS-row mass P_0i (ties: lower
/// index). Identity when there are at most `limit` survivors. Output ascending.
std::vector<std::size_t> cls_topk_filter(std::span<const std::size_t> survivors, const TransitionMatrix& p,
                                         std::size_t limit);

struct PruneRound {
    std::size_t round = 0;
    std::vector<std::size_t> removed;
    /// Matching score of every removed token, aligned with removed.
    std::vector<double> scores;
    std::size_t remaining = 0;
};

struct PruneResult {
    std::vector<std::size_t> survivors;
    std::vector<PruneRound> rounds;
    std::size_t removal_batch = 0;
};

using PairDistance = std::function<double(std::size_t, std::size_t)>;

/// Iterative bipartite redundancy pruning. Each round splits the ascending
/// survivor list into even positions (A) and odd positions (B), scores every
/// b in B by its nearest a in A, and drops the min(r, remaining quota) lowest
/// scores from B (ties: lower index). Stops at exactly `target` survivors.
/// Throws TargetExceedsInput when target > |survivors|.
PruneResult bipartite_prune(std::span<const std::size_t> survivors, const PairDistance& distance,
                            std::size_t target, std::optional<std::size_t> removal_batch);

/// Same, with the diffusion distance ||P_a - P_b||_2.
PruneResult bipartite_prune(std::span<const std::size_t> survivors, const TransitionMatrix& p,
                            const HybridConfig& cfg);

/// 1 - cos(a, b); 1 when either vector is zero.
double cosine_distance(std::span<const double> a, std::span<const double> b) noexcept;

struct HybridResult {
    CoreAnalysis analysis;
    std::vector<std::size_t> foreground;
    std::vector<std::size_t> after_topk;
    PruneResult prune;
    ReducedTokenSet output;
};

/// Core analysis followed by CLS top-3T gating and bipartite pruning, all on
/// P^(t*). Output is [cls] ++ survivors (<= T) ++ [pooled background].
HybridResult run_hybrid(const AttentionStack& stack, const WalkConfig& walk_cfg, const ReduceConfig& reduce_cfg,
                        const HybridConfig& hybrid_cfg);

}  // namespace asap
