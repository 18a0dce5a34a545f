#include "asap/hybrid.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "asap/error.hpp"

namespace asap {

std::string_view to_string(PruneMetric metric) noexcept {
    switch (metric) {
    case PruneMetric::Diffusion: return "diffusion";
    case PruneMetric::Cosine: return "cosine";
    }
    return "unknown";
}

void HybridConfig::validate() const {
    if (target < 1) {
        throw Error(ErrorCode::ConfigError, "hybrid target must be at least 1");
    }
    if (removal_batch && *removal_batch < 1) {
        throw Error(ErrorCode::ConfigError, "removal batch must be at least 1");
    }
}

std::vector<std::size_t> cls_topk_filter(std::span<const std::size_t> survivors, const TransitionMatrix& p,
                                         std::size_t limit) {
    std::vector<std::size_t> kept(survivors.begin(), survivors.end());
    if (kept.size() > limit) {
        std::sort(kept.begin(), kept.end(), [&](std::size_t a, std::size_t b) {
            const double ma = p(0, a);
            const double mb = p(0, b);
            return ma != mb ? ma > mb : a < b;
        });
        kept.resize(limit);
    }
    std::sort(kept.begin(), kept.end());
    return kept;
}

PruneResult bipartite_prune(std::span<const std::size_t> survivors, const PairDistance& distance,
                            std::size_t target, std::optional<std::size_t> removal_batch) {
    if (target > survivors.size()) {
        throw Error(ErrorCode::TargetExceedsInput, "target " + std::to_string(target) + " exceeds " +
                                                       std::to_string(survivors.size()) + " survivors");
    }
    if (target < 1) {
        throw Error(ErrorCode::ConfigError, "target must be at least 1");
    }
    PruneResult out;
    out.survivors.assign(survivors.begin(), survivors.end());
    std::sort(out.survivors.begin(), out.survivors.end());
    out.removal_batch = removal_batch.value_or(std::max<std::size_t>(1, out.survivors.size() / 8));

    std::size_t to_remove = out.survivors.size() - target;
    while (to_remove > 0) {
        const auto& s = out.survivors;
        std::vector<std::size_t> group_a;
        std::vector<std::size_t> group_b;
        for (std::size_t pos = 0; pos < s.size(); ++pos) {
            (pos % 2 == 0 ? group_a : group_b).push_back(s[pos]);
        }

        std::vector<std::pair<double, std::size_t>> scored;
        scored.reserve(group_b.size());
        for (std::size_t b : group_b) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t a : group_a) {
                best = std::min(best, distance(a, b));
            }
            scored.emplace_back(best, b);
        }
        std::sort(scored.begin(), scored.end());

        const std::size_t quota = std::min({out.removal_batch, to_remove, scored.size()});
        PruneRound round;
        round.round = out.rounds.size();
        for (std::size_t r = 0; r < quota; ++r) {
            round.scores.push_back(scored[r].first);
            round.removed.push_back(scored[r].second);
        }
        std::vector<std::size_t> drop = round.removed;
        std::sort(drop.begin(), drop.end());
        std::vector<std::size_t> next;
        next.reserve(s.size() - drop.size());
        std::set_difference(s.begin(), s.end(), drop.begin(), drop.end(), std::back_inserter(next));
        out.survivors = std::move(next);
        to_remove -= quota;
        round.remaining = out.survivors.size();
        out.rounds.push_back(std::move(round));
    }
    return out;
}

PruneResult bipartite_prune(std::span<const std::size_t> survivors, const TransitionMatrix& p,
                            const HybridConfig& cfg) {
    cfg.validate();
    return bipartite_prune(survivors, [&p](std::size_t a, std::size_t b) { return row_distance(p, a, b); },
                           cfg.target, cfg.removal_batch);
}

double cosine_distance(std::span<const double> a, std::span<const double> b) noexcept {
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) {
        return 1.0;
    }
    return 1.0 - dot / std::sqrt(na * nb);
}

HybridResult run_hybrid(const AttentionStack& stack, const WalkConfig& walk_cfg, const ReduceConfig& reduce_cfg,
                        const HybridConfig& hybrid_cfg) {
    hybrid_cfg.validate();
    HybridResult out;
    out.analysis = analyze_stack(stack, walk_cfg, reduce_cfg);
    CoreAnalysis& a = out.analysis;
    const TransitionMatrix& p = a.walk.at_trigger();

    auto start = std::chrono::steady_clock::now();
    const auto lap = [&](const char* name) {
        const auto now = std::chrono::steady_clock::now();
        a.timings_ms.emplace_back(name, std::chrono::duration<double, std::milli>(now - start).count());
        start = now;
    };

    out.foreground = a.clusters.foreground();
    out.after_topk = cls_topk_filter(out.foreground, p, HybridConfig::kTopkMultiplier * hybrid_cfg.target);
    lap("cls_topk");

    if (out.after_topk.size() > hybrid_cfg.target) {
        if (hybrid_cfg.metric == PruneMetric::Cosine) {
            const Matrix& f = a.features;
            out.prune = bipartite_prune(
                out.after_topk, [&f](std::size_t x, std::size_t y) { return cosine_distance(f.row(x), f.row(y)); },
                hybrid_cfg.target, hybrid_cfg.removal_batch);
        } else {
            out.prune = bipartite_prune(out.after_topk, p, hybrid_cfg);
        }
    } else {
        out.prune.survivors = out.after_topk;
    }
    lap("bipartite_prune");

    out.output = assemble(a.features.row(0), out.prune.survivors, a.features, a.pool);
    lap("assemble");
    return out;
}

}  // namespace asap
