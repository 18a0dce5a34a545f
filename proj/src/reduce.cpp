#include "asap/reduce.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include "asap/error.hpp"

namespace asap {

namespace {

class StageClock {
public:
    explicit StageClock(StageTimings& sink) : m_sink(sink), m_start(Clock::now()) {}

    void lap(std::string name) {
        const auto now = Clock::now();
        m_sink.emplace_back(std::move(name), std::chrono::duration<double, std::milli>(now - m_start).count());
        m_start = now;
    }

private:
    using Clock = std::chrono::steady_clock;
    StageTimings& m_sink;
    Clock::time_point m_start;
};

std::size_t patch_index(std::size_t token) { return token - 1; }

}  // namespace

std::vector<std::size_t> ClusterAssignment::background() const {
    std::vector<std::size_t> out;
    for (std::size_t c = 0; c < std::min(p, members.size()); ++c) {
        out.insert(out.end(), members[c].begin(), members[c].end());
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::size_t> ClusterAssignment::foreground() const {
    std::vector<std::size_t> out;
    for (std::size_t c = p; c < members.size(); ++c) {
        out.insert(out.end(), members[c].begin(), members[c].end());
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::size_t> ClusterAssignment::sizes() const {
    std::vector<std::size_t> out;
    out.reserve(members.size());
    for (const auto& m : members) {
        out.push_back(m.size());
    }
    return out;
}

ClusterAssignment radial_cluster(const DistanceField& field, std::size_t k, std::size_t p) {
    if (k < 2 || p < 1 || p >= k) {
        throw Error(ErrorCode::BadClusterCounts,
                    "need k >= 2 and 1 <= p < k, got k=" + std::to_string(k) + " p=" + std::to_string(p));
    }
    ClusterAssignment out;
    out.k = k;
    out.p = p;
    out.labels.resize(field.patch_count());
    out.members.assign(k, {});
    // spans below the normalization epsilon are rounding noise, not geometry
    const bool flat = !(field.d_max - field.d_min >= field.epsilon_norm);
    const double kk = static_cast<double>(k);
    for (std::size_t i = 0; i < field.patch_count(); ++i) {
        std::size_t label = 0;
        if (!flat && field.raw[i] == field.d_max) {
            label = k - 1;
        } else {
            const double scaled = std::floor(field.normalized[i] * kk);
            label = static_cast<std::size_t>(std::clamp(scaled, 0.0, kk - 1.0));
        }
        out.labels[i] = label;
        out.members[label].push_back(i + 1);
    }
    return out;
}

PoolResult transition_weight_pool(const ClusterAssignment& clusters, const DistanceField& field,
                                  const Matrix& features) {
    if (features.empty()) {
        throw Error(ErrorCode::MissingFeatures, "pooling needs token features");
    }
    if (features.rows() != field.patch_count() + 1) {
        throw Error(ErrorCode::ShapeMismatch, "feature rows " + std::to_string(features.rows()) +
                                                  " do not match N=" + std::to_string(field.patch_count() + 1));
    }
    PoolResult out;
    out.members = clusters.background();
    if (out.members.empty()) {
        throw Error(ErrorCode::EmptyBackground, "no token below cluster " + std::to_string(clusters.p));
    }

    // softmax(raw distance), shifted by the maximum for range safety
    double peak = field.raw[patch_index(out.members.front())];
    for (std::size_t t : out.members) {
        peak = std::max(peak, field.raw[patch_index(t)]);
    }
    out.weights.reserve(out.members.size());
    double total = 0.0;
    for (std::size_t t : out.members) {
        const double w = std::exp(field.raw[patch_index(t)] - peak);
        out.weights.push_back(w);
        total += w;
    }
    for (double& w : out.weights) {
        w /= total;
    }

    out.pooled.assign(features.cols(), 0.0);
    for (std::size_t m = 0; m < out.members.size(); ++m) {
        const auto f = features.row(out.members[m]);
        for (std::size_t c = 0; c < f.size(); ++c) {
            out.pooled[c] += out.weights[m] * f[c];
        }
    }
    return out;
}

SampleResult stride_sample(const ClusterAssignment& clusters, const DistanceField& field, std::size_t budget) {
    if (budget < 1) {
        throw Error(ErrorCode::ConfigError, "budget must be at least 1");
    }
    SampleResult out;
    std::size_t foreground = 0;
    for (std::size_t c = clusters.p; c < clusters.members.size(); ++c) {
        foreground += clusters.members[c].size();
    }
    if (foreground <= budget) {
        for (std::size_t c = clusters.p; c < clusters.members.size(); ++c) {
            out.survivors.insert(out.survivors.end(), clusters.members[c].begin(), clusters.members[c].end());
        }
        return out;
    }

    out.constrained = true;
    for (std::size_t c = clusters.p; c < clusters.members.size(); ++c) {
        std::vector<std::size_t> ordered = clusters.members[c];
        if (ordered.empty()) {
            continue;
        }
        std::stable_sort(ordered.begin(), ordered.end(), [&](std::size_t a, std::size_t b) {
            return field.normalized[patch_index(a)] < field.normalized[patch_index(b)];
        });
        const std::size_t quota = budget * ordered.size() / foreground;
        std::size_t stride = quota == 0 ? 1 : ordered.size() / quota;
        if (stride == 0) {
            stride = 1;
        }
        const std::size_t room = budget - out.survivors.size();
        std::vector<std::size_t> picks;
        for (std::size_t pos = 0; pos < ordered.size() && picks.size() < room; pos += stride) {
            picks.push_back(ordered[pos]);
        }
        std::sort(picks.begin(), picks.end());
        out.survivors.insert(out.survivors.end(), picks.begin(), picks.end());
        if (out.survivors.size() >= budget) {
            break;
        }
    }
    return out;
}

std::string_view to_string(ProvenanceKind kind) noexcept {
    switch (kind) {
    case ProvenanceKind::Cls: return "cls";
    case ProvenanceKind::Survivor: return "survivor";
    case ProvenanceKind::PooledBackground: return "pooled_background";
    }
    return "unknown";
}

ReducedTokenSet assemble(std::span<const double> cls, std::span<const std::size_t> survivors,
                         const Matrix& features, const PoolResult& pool) {
    ReducedTokenSet out;
    out.tokens.reserve(survivors.size() + 2);
    out.tokens.push_back({std::vector<double>(cls.begin(), cls.end()), {ProvenanceKind::Cls, 0, {}}});
    for (std::size_t t : survivors) {
        if (t == 0 || t >= features.rows()) {
            throw Error(ErrorCode::IndexOutOfRange, "survivor " + std::to_string(t));
        }
        const auto f = features.row(t);
        out.tokens.push_back({std::vector<double>(f.begin(), f.end()), {ProvenanceKind::Survivor, t, {}}});
    }
    out.tokens.push_back({pool.pooled, {ProvenanceKind::PooledBackground, 0, pool.members}});
    out.budget_used = survivors.size();
    return out;
}

void ReduceConfig::validate() const {
    if (k < 2 || p < 1 || p >= k) {
        throw Error(ErrorCode::BadClusterCounts,
                    "need k >= 2 and 1 <= p < k, got k=" + std::to_string(k) + " p=" + std::to_string(p));
    }
    if (budget && *budget < 1) {
        throw Error(ErrorCode::ConfigError, "budget must be at least 1");
    }
}

CoreAnalysis analyze_stack(const AttentionStack& stack, const WalkConfig& walk_cfg, const ReduceConfig& cfg) {
    walk_cfg.validate();
    cfg.validate();
    if (!stack.has_features()) {
        throw Error(ErrorCode::MissingFeatures, "pooling needs token features");
    }

    CoreAnalysis out;
    StageClock clock(out.timings_ms);

    out.walk = accumulate(stack, walk_cfg);
    clock.lap("accumulate");

    out.sink = locate_sink(out.walk, walk_cfg);
    if (!out.sink.detected) {
        out.warnings.push_back("column sum never exceeded tau; anchoring on the final layer (depth " +
                               std::to_string(out.sink.t_star) + ")");
    }
    if (cfg.anchor.kind == AnchorMode::Kind::Random) {
        std::mt19937_64 rng(cfg.anchor.seed);
        std::uniform_int_distribution<std::size_t> pick(1, stack.tokens() - 1);
        out.anchor = pick(rng);
    } else {
        out.anchor = out.sink.sink_index;
    }
    clock.lap("locate_sink");

    out.field = diffusion_distances(out.walk.at_trigger(), out.anchor);
    clock.lap("distances");

    out.clusters = radial_cluster(out.field, cfg.k, cfg.p);
    clock.lap("cluster");

    out.feature_layer = cfg.feature_layer.value_or(out.sink.t_star - 1);
    out.features = stack.features(out.feature_layer);
    out.pool = transition_weight_pool(out.clusters, out.field, out.features);
    if (out.clusters.foreground().empty()) {
        out.warnings.push_back("every patch token fell into the background; output is [cls, pooled]");
    }
    clock.lap("pool");
    return out;
}

CoreResult reduce_stack(const AttentionStack& stack, const WalkConfig& walk_cfg, const ReduceConfig& cfg) {
    CoreResult out;
    out.analysis = analyze_stack(stack, walk_cfg, cfg);
    CoreAnalysis& a = out.analysis;
    StageClock clock(a.timings_ms);

    if (cfg.budget) {
        out.sample = stride_sample(a.clusters, a.field, *cfg.budget);
    } else {
        for (std::size_t c = a.clusters.p; c < a.clusters.k; ++c) {
            const auto& m = a.clusters.members[c];
            out.sample.survivors.insert(out.sample.survivors.end(), m.begin(), m.end());
        }
    }
    clock.lap("sample");

    out.output = assemble(a.features.row(0), out.sample.survivors, a.features, a.pool);
    clock.lap("assemble");
    return out;
}

std::string_view to_string(TokenFate fate) noexcept {
    switch (fate) {
    case TokenFate::Cls: return "cls";
    case TokenFate::Keep: return "keep";
    case TokenFate::Pool: return "pool";
    case TokenFate::Drop: return "drop";
    }
    return "unknown";
}

std::vector<TokenFate> token_fates(const ReducedTokenSet& set, std::size_t tokens) {
    std::vector<TokenFate> fates(tokens, TokenFate::Drop);
    for (const auto& token : set.tokens) {
        const auto& prov = token.provenance;
        switch (prov.kind) {
        case ProvenanceKind::Cls:
            fates.at(0) = TokenFate::Cls;
            break;
        case ProvenanceKind::Survivor:
            fates.at(prov.index) = TokenFate::Keep;
            break;
        case ProvenanceKind::PooledBackground:
            for (std::size_t m : prov.members) {
                fates.at(m) = TokenFate::Pool;
            }
            break;
        }
    }
    return fates;
}

}  // namespace asap
