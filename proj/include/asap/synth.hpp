#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

#include "asap/attnio.hpp"

namespace asap {

struct SynthConfig {
    std::size_t n = 16;  // tokens, including CLS
    std::size_t l = 12;  // layers
    std::size_t h = 1;   // heads
    std::size_t d = 16;  // feature dimension (0 for none)
    /// Every row puts at least 1/n + margin on the planted sink column.
    double margin = 0.0;
    std::optional<std::size_t> sink_index;
    /// Self-attention of the sink's own row, max'ed with 1/n + margin. Real
    /// sinks attend mostly to themselves; without this the sink column sum
    /// saturates at 1 + n*margin.
    double sink_self = 0.98;
    std::uint64_t seed = 0;
    /// Dirichlet concentration for the off-sink mass.
    double noise = 1.0;

    /// Throws InfeasibleMargin or ConfigError.
    void validate() const;
};

/// Planted-sink stack when sink_index is set; otherwise plain random
/// row-stochastic layers (Dirichlet rows). Seeded Gaussian features included
/// when d > 0. Deterministic in the seed; each layer uses its own derived
/// sub-seed.
AttentionStack gen_sink_stack(const SynthConfig& cfg);

/// Every entry exactly 1/n.
AttentionStack gen_uniform_stack(const SynthConfig& cfg);

/// Identity attention in every layer and head.
AttentionStack gen_identity_stack(const SynthConfig& cfg);

}  // namespace asap
