#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "asap/attnio.hpp"
#include "asap/matrix.hpp"

namespace asap {

struct WalkConfig {
    /// Weight on attention in alpha*A + (1-alpha)*I; open interval (0, 1).
    double alpha = 0.5;
    /// Column-sum trigger for sink emergence; must exceed 1.
    double tau = 7.0;
    /// Cap on accumulation depth; defaults to every layer of the stack.
    std::optional<std::size_t> max_layers;
    /// Stop at the first layer whose max column sum exceeds tau.
    bool early_stop = true;
    /// Keep every intermediate product (O(L*N^2) memory) for diagnostics.
    bool retain_history = false;

    /// Throws AlphaOutOfRange or TauOutOfRange.
    void validate() const;
};

/// Result of accumulating lazified layers.
///
/// Depths are 1-based layer counts: after consuming t layers, depth == t and
/// cumulative == P^(t). column_sum_history[t-1] is max_{j>=1} sum_i P^(t)_ij.
struct WalkState {
    TransitionMatrix cumulative = TransitionMatrix::identity(1);
    std::size_t depth = 0;
    std::vector<double> column_sum_history;
    /// Column attaining column_sum_history[t-1] (lowest index on ties).
    std::vector<std::size_t> column_argmax_history;
    /// First depth whose max column sum exceeded tau; empty if it never did.
    std::optional<std::size_t> trigger_depth;
    /// P at trigger_depth when accumulation continued past it (early_stop off).
    std::optional<TransitionMatrix> trigger_snapshot;
    /// P^(1..depth) when retain_history was set.
    std::vector<TransitionMatrix> history;

    bool sink_detected() const noexcept { return trigger_depth.has_value(); }
    bool history_retained() const noexcept { return !history.empty(); }

    /// P at the reduction layer: P^(t*) when the trigger fired, else the final product.
    const TransitionMatrix& at_trigger() const noexcept;
};

/// alpha * a + (1 - alpha) * I. Throws AlphaOutOfRange unless 0 < alpha < 1.
TransitionMatrix lazify(const TransitionMatrix& a, double alpha);

/// Largest column sum over patch columns j >= 1, and the column attaining it.
struct ColumnMax {
    double value = 0.0;
    std::size_t column = 0;
};
ColumnMax max_patch_column_sum(const TransitionMatrix& p);

/// P^(t) = P^(t-1) x lazify(head_average(layer t)), recorded layer by layer.
/// Throws EmptyStack when no layer would be consumed.
WalkState accumulate(const AttentionStack& stack, const WalkConfig& cfg);

}  // namespace asap
