#include "asap/walk.hpp"

#include <algorithm>
#include <string>

#include "asap/error.hpp"

namespace asap {

void WalkConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw Error(ErrorCode::AlphaOutOfRange, "alpha must lie in (0, 1), got " + std::to_string(alpha));
    }
    if (!(tau > 1.0)) {
        throw Error(ErrorCode::TauOutOfRange, "tau must exceed 1, got " + std::to_string(tau));
    }
}

const TransitionMatrix& WalkState::at_trigger() const noexcept {
    return trigger_snapshot ? *trigger_snapshot : cumulative;
}

TransitionMatrix lazify(const TransitionMatrix& a, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw Error(ErrorCode::AlphaOutOfRange, "alpha must lie in (0, 1), got " + std::to_string(alpha));
    }
    Matrix out = a.matrix();
    for (double& v : out.data()) {
        v *= alpha;
    }
    for (std::size_t i = 0; i < out.rows(); ++i) {
        out(i, i) += 1.0 - alpha;
    }
    return TransitionMatrix::assume_stochastic(std::move(out));
}

ColumnMax max_patch_column_sum(const TransitionMatrix& p) {
    const std::size_t n = p.size();
    std::vector<double> sums(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = p.row(i);
        for (std::size_t j = 0; j < n; ++j) {
            sums[j] += row[j];
        }
    }
    ColumnMax best;
    for (std::size_t j = 1; j < n; ++j) {
        if (j == 1 || sums[j] > best.value) {
            best = {sums[j], j};
        }
    }
    return best;
}

WalkState accumulate(const AttentionStack& stack, const WalkConfig& cfg) {
    cfg.validate();
    const std::size_t limit = std::min(stack.layers(), cfg.max_layers.value_or(stack.layers()));
    if (limit == 0) {
        throw Error(ErrorCode::EmptyStack, "no layers to accumulate");
    }

    WalkState state;
    state.column_sum_history.reserve(limit);
    state.column_argmax_history.reserve(limit);
    for (std::size_t layer = 0; layer < limit; ++layer) {
        TransitionMatrix step = lazify(head_average(stack, layer), cfg.alpha);
        // Left-to-right: P <- P x A~^t.
        state.cumulative = layer == 0 ? std::move(step) : multiply(state.cumulative, step);
        state.depth = layer + 1;

        const ColumnMax peak = max_patch_column_sum(state.cumulative);
        state.column_sum_history.push_back(peak.value);
        state.column_argmax_history.push_back(peak.column);
        if (cfg.retain_history) {
            state.history.push_back(state.cumulative);
        }

        if (!state.trigger_depth && peak.value > cfg.tau) {
            state.trigger_depth = state.depth;
            if (cfg.early_stop) {
                break;
            }
            if (state.depth < limit) {
                state.trigger_snapshot = state.cumulative;
            }
        }
    }
    return state;
}

}  // namespace asap
