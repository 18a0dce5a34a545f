#include "asap/sink.hpp"

#include <string>

#include "asap/error.hpp"

namespace asap {

std::size_t argmax_patch(std::span<const double> row) {
    if (row.size() < 2) {
        throw Error(ErrorCode::TooShort, "row has no patch entries");
    }
    std::size_t best = 1;
    for (std::size_t j = 2; j < row.size(); ++j) {
        if (row[j] > row[best]) {
            best = j;
        }
    }
    return best;
}

SinkReport locate_sink(const WalkState& state, const WalkConfig& /*cfg*/) {
    if (state.depth == 0) {
        throw Error(ErrorCode::EmptyStack, "walk consumed no layers");
    }
    SinkReport report;
    report.detected = state.sink_detected();
    report.t_star = report.detected ? *state.trigger_depth : state.depth;
    report.trigger_value = state.column_sum_history[report.t_star - 1];
    report.column_sum_argmax = state.column_argmax_history[report.t_star - 1];

    const TransitionMatrix& p = state.at_trigger();
    const auto cls = p.row(0);
    report.cls_row.assign(cls.begin(), cls.end());
    report.sink_index = argmax_patch(report.cls_row);
    return report;
}

std::vector<double> mass_trajectory(const WalkState& state, std::size_t token) {
    if (!state.history_retained()) {
        throw Error(ErrorCode::HistoryNotRetained, "accumulate with retain_history to trace column mass");
    }
    if (token >= state.cumulative.size()) {
        throw Error(ErrorCode::IndexOutOfRange, "token " + std::to_string(token));
    }
    std::vector<double> out;
    out.reserve(state.history.size());
    for (const auto& p : state.history) {
        out.push_back(p.column_sum(token));
    }
    return out;
}

}  // namespace asap
