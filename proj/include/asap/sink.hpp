#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "asap/walk.hpp"

namespace asap {

struct SinkReport {
    /// Depth of the reduction layer: the trigger depth, or the final depth on fallback.
    std::size_t t_star = 0;
    /// argmax_{j>=1} of the CLS row of P^(t*), lowest index on ties. Never 0.
    std::size_t sink_index = 1;
    /// Max patch column sum at t_star.
    double trigger_value = 0.0;
    std::vector<double> cls_row;
    bool detected = false;
    /// Column with the largest column sum at t_star. May differ from sink_index,
    /// since the CLS row only proxies the mass accumulator.
    std::size_t column_sum_argmax = 1;
};

/// argmax over j >= 1 of a row, lowest index on ties. Requires row.size() >= 2.
std::size_t argmax_patch(std::span<const double> row);

/// Resolves the sink from a finished walk. Never fails: when tau was never
/// crossed the final product is used and detected is false.
SinkReport locate_sink(const WalkState& state, const WalkConfig& cfg);

/// Column sums C^(t)_token for t = 1..depth. Throws HistoryNotRetained when the
/// walk ran without retain_history, IndexOutOfRange for a bad token.
std::vector<double> mass_trajectory(const WalkState& state, std::size_t token);

}  // namespace asap
