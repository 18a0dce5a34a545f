#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "asap/matrix.hpp"

namespace asap {

/// Token-to-anchor diffusion distances over the patch tokens.
///
/// Vectors are indexed by patch position: entry i-1 belongs to token i, for
/// i = 1..N-1. normalized = (raw - d_min) / (d_max - d_min + epsilon_norm).
struct DistanceField {
    static constexpr double kEpsilonNorm = 1e-6;

    std::size_t sink = 1;
    std::vector<double> raw;
    std::vector<double> normalized;
    double d_min = 0.0;
    double d_max = 0.0;
    double epsilon_norm = kEpsilonNorm;

    std::size_t patch_count() const noexcept { return raw.size(); }

    /// Builds the normalized view from raw distances.
    static DistanceField from_raw(std::vector<double> raw, std::size_t sink);
};

struct StationaryEstimate {
    static constexpr double kFloor = 1e-12;
    std::vector<double> phi;
};

/// ||P_a - P_b||_2 over all N columns. Shared by clustering and redundancy pruning.
double row_distance(const TransitionMatrix& p, std::size_t a, std::size_t b) noexcept;

/// Unweighted diffusion distance of every patch token to the anchor row.
/// O(N^2). Throws SinkIsCls for anchor 0, IndexOutOfRange past N-1.
DistanceField diffusion_distances(const TransitionMatrix& p, std::size_t sink);

/// Column-mean stationary proxy, floored at 1e-12 and renormalized.
StationaryEstimate stationary_estimate(const TransitionMatrix& p);

/// sqrt(sum_k (P_ik - P_sk)^2 / phi_k) for patch tokens i = 1..N-1.
/// Throws DegeneratePhi for non-positive weights, LengthMismatch for a wrong size.
std::vector<double> weighted_diffusion_distances(const TransitionMatrix& p, std::size_t sink,
                                                 const StationaryEstimate& phi);

/// Fractional (average) ranks, 1-based.
std::vector<double> average_ranks(std::span<const double> values);

/// Spearman rho with average ranks for ties. Returns 0 when either input is
/// constant. Throws LengthMismatch or TooShort (fewer than 2 values).
double spearman_rank(std::span<const double> a, std::span<const double> b);

}  // namespace asap
