#include "asap/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "asap/error.hpp"
#include "asap/parallel.hpp"

namespace asap {

namespace {

void check_anchor(const TransitionMatrix& p, std::size_t sink) {
    if (sink == 0) {
        throw Error(ErrorCode::SinkIsCls, "anchor must be a patch token");
    }
    if (sink >= p.size()) {
        throw Error(ErrorCode::IndexOutOfRange, "anchor " + std::to_string(sink) + " of " + std::to_string(p.size()));
    }
}

}  // namespace

DistanceField DistanceField::from_raw(std::vector<double> raw, std::size_t sink) {
    DistanceField field;
    field.sink = sink;
    field.raw = std::move(raw);
    if (!field.raw.empty()) {
        const auto [lo, hi] = std::minmax_element(field.raw.begin(), field.raw.end());
        field.d_min = *lo;
        field.d_max = *hi;
    }
    const double denom = field.d_max - field.d_min + field.epsilon_norm;
    field.normalized.reserve(field.raw.size());
    for (double d : field.raw) {
        field.normalized.push_back((d - field.d_min) / denom);
    }
    return field;
}

double row_distance(const TransitionMatrix& p, std::size_t a, std::size_t b) noexcept {
    const auto ra = p.row(a);
    const auto rb = p.row(b);
    double acc = 0.0;
    for (std::size_t k = 0; k < ra.size(); ++k) {
        const double diff = ra[k] - rb[k];
        acc += diff * diff;
    }
    return std::sqrt(acc);
}

DistanceField diffusion_distances(const TransitionMatrix& p, std::size_t sink) {
    check_anchor(p, sink);
    const std::size_t n = p.size();
    std::vector<double> raw(n - 1, 0.0);
    parallel_for(1, n, [&](std::size_t i) {
        raw[i - 1] = i == sink ? 0.0 : row_distance(p, i, sink);
    }, 64);
    return DistanceField::from_raw(std::move(raw), sink);
}

StationaryEstimate stationary_estimate(const TransitionMatrix& p) {
    const std::size_t n = p.size();
    StationaryEstimate est;
    est.phi.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = p.row(i);
        for (std::size_t k = 0; k < n; ++k) {
            est.phi[k] += row[k];
        }
    }
    double total = 0.0;
    for (double& v : est.phi) {
        v = std::max(v / static_cast<double>(n), StationaryEstimate::kFloor);
        total += v;
    }
    for (double& v : est.phi) {
        v /= total;
    }
    return est;
}

std::vector<double> weighted_diffusion_distances(const TransitionMatrix& p, std::size_t sink,
                                                 const StationaryEstimate& phi) {
    check_anchor(p, sink);
    const std::size_t n = p.size();
    if (phi.phi.size() != n) {
        throw Error(ErrorCode::LengthMismatch, "phi has " + std::to_string(phi.phi.size()) + " entries for N=" +
                                                   std::to_string(n));
    }
    for (double w : phi.phi) {
        if (!(w > 0.0)) {
            throw Error(ErrorCode::DegeneratePhi, "stationary weights must be strictly positive");
        }
    }
    std::vector<double> out(n - 1, 0.0);
    const auto rs = p.row(sink);
    parallel_for(1, n, [&](std::size_t i) {
        const auto ri = p.row(i);
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double diff = ri[k] - rs[k];
            acc += diff * diff / phi.phi[k];
        }
        out[i - 1] = std::sqrt(acc);
    }, 64);
    return out;
}

std::vector<double> average_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i + 1;
        while (j < n && values[order[j]] == values[order[i]]) {
            ++j;
        }
        // positions i..j-1 share the mean of ranks i+1..j
        const double rank = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k) {
            ranks[order[k]] = rank;
        }
        i = j;
    }
    return ranks;
}

double spearman_rank(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw Error(ErrorCode::LengthMismatch, "inputs differ in length");
    }
    if (a.size() < 2) {
        throw Error(ErrorCode::TooShort, "need at least two observations");
    }
    const auto ra = average_ranks(a);
    const auto rb = average_ranks(b);
    const double n = static_cast<double>(a.size());
    const double mean = (n + 1.0) / 2.0;
    double cov = 0.0;
    double va = 0.0;
    double vb = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        const double da = ra[i] - mean;
        const double db = rb[i] - mean;
        cov += da * db;
        va += da * da;
        vb += db * db;
    }
    if (va == 0.0 || vb == 0.0) {
        return 0.0;
    }
    return cov / std::sqrt(va * vb);
}

}  // namespace asap
