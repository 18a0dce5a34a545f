#include "asap/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "asap/error.hpp"

namespace asap {

namespace {

// Keeps the planted entry at or above 1/n + margin after float32 storage and
// row renormalization.
constexpr double kStorageSlack = 1e-6;

std::mt19937_64 layer_rng(std::uint64_t seed, std::size_t layer, std::uint32_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(layer), stream};
    return std::mt19937_64(seq);
}

void fill_dirichlet(std::mt19937_64& rng, double concentration, std::span<double> out) {
    std::gamma_distribution<double> gamma(concentration, 1.0);
    double total = 0.0;
    for (double& v : out) {
        v = gamma(rng);
        total += v;
    }
    if (!(total > 0.0)) {
        std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(out.size()));
        return;
    }
    for (double& v : out) {
        v /= total;
    }
}

std::vector<float> gaussian_features(const SynthConfig& cfg) {
    std::vector<float> out;
    if (cfg.d == 0) {
        return out;
    }
    out.reserve(cfg.l * cfg.n * cfg.d);
    for (std::size_t layer = 0; layer < cfg.l; ++layer) {
        auto rng = layer_rng(cfg.seed, layer, 2);
        std::normal_distribution<double> normal(0.0, 1.0);
        for (std::size_t i = 0; i < cfg.n * cfg.d; ++i) {
            out.push_back(static_cast<float>(normal(rng)));
        }
    }
    return out;
}

StackShape shape_of(const SynthConfig& cfg) {
    return {static_cast<std::uint32_t>(cfg.l), static_cast<std::uint32_t>(cfg.h), static_cast<std::uint32_t>(cfg.n),
            static_cast<std::uint32_t>(cfg.d)};
}

Meta meta_of(const SynthConfig& cfg, const char* kind) {
    Meta meta{{"generator", kind}, {"seed", std::to_string(cfg.seed)}};
    if (cfg.sink_index) {
        meta["planted_sink"] = std::to_string(*cfg.sink_index);
        meta["margin"] = std::to_string(cfg.margin);
    }
    return meta;
}

}  // namespace

void SynthConfig::validate() const {
    if (n < 2 || l < 1 || h < 1) {
        throw Error(ErrorCode::ConfigError, "need n >= 2, l >= 1, h >= 1");
    }
    if (!(noise > 0.0) || !std::isfinite(noise)) {
        throw Error(ErrorCode::ConfigError, "Dirichlet concentration must be positive");
    }
    if (!(margin >= 0.0) || !std::isfinite(margin)) {
        throw Error(ErrorCode::InfeasibleMargin, "margin must be a nonnegative number");
    }
    if (margin > 0.0 && 1.0 / static_cast<double>(n) + margin > 1.0) {
        throw Error(ErrorCode::InfeasibleMargin, "1/n + margin exceeds 1 for n=" + std::to_string(n));
    }
    if (margin > 0.0 && !sink_index) {
        throw Error(ErrorCode::ConfigError, "a positive margin needs a planted sink index");
    }
    if (sink_index && (*sink_index < 1 || *sink_index >= n)) {
        throw Error(ErrorCode::ConfigError, "sink index must lie in [1, n-1]");
    }
    if (!(sink_self >= 0.0 && sink_self <= 1.0)) {
        throw Error(ErrorCode::ConfigError, "sink self weight must lie in [0, 1]");
    }
}

AttentionStack gen_sink_stack(const SynthConfig& cfg) {
    cfg.validate();
    const std::size_t n = cfg.n;
    std::vector<float> attention;
    attention.reserve(cfg.l * cfg.h * n * n);
    std::vector<double> row(n);

    for (std::size_t layer = 0; layer < cfg.l; ++layer) {
        auto rng = layer_rng(cfg.seed, layer, 1);
        for (std::size_t head = 0; head < cfg.h; ++head) {
            for (std::size_t k = 0; k < n; ++k) {
                if (!cfg.sink_index) {
                    fill_dirichlet(rng, cfg.noise, row);
                } else {
                    const std::size_t s = *cfg.sink_index;
                    double planted = 1.0 / static_cast<double>(n) + cfg.margin + kStorageSlack;
                    if (k == s) {
                        planted = std::max(planted, cfg.sink_self);
                    }
                    planted = std::min(planted, 1.0);
                    std::vector<double> rest(n - 1);
                    fill_dirichlet(rng, cfg.noise, rest);
                    for (std::size_t j = 0, r = 0; j < n; ++j) {
                        row[j] = j == s ? planted : (1.0 - planted) * rest[r++];
                    }
                }
                for (double v : row) {
                    attention.push_back(static_cast<float>(v));
                }
            }
        }
    }
    return AttentionStack::create(shape_of(cfg), std::move(attention), gaussian_features(cfg),
                                  meta_of(cfg, cfg.sink_index ? "planted_sink" : "random"));
}

AttentionStack gen_uniform_stack(const SynthConfig& cfg) {
    SynthConfig plain = cfg;
    plain.margin = 0.0;
    plain.sink_index.reset();
    plain.validate();
    const float value = static_cast<float>(1.0 / static_cast<double>(plain.n));
    std::vector<float> attention(plain.l * plain.h * plain.n * plain.n, value);
    return AttentionStack::create(shape_of(plain), std::move(attention), gaussian_features(plain),
                                  meta_of(plain, "uniform"));
}

AttentionStack gen_identity_stack(const SynthConfig& cfg) {
    SynthConfig plain = cfg;
    plain.margin = 0.0;
    plain.sink_index.reset();
    plain.validate();
    const std::size_t n = plain.n;
    std::vector<float> attention(plain.l * plain.h * n * n, 0.0f);
    for (std::size_t m = 0; m < plain.l * plain.h; ++m) {
        for (std::size_t i = 0; i < n; ++i) {
            attention[m * n * n + i * n + i] = 1.0f;
        }
    }
    return AttentionStack::create(shape_of(plain), std::move(attention), gaussian_features(plain),
                                  meta_of(plain, "identity"));
}

}  // namespace asap
