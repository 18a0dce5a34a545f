#include <doctest.h>

#include <cstring>

#include "asap/error.hpp"
#include "asap/synth.hpp"
#include "asap/walk.hpp"

using asap::ErrorCode;
using asap::SynthConfig;

namespace {

ErrorCode validate_code(const SynthConfig& cfg) {
    try {
        cfg.validate();
    } catch (const asap::Error& e) {
        return e.code();
    }
    FAIL("expected validation to fail");
    return ErrorCode::ConfigError;
}

}  // namespace

TEST_CASE("planted sink column carries at least 1/n + margin in every row") {
    SynthConfig cfg;
    cfg.n = 4;
    cfg.l = 6;
    cfg.h = 2;
    cfg.margin = 0.5;
    cfg.sink_index = 2;
    cfg.seed = 1;
    const auto stack = asap::gen_sink_stack(cfg);
    for (std::size_t l = 0; l < cfg.l; ++l) {
        for (std::size_t h = 0; h < cfg.h; ++h) {
            const auto head = stack.head(l, h);
            for (std::size_t k = 0; k < cfg.n; ++k) {
                CHECK(head[k * cfg.n + 2] >= 0.75f);
            }
        }
    }
}

TEST_CASE("the sink row attends mostly to itself") {
    SynthConfig cfg;
    cfg.n = 8;
    cfg.l = 2;
    cfg.margin = 0.1;
    cfg.sink_index = 3;
    const auto head = asap::gen_sink_stack(cfg).head(0, 0);
    CHECK(head[3 * 8 + 3] >= 0.98f);
}

TEST_CASE("generated rows are stochastic") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        SynthConfig cfg;
        cfg.n = 3 + seed * 5;
        cfg.l = 3;
        cfg.h = 2;
        cfg.seed = seed;
        if (seed % 2 == 1) {
            cfg.sink_index = 1;
            cfg.margin = 0.3;
        }
        const auto stack = asap::gen_sink_stack(cfg);
        CHECK(stack.max_row_drift() < 1e-5);
        for (float v : stack.attention_payload()) {
            CHECK(v >= 0.0f);
        }
    }
}

TEST_CASE("no sink and no margin gives a plain random stack") {
    SynthConfig cfg;
    cfg.n = 12;
    cfg.l = 4;
    const auto stack = asap::gen_sink_stack(cfg);
    CHECK(stack.meta().at("generator") == "random");
    CHECK(stack.meta().count("planted_sink") == 0);
    CHECK(stack.layers() == 4);
    CHECK(stack.tokens() == 12);
    CHECK(stack.feature_dim() == 16);
}

TEST_CASE("same seed reproduces the stack bit for bit") {
    SynthConfig cfg;
    cfg.n = 10;
    cfg.l = 5;
    cfg.h = 3;
    cfg.d = 4;
    cfg.margin = 0.2;
    cfg.sink_index = 7;
    cfg.seed = 1234;
    const auto a = asap::gen_sink_stack(cfg);
    const auto b = asap::gen_sink_stack(cfg);
    CHECK(a == b);
    cfg.seed = 1235;
    CHECK_FALSE(asap::gen_sink_stack(cfg) == a);
}

TEST_CASE("layers draw from independent streams") {
    SynthConfig cfg;
    cfg.n = 6;
    cfg.l = 2;
    const auto stack = asap::gen_sink_stack(cfg);
    const auto l0 = stack.head(0, 0);
    const auto l1 = stack.head(1, 0);
    CHECK(std::memcmp(l0.data(), l1.data(), l0.size() * sizeof(float)) != 0);
}

TEST_CASE("uniform stack has every entry 1/n and never triggers") {
    SynthConfig cfg;
    cfg.n = 4;
    cfg.l = 8;
    const auto stack = asap::gen_uniform_stack(cfg);
    for (float v : stack.attention_payload()) {
        CHECK(v == 0.25f);
    }
    for (double tau : {1.05, 1.5, 7.0}) {
        asap::WalkConfig wc;
        wc.tau = tau;
        CHECK_FALSE(asap::accumulate(stack, wc).sink_detected());
    }
}

TEST_CASE("identity stack is the identity in every head") {
    SynthConfig cfg;
    cfg.n = 3;
    cfg.l = 2;
    cfg.h = 2;
    const auto stack = asap::gen_identity_stack(cfg);
    for (std::size_t l = 0; l < 2; ++l) {
        for (std::size_t h = 0; h < 2; ++h) {
            const auto head = stack.head(l, h);
            for (std::size_t i = 0; i < 3; ++i) {
                for (std::size_t j = 0; j < 3; ++j) {
                    CHECK(head[i * 3 + j] == (i == j ? 1.0f : 0.0f));
                }
            }
        }
    }
}

TEST_CASE("infeasible or inconsistent configurations are rejected") {
    SynthConfig cfg;
    cfg.n = 4;
    cfg.sink_index = 1;
    cfg.margin = 0.8;
    CHECK(validate_code(cfg) == ErrorCode::InfeasibleMargin);
    cfg.margin = -0.1;
    CHECK(validate_code(cfg) == ErrorCode::InfeasibleMargin);
    cfg.margin = 0.2;
    cfg.sink_index = 0;
    CHECK(validate_code(cfg) == ErrorCode::ConfigError);
    cfg.sink_index = 4;
    CHECK(validate_code(cfg) == ErrorCode::ConfigError);
    cfg.sink_index.reset();
    CHECK(validate_code(cfg) == ErrorCode::ConfigError);
    SynthConfig tiny;
    tiny.n = 1;
    CHECK(validate_code(tiny) == ErrorCode::ConfigError);
}
