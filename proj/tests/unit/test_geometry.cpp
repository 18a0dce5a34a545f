#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "asap/error.hpp"
#include "asap/geometry.hpp"
#include "support/helpers.hpp"

using asap::ErrorCode;
using testing_support::transition;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const asap::Error& e) {
        return e.code();
    }
    FAIL("expected an asap::Error");
    return ErrorCode::ConfigError;
}

}  // namespace

TEST_CASE("identical rows are at distance zero") {
    const auto p = transition({{0.5, 0.25, 0.25}, {0.2, 0.4, 0.4}, {0.2, 0.4, 0.4}});
    const auto field = asap::diffusion_distances(p, 1);
    CHECK(field.raw[0] == 0.0);
    CHECK(field.raw[1] == 0.0);
}

TEST_CASE("orthogonal indicator rows are sqrt(2) apart") {
    const auto p = transition({{0.5, 0.5, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}});
    CHECK(asap::row_distance(p, 1, 2) == doctest::Approx(1.41421356).epsilon(1e-8));
    const auto field = asap::diffusion_distances(p, 1);
    CHECK(field.raw[1] == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("four-token field matches the scalar oracle") {
    const oracle::Rows rows = {{0.7, 0.1, 0.1, 0.1}, {0.1, 0.7, 0.1, 0.1}, {0.25, 0.25, 0.25, 0.25}, {0.1, 0.1, 0.1, 0.7}};
    const auto field = asap::diffusion_distances(transition(rows), 2);
    const auto ref = oracle::distances(rows, 2);
    REQUIRE(field.raw.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(field.raw[i] == doctest::Approx(ref[i]).epsilon(1e-14));
    }
    CHECK(field.raw[1] == 0.0);
    CHECK(field.sink == 2);
    CHECK(field.d_min == 0.0);
    CHECK(field.d_max == doctest::Approx(std::max(ref[0], ref[2])));
}

TEST_CASE("normalized field spans [0, 1)") {
    std::mt19937_64 rng(3);
    const auto rows = testing_support::random_stochastic(20, rng);
    const auto field = asap::diffusion_distances(transition(rows), 7);
    const auto [lo, hi] = std::minmax_element(field.normalized.begin(), field.normalized.end());
    CHECK(*lo == 0.0);
    CHECK(*hi < 1.0);
    CHECK(*hi > 1.0 - 1e-4);
    for (std::size_t i = 0; i < field.raw.size(); ++i) {
        CHECK(field.normalized[i] == doctest::Approx((field.raw[i] - field.d_min) /
                                                     (field.d_max - field.d_min + 1e-6)));
    }
}

TEST_CASE("flat field normalizes to zero") {
    const auto field = asap::DistanceField::from_raw({0.3, 0.3, 0.3}, 1);
    for (double v : field.normalized) {
        CHECK(v == 0.0);
    }
}

TEST_CASE("anchor must be a patch token inside the matrix") {
    const auto p = asap::TransitionMatrix::identity(4);
    CHECK(code_of([&] { (void)asap::diffusion_distances(p, 0); }) == ErrorCode::SinkIsCls);
    CHECK(code_of([&] { (void)asap::diffusion_distances(p, 4); }) == ErrorCode::IndexOutOfRange);
}

TEST_CASE("stationary estimate of the identity is uniform") {
    const auto est = asap::stationary_estimate(asap::TransitionMatrix::identity(5));
    for (double v : est.phi) {
        CHECK(v == doctest::Approx(0.2));
    }
}

TEST_CASE("stationary estimate of identical rows is that row") {
    const std::vector<double> v = {0.1, 0.2, 0.3, 0.4};
    const auto est = asap::stationary_estimate(transition({v, v, v, v}));
    for (std::size_t k = 0; k < 4; ++k) {
        CHECK(est.phi[k] == doctest::Approx(v[k]).epsilon(1e-14));
    }
}

TEST_CASE("stationary estimate matches the column-mean oracle") {
    std::mt19937_64 rng(8);
    const auto rows = testing_support::random_stochastic(8, rng);
    const auto est = asap::stationary_estimate(transition(rows));
    const auto ref = oracle::column_mean(rows);
    for (std::size_t k = 0; k < 8; ++k) {
        CHECK(std::abs(est.phi[k] - ref[k]) <= 1e-12);
    }
}

TEST_CASE("stationary estimate floors empty columns") {
    const auto est = asap::stationary_estimate(transition({{1, 0, 0}, {1, 0, 0}, {0, 1, 0}}));
    CHECK(est.phi[2] > 0.0);
    CHECK(est.phi[2] < 1e-11);
    CHECK(est.phi[0] + est.phi[1] + est.phi[2] == doctest::Approx(1.0));
}

TEST_CASE("uniform weights scale the distance by sqrt(N)") {
    std::mt19937_64 rng(5);
    for (std::size_t n : {4, 9, 16}) {
        const auto p = transition(testing_support::random_stochastic(n, rng));
        const asap::StationaryEstimate uniform{std::vector<double>(n, 1.0 / static_cast<double>(n))};
        const auto weighted = asap::weighted_diffusion_distances(p, 1, uniform);
        const auto plain = asap::diffusion_distances(p, 1);
        for (std::size_t i = 0; i < n - 1; ++i) {
            CHECK(weighted[i] == doctest::Approx(plain.raw[i] * std::sqrt(static_cast<double>(n))).epsilon(1e-12));
        }
    }
}

TEST_CASE("weighted distance between identical rows is zero for any phi") {
    const std::vector<double> v = {0.4, 0.3, 0.3};
    const auto p = transition({{0.2, 0.4, 0.4}, v, v});
    const asap::StationaryEstimate phi{{0.7, 0.2, 0.1}};
    CHECK(asap::weighted_diffusion_distances(p, 1, phi)[1] == 0.0);
}

TEST_CASE("weighted distances match the scalar oracle") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 10; ++trial) {
        const auto rows = testing_support::random_stochastic(8, rng);
        const auto p = transition(rows);
        const auto est = asap::stationary_estimate(p);
        const auto got = asap::weighted_diffusion_distances(p, 3, est);
        const auto ref = oracle::weighted_distances(rows, 3, oracle::column_mean(rows));
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(std::abs(got[i] - ref[i]) <= 1e-10);
        }
    }
}

TEST_CASE("weighted distances reject bad weights") {
    const auto p = asap::TransitionMatrix::identity(3);
    CHECK(code_of([&] { (void)asap::weighted_diffusion_distances(p, 1, {{0.5, 0.5}}); }) == ErrorCode::LengthMismatch);
    CHECK(code_of([&] { (void)asap::weighted_diffusion_distances(p, 1, {{0.5, 0.5, 0.0}}); }) ==
          ErrorCode::DegeneratePhi);
}

TEST_CASE("spearman on identical and reversed orderings") {
    const std::vector<double> a = {0.3, 1.2, 5.0, 2.2, 0.1};
    std::vector<double> rev(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        rev[i] = -a[i];
    }
    CHECK(asap::spearman_rank(a, a) == doctest::Approx(1.0));
    CHECK(asap::spearman_rank(a, rev) == doctest::Approx(-1.0));
}

TEST_CASE("spearman on one swapped pair") {
    const std::vector<double> a = {1, 2, 3, 4};
    const std::vector<double> b = {1, 3, 2, 4};
    CHECK(asap::spearman_rank(a, b) == doctest::Approx(0.8));
}

TEST_CASE("spearman matches the tie-free rank formula") {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> a(15);
        std::vector<double> b(15);
        for (std::size_t i = 0; i < a.size(); ++i) {
            a[i] = g(rng);
            b[i] = a[i] + g(rng);
        }
        CHECK(asap::spearman_rank(a, b) == doctest::Approx(oracle::spearman_no_ties(a, b)).epsilon(1e-12));
    }
}

TEST_CASE("average ranks share ties") {
    const std::vector<double> v = {10, 20, 20, 5};
    CHECK(asap::average_ranks(v) == std::vector<double>{2.0, 3.5, 3.5, 1.0});
}

TEST_CASE("spearman edge cases") {
    const std::vector<double> flat = {1, 1, 1};
    const std::vector<double> up = {1, 2, 3};
    CHECK(asap::spearman_rank(flat, up) == 0.0);
    CHECK(code_of([&] { (void)asap::spearman_rank(up, std::vector<double>{1, 2}); }) == ErrorCode::LengthMismatch);
    CHECK(code_of([&] { (void)asap::spearman_rank(std::vector<double>{1}, std::vector<double>{1}); }) ==
          ErrorCode::TooShort);
}
