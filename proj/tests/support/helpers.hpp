#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "asap/matrix.hpp"
#include "oracles.hpp"

namespace testing_support {

inline asap::Matrix to_matrix(const oracle::Rows& rows) {
    asap::Matrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            m(i, j) = rows[i][j];
        }
    }
    return m;
}

inline asap::TransitionMatrix transition(const oracle::Rows& rows) {
    return asap::TransitionMatrix::from_matrix(to_matrix(rows));
}

/// Random row-stochastic matrix with Dirichlet(1) rows.
inline oracle::Rows random_stochastic(std::size_t n, std::mt19937_64& rng) {
    std::exponential_distribution<double> expo(1.0);
    oracle::Rows out(n, std::vector<double>(n));
    for (auto& row : out) {
        double s = 0.0;
        for (double& v : row) {
            v = expo(rng);
            s += v;
        }
        for (double& v : row) {
            v /= s;
        }
    }
    return out;
}

/// Unique scratch path under the system temp directory.
inline std::filesystem::path temp_path(const std::string& stem) {
    static std::uint64_t counter = 0;
    return std::filesystem::temp_directory_path() /
           ("asap_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++) + "_" + stem);
}

}  // namespace testing_support
