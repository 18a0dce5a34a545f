#include "asap/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "asap/error.hpp"
#include "asap/parallel.hpp"

namespace asap {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : m_rows(rows), m_cols(cols), m_data(rows * cols, fill) {}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = 1.0;
    }
    return m;
}

TransitionMatrix TransitionMatrix::from_matrix(Matrix m) {
    if (m.rows() != m.cols() || m.rows() == 0) {
        throw Error(ErrorCode::ShapeMismatch, "transition matrix must be square and non-empty");
    }
    for (std::size_t i = 0; i < m.rows(); ++i) {
        auto row = m.row(i);
        double sum = 0.0;
        for (double v : row) {
            if (!std::isfinite(v)) {
                throw Error(ErrorCode::NonFinite, "row " + std::to_string(i) + " has a non-finite entry");
            }
            if (v < 0.0) {
                throw Error(ErrorCode::NegativeEntry, "row " + std::to_string(i) + " has a negative entry");
            }
            sum += v;
        }
        if (!(sum > 0.0)) {
            throw Error(ErrorCode::NotRowStochastic, "row " + std::to_string(i) + " sums to zero");
        }
        for (double& v : row) {
            v /= sum;
        }
    }
    return TransitionMatrix(std::move(m));
}

TransitionMatrix TransitionMatrix::assume_stochastic(Matrix m) {
    return TransitionMatrix(std::move(m));
}

TransitionMatrix TransitionMatrix::identity(std::size_t n) {
    return TransitionMatrix(Matrix::identity(n));
}

double TransitionMatrix::max_row_sum_error() const noexcept {
    double worst = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
        double sum = 0.0;
        for (double v : row(i)) {
            sum += v;
        }
        worst = std::max(worst, std::abs(sum - 1.0));
    }
    return worst;
}

double TransitionMatrix::column_sum(std::size_t j) const noexcept {
    double sum = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
        sum += m_matrix(i, j);
    }
    return sum;
}

Matrix multiply(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw Error(ErrorCode::ShapeMismatch, "inner dimensions differ");
    }
    const std::size_t n = a.rows();
    const std::size_t inner = a.cols();
    const std::size_t m = b.cols();
    Matrix out(n, m);

    // A kDepth x kPanel tile of b is reused by every row of a kRows row block.
    constexpr std::size_t kRows = 32;
    constexpr std::size_t kPanel = 256;
    constexpr std::size_t kDepth = 128;

    const double* bd = b.data().data();
    const std::size_t blocks = (n + kRows - 1) / kRows;
    parallel_for(0, blocks, [&](std::size_t block) {
        const std::size_t i0 = block * kRows;
        const std::size_t i1 = std::min(n, i0 + kRows);
        for (std::size_t j0 = 0; j0 < m; j0 += kPanel) {
            const std::size_t j1 = std::min(m, j0 + kPanel);
            for (std::size_t k0 = 0; k0 < inner; k0 += kDepth) {
                const std::size_t k1 = std::min(inner, k0 + kDepth);
                for (std::size_t i = i0; i < i1; ++i) {
                    const auto arow = a.row(i);
                    double* orow = out.row(i).data();
                    for (std::size_t k = k0; k < k1; ++k) {
                        const double aik = arow[k];
                        const double* brow = bd + k * m;
                        for (std::size_t j = j0; j < j1; ++j) {
                            orow[j] += aik * brow[j];
                        }
                    }
                }
            }
        }
    }, 1);
    return out;
}

TransitionMatrix multiply(const TransitionMatrix& a, const TransitionMatrix& b) {
    if (a.size() != b.size()) {
        throw Error(ErrorCode::ShapeMismatch, "transition matrices differ in size");
    }
    return TransitionMatrix::assume_stochastic(multiply(a.matrix(), b.matrix()));
}

}  // namespace asap
