#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace asap {

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);

    static Matrix identity(std::size_t n);

    std::size_t rows() const noexcept { return m_rows; }
    std::size_t cols() const noexcept { return m_cols; }
    bool empty() const noexcept { return m_data.empty(); }

    double& operator()(std::size_t r, std::size_t c) noexcept { return m_data[r * m_cols + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return m_data[r * m_cols + c]; }

    std::span<double> row(std::size_t r) noexcept { return {m_data.data() + r * m_cols, m_cols}; }
    std::span<const double> row(std::size_t r) const noexcept { return {m_data.data() + r * m_cols, m_cols}; }

    std::span<double> data() noexcept { return m_data; }
    std::span<const double> data() const noexcept { return m_data; }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t m_rows = 0;
    std::size_t m_cols = 0;
    std::vector<double> m_data;
};

/// Square, nonnegative, row-stochastic matrix: a single lazified layer or a
/// cumulative product of them.
class TransitionMatrix {
public:
    /// Validates nonnegativity and finiteness, then divides every row by its sum.
    /// Throws NegativeEntry, NonFinite, NotRowStochastic (zero row) or ShapeMismatch.
    static TransitionMatrix from_matrix(Matrix m);

    /// Wraps a matrix that is already stochastic up to rounding (products and
    /// convex combinations of stochastic matrices). No renormalization.
    static TransitionMatrix assume_stochastic(Matrix m);

    static TransitionMatrix identity(std::size_t n);

    std::size_t size() const noexcept { return m_matrix.rows(); }
    double operator()(std::size_t i, std::size_t j) const noexcept { return m_matrix(i, j); }
    std::span<const double> row(std::size_t i) const noexcept { return m_matrix.row(i); }
    const Matrix& matrix() const noexcept { return m_matrix; }

    /// max_i |sum_j P_ij - 1|
    double max_row_sum_error() const noexcept;

    /// sum_i P_ij
    double column_sum(std::size_t j) const noexcept;

    friend bool operator==(const TransitionMatrix&, const TransitionMatrix&) = default;

private:
    explicit TransitionMatrix(Matrix m) : m_matrix(std::move(m)) {}

    Matrix m_matrix;
};

/// out = a * b. Cache-blocked and row-parallel; every output row is computed by a
/// fixed summation order, so results are independent of the thread count.
Matrix multiply(const Matrix& a, const Matrix& b);

TransitionMatrix multiply(const TransitionMatrix& a, const TransitionMatrix& b);

}  // namespace asap
