#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fmda {

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    /// Builds a matrix from nested rows; all rows must have equal length.
    static Matrix from_rows(const std::vector<std::vector<double>>& rows);
    static Matrix identity(std::size_t n);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }

    void fill(double v);
    bool all_finite() const noexcept;

    /// Rows selected by index, in the given order.
    Matrix gather_rows(std::span<const std::size_t> indices) const;
    /// Rows [begin, begin + count).
    Matrix slice_rows(std::size_t begin, std::size_t count) const;

    Matrix transpose() const;

    bool operator==(const Matrix& other) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// a * b. Accumulates over the inner dimension in ascending order.
Matrix matmul(const Matrix& a, const Matrix& b);
/// transpose(a) * b without materializing the transpose.
Matrix matmul_at_b(const Matrix& a, const Matrix& b);
/// a * transpose(b) without materializing the transpose.
Matrix matmul_a_bt(const Matrix& a, const Matrix& b);

/// Stacks matrices with equal column counts vertically.
Matrix vstack(std::span<const Matrix* const> parts);

/// Adds the 1 x cols row vector `bias` to every row of `m`.
void add_row_broadcast(Matrix& m, const Matrix& bias);
/// 1 x cols matrix of column sums.
Matrix column_sums(const Matrix& m);

void add_inplace(Matrix& a, const Matrix& b);
void scale_inplace(Matrix& a, double s);
Matrix scaled(const Matrix& a, double s);

/// L2 norm of u - v.
double euclidean_distance(std::span<const double> u, std::span<const double> v);

/// Numerically stable softmax (max-subtracted).
std::vector<double> softmax(std::span<const double> logits);
/// Row-wise softmax.
Matrix softmax_rows(const Matrix& logits);

}  // namespace fmda
