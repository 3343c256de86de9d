#include "fmda/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fmda/errors.hpp"

namespace fmda {

namespace {

std::string shape(const Matrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
        throw ConfigError("Matrix: data length " + std::to_string(data_.size()) +
                          " does not match shape " + shape(*this));
    }
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return {};
    const std::size_t cols = rows.front().size();
    Matrix m(rows.size(), cols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != cols) {
            throw ConfigError("Matrix::from_rows: ragged row " + std::to_string(r));
        }
        std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
    }
    return m;
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Matrix::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

Matrix Matrix::gather_rows(std::span<const std::size_t> indices) const {
    Matrix out(indices.size(), cols_);
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= rows_) {
            throw ConfigError("Matrix::gather_rows: index " + std::to_string(indices[i]) +
                              " out of range for " + shape(*this));
        }
        auto src = row(indices[i]);
        std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
}

Matrix Matrix::slice_rows(std::size_t begin, std::size_t count) const {
    if (begin + count > rows_) {
        throw ConfigError("Matrix::slice_rows: range exceeds " + shape(*this));
    }
    Matrix out(count, cols_);
    std::copy(data_.begin() + static_cast<std::ptrdiff_t>(begin * cols_),
              data_.begin() + static_cast<std::ptrdiff_t>((begin + count) * cols_),
              out.data_.begin());
    return out;
}

Matrix Matrix::transpose() const {
    Matrix out(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) out(c, r) = (*this)(r, c);
    return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw ConfigError("matmul: dimension mismatch " + shape(a) + " * " + shape(b));
    }
    Matrix out(a.rows(), b.cols());
    const std::size_t n = b.cols();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double* dst = out.row(i).data();
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            const double* src = b.row(k).data();
            for (std::size_t j = 0; j < n; ++j) dst[j] += aik * src[j];
        }
    }
    return out;
}

Matrix matmul_at_b(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) {
        throw ConfigError("matmul_at_b: dimension mismatch " + shape(a) + "^T * " + shape(b));
    }
    Matrix out(a.cols(), b.cols());
    const std::size_t n = b.cols();
    for (std::size_t r = 0; r < a.rows(); ++r) {
        const double* src = b.row(r).data();
        for (std::size_t i = 0; i < a.cols(); ++i) {
            const double ari = a(r, i);
            double* dst = out.row(i).data();
            for (std::size_t j = 0; j < n; ++j) dst[j] += ari * src[j];
        }
    }
    return out;
}

Matrix matmul_a_bt(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) {
        throw ConfigError("matmul_a_bt: dimension mismatch " + shape(a) + " * " + shape(b) + "^T");
    }
    Matrix out(a.rows(), b.rows());
    const std::size_t k = a.cols();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* ai = a.row(i).data();
        for (std::size_t j = 0; j < b.rows(); ++j) {
            const double* bj = b.row(j).data();
            double acc = 0.0;
            for (std::size_t t = 0; t < k; ++t) acc += ai[t] * bj[t];
            out(i, j) = acc;
        }
    }
    return out;
}

Matrix vstack(std::span<const Matrix* const> parts) {
    std::size_t rows = 0;
    std::size_t cols = parts.empty() ? 0 : parts.front()->cols();
    for (const Matrix* p : parts) {
        if (p->cols() != cols) throw ConfigError("vstack: column mismatch");
        rows += p->rows();
    }
    Matrix out(rows, cols);
    std::size_t at = 0;
    for (const Matrix* p : parts) {
        std::copy(p->values().begin(), p->values().end(), out.values().begin() + static_cast<std::ptrdiff_t>(at));
        at += p->size();
    }
    return out;
}

void add_row_broadcast(Matrix& m, const Matrix& bias) {
    if (bias.rows() != 1 || bias.cols() != m.cols()) {
        throw ConfigError("add_row_broadcast: bias " + shape(bias) + " vs " + shape(m));
    }
    for (std::size_t r = 0; r < m.rows(); ++r) {
        auto dst = m.row(r);
        for (std::size_t c = 0; c < m.cols(); ++c) dst[c] += bias(0, c);
    }
}

Matrix column_sums(const Matrix& m) {
    Matrix out(1, m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        auto src = m.row(r);
        for (std::size_t c = 0; c < m.cols(); ++c) out(0, c) += src[c];
    }
    return out;
}

void add_inplace(Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ConfigError("add_inplace: shape mismatch " + shape(a) + " vs " + shape(b));
    }
    auto dst = a.values();
    auto src = b.values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

void scale_inplace(Matrix& a, double s) {
    for (double& x : a.values()) x *= s;
}

Matrix scaled(const Matrix& a, double s) {
    Matrix out = a;
    scale_inplace(out, s);
    return out;
}

double euclidean_distance(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) {
        throw ConfigError("euclidean_distance: length mismatch " + std::to_string(u.size()) +
                          " vs " + std::to_string(v.size()));
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double d = u[i] - v[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

std::vector<double> softmax(std::span<const double> logits) {
    std::vector<double> out(logits.size());
    if (logits.empty()) return out;
    const double peak = *std::max_element(logits.begin(), logits.end());
    double total = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - peak);
        total += out[i];
    }
    for (double& p : out) p /= total;
    return out;
}

Matrix softmax_rows(const Matrix& logits) {
    Matrix out(logits.rows(), logits.cols());
    for (std::size_t r = 0; r < logits.rows(); ++r) {
        auto p = softmax(logits.row(r));
        std::copy(p.begin(), p.end(), out.row(r).begin());
    }
    return out;
}

}  // namespace fmda
