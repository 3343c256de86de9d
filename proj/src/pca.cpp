#include "fmda/pca.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "fmda/errors.hpp"

namespace fmda {

Pca fit_pca(const Matrix& x, std::size_t k) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    if (n == 0 || d == 0) throw UsageError("fit_pca: empty input");
    if (k == 0 || k > d) throw ConfigError("fit_pca: k must lie in [1, dim]");

    Pca pca;
    pca.mean.assign(d, 0.0);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < d; ++c) pca.mean[c] += x(r, c);
    for (double& m : pca.mean) m /= static_cast<double>(n);

    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t i = 0; i < d; ++i) {
            const double ci = x(r, i) - pca.mean[i];
            for (std::size_t j = i; j < d; ++j) {
                cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += ci * (x(r, j) - pca.mean[j]);
            }
        }
    }
    const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i; j < d; ++j) {
            const auto a = static_cast<Eigen::Index>(i);
            const auto b = static_cast<Eigen::Index>(j);
            cov(a, b) /= denom;
            cov(b, a) = cov(a, b);
        }
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw NumericError("fit_pca: eigendecomposition failed");
    // Eigen returns ascending eigenvalues.
    pca.components = Matrix(k, d);
    pca.variances.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
        const auto col = static_cast<Eigen::Index>(d - 1 - i);
        pca.variances[i] = std::max(0.0, solver.eigenvalues()(col));
        std::size_t arg = 0;
        for (std::size_t j = 1; j < d; ++j) {
            if (std::abs(solver.eigenvectors()(static_cast<Eigen::Index>(j), col)) >
                std::abs(solver.eigenvectors()(static_cast<Eigen::Index>(arg), col))) {
                arg = j;
            }
        }
        const double sign = solver.eigenvectors()(static_cast<Eigen::Index>(arg), col) < 0.0 ? -1.0 : 1.0;
        for (std::size_t j = 0; j < d; ++j) {
            pca.components(i, j) = sign * solver.eigenvectors()(static_cast<Eigen::Index>(j), col);
        }
    }
    return pca;
}

Matrix Pca::project(const Matrix& x) const {
    if (x.cols() != mean.size()) throw ConfigError("Pca::project: dimension mismatch");
    Matrix centered = x;
    for (std::size_t r = 0; r < centered.rows(); ++r) {
        auto row = centered.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) row[c] -= mean[c];
    }
    return matmul_a_bt(centered, components);
}

}  // namespace fmda
