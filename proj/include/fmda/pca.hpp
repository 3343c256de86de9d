#pragma once

#include <cstddef>
#include <vector>

#include "fmda/matrix.hpp"

namespace fmda {

/// Principal axes of a point cloud from the eigendecomposition of its sample
/// covariance. Each axis is sign-normalized so that its largest-magnitude
/// entry is positive.
struct Pca {
    std::vector<double> mean;
    Matrix components;              // k x dim, rows sorted by decreasing variance
    std::vector<double> variances;  // eigenvalues matching `components`

    /// (rows x k) coordinates of centered `x` on the principal axes.
    Matrix project(const Matrix& x) const;
};

/// Fits the top `k` axes (k <= dim). Needs at least one row.
Pca fit_pca(const Matrix& x, std::size_t k);

}  // namespace fmda
