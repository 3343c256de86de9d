#pragma once

// Independent reference implementations used by the tests. Everything here
// is written with plain loops and shares no code with the library beyond the
// parameter containers.

#include <cstddef>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "fmda/dense.hpp"
#include "fmda/matrix.hpp"
#include "fmda/model.hpp"
#include "fmda/rng.hpp"

namespace fmda::testing {

Matrix random_matrix(std::size_t rows, std::size_t cols, RngStream& rng, double scale = 1.0);

/// Random model with nonzero biases so that no parameter sits at a special value.
ModelParams random_model(RngStream& rng, std::size_t input_dim,
                         const std::vector<std::size_t>& hidden, std::size_t feature_dim,
                         std::size_t num_classes);

/// Forward through a layer list. `min_abs_pre`, when given, receives the
/// smallest |pre-activation| over ReLU units (the distance to a kink).
Matrix oracle_stack(const std::vector<DenseLayer>& layers, const Matrix& x,
                    double* min_abs_pre = nullptr);
Matrix oracle_features(const ModelParams& p, const Matrix& x, double* min_abs_pre = nullptr);
Matrix oracle_logits(const ModelParams& p, const Matrix& features);

/// Mean over rows of logsumexp(z) - z_y.
double oracle_cross_entropy(const Matrix& logits, std::span<const int> labels);
double oracle_norm(std::span<const double> v);
/// Mean of unsquared row distances; `min_dist` receives the smallest one.
double oracle_l2(const Matrix& a, const Matrix& p, double* min_dist = nullptr);
/// `min_kink` receives the smallest |hinge argument| and smallest distance.
double oracle_triplet(const Matrix& a, const Matrix& p, const Matrix& n, double alpha,
                      double beta, double* min_kink = nullptr);
/// Rows divided by their norms; `min_norm` receives the smallest norm.
Matrix oracle_normalize(const Matrix& f, double* min_norm = nullptr);
/// Mean 2-way cross-entropy of a discriminator, source rows labeled 0, target 1.
double oracle_domain_loss(const std::vector<DenseLayer>& disc, const Matrix& fs, const Matrix& ft,
                          double* min_abs_pre = nullptr);

/// |a - n| / max(|a|, |n|, 1e-4): relative for ordinary gradients, absolute
/// (at the 1e-9 level) for entries that are essentially zero.
double rel_error(double analytic, double numeric);

struct GradCheckStats {
    double max_rel_error = 0.0;
    std::size_t entries = 0;
};

/// Central differences with step h of `objective` with respect to every entry
/// of `tensors`, compared against `analytic` (same layout).
GradCheckStats check_gradients(const std::vector<Matrix*>& tensors,
                               const std::vector<const Matrix*>& analytic,
                               const std::function<double()>& objective, double h = 1e-5);

enum class GradCase {
    kCrossEntropy,
    kL2,
    kTriplet,
    kCombinedL2,
    kCombinedTriplet,
    kCombinedTripletNormalized,
    kDetachedSource,
    kDannTune,
};

std::string_view to_string(GradCase c);
const std::vector<GradCase>& all_grad_cases();

struct GradCaseReport {
    GradCheckStats stats;
    std::size_t instances = 0;
    std::size_t resampled = 0;  // draws rejected for lying within 1e-3 of a kink
    double max_value_error = 0.0;  // |library loss - oracle loss| where applicable
};

/// Runs `instances` random instances of one objective on the tiny model
/// (input 4, hidden 8, features 4, C = 3, batch 2C).
GradCaseReport run_grad_case(GradCase c, std::size_t instances, std::uint64_t seed);

}  // namespace fmda::testing
