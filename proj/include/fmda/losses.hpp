#pragma once

#include <cstddef>
#include <span>

#include "fmda/config.hpp"
#include "fmda/matrix.hpp"

namespace fmda {

/// total = classification + lambda * distance.
struct LossValue {
    double total = 0.0;
    double classification = 0.0;
    double distance = 0.0;
};

struct CrossEntropyResult {
    double value = 0.0;
    Matrix grad_logits;       // (probs - onehot) / batch
    std::size_t clamped = 0;  // rows whose correct-class probability was exactly 0
};

/// Mean over rows of -log p(label). A zero probability is clamped to 1e-300
/// and counted in `clamped`.
CrossEntropyResult cross_entropy(const Matrix& probs, std::span<const int> labels);

struct PairLossResult {
    double value = 0.0;
    Matrix grad_anchor;
    Matrix grad_positive;
};

/// (1/N) sum_i ||a_i - p_i||_2, unsquared. The gradient of a zero-length
/// difference is defined as 0.
PairLossResult l2_distance_loss(const Matrix& anchor, const Matrix& positive);

struct TripletLossResult {
    double value = 0.0;
    Matrix grad_anchor;
    Matrix grad_positive;
    Matrix grad_negative;
};

/// (1/N) sum_i { [d_p - d_n + alpha]_+ + [d_p - beta]_+ } with
/// d_p = ||a_i - p_i||, d_n = ||a_i - n_i||. Inactive hinges (argument <= 0)
/// contribute zero gradient. Negative margins are a ConfigError.
TripletLossResult triplet_plus_loss(const Matrix& anchor, const Matrix& positive,
                                    const Matrix& negative, double alpha, double beta);

struct LossOptions {
    double lambda = 1.0;
    double alpha = 1.0;
    double beta = 0.3;
    bool normalize_features = false;
};

struct CombinedLossResult {
    LossValue value;
    Matrix grad_logits;    // anchors only
    Matrix grad_anchor;    // d total / d anchor features
    Matrix grad_positive;  // d total / d positive features (zeros when unused)
    Matrix grad_negative;  // d total / d negative features (zeros when unused)
};

/// Adaptation objective: cross-entropy on the target anchors plus lambda
/// times the distance loss selected by `method` (finetune: none,
/// fmda-l2: L2 distance, fmda-triplet: improved triplet). Passing an empty
/// `negative` with fmda-triplet is a UsageError.
CombinedLossResult combined_loss(const Matrix& anchor_probs, std::span<const int> labels,
                                 const Matrix& anchor, const Matrix& positive,
                                 const Matrix& negative, Method method, const LossOptions& opts);

}  // namespace fmda
