#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fmda/dense.hpp"
#include "fmda/matrix.hpp"
#include "fmda/rng.hpp"

namespace fmda {

/// Classifier G = head(extractor(x)). Every extractor layer is ReLU; the
/// head is linear followed by softmax.
struct ModelParams {
    std::size_t input_dim = 0;
    std::vector<DenseLayer> extractor;
    DenseLayer head{Matrix(), Matrix(), false};
    /// Bumped by every optimizer step; used to reject stale forward caches.
    std::uint64_t revision = 0;

    std::size_t feature_dim() const noexcept;
    std::size_t num_classes() const noexcept { return head.fan_out(); }

    /// All parameter tensors in a fixed order (extractor weight/bias pairs, then head).
    std::vector<Matrix*> tensors();
    std::vector<const Matrix*> tensors() const;

    /// Throws ConfigError unless layer shapes chain and all values are finite.
    void validate() const;

    /// Compares parameter values only; `revision` is ignored.
    bool operator==(const ModelParams& other) const;
};

/// Parameter gradients share the parameter layout.
using ModelGrads = ModelParams;

ModelParams init_model(std::size_t input_dim, const std::vector<std::size_t>& hidden_dims,
                       std::size_t feature_dim, std::size_t num_classes, RngStream& rng);

ModelGrads zero_grads(const ModelParams& params);

struct ForwardCache {
    StackCache extractor;
    Matrix features;
    const ModelParams* owner = nullptr;
    std::uint64_t revision = 0;
    bool valid = false;
};

struct ForwardResult {
    Matrix features;  // batch x feature_dim
    Matrix logits;    // batch x C
    Matrix probs;     // row-wise softmax of logits
    ForwardCache cache;
};

ForwardResult forward(const ModelParams& params, const Matrix& x);

/// Gradients of a scalar loss whose partial derivatives with respect to the
/// features and to the logits are supplied. Either input may be an empty
/// matrix, meaning zero. Throws UsageError when `cache` was not produced by
/// a forward pass over the current `params`.
ModelGrads backward(const ModelParams& params, const ForwardCache& cache,
                    const Matrix& grad_features, const Matrix& grad_logits);

/// Arg-max class per row.
std::vector<int> predict(const ModelParams& params, const Matrix& x);

}  // namespace fmda
