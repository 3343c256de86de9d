#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "fmda/checkpoint.hpp"
#include "fmda/config.hpp"
#include "fmda/dataset.hpp"
#include "fmda/losses.hpp"
#include "fmda/matrix.hpp"
#include "fmda/model.hpp"
#include "fmda/sampling.hpp"

namespace fmda {

/// Macro F1 (percentage points) on the held-out target set at one step.
struct CurvePoint {
    std::size_t step = 0;
    double macro_f1 = 0.0;

    bool operator==(const CurvePoint&) const = default;
};
using LearningCurve = std::vector<CurvePoint>;

/// Extra feature-space objective evaluated during each adaptation step.
/// `apply` receives the target-anchor and source-positive features and adds
/// its gradient contributions into the matching gradient matrices. It may
/// update its own parameters.
class AdaptHook {
public:
    virtual ~AdaptHook() = default;
    virtual void apply(const Matrix& target_features, const Matrix& source_features,
                       Matrix& grad_target, Matrix& grad_source, std::size_t step) = 0;
};

struct AdaptOptions {
    /// Held-out target data; when set, macro F1 is recorded every eval_every steps.
    const LabeledDataset* test = nullptr;
    AdaptHook* hook = nullptr;
    /// Called after every optimizer step.
    std::function<void(std::size_t step, const ModelParams&, const LossValue&)> on_step;
};

struct AdaptResult {
    Checkpoint checkpoint;
    LearningCurve curve;
    LossValue last_loss;
};

struct AdaptObjective {
    LossValue value;  // hook terms are not included
    ModelGrads grads;
};

/// Loss and parameter gradients of one adaptation step on batch `b`: one
/// forward pass over anchors, positives and negatives, the objective of
/// config.method (dann-tune uses the finetune objective), source-branch
/// gradients dropped when config.detach_source, then `hook` if given.
AdaptObjective adapt_objective(const ModelParams& params, const AdaptBatch& b,
                               const RunConfig& config, AdaptHook* hook, std::size_t step);

/// Phase 1: config.pretrain_iters epochs of shuffled minibatch
/// cross-entropy on the source set. Deterministic in config.seed.
Checkpoint pretrain(const LabeledDataset& source, const RunConfig& config);

/// Phase 2: config.adapt_iters Adam steps on adaptation batches drawn from
/// the few-shot pool (exactly config.n per class) and the source set.
/// All parameters are updated. without-target and dann are rejected;
/// dann-tune requires a hook supplying the adversarial term.
AdaptResult adapt(const Checkpoint& start, const LabeledDataset& source,
                  const LabeledDataset& fewshot, const RunConfig& config,
                  const AdaptOptions& options = {});

/// Throws ConfigError unless every class in [0, C) has exactly n samples.
void require_fewshot_shape(const LabeledDataset& fewshot, std::size_t n, std::size_t num_classes);

}  // namespace fmda
