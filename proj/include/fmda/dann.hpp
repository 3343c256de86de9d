#pragma once

#include <cstddef>
#include <vector>

#include "fmda/adam.hpp"
#include "fmda/checkpoint.hpp"
#include "fmda/config.hpp"
#include "fmda/dataset.hpp"
#include "fmda/dense.hpp"
#include "fmda/training.hpp"

namespace fmda {

/// Source-vs-target classifier over extractor features: ReLU hidden layers
/// followed by a linear 2-way layer (softmax applied in the loss).
struct Discriminator {
    std::vector<DenseLayer> layers;

    std::size_t input_dim() const noexcept { return layers.front().fan_in(); }
    std::vector<Matrix*> tensors();
    std::vector<const Matrix*> tensors() const;
};

Discriminator init_discriminator(std::size_t feature_dim, const std::vector<std::size_t>& hidden,
                                 RngStream& rng);

/// Reversal coefficient, linearly ramped from `start` to `end` over
/// `horizon` steps (constant `start` when horizon is 0).
struct GrlCoefficient {
    double start = 1.0;
    double end = 1.0;
    std::size_t horizon = 0;

    double at(std::size_t step) const noexcept;
    static GrlCoefficient from_config(const RunConfig& c);
};

/// Identity.
Matrix gradient_reversal_forward(const Matrix& features);
/// -lambda_d * upstream.
Matrix gradient_reversal_backward(const Matrix& upstream, double lambda_d);

struct DomainLossResult {
    double loss = 0.0;      // mean binary cross-entropy, source = 0, target = 1
    double accuracy = 0.0;  // fraction of rows classified into the correct domain
    Matrix grad_source;     // d loss / d source features (before reversal)
    Matrix grad_target;     // d loss / d target features (before reversal)
    std::vector<DenseLayer> grads;
};

DomainLossResult domain_loss(const Discriminator& disc, const Matrix& source_features,
                             const Matrix& target_features);

/// Adaptation hook adding the domain-adversarial term: the discriminator
/// descends on the domain loss while the extractor receives the reversed
/// gradient. The discriminator is updated after the extractor gradient is
/// taken, so both see the same pre-step parameters.
class DomainAdversary : public AdaptHook {
public:
    DomainAdversary(Discriminator disc, GrlCoefficient grl, double lr);

    void apply(const Matrix& target_features, const Matrix& source_features, Matrix& grad_target,
               Matrix& grad_source, std::size_t step) override;

    const Discriminator& discriminator() const noexcept { return disc_; }
    double last_loss() const noexcept { return last_loss_; }
    double last_accuracy() const noexcept { return last_accuracy_; }

private:
    Discriminator disc_;
    AdamState adam_;
    GrlCoefficient grl_;
    double lr_;
    double last_loss_ = 0.0;
    double last_accuracy_ = 0.0;
};

struct DannResult {
    Checkpoint checkpoint;
    /// Mean discriminator accuracy per epoch.
    std::vector<double> discriminator_accuracy;
};

/// Transductive DANN trained from initialization: each source minibatch
/// (batched exactly as in pretrain) is paired with an equally sized batch
/// drawn with replacement from the unlabeled target pool.
DannResult train_dann(const LabeledDataset& source, const LabeledDataset& target_unlabeled,
                      const RunConfig& config);

/// Few-shot DANN: the finetune objective on the target anchors plus the
/// adversarial domain loss between each batch's source positives and
/// target anchors. config.method must be dann-tune.
AdaptResult train_dann_tune(const Checkpoint& start, const LabeledDataset& source,
                            const LabeledDataset& fewshot, const RunConfig& config,
                            AdaptOptions options = {});

}  // namespace fmda
