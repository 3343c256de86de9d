#include "fmda/dann.hpp"

#include <algorithm>
#include <cmath>

#include "fmda/errors.hpp"
#include "fmda/losses.hpp"
#include "fmda/rng.hpp"
#include "fmda/sampling.hpp"

namespace fmda {

std::vector<Matrix*> Discriminator::tensors() {
    std::vector<Matrix*> out;
    for (DenseLayer& l : layers) {
        out.push_back(&l.weight);
        out.push_back(&l.bias);
    }
    return out;
}

std::vector<const Matrix*> Discriminator::tensors() const {
    std::vector<const Matrix*> out;
    for (const DenseLayer& l : layers) {
        out.push_back(&l.weight);
        out.push_back(&l.bias);
    }
    return out;
}

Discriminator init_discriminator(std::size_t feature_dim, const std::vector<std::size_t>& hidden,
                                 RngStream& rng) {
    if (feature_dim == 0) throw ConfigError("discriminator: feature dim must be positive");
    Discriminator d;
    std::size_t fan_in = feature_dim;
    for (std::size_t width : hidden) {
        d.layers.push_back(he_uniform_layer(fan_in, width, true, rng));
        fan_in = width;
    }
    d.layers.push_back(glorot_uniform_layer(fan_in, 2, false, rng));
    return d;
}

double GrlCoefficient::at(std::size_t step) const noexcept {
    if (horizon == 0) return start;
    const double t = std::min(1.0, static_cast<double>(step) / static_cast<double>(horizon));
    return start + (end - start) * t;
}

GrlCoefficient GrlCoefficient::from_config(const RunConfig& c) {
    return {c.lambda_d, c.lambda_d_end, c.lambda_d_horizon};
}

Matrix gradient_reversal_forward(const Matrix& features) { return features; }

Matrix gradient_reversal_backward(const Matrix& upstream, double lambda_d) {
    return scaled(upstream, -lambda_d);
}

DomainLossResult domain_loss(const Discriminator& disc, const Matrix& source_features,
                             const Matrix& target_features) {
    if (source_features.cols() != disc.input_dim() || target_features.cols() != disc.input_dim()) {
        throw ConfigError("domain_loss: feature dim does not match discriminator");
    }
    const std::size_t ns = source_features.rows();
    const std::size_t nt = target_features.rows();
    if (ns == 0 || nt == 0) throw ConfigError("domain_loss: both domains need samples");

    const std::array<const Matrix*, 2> parts{&source_features, &target_features};
    StackCache cache;
    const Matrix logits = stack_forward(disc.layers, vstack(parts), &cache);
    const Matrix probs = softmax_rows(logits);
    std::vector<int> domain(ns + nt, 0);
    std::fill(domain.begin() + static_cast<std::ptrdiff_t>(ns), domain.end(), 1);
    CrossEntropyResult ce = cross_entropy(probs, domain);

    DomainLossResult out;
    out.loss = ce.value;
    std::size_t correct = 0;
    for (std::size_t r = 0; r < ns + nt; ++r) {
        const int guess = probs(r, 1) > probs(r, 0) ? 1 : 0;
        if (guess == domain[r]) ++correct;
    }
    out.accuracy = static_cast<double>(correct) / static_cast<double>(ns + nt);
    out.grads = zeros_like(disc.layers);
    const Matrix grad_in = stack_backward(disc.layers, cache, std::move(ce.grad_logits), out.grads);
    out.grad_source = grad_in.slice_rows(0, ns);
    out.grad_target = grad_in.slice_rows(ns, nt);
    return out;
}

DomainAdversary::DomainAdversary(Discriminator disc, GrlCoefficient grl, double lr)
    : disc_(std::move(disc)), grl_(grl), lr_(lr) {
    auto t = disc_.tensors();
    std::vector<const Matrix*> ct(t.begin(), t.end());
    adam_ = AdamState::for_tensors(ct);
}

void DomainAdversary::apply(const Matrix& target_features, const Matrix& source_features,
                            Matrix& grad_target, Matrix& grad_source, std::size_t step) {
    DomainLossResult r = domain_loss(disc_, gradient_reversal_forward(source_features),
                                     gradient_reversal_forward(target_features));
    const double lambda_d = grl_.at(step);
    add_inplace(grad_target, gradient_reversal_backward(r.grad_target, lambda_d));
    add_inplace(grad_source, gradient_reversal_backward(r.grad_source, lambda_d));
    Discriminator grads{std::move(r.grads)};
    auto params = disc_.tensors();
    auto g = std::as_const(grads).tensors();
    adam_step(params, g, adam_, lr_);
    last_loss_ = r.loss;
    last_accuracy_ = r.accuracy;
}

DannResult train_dann(const LabeledDataset& source, const LabeledDataset& target_unlabeled,
                      const RunConfig& config) {
    config.validate();
    if (source.empty()) throw ConfigError("train_dann: source set is empty");
    if (target_unlabeled.empty()) throw ConfigError("train_dann: unlabeled target pool is empty");
    if (target_unlabeled.dim() != source.dim()) {
        throw ConfigError("train_dann: source and target feature dims differ");
    }
    source.validate(config.num_classes);
    ClassIndex(source, config.num_classes).require_all_present("train_dann source");

    // Same streams as pretrain so that lambda_d = 0 replays source-only training.
    RngStream init_rng(config.seed, Stream::kInit);
    ModelParams params =
        init_model(source.dim(), config.hidden_dims, config.feature_dim, config.num_classes, init_rng);
    AdamState adam = AdamState::for_model(params);
    RngStream shuffle_rng(config.seed, Stream::kPretrainShuffle);

    RngStream disc_rng(config.seed, Stream::kDiscriminatorInit);
    DomainAdversary adversary(init_discriminator(config.feature_dim, config.disc_hidden, disc_rng),
                              GrlCoefficient::from_config(config), config.lr);
    RngStream target_rng(config.seed, Stream::kDannTarget);

    DannResult result;
    std::size_t step = 0;
    for (std::size_t epoch = 0; epoch < config.pretrain_iters; ++epoch) {
        double acc_sum = 0.0;
        std::size_t batches = 0;
        for (const auto& rows : shuffle_epoch(source.size(), config.batch_size_pretrain, shuffle_rng)) {
            const Matrix xs = source.features.gather_rows(rows);
            std::vector<int> ys;
            ys.reserve(rows.size());
            for (std::size_t r : rows) ys.push_back(source.labels[r]);
            std::vector<std::size_t> target_rows(rows.size());
            for (std::size_t& r : target_rows) r = target_rng.uniform_index(target_unlabeled.size());
            const Matrix xt = target_unlabeled.features.gather_rows(target_rows);

            ForwardResult fs = forward(params, xs);
            ForwardResult ft = forward(params, xt);
            CrossEntropyResult ce = cross_entropy(fs.probs, ys);

            Matrix grad_fs(fs.features.rows(), fs.features.cols());
            Matrix grad_ft(ft.features.rows(), ft.features.cols());
            adversary.apply(ft.features, fs.features, grad_ft, grad_fs, ++step);

            ModelGrads grads = backward(params, fs.cache, grad_fs, ce.grad_logits);
            const ModelGrads grads_t = backward(params, ft.cache, grad_ft, Matrix());
            auto acc = grads.tensors();
            auto extra = grads_t.tensors();
            for (std::size_t i = 0; i < acc.size(); ++i) add_inplace(*acc[i], *extra[i]);
            adam_step(params, grads, adam, config.lr);

            acc_sum += adversary.last_accuracy();
            ++batches;
        }
        result.discriminator_accuracy.push_back(batches ? acc_sum / static_cast<double>(batches) : 0.0);
    }
    RunConfig recorded = config;
    recorded.method = Method::kDann;
    result.checkpoint = Checkpoint{std::move(params), recorded, config.pretrain_iters, Phase::kPretrain};
    return result;
}

AdaptResult train_dann_tune(const Checkpoint& start, const LabeledDataset& source,
                            const LabeledDataset& fewshot, const RunConfig& config,
                            AdaptOptions options) {
    if (config.method != Method::kDannTune) {
        throw UsageError("train_dann_tune: config.method must be dann-tune");
    }
    RngStream disc_rng(config.seed, Stream::kDiscriminatorInit);
    DomainAdversary adversary(
        init_discriminator(start.params.feature_dim(), config.disc_hidden, disc_rng),
        GrlCoefficient::from_config(config), config.lr);
    options.hook = &adversary;
    return adapt(start, source, fewshot, config, options);
}

}  // namespace fmda
