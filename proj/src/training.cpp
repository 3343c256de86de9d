#include "fmda/training.hpp"

#include <array>

#include "fmda/adam.hpp"
#include "fmda/errors.hpp"
#include "fmda/metrics.hpp"
#include "fmda/rng.hpp"

namespace fmda {

namespace {

void copy_rows_into(Matrix& dst, std::size_t at, const Matrix& src) {
    for (std::size_t r = 0; r < src.rows(); ++r) {
        auto s = src.row(r);
        std::copy(s.begin(), s.end(), dst.row(at + r).begin());
    }
}

}  // namespace

Checkpoint pretrain(const LabeledDataset& source, const RunConfig& config) {
    config.validate();
    if (source.empty()) throw ConfigError("pretrain: source set is empty");
    source.validate(config.num_classes);
    ClassIndex(source, config.num_classes).require_all_present("pretrain source");

    RngStream init_rng(config.seed, Stream::kInit);
    ModelParams params =
        init_model(source.dim(), config.hidden_dims, config.feature_dim, config.num_classes, init_rng);
    AdamState adam = AdamState::for_model(params);
    RngStream shuffle_rng(config.seed, Stream::kPretrainShuffle);

    for (std::size_t epoch = 0; epoch < config.pretrain_iters; ++epoch) {
        for (const auto& rows : shuffle_epoch(source.size(), config.batch_size_pretrain, shuffle_rng)) {
            const Matrix x = source.features.gather_rows(rows);
            std::vector<int> y;
            y.reserve(rows.size());
            for (std::size_t r : rows) y.push_back(source.labels[r]);
            ForwardResult fr = forward(params, x);
            CrossEntropyResult ce = cross_entropy(fr.probs, y);
            ModelGrads grads = backward(params, fr.cache, Matrix(), ce.grad_logits);
            adam_step(params, grads, adam, config.lr);
        }
    }
    return Checkpoint{std::move(params), config, config.pretrain_iters, Phase::kPretrain};
}

void require_fewshot_shape(const LabeledDataset& fewshot, std::size_t n, std::size_t num_classes) {
    fewshot.validate(num_classes);
    ClassIndex index(fewshot, num_classes);
    for (std::size_t c = 0; c < num_classes; ++c) {
        if (index.of(c).size() != n) {
            throw ConfigError("adapt: few-shot pool has " + std::to_string(index.of(c).size()) +
                              " samples of class " + std::to_string(c) + ", expected n=" +
                              std::to_string(n));
        }
    }
}

AdaptObjective adapt_objective(const ModelParams& params, const AdaptBatch& b,
                               const RunConfig& config, AdaptHook* hook, std::size_t step) {
    const std::size_t batch = b.size();
    const Method objective = config.method == Method::kDannTune ? Method::kFinetune : config.method;
    const LossOptions loss_opts{config.lambda, config.alpha, config.beta, config.normalize_features};

    const std::array<const Matrix*, 3> parts{&b.anchors, &b.positives, &b.negatives};
    ForwardResult fr = forward(params, vstack(parts));
    const Matrix f_t = fr.features.slice_rows(0, batch);
    const Matrix f_sp = fr.features.slice_rows(batch, batch);
    const Matrix f_sn = fr.features.slice_rows(2 * batch, batch);
    const Matrix probs_t = fr.probs.slice_rows(0, batch);

    CombinedLossResult loss =
        combined_loss(probs_t, b.labels, f_t, f_sp, f_sn, objective, loss_opts);
    if (config.detach_source) {
        loss.grad_positive.fill(0.0);
        loss.grad_negative.fill(0.0);
    }
    if (hook) hook->apply(f_t, f_sp, loss.grad_anchor, loss.grad_positive, step);

    Matrix grad_features(3 * batch, params.feature_dim());
    copy_rows_into(grad_features, 0, loss.grad_anchor);
    copy_rows_into(grad_features, batch, loss.grad_positive);
    copy_rows_into(grad_features, 2 * batch, loss.grad_negative);
    Matrix grad_logits(3 * batch, params.num_classes());
    copy_rows_into(grad_logits, 0, loss.grad_logits);

    return {loss.value, backward(params, fr.cache, grad_features, grad_logits)};
}

AdaptResult adapt(const Checkpoint& start, const LabeledDataset& source,
                  const LabeledDataset& fewshot, const RunConfig& config,
                  const AdaptOptions& options) {
    config.validate();
    if (!uses_fewshot(config.method)) {
        throw UsageError("adapt: method '" + std::string(to_string(config.method)) +
                         "' does not run an adaptation phase");
    }
    if (config.method == Method::kDannTune && options.hook == nullptr) {
        throw UsageError("adapt: dann-tune needs a domain-adversarial hook (see train_dann_tune)");
    }
    if (start.params.num_classes() != config.num_classes) {
        throw ConfigError("adapt: checkpoint has " + std::to_string(start.params.num_classes()) +
                          " classes, config says " + std::to_string(config.num_classes));
    }
    if (source.dim() != start.params.input_dim || fewshot.dim() != start.params.input_dim) {
        throw ConfigError("adapt: data dimension does not match the checkpoint");
    }
    source.validate(config.num_classes);
    require_fewshot_shape(fewshot, config.n, config.num_classes);

    ModelParams params = start.params;
    AdamState adam = AdamState::for_model(params);
    AdaptBatchSampler sampler(fewshot, source, config.num_classes);
    if (config.fixed_pairs) {
        RngStream pair_rng(config.seed, Stream::kFixedPairs);
        sampler.freeze_pairs(pair_rng);
    }
    RngStream batch_rng(config.seed, Stream::kAdaptBatch);

    AdaptResult result;
    for (std::size_t step = 1; step <= config.adapt_iters; ++step) {
        const AdaptBatch b = sampler.draw(batch_rng);
        AdaptObjective obj = adapt_objective(params, b, config, options.hook, step);
        adam_step(params, obj.grads, adam, config.lr);
        result.last_loss = obj.value;

        if (options.on_step) options.on_step(step, params, obj.value);
        if (options.test && step % config.eval_every == 0) {
            result.curve.push_back({step, 100.0 * evaluate(params, *options.test).macro_f1});
        }
    }
    result.checkpoint = Checkpoint{std::move(params), config, config.adapt_iters, Phase::kAdapt};
    return result;
}

}  // namespace fmda
