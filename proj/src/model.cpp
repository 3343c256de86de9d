#include "fmda/model.hpp"

#include <algorithm>

#include "fmda/errors.hpp"

namespace fmda {

std::size_t ModelParams::feature_dim() const noexcept {
    return extractor.empty() ? input_dim : extractor.back().fan_out();
}

std::vector<Matrix*> ModelParams::tensors() {
    std::vector<Matrix*> out;
    for (DenseLayer& l : extractor) {
        out.push_back(&l.weight);
        out.push_back(&l.bias);
    }
    out.push_back(&head.weight);
    out.push_back(&head.bias);
    return out;
}

std::vector<const Matrix*> ModelParams::tensors() const {
    std::vector<const Matrix*> out;
    for (const DenseLayer& l : extractor) {
        out.push_back(&l.weight);
        out.push_back(&l.bias);
    }
    out.push_back(&head.weight);
    out.push_back(&head.bias);
    return out;
}

void ModelParams::validate() const {
    std::size_t expected = input_dim;
    for (std::size_t i = 0; i < extractor.size(); ++i) {
        const DenseLayer& l = extractor[i];
        if (l.fan_in() != expected || l.bias.rows() != 1 || l.bias.cols() != l.fan_out()) {
            throw ConfigError("model: extractor layer " + std::to_string(i) + " has inconsistent shape");
        }
        expected = l.fan_out();
    }
    if (head.fan_in() != expected || head.bias.rows() != 1 || head.bias.cols() != head.fan_out()) {
        throw ConfigError("model: head input dim does not match feature dim");
    }
    for (const Matrix* t : tensors()) {
        if (!t->all_finite()) throw NumericError("model: non-finite parameter");
    }
}

bool ModelParams::operator==(const ModelParams& other) const {
    return input_dim == other.input_dim && extractor == other.extractor && head == other.head;
}

ModelParams init_model(std::size_t input_dim, const std::vector<std::size_t>& hidden_dims,
                       std::size_t feature_dim, std::size_t num_classes, RngStream& rng) {
    if (input_dim == 0 || feature_dim == 0 || num_classes < 2) {
        throw ConfigError("init_model: input dim, feature dim must be positive and C >= 2");
    }
    ModelParams p;
    p.input_dim = input_dim;
    std::size_t fan_in = input_dim;
    for (std::size_t width : hidden_dims) {
        if (width == 0) throw ConfigError("init_model: hidden width must be positive");
        p.extractor.push_back(he_uniform_layer(fan_in, width, true, rng));
        fan_in = width;
    }
    p.extractor.push_back(he_uniform_layer(fan_in, feature_dim, true, rng));
    // The head feeds a softmax, not a ReLU.
    p.head = glorot_uniform_layer(feature_dim, num_classes, false, rng);
    return p;
}

ModelGrads zero_grads(const ModelParams& params) {
    ModelGrads g;
    g.input_dim = params.input_dim;
    g.extractor = zeros_like(params.extractor);
    g.head = {Matrix(params.head.weight.rows(), params.head.weight.cols()),
              Matrix(1, params.head.bias.cols()), false};
    return g;
}

ForwardResult forward(const ModelParams& params, const Matrix& x) {
    if (x.cols() != params.input_dim) {
        throw ConfigError("forward: input has " + std::to_string(x.cols()) +
                          " columns, model expects " + std::to_string(params.input_dim));
    }
    ForwardResult out;
    out.features = stack_forward(params.extractor, x, &out.cache.extractor);
    out.logits = matmul(out.features, params.head.weight);
    add_row_broadcast(out.logits, params.head.bias);
    out.probs = softmax_rows(out.logits);
    out.cache.features = out.features;
    out.cache.owner = &params;
    out.cache.revision = params.revision;
    out.cache.valid = true;
    return out;
}

ModelGrads backward(const ModelParams& params, const ForwardCache& cache,
                    const Matrix& grad_features, const Matrix& grad_logits) {
    if (!cache.valid || cache.owner != &params || cache.revision != params.revision) {
        throw UsageError("backward: stale or foreign forward cache");
    }
    const std::size_t batch = cache.features.rows();
    ModelGrads grads = zero_grads(params);

    Matrix grad_feat(batch, params.feature_dim());
    if (!grad_logits.empty()) {
        if (grad_logits.rows() != batch || grad_logits.cols() != params.num_classes()) {
            throw ConfigError("backward: grad_logits shape mismatch");
        }
        grads.head.weight = matmul_at_b(cache.features, grad_logits);
        grads.head.bias = column_sums(grad_logits);
        grad_feat = matmul_a_bt(grad_logits, params.head.weight);
    }
    if (!grad_features.empty()) {
        if (grad_features.rows() != batch || grad_features.cols() != params.feature_dim()) {
            throw ConfigError("backward: grad_features shape mismatch");
        }
        add_inplace(grad_feat, grad_features);
    }
    stack_backward(params.extractor, cache.extractor, std::move(grad_feat), grads.extractor);
    return grads;
}

std::vector<int> predict(const ModelParams& params, const Matrix& x) {
    ForwardResult fr = forward(params, x);
    std::vector<int> out(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        auto row = fr.logits.row(r);
        out[r] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
    }
    return out;
}

}  // namespace fmda
