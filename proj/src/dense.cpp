#include "fmda/dense.hpp"

#include <cmath>

#include "fmda/errors.hpp"

namespace fmda {

namespace {

DenseLayer uniform_layer(std::size_t fan_in, std::size_t fan_out, bool relu, double limit,
                         RngStream& rng) {
    DenseLayer layer{Matrix(fan_in, fan_out), Matrix(1, fan_out), relu};
    for (double& w : layer.weight.values()) w = rng.uniform(-limit, limit);
    return layer;
}

}  // namespace

DenseLayer he_uniform_layer(std::size_t fan_in, std::size_t fan_out, bool relu, RngStream& rng) {
    return uniform_layer(fan_in, fan_out, relu, std::sqrt(6.0 / static_cast<double>(fan_in)), rng);
}

DenseLayer glorot_uniform_layer(std::size_t fan_in, std::size_t fan_out, bool relu, RngStream& rng) {
    return uniform_layer(fan_in, fan_out, relu,
                         std::sqrt(6.0 / static_cast<double>(fan_in + fan_out)), rng);
}

Matrix stack_forward(const std::vector<DenseLayer>& layers, const Matrix& x, StackCache* cache) {
    if (cache) {
        cache->inputs.clear();
        cache->outputs.clear();
    }
    Matrix h = x;
    for (const DenseLayer& layer : layers) {
        if (h.cols() != layer.fan_in()) {
            throw ConfigError("dense layer expects " + std::to_string(layer.fan_in()) +
                              " inputs, got " + std::to_string(h.cols()));
        }
        Matrix z = matmul(h, layer.weight);
        add_row_broadcast(z, layer.bias);
        if (layer.relu) {
            for (double& v : z.values()) v = v > 0.0 ? v : 0.0;
        }
        if (cache) {
            cache->inputs.push_back(std::move(h));
            cache->outputs.push_back(z);
        }
        h = std::move(z);
    }
    return h;
}

Matrix stack_backward(const std::vector<DenseLayer>& layers, const StackCache& cache,
                      Matrix grad_output, std::vector<DenseLayer>& grads) {
    if (cache.inputs.size() != layers.size() || grads.size() != layers.size()) {
        throw UsageError("stack_backward: cache does not match layer stack");
    }
    Matrix grad = std::move(grad_output);
    for (std::size_t i = layers.size(); i-- > 0;) {
        const DenseLayer& layer = layers[i];
        if (layer.relu) {
            auto g = grad.values();
            auto out = cache.outputs[i].values();
            for (std::size_t k = 0; k < g.size(); ++k) {
                if (!(out[k] > 0.0)) g[k] = 0.0;
            }
        }
        add_inplace(grads[i].weight, matmul_at_b(cache.inputs[i], grad));
        add_inplace(grads[i].bias, column_sums(grad));
        grad = matmul_a_bt(grad, layer.weight);
    }
    return grad;
}

std::vector<DenseLayer> zeros_like(const std::vector<DenseLayer>& layers) {
    std::vector<DenseLayer> out;
    out.reserve(layers.size());
    for (const DenseLayer& l : layers) {
        out.push_back({Matrix(l.weight.rows(), l.weight.cols()), Matrix(1, l.bias.cols()), l.relu});
    }
    return out;
}

}  // namespace fmda
