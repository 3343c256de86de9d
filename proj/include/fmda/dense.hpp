#pragma once

#include <cstddef>
#include <vector>

#include "fmda/matrix.hpp"
#include "fmda/rng.hpp"

namespace fmda {

/// Fully connected layer y = act(x W + b), with W stored fan_in x fan_out.
struct DenseLayer {
    Matrix weight;
    Matrix bias;  // 1 x fan_out
    bool relu = true;

    std::size_t fan_in() const noexcept { return weight.rows(); }
    std::size_t fan_out() const noexcept { return weight.cols(); }

    bool operator==(const DenseLayer&) const = default;
};

/// He-uniform weights (limit sqrt(6 / fan_in)), zero bias.
DenseLayer he_uniform_layer(std::size_t fan_in, std::size_t fan_out, bool relu, RngStream& rng);
/// Glorot-uniform weights (limit sqrt(6 / (fan_in + fan_out))), zero bias.
DenseLayer glorot_uniform_layer(std::size_t fan_in, std::size_t fan_out, bool relu, RngStream& rng);

/// Activations retained by a forward pass through a layer stack.
struct StackCache {
    std::vector<Matrix> inputs;   // input of layer i
    std::vector<Matrix> outputs;  // post-activation output of layer i
};

Matrix stack_forward(const std::vector<DenseLayer>& layers, const Matrix& x, StackCache* cache);

/// Accumulates parameter gradients into `grads` (same shapes as `layers`)
/// and returns the gradient with respect to the stack input.
Matrix stack_backward(const std::vector<DenseLayer>& layers, const StackCache& cache,
                      Matrix grad_output, std::vector<DenseLayer>& grads);

/// Zero-valued layers with matching shapes.
std::vector<DenseLayer> zeros_like(const std::vector<DenseLayer>& layers);

}  // namespace fmda
