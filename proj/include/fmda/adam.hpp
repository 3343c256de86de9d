#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fmda/matrix.hpp"
#include "fmda/model.hpp"

namespace fmda {

struct AdamState {
    std::vector<Matrix> m;  // first moments, one per parameter tensor
    std::vector<Matrix> v;  // second moments
    std::uint64_t t = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    /// Zero moments shaped like `params`.
    static AdamState for_tensors(std::span<const Matrix* const> params);
    static AdamState for_model(const ModelParams& params);
};

/// One bias-corrected Adam update. Throws NumericError (leaving params and
/// state untouched) if any gradient entry is non-finite.
void adam_step(std::span<Matrix* const> params, std::span<const Matrix* const> grads,
               AdamState& state, double lr);

/// Model overload; also bumps params.revision.
void adam_step(ModelParams& params, const ModelGrads& grads, AdamState& state, double lr);

}  // namespace fmda
