#include "fmda/adam.hpp"

#include <cmath>
#include <string>

#include "fmda/errors.hpp"

namespace fmda {

AdamState AdamState::for_tensors(std::span<const Matrix* const> params) {
    AdamState s;
    for (const Matrix* p : params) {
        s.m.emplace_back(p->rows(), p->cols());
        s.v.emplace_back(p->rows(), p->cols());
    }
    return s;
}

AdamState AdamState::for_model(const ModelParams& params) {
    auto tensors = params.tensors();
    return for_tensors(tensors);
}

void adam_step(std::span<Matrix* const> params, std::span<const Matrix* const> grads,
               AdamState& state, double lr) {
    if (params.size() != grads.size() || params.size() != state.m.size()) {
        throw ConfigError("adam_step: tensor count mismatch");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (params[i]->rows() != grads[i]->rows() || params[i]->cols() != grads[i]->cols() ||
            state.m[i].size() != params[i]->size()) {
            throw ConfigError("adam_step: shape mismatch at tensor " + std::to_string(i));
        }
        auto g = grads[i]->values();
        for (std::size_t k = 0; k < g.size(); ++k) {
            if (!std::isfinite(g[k])) {
                throw NumericError("adam_step: non-finite gradient at tensor " + std::to_string(i) +
                                   " entry " + std::to_string(k) + " (step " +
                                   std::to_string(state.t + 1) + "), step aborted");
            }
        }
    }
    state.t += 1;
    const double t = static_cast<double>(state.t);
    const double correction1 = 1.0 - std::pow(state.beta1, t);
    const double correction2 = 1.0 - std::pow(state.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto w = params[i]->values();
        auto g = grads[i]->values();
        auto m = state.m[i].values();
        auto v = state.v[i].values();
        for (std::size_t k = 0; k < w.size(); ++k) {
            m[k] = state.beta1 * m[k] + (1.0 - state.beta1) * g[k];
            v[k] = state.beta2 * v[k] + (1.0 - state.beta2) * g[k] * g[k];
            const double m_hat = m[k] / correction1;
            const double v_hat = v[k] / correction2;
            w[k] -= lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
        }
    }
}

void adam_step(ModelParams& params, const ModelGrads& grads, AdamState& state, double lr) {
    auto p = params.tensors();
    auto g = grads.tensors();
    adam_step(p, g, state, lr);
    ++params.revision;
}

}  // namespace fmda
