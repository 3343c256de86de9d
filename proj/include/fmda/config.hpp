#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace fmda {

enum class Method { kWithoutTarget, kDann, kFinetune, kDannTune, kFmdaL2, kFmdaTriplet };

std::string_view to_string(Method m);
/// Accepts without-target, dann, finetune, dann-tune, fmda-l2, fmda-triplet.
Method parse_method(std::string_view text);
/// All six methods in canonical order.
const std::vector<Method>& all_methods();
/// True for methods that consume the few-shot target pool.
bool uses_fewshot(Method m);

/// Hyperparameters of one run. Defaults follow the reference experimental
/// setup where one exists (Adam lr 1e-3, lambda = 1, pre-training batch 128,
/// 100 pre-training epochs, 1,000 adaptation steps, 5 trials).
struct RunConfig {
    double lambda = 1.0;  // weight of the distance loss
    double alpha = 1.0;   // triplet inter-pair margin
    double beta = 0.3;    // triplet absolute positive margin
    std::size_t n = 10;   // target samples per class
    double lr = 1e-3;
    std::size_t pretrain_iters = 100;  // epochs over the source set
    std::size_t adapt_iters = 1000;    // optimizer steps
    std::size_t batch_size_pretrain = 128;
    std::size_t num_classes = 6;
    std::vector<std::size_t> hidden_dims{64, 64};
    std::size_t feature_dim = 32;
    std::uint64_t seed = 1;
    std::size_t trials = 5;
    Method method = Method::kFmdaTriplet;
    std::size_t eval_every = 10;

    bool detach_source = false;       // treat source-branch features as constants in L_D
    bool fixed_pairs = false;         // draw positives/negatives once per anchor
    bool normalize_features = false;  // unit-normalize features before distances

    // Domain-adversarial baselines.
    double lambda_d = 1.0;            // gradient reversal coefficient at step 0
    double lambda_d_end = 1.0;        // value reached at the end of the ramp
    std::size_t lambda_d_horizon = 0; // ramp length in steps; 0 keeps lambda_d constant
    std::vector<std::size_t> disc_hidden{32};

    /// Adaptation batches hold two anchors per class.
    std::size_t adapt_batch_size() const noexcept { return 2 * num_classes; }

    /// Throws ConfigError on any out-of-range field.
    void validate() const;

    bool operator==(const RunConfig&) const = default;
};

nlohmann::json to_json(const RunConfig& c);
/// Overlays keys of `j` onto `base`. Unknown keys are a ConfigError.
RunConfig run_config_from_json(const nlohmann::json& j, RunConfig base = {});
const std::vector<std::string>& run_config_keys();

}  // namespace fmda
