#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fmda/dataset.hpp"
#include "fmda/model.hpp"

namespace fmda {

struct EvalReport {
    std::size_t num_classes = 0;
    /// confusion[truth][prediction]
    std::vector<std::vector<std::uint64_t>> confusion;
    std::vector<double> precision;
    std::vector<double> recall;
    std::vector<double> f1;
    double macro_f1 = 0.0;
    /// Classes with no test samples; they count as F1 = 0 in the macro mean.
    std::vector<int> absent_classes;

    // Run metadata, filled by callers.
    std::string method;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    std::uint64_t iteration = 0;

    std::uint64_t total() const;
};

/// Per-class F1 = 2tp / (2tp + fp + fn), 0 when tp = 0; macro F1 is the
/// unweighted mean over all C classes. Empty input is a UsageError.
EvalReport macro_f1(std::span<const int> predictions, std::span<const int> labels,
                    std::size_t num_classes);

/// Predicts `data` with `params` and scores it.
EvalReport evaluate(const ModelParams& params, const LabeledDataset& data);

nlohmann::json to_json(const EvalReport& r);

}  // namespace fmda
