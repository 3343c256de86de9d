#include "fmda/metrics.hpp"

#include "fmda/errors.hpp"

namespace fmda {

std::uint64_t EvalReport::total() const {
    std::uint64_t sum = 0;
    for (const auto& row : confusion)
        for (std::uint64_t v : row) sum += v;
    return sum;
}

EvalReport macro_f1(std::span<const int> predictions, std::span<const int> labels,
                    std::size_t num_classes) {
    if (predictions.empty() || labels.empty()) throw UsageError("macro_f1: empty input");
    if (predictions.size() != labels.size()) {
        throw ConfigError("macro_f1: predictions and labels differ in length");
    }
    if (num_classes == 0) throw ConfigError("macro_f1: num_classes must be positive");
    EvalReport r;
    r.num_classes = num_classes;
    r.confusion.assign(num_classes, std::vector<std::uint64_t>(num_classes, 0));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int y = labels[i];
        const int p = predictions[i];
        if (y < 0 || p < 0 || static_cast<std::size_t>(y) >= num_classes ||
            static_cast<std::size_t>(p) >= num_classes) {
            throw ConfigError("macro_f1: class index outside [0, C)");
        }
        ++r.confusion[static_cast<std::size_t>(y)][static_cast<std::size_t>(p)];
    }
    r.precision.assign(num_classes, 0.0);
    r.recall.assign(num_classes, 0.0);
    r.f1.assign(num_classes, 0.0);
    double sum = 0.0;
    for (std::size_t c = 0; c < num_classes; ++c) {
        const std::uint64_t tp = r.confusion[c][c];
        std::uint64_t support = 0;
        std::uint64_t predicted = 0;
        for (std::size_t k = 0; k < num_classes; ++k) {
            support += r.confusion[c][k];
            predicted += r.confusion[k][c];
        }
        const std::uint64_t fn = support - tp;
        const std::uint64_t fp = predicted - tp;
        if (support == 0) r.absent_classes.push_back(static_cast<int>(c));
        if (predicted > 0) r.precision[c] = static_cast<double>(tp) / static_cast<double>(predicted);
        if (support > 0) r.recall[c] = static_cast<double>(tp) / static_cast<double>(support);
        if (tp > 0) {
            r.f1[c] = 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
        }
        sum += r.f1[c];
    }
    r.macro_f1 = sum / static_cast<double>(num_classes);
    return r;
}

EvalReport evaluate(const ModelParams& params, const LabeledDataset& data) {
    const std::vector<int> preds = predict(params, data.features);
    return macro_f1(preds, data.labels, params.num_classes());
}

nlohmann::json to_json(const EvalReport& r) {
    return {
        {"num_classes", r.num_classes},
        {"confusion", r.confusion},
        {"precision", r.precision},
        {"recall", r.recall},
        {"f1", r.f1},
        {"macro_f1", r.macro_f1},
        {"absent_classes", r.absent_classes},
        {"method", r.method},
        {"n", r.n},
        {"seed", r.seed},
        {"iteration", r.iteration},
        {"test_size", r.total()},
    };
}

}  // namespace fmda
