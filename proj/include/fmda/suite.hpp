#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fmda/config.hpp"
#include "fmda/datagen.hpp"
#include "fmda/dataset.hpp"
#include "fmda/model.hpp"
#include "fmda/training.hpp"

namespace fmda {

/// Peak minus final value of a curve, in the curve's units. Empty input is a UsageError.
double degradation_gap(std::span<const double> curve);
double degradation_gap(const LearningCurve& curve);

struct SuiteOptions {
    std::vector<Method> methods = all_methods();
    std::vector<std::size_t> n_values{3, 10};
    std::size_t trials = 5;
    RunConfig base;        // base.seed is the base seed; trial t uses base.seed + t
    std::size_t jobs = 1;  // trials run concurrently; results do not depend on jobs
};

struct TrialRecord {
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    double final_f1 = 0.0;  // percentage points
    double best_f1 = 0.0;
    std::size_t best_iter = 0;
    double gap = 0.0;
    std::size_t fewshot_size = 0;
    std::size_t test_size = 0;
    LearningCurve curve;
};

struct MethodSummary {
    Method method = Method::kWithoutTarget;
    std::size_t n = 0;
    std::vector<TrialRecord> trials;
    double mean_final = 0.0;
    double sd_final = 0.0;
    double mean_best = 0.0;
    double sd_best = 0.0;
    double mean_best_iter = 0.0;
    double mean_gap = 0.0;
};

struct SuiteReport {
    RunConfig base;
    std::optional<ShiftSpec> spec;
    std::vector<std::size_t> n_values;
    std::size_t trials = 0;
    std::vector<MethodSummary> entries;  // ordered by n, then method
    std::vector<std::string> warnings;
    std::vector<std::string> notes;
    std::size_t leakage_checks = 0;

    /// nullptr when the pair was not run.
    const MethodSummary* find(Method m, std::size_t n) const;
};

/// For each trial: one pre-training run shared by all methods, one
/// transductive DANN run if requested, then per n a fresh few-shot draw and
/// every adapted method evaluated on the held-out target rows. Methods that
/// do not use target labels are scored on each n's held-out rows as well.
/// Few-shot/evaluation overlap is a hard error.
SuiteReport run_suite(const LabeledDataset& source, const LabeledDataset& target,
                      const SuiteOptions& options);
SuiteReport run_suite(const GeneratedPair& pair, const SuiteOptions& options);

nlohmann::json to_json(const SuiteReport& report);
/// Flat `method,n,trial,iter,macro_f1` rows.
std::string curves_csv(const SuiteReport& report);

struct FeatureExportSet {
    const LabeledDataset* data = nullptr;
    std::string split;  // e.g. "source", "fewshot", "test"
};

/// Writes `id,domain,label,split,f_0..f_{k-1},pc1,pc2`; the projection is
/// fitted on the union of all exported feature rows.
void export_features(const ModelParams& params, std::span<const FeatureExportSet> sets,
                     const std::filesystem::path& path);

}  // namespace fmda
