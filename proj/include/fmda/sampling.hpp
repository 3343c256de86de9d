#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "fmda/dataset.hpp"
#include "fmda/matrix.hpp"
#include "fmda/rng.hpp"

namespace fmda {

/// Which target ids are used for adaptation and which are held out.
struct FewShotSplit {
    std::size_t n = 0;
    std::uint64_t seed = 0;
    std::vector<std::uint64_t> train_ids;  // grouped by class, n per class
    std::vector<std::uint64_t> test_ids;   // remaining target ids in dataset order

    bool operator==(const FewShotSplit&) const = default;
};

nlohmann::json to_json(const FewShotSplit& split);
FewShotSplit fewshot_split_from_json(const nlohmann::json& j);

/// Uniform without-replacement draw of n samples per class.
/// Throws ConfigError naming the first class with fewer than n samples.
FewShotSplit draw_fewshot(const LabeledDataset& target, std::size_t n, std::size_t num_classes,
                          RngStream& rng);

/// Throws if train and test overlap or do not cover `target` exactly.
void check_split_disjoint(const FewShotSplit& split, const LabeledDataset& target);

/// One adaptation step's worth of aligned (anchor, positive, negative) rows.
/// Row i of positives shares the anchor's label; row i of negatives does not.
struct AdaptBatch {
    Matrix anchors;
    std::vector<int> labels;
    std::vector<std::size_t> anchor_rows;    // rows of the few-shot pool
    Matrix positives;
    std::vector<std::size_t> positive_rows;  // rows of the source set
    Matrix negatives;
    std::vector<std::size_t> negative_rows;  // rows of the source set
    std::vector<int> negative_labels;

    std::size_t size() const noexcept { return labels.size(); }
    bool has_negatives() const noexcept { return negatives.rows() == labels.size() && !labels.empty(); }
};

/// Positive/negative source rows frozen per few-shot sample.
struct FixedPairs {
    std::vector<std::size_t> positive_rows;
    std::vector<std::size_t> negative_rows;
};

/// Precomputed state for repeatedly drawing adaptation batches.
class AdaptBatchSampler {
public:
    /// Throws ConfigError when a class is missing from source or from the few-shot pool.
    AdaptBatchSampler(const LabeledDataset& fewshot, const LabeledDataset& source,
                      std::size_t num_classes);

    /// Draws positives/negatives once; subsequent batches reuse them.
    void freeze_pairs(RngStream& rng);
    bool pairs_frozen() const noexcept { return fixed_.has_value(); }

    /// Two anchors per class (with replacement only when a class has one
    /// few-shot sample). Per anchor: one same-class source positive, and a
    /// negative from a uniformly chosen other class.
    AdaptBatch draw(RngStream& rng) const;

    std::size_t num_classes() const noexcept { return num_classes_; }

private:
    std::size_t pick_positive(int label, RngStream& rng) const;
    std::size_t pick_negative(int label, RngStream& rng) const;

    const LabeledDataset& fewshot_;
    const LabeledDataset& source_;
    std::size_t num_classes_;
    ClassIndex fewshot_index_;
    ClassIndex source_index_;
    std::optional<FixedPairs> fixed_;
};

/// Convenience wrapper drawing a single batch.
AdaptBatch build_adapt_batch(const LabeledDataset& fewshot, const LabeledDataset& source,
                             std::size_t num_classes, RngStream& rng);

/// A random permutation of [0, count) split into consecutive batches; the
/// final short batch is kept.
std::vector<std::vector<std::size_t>> shuffle_epoch(std::size_t count, std::size_t batch_size,
                                                    RngStream& rng);

}  // namespace fmda
