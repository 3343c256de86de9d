#include "fmda/sampling.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_set>

#include "fmda/errors.hpp"

namespace fmda {

nlohmann::json to_json(const FewShotSplit& split) {
    return {{"n", split.n}, {"seed", split.seed}, {"train_ids", split.train_ids},
            {"test_ids", split.test_ids}};
}

FewShotSplit fewshot_split_from_json(const nlohmann::json& j) {
    try {
        FewShotSplit s;
        s.n = j.at("n").get<std::size_t>();
        s.seed = j.at("seed").get<std::uint64_t>();
        s.train_ids = j.at("train_ids").get<std::vector<std::uint64_t>>();
        s.test_ids = j.at("test_ids").get<std::vector<std::uint64_t>>();
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("few-shot split: ") + e.what());
    }
}

FewShotSplit draw_fewshot(const LabeledDataset& target, std::size_t n, std::size_t num_classes,
                          RngStream& rng) {
    if (n == 0) throw ConfigError("draw_fewshot: n must be at least 1");
    ClassIndex index(target, num_classes);
    for (std::size_t c = 0; c < num_classes; ++c) {
        if (index.of(c).size() < n) {
            throw ConfigError("draw_fewshot: class " + std::to_string(c) + " has " +
                              std::to_string(index.of(c).size()) + " target samples, need n=" +
                              std::to_string(n));
        }
    }
    FewShotSplit split;
    split.n = n;
    split.seed = rng.seed();
    std::vector<bool> selected(target.size(), false);
    for (std::size_t c = 0; c < num_classes; ++c) {
        std::vector<std::size_t> pool = index.of(c);
        // Partial Fisher-Yates: the first n slots become a uniform sample.
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t j = i + rng.uniform_index(pool.size() - i);
            std::swap(pool[i], pool[j]);
            selected[pool[i]] = true;
            split.train_ids.push_back(target.ids[pool[i]]);
        }
    }
    for (std::size_t r = 0; r < target.size(); ++r) {
        if (!selected[r]) split.test_ids.push_back(target.ids[r]);
    }
    return split;
}

void check_split_disjoint(const FewShotSplit& split, const LabeledDataset& target) {
    std::unordered_set<std::uint64_t> train(split.train_ids.begin(), split.train_ids.end());
    if (train.size() != split.train_ids.size()) {
        throw UsageError("few-shot split: duplicate train ids");
    }
    for (std::uint64_t id : split.test_ids) {
        if (train.count(id) != 0) {
            throw UsageError("few-shot split: leakage, id " + std::to_string(id) +
                             " is in both train and evaluation sets");
        }
    }
    if (train.size() + split.test_ids.size() != target.size()) {
        throw UsageError("few-shot split: train and test ids do not cover the target set");
    }
}

AdaptBatchSampler::AdaptBatchSampler(const LabeledDataset& fewshot, const LabeledDataset& source,
                                     std::size_t num_classes)
    : fewshot_(fewshot),
      source_(source),
      num_classes_(num_classes),
      fewshot_index_(fewshot, num_classes),
      source_index_(source, num_classes) {
    if (num_classes < 2) throw ConfigError("adaptation batches need at least 2 classes");
    source_index_.require_all_present("source");
    fewshot_index_.require_all_present("few-shot target pool");
    if (fewshot.dim() != source.dim()) {
        throw ConfigError("few-shot and source feature dims differ");
    }
}

std::size_t AdaptBatchSampler::pick_positive(int label, RngStream& rng) const {
    const auto& rows = source_index_.of(static_cast<std::size_t>(label));
    return rows[rng.uniform_index(rows.size())];
}

std::size_t AdaptBatchSampler::pick_negative(int label, RngStream& rng) const {
    const auto c = static_cast<std::size_t>(label);
    std::size_t other = rng.uniform_index(num_classes_ - 1);
    if (other >= c) ++other;
    const auto& rows = source_index_.of(other);
    return rows[rng.uniform_index(rows.size())];
}

void AdaptBatchSampler::freeze_pairs(RngStream& rng) {
    FixedPairs pairs;
    pairs.positive_rows.reserve(fewshot_.size());
    pairs.negative_rows.reserve(fewshot_.size());
    for (std::size_t r = 0; r < fewshot_.size(); ++r) {
        pairs.positive_rows.push_back(pick_positive(fewshot_.labels[r], rng));
        pairs.negative_rows.push_back(pick_negative(fewshot_.labels[r], rng));
    }
    fixed_ = std::move(pairs);
}

AdaptBatch AdaptBatchSampler::draw(RngStream& rng) const {
    AdaptBatch batch;
    const std::size_t size = 2 * num_classes_;
    batch.anchor_rows.reserve(size);
    batch.positive_rows.reserve(size);
    batch.negative_rows.reserve(size);
    for (std::size_t c = 0; c < num_classes_; ++c) {
        const auto& pool = fewshot_index_.of(c);
        std::size_t first = 0;
        std::size_t second = 0;
        if (pool.size() >= 2) {
            first = rng.uniform_index(pool.size());
            second = rng.uniform_index(pool.size() - 1);
            if (second >= first) ++second;
        }
        for (std::size_t slot : {first, second}) {
            const std::size_t row = pool[slot];
            const int label = fewshot_.labels[row];
            batch.anchor_rows.push_back(row);
            batch.labels.push_back(label);
            if (fixed_) {
                batch.positive_rows.push_back(fixed_->positive_rows[row]);
                batch.negative_rows.push_back(fixed_->negative_rows[row]);
            } else {
                batch.positive_rows.push_back(pick_positive(label, rng));
                batch.negative_rows.push_back(pick_negative(label, rng));
            }
        }
    }
    batch.anchors = fewshot_.features.gather_rows(batch.anchor_rows);
    batch.positives = source_.features.gather_rows(batch.positive_rows);
    batch.negatives = source_.features.gather_rows(batch.negative_rows);
    batch.negative_labels.reserve(size);
    for (std::size_t r : batch.negative_rows) batch.negative_labels.push_back(source_.labels[r]);
    return batch;
}

AdaptBatch build_adapt_batch(const LabeledDataset& fewshot, const LabeledDataset& source,
                             std::size_t num_classes, RngStream& rng) {
    AdaptBatchSampler sampler(fewshot, source, num_classes);
    return sampler.draw(rng);
}

std::vector<std::vector<std::size_t>> shuffle_epoch(std::size_t count, std::size_t batch_size,
                                                    RngStream& rng) {
    if (batch_size == 0) throw ConfigError("shuffle_epoch: batch size must be at least 1");
    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t start = 0; start < count; start += batch_size) {
        const std::size_t end = std::min(count, start + batch_size);
        batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                             order.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return batches;
}

}  // namespace fmda
