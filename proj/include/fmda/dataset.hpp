#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fmda/matrix.hpp"

namespace fmda {

enum class Domain { kSource, kTarget };

std::string_view to_string(Domain d);
/// Accepts "source" and "target"; throws ConfigError otherwise.
Domain parse_domain(std::string_view text);

/// Feature matrix with one integer label and one stable id per row.
struct LabeledDataset {
    Matrix features;
    std::vector<int> labels;
    std::vector<std::uint64_t> ids;
    Domain domain = Domain::kSource;

    std::size_t size() const noexcept { return labels.size(); }
    std::size_t dim() const noexcept { return features.cols(); }
    bool empty() const noexcept { return labels.empty(); }

    /// Throws ConfigError if lengths disagree or a label lies outside [0, num_classes).
    void validate(std::size_t num_classes) const;
    /// Number of distinct classes assuming labels are 0..max.
    std::size_t inferred_classes() const;

    LabeledDataset subset(std::span<const std::size_t> rows) const;
    /// Rows whose id appears in `ids`, in the order of `ids`. Unknown ids are a ConfigError.
    LabeledDataset subset_by_ids(std::span<const std::uint64_t> ids) const;

    bool operator==(const LabeledDataset&) const = default;
};

/// Row indices grouped by class label.
struct ClassIndex {
    std::vector<std::vector<std::size_t>> rows_by_class;

    ClassIndex() = default;
    ClassIndex(const LabeledDataset& data, std::size_t num_classes);

    std::size_t num_classes() const noexcept { return rows_by_class.size(); }
    const std::vector<std::size_t>& of(std::size_t c) const { return rows_by_class[c]; }
    /// Throws ConfigError naming the first empty class, prefixed by `context`.
    void require_all_present(std::string_view context) const;
};

}  // namespace fmda
