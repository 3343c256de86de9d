#include "fmda/dataset.hpp"

#include <algorithm>
#include <unordered_map>

#include "fmda/errors.hpp"

namespace fmda {

std::string_view to_string(Domain d) { return d == Domain::kSource ? "source" : "target"; }

Domain parse_domain(std::string_view text) {
    if (text == "source") return Domain::kSource;
    if (text == "target") return Domain::kTarget;
    throw ConfigError("unknown domain '" + std::string(text) + "'");
}

void LabeledDataset::validate(std::size_t num_classes) const {
    if (features.rows() != labels.size() || ids.size() != labels.size()) {
        throw ConfigError("dataset: features/labels/ids length mismatch (" +
                          std::to_string(features.rows()) + "/" + std::to_string(labels.size()) +
                          "/" + std::to_string(ids.size()) + ")");
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= num_classes) {
            throw ConfigError("dataset: label " + std::to_string(labels[i]) + " of sample " +
                              std::to_string(ids[i]) + " outside [0, " +
                              std::to_string(num_classes) + ")");
        }
    }
}

std::size_t LabeledDataset::inferred_classes() const {
    if (labels.empty()) return 0;
    return static_cast<std::size_t>(*std::max_element(labels.begin(), labels.end())) + 1;
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> rows) const {
    LabeledDataset out;
    out.domain = domain;
    out.features = features.gather_rows(rows);
    out.labels.reserve(rows.size());
    out.ids.reserve(rows.size());
    for (std::size_t r : rows) {
        out.labels.push_back(labels[r]);
        out.ids.push_back(ids[r]);
    }
    return out;
}

LabeledDataset LabeledDataset::subset_by_ids(std::span<const std::uint64_t> wanted) const {
    std::unordered_map<std::uint64_t, std::size_t> position;
    position.reserve(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) position.emplace(ids[i], i);
    std::vector<std::size_t> rows;
    rows.reserve(wanted.size());
    for (std::uint64_t id : wanted) {
        auto it = position.find(id);
        if (it == position.end()) {
            throw ConfigError("dataset: id " + std::to_string(id) + " not present in " +
                              std::string(to_string(domain)) + " data");
        }
        rows.push_back(it->second);
    }
    return subset(rows);
}

ClassIndex::ClassIndex(const LabeledDataset& data, std::size_t num_classes)
    : rows_by_class(num_classes) {
    for (std::size_t i = 0; i < data.labels.size(); ++i) {
        const int y = data.labels[i];
        if (y < 0 || static_cast<std::size_t>(y) >= num_classes) {
            throw ConfigError("label " + std::to_string(y) + " outside [0, " +
                              std::to_string(num_classes) + ")");
        }
        rows_by_class[static_cast<std::size_t>(y)].push_back(i);
    }
}

void ClassIndex::require_all_present(std::string_view context) const {
    for (std::size_t c = 0; c < rows_by_class.size(); ++c) {
        if (rows_by_class[c].empty()) {
            throw ConfigError(std::string(context) + ": class " + std::to_string(c) +
                              " has no samples");
        }
    }
}

}  // namespace fmda
