#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>

#include <nlohmann/json.hpp>

#include "fmda/dataset.hpp"

namespace fmda {

/// Parameters of the synthetic source/target benchmark.
///
/// Source class c is an isotropic Gaussian N(mu_c, noise_scale^2 I) with
/// mu_c ~ N(0, mean_scale^2 I). The target draws fresh samples z from the
/// same class model and maps them as
///     x = (1 + 0.2 s) R(s * 15 deg) z + s * o_c
/// where R rotates within a random 2-D subspace and o_c is a random unit
/// vector per class. With s = 0 both domains share one distribution.
struct ShiftSpec {
    std::size_t num_classes = 6;
    std::size_t dim = 16;
    std::size_t source_per_class = 500;
    std::size_t target_per_class = 200;
    double severity = 2.0;
    double noise_scale = 0.3;
    double mean_scale = 0.25;
    std::uint64_t seed = 2024;

    /// Throws ConfigError naming the offending field.
    void validate() const;

    /// The frozen benchmark (C=6, D=16, severity 2, 500/200 per class).
    static ShiftSpec standard();

    bool operator==(const ShiftSpec&) const = default;
};

nlohmann::json to_json(const ShiftSpec& s);
/// Overlays keys onto `base`; unknown keys are a ConfigError.
ShiftSpec shift_spec_from_json(const nlohmann::json& j, ShiftSpec base = {});
const std::vector<std::string>& shift_spec_keys();

struct GeneratedPair {
    LabeledDataset source;
    LabeledDataset target;
    ShiftSpec spec;
};

/// Deterministic in spec.seed.
GeneratedPair generate(const ShiftSpec& spec);

/// Writes `id,domain,label,f_0..f_{D-1}` rows sorted by id. Values use 17
/// significant digits so that load_csv restores them exactly.
void export_csv(const LabeledDataset& data, const std::filesystem::path& path);
/// Reads the export_csv format. `fallback_domain` is used for header-only files.
LabeledDataset load_csv(const std::filesystem::path& path,
                        std::optional<Domain> fallback_domain = std::nullopt);

}  // namespace fmda
