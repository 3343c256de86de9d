#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "fmda/config.hpp"
#include "fmda/model.hpp"

namespace fmda {

enum class Phase { kPretrain, kAdapt };

std::string_view to_string(Phase p);

struct Checkpoint {
    ModelParams params;
    RunConfig config;
    std::uint64_t iteration = 0;
    Phase phase = Phase::kPretrain;

    bool operator==(const Checkpoint&) const = default;
};

/// Container layout (all integers little-endian):
///   8 bytes   magic "FMDACKPT"
///   u32       format version (1)
///   u64       header length, followed by that many bytes of UTF-8 JSON
///             {config, phase, iteration, input_dim, layers: [{rows, cols, relu}]}
///   u64       tensor count
///   per tensor: u64 rows, u64 cols, rows*cols IEEE-754 binary64 values
std::string serialize(const Checkpoint& ckpt);
Checkpoint deserialize(std::string_view bytes);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

inline constexpr std::uint32_t kCheckpointVersion = 1;

}  // namespace fmda
