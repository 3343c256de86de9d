#include "fmda/rng.hpp"

#include <cmath>
#include <numbers>

#include "fmda/errors.hpp"

namespace fmda {

namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed),
      stream_id_(stream_id),
      key_(mix64(mix64(seed + kGamma) ^ (stream_id * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL))) {}

std::uint64_t RngStream::next_u64() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * kGamma);
}

double RngStream::uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::size_t RngStream::uniform_index(std::size_t bound) {
    if (bound == 0) throw UsageError("RngStream::uniform_index: bound must be positive");
    // Lemire's multiply-shift with rejection of the biased low region.
    const auto b = static_cast<std::uint64_t>(bound);
    unsigned __int128 product = static_cast<unsigned __int128>(next_u64()) * b;
    auto low = static_cast<std::uint64_t>(product);
    if (low < b) {
        const std::uint64_t threshold = (0 - b) % b;
        while (low < threshold) {
            product = static_cast<unsigned __int128>(next_u64()) * b;
            low = static_cast<std::uint64_t>(product);
        }
    }
    return static_cast<std::size_t>(product >> 64);
}

double RngStream::normal() noexcept {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

}  // namespace fmda
