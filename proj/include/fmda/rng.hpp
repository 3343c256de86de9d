#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace fmda {

/// Well-known stream ids. A trial derives all of its randomness from
/// (trial seed, stream id) so that components never share a sequence.
enum class Stream : std::uint64_t {
    kInit = 1,
    kPretrainShuffle = 2,
    kFewShot = 3,
    kAdaptBatch = 4,
    kDannTarget = 5,
    kDiscriminatorInit = 6,
    kFixedPairs = 7,
    kDataMeans = 101,
    kDataShift = 102,
    kDataSourceNoise = 103,
    kDataTargetNoise = 104,
};

/// Counter-based generator: draw i is a pure function of (seed, stream, i).
///
/// The key is derived from seed and stream id with two rounds of the
/// SplitMix64 finalizer; each draw finalizes key + counter * golden-gamma.
/// Output is identical on every platform.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id);
    RngStream(std::uint64_t seed, Stream stream)
        : RngStream(seed, static_cast<std::uint64_t>(stream)) {}

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }
    std::uint64_t counter() const noexcept { return counter_; }

    std::uint64_t next_u64() noexcept;
    /// Uniform in [0, 1) with 53 random bits.
    double uniform() noexcept;
    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
    /// Unbiased uniform integer in [0, bound). bound must be > 0.
    std::size_t uniform_index(std::size_t bound);
    /// Standard normal via Box-Muller; the second variate is cached.
    double normal() noexcept;

    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const std::size_t j = uniform_index(i);
            std::swap(items[i - 1], items[j]);
        }
    }
    template <typename T>
    void shuffle(std::vector<T>& items) {
        shuffle(std::span<T>(items));
    }

    bool operator==(const RngStream&) const = default;

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace fmda
