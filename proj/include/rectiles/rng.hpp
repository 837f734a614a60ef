#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace rectiles {

/// Identifies one logical variate stream under a fixed master seed.
/// Distinct (label, index) pairs yield statistically independent streams.
struct StreamId {
    std::string label;
    std::uint64_t index = 0;
};

/**
 * Counter-based, seedable variate source.
 *
 * The k-th raw 64-bit output is a pure function of (master_seed, label,
 * index, k): the stream key is derived by hashing the id, and outputs are
 * obtained by applying a SplitMix64-style finalizer to key + k*gamma.
 * Identical construction parameters therefore reproduce identical variate
 * sequences, and streams can be split freely without coordination.
 *
 * A stream is single-owner; use distinct ids for concurrent work.
 */
class RandomStream {
public:
    RandomStream(std::uint64_t master_seed, StreamId id);
    RandomStream(std::uint64_t master_seed, std::string_view label, std::uint64_t index = 0);

    /// Next raw 64-bit word; advances the counter by one.
    std::uint64_t next_u64() noexcept;

    /// Uniform draw strictly inside (0,1). Endpoints are excluded by
    /// construction (cell midpoints of a 2^53 grid), so downstream code may
    /// divide by U or log U without guards.
    double next_uniform() noexcept;

    /// Rate-one exponential via inverse CDF, -log(U). Strictly positive;
    /// consumes exactly one uniform.
    double next_exponential() noexcept;

    /// Poisson(mean) count. Sequential-search inversion for mean <= 30,
    /// transformed rejection (PTRS) above. Throws std::domain_error for
    /// negative or non-finite mean.
    std::uint64_t next_poisson_count(double mean);

    /// Unbiased draw from {0, ..., bound-1}. bound must be positive.
    std::uint64_t next_below(std::uint64_t bound);

    /// Fisher-Yates shuffle: each of the n! orders is equiprobable.
    template <typename Seq>
    void shuffle_in_place(Seq& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(next_below(i));
            using std::swap;
            swap(items[i - 1], items[j]);
        }
    }

    std::uint64_t master_seed() const noexcept { return master_seed_; }
    const StreamId& id() const noexcept { return id_; }
    std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t poisson_small(double mean) noexcept;
    std::uint64_t poisson_ptrs(double mean) noexcept;

    std::uint64_t master_seed_ = 0;
    StreamId id_;
    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

}  // namespace rectiles
