#include "rectiles/rng.hpp"

#include <cmath>

namespace rectiles {

namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::uint64_t fnv1a64(std::string_view s) noexcept {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (const unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

std::uint64_t derive_key(std::uint64_t master_seed, const StreamId& id) noexcept {
    std::uint64_t k = mix64(master_seed + kGamma);
    k = mix64(k ^ fnv1a64(id.label));
    k = mix64(k ^ (id.index * kGamma + 0x2545F4914F6CDD1Dull));
    return k;
}

// ln(k!) for k = 0..9; Stirling series above.
constexpr double kLogFactorial[10] = {
    0.0,
    0.0,
    0.6931471805599453,
    1.791759469228055,
    3.1780538303479458,
    4.787491742782046,
    6.579251212010101,
    8.525161361065415,
    10.604602902745251,
    12.801827480081469,
};

double log_factorial(double k) noexcept {
    if (k < 10.0) return kLogFactorial[static_cast<int>(k)];
    const double inv = 1.0 / k;
    const double inv2 = inv * inv;
    // (k + 1/2) ln k - k + ln sqrt(2 pi) + 1/(12k) - 1/(360k^3) + 1/(1260k^5)
    return (k + 0.5) * std::log(k) - k + 0.91893853320467274178 +
           inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0));
}

}  // namespace

RandomStream::RandomStream(std::uint64_t master_seed, StreamId id)
    : master_seed_(master_seed), id_(std::move(id)), key_(derive_key(master_seed, id_)) {}

RandomStream::RandomStream(std::uint64_t master_seed, std::string_view label, std::uint64_t index)
    : RandomStream(master_seed, StreamId{std::string(label), index}) {}

std::uint64_t RandomStream::next_u64() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * kGamma);
}

double RandomStream::next_uniform() noexcept {
    // Midpoints of the 2^53 dyadic grid: values lie in (0,1) strictly.
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::next_exponential() noexcept {
    return -std::log(next_uniform());
}

std::uint64_t RandomStream::next_poisson_count(double mean) {
    if (!(mean >= 0.0) || !std::isfinite(mean)) {
        throw std::domain_error("next_poisson_count: mean must be finite and nonnegative");
    }
    if (mean == 0.0) return 0;
    if (mean <= 30.0) return poisson_small(mean);
    return poisson_ptrs(mean);
}

std::uint64_t RandomStream::poisson_small(double mean) noexcept {
    // Inversion by sequential search; consumes exactly one uniform.
    const double u = next_uniform();
    double p = std::exp(-mean);
    double cum = p;
    std::uint64_t k = 0;
    const std::uint64_t cap = static_cast<std::uint64_t>(mean + 40.0 * std::sqrt(mean) + 128.0);
    while (u > cum && k < cap) {
        ++k;
        p *= mean / static_cast<double>(k);
        cum += p;
    }
    return k;
}

std::uint64_t RandomStream::poisson_ptrs(double mean) noexcept {
    // Hoermann's transformed rejection with squeeze (PTRS). Valid for
    // mean >= 10; used here for mean > 30.
    const double slam = std::sqrt(mean);
    const double loglam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);

    for (;;) {
        const double u = next_uniform() - 0.5;
        const double v = next_uniform();
        const double us = 0.5 - std::fabs(u);
        const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= v_r) {
            return static_cast<std::uint64_t>(kf);
        }
        if (kf < 0.0 || (us < 0.013 && v > us)) {
            continue;
        }
        const double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
        const double rhs = kf * loglam - mean - log_factorial(kf);
        if (lhs <= rhs) {
            return static_cast<std::uint64_t>(kf);
        }
    }
}

std::uint64_t RandomStream::next_below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("next_below: bound must be positive");
    const std::uint64_t threshold = (0 - bound) % bound;  // 2^64 mod bound
    for (;;) {
        const std::uint64_t r = next_u64();
        if (r >= threshold) return r % bound;
    }
}

}  // namespace rectiles
