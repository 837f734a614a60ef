#pragma once

#include <cstdint>
#include <stdexcept>

#include "rectiles/records.hpp"
#include "rectiles/samplers.hpp"
#include "rectiles/stattest.hpp"

namespace rectiles {

/// Bookkeeping for rejection-sampled conditioning.
struct ConditioningWindow {
    double target_area = 0.0;
    double half_width = 0.0;
    std::uint64_t accepted = 0;
    std::uint64_t attempted = 0;

    double acceptance_rate() const noexcept {
        return attempted == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(attempted);
    }
};

/// Rejection sampling exhausted its attempt budget. The fix is a larger
/// half-width or a smaller accepted-sample request.
class AcceptanceRateError : public std::runtime_error {
public:
    explicit AcceptanceRateError(std::uint64_t attempts)
        : std::runtime_error(
              "conditioning: attempt budget exhausted; increase the bin half-width or lower N"),
          attempts_(attempts) {}

    std::uint64_t attempts() const noexcept { return attempts_; }

private:
    std::uint64_t attempts_;
};

/// Resamples box_records until the realization has exactly n_records
/// A-records. Throws AcceptanceRateError past max_attempts.
BoxRecordResult box_records_given_count(RandomStream& stream, const Rect& rect,
                                        std::size_t n_records,
                                        std::uint64_t max_attempts = 10'000'000);

/// Fixed-dimension encoding of a variable-size tile matrix:
/// (record count, tile areas sorted descending, zero-padded to area_slots).
/// Entries are raw; apply tame before an energy test. Sorting is monotone
/// under tame, so the encodings commute.
std::vector<double> encode_count_sorted_areas(const TileMatrix& tiles, std::size_t record_count,
                                              std::size_t area_slots);

/// (record count, row-major entries zero-padded to (max_records+1)^2).
/// Keeps the matrix arrangement, so antidiagonal symmetry is not erased the
/// way a sorted encoding would.
std::vector<double> encode_count_row_major(const TileMatrix& tiles, std::size_t record_count,
                                           std::size_t max_records);

/// Two-sample check that the tile-area law depends on the rectangle only
/// through its area: compares (count, sorted areas) summaries between the
/// two rectangles. Throws std::domain_error when areas differ (unless
/// enforce_equal_area is false, for deliberate-violation controls).
TestReport check_area_only_dependence(RandomStream& stream, const Rect& rect_a,
                                      const Rect& rect_b, std::size_t rows, int n_permutations,
                                      double alpha, bool enforce_equal_area = true,
                                      std::size_t max_records = 8);

/// One accepted closed-form draw: flatten of M_{1,n} conditioned on total
/// area in [v-h, v+h]. Attempt accounting lands in window.
std::vector<double> draw_m1n_area_binned(RandomStream& stream, std::size_t n,
                                         ConditioningWindow& window,
                                         std::uint64_t max_attempts = 10'000'000);

struct AreaBinnedCheckResult {
    TestReport report;
    ConditioningWindow closed_side;
    std::uint64_t box_attempts = 0;
};

/**
 * Conditional matrix-law check: flatten of M_{1,n} given total area in
 * [v-h, v+h] (closed form, area-binned) against the n x n box tile matrix
 * of an area-v rectangle given n-1 records. Energy permutation test on
 * tame'd vectors. The binning bias is O(h).
 */
AreaBinnedCheckResult check_lemma3(RandomStream& stream, std::size_t n, double v, double h,
                                   std::size_t rows, int n_permutations, double alpha,
                                   std::uint64_t max_attempts = 10'000'000);

}  // namespace rectiles
