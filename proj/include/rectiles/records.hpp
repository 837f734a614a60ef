#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "rectiles/geometry.hpp"
#include "rectiles/rng.hpp"
#include "rectiles/tile_matrix.hpp"

namespace rectiles {

/// Points of the set that no other point strictly south-west dominates,
/// sorted by increasing t (hence strictly decreasing x). O(m log m).
std::vector<Point> extract_records(const PointSet& points);

/**
 * A consecutive stretch of the two-sided record chain of the quadrant
 * process. Records are sorted by increasing t; labels are integers with
 * records[split_index] = r_1, the first record below the bisectrix t = x,
 * and records[split_index - 1] = r_0 just above it.
 */
struct RecordChain {
    std::vector<Point> records;
    std::size_t split_index = 0;

    // Window diagnostics for the lazy expansion.
    double final_window = 0.0;
    int expansions = 0;

    int label_min() const noexcept { return 1 - static_cast<int>(split_index); }
    int label_max() const noexcept {
        return static_cast<int>(records.size()) - static_cast<int>(split_index);
    }

    const Point& record(int label) const {
        if (label < label_min() || label > label_max()) {
            throw std::out_of_range("RecordChain::record: label outside simulated range");
        }
        return records[static_cast<std::size_t>(static_cast<int>(split_index) + label - 1)];
    }
};

struct ChainOptions {
    double initial_window = 16.0;  // side of the starting box [0, T0]^2
    int max_doublings = 48;        // hard cap; exceeding it throws WindowCapError
};

/// The requested record labels could not be produced within the configured
/// window cap. Never silently truncates.
class WindowCapError : public std::runtime_error {
public:
    WindowCapError(double window, int expansions)
        : std::runtime_error("simulate_quadrant_chain: window cap reached"),
          window_(window),
          expansions_(expansions) {}

    double window() const noexcept { return window_; }
    int expansions() const noexcept { return expansions_; }

private:
    double window_;
    int expansions_;
};

/**
 * Exact simulation of records r_{k_min}, ..., r_{k_max} (k_min <= 0 < 1 <=
 * k_max) of the unit-intensity quadrant process.
 *
 * The box [0,T]^2 is self-contained for record extraction: the south-west
 * shadow of any in-box point lies inside the box, so in-box record statuses
 * are final. If the chain stretch is still too short, the realization is
 * extended to [0,2T]^2 by sampling the fresh shell. A shell point has t > T
 * or x > T, hence never dominates an in-box point, and a shell point
 * dominated by an existing record can never become a record nor unseat one;
 * it therefore suffices to sample the undominated part of the shell, which
 * is exactly two rectangles hugging the current staircase. The union is an
 * exact Poisson realization on the larger box: no conditioning, no bias.
 */
RecordChain simulate_quadrant_chain(RandomStream& stream, int k_min, int k_max,
                                    const ChainOptions& options = {});

/**
 * The n x n matrix of tile areas associated with records r_k, ..., r_{k+n}:
 * heights[i] = x_{k+i-1} - x_{k+i}, widths[j] = t_{k+j} - t_{k+j-1}
 * (1-based i, j). Throws std::out_of_range if the chain lacks the records.
 */
TileMatrix tile_matrix_from_chain(const RecordChain& chain, int k, std::size_t n);

/// Records of a Poisson sample inside rect together with the tile areas of
/// the induced partition of rect ((#records + 1) rows and columns; grid
/// lines at record times/values plus the rect boundary).
struct BoxRecordResult {
    std::vector<Point> records;
    TileMatrix tiles;
};

BoxRecordResult box_records(RandomStream& stream, const Rect& rect);

/// Tile matrix of rect partitioned by the given records (all strictly inside
/// rect, coordinate-distinct). Exposed for conditioned resampling paths.
TileMatrix box_tile_matrix(const Rect& rect, const std::vector<Point>& records);

}  // namespace rectiles
