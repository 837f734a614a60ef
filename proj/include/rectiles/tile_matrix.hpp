#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rectiles {

/**
 * Rank-one matrix of rectangle areas: entry (i, j) is stored as the exact
 * double product heights[i] * widths[j]. Rows run north to south (descending
 * value coordinate), columns west to east (ascending time).
 */
class TileMatrix {
public:
    TileMatrix(std::vector<double> heights, std::vector<double> widths);

    std::size_t size() const noexcept { return heights_.size(); }

    /// 0-based access.
    double entry(std::size_t i, std::size_t j) const { return entries_[i * size() + j]; }

    std::span<const double> heights() const noexcept { return heights_; }
    std::span<const double> widths() const noexcept { return widths_; }

    /// Row-major entries.
    const std::vector<double>& entries() const noexcept { return entries_; }

    /// Sum of all entries.
    double entry_sum() const noexcept;

    /// (sum of heights) * (sum of widths); the area of the spanned rectangle.
    double spanned_area() const noexcept;

private:
    std::vector<double> heights_;
    std::vector<double> widths_;
    std::vector<double> entries_;
};

/// Exchange entry (i, j) with entry (n-j+1, n-i+1). Heights and widths swap
/// roles and reverse; entries are a bitwise permutation of the input.
TileMatrix antidiagonal_reflect(const TileMatrix& m);

/// Plain transpose (used as a negative control; not a law symmetry).
TileMatrix transpose(const TileMatrix& m);

}  // namespace rectiles
