#include "rectiles/tile_matrix.hpp"

#include <stdexcept>

namespace rectiles {

TileMatrix::TileMatrix(std::vector<double> heights, std::vector<double> widths)
    : heights_(std::move(heights)), widths_(std::move(widths)) {
    if (heights_.empty() || heights_.size() != widths_.size()) {
        throw std::invalid_argument("TileMatrix: heights and widths must be nonempty and equal-sized");
    }
    for (const double h : heights_) {
        if (!(h > 0.0)) throw std::invalid_argument("TileMatrix: heights must be positive");
    }
    for (const double w : widths_) {
        if (!(w > 0.0)) throw std::invalid_argument("TileMatrix: widths must be positive");
    }
    const std::size_t n = heights_.size();
    entries_.resize(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            entries_[i * n + j] = heights_[i] * widths_[j];
        }
    }
}

double TileMatrix::entry_sum() const noexcept {
    double s = 0.0;
    for (const double e : entries_) s += e;
    return s;
}

double TileMatrix::spanned_area() const noexcept {
    double hs = 0.0;
    double ws = 0.0;
    for (const double h : heights_) hs += h;
    for (const double w : widths_) ws += w;
    return hs * ws;
}

TileMatrix antidiagonal_reflect(const TileMatrix& m) {
    std::vector<double> h(m.widths().rbegin(), m.widths().rend());
    std::vector<double> w(m.heights().rbegin(), m.heights().rend());
    return TileMatrix(std::move(h), std::move(w));
}

TileMatrix transpose(const TileMatrix& m) {
    return TileMatrix(std::vector<double>(m.widths().begin(), m.widths().end()),
                      std::vector<double>(m.heights().begin(), m.heights().end()));
}

}  // namespace rectiles
