#include "rectiles/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace rectiles {

bool Rect::valid() const noexcept {
    return std::isfinite(t_lo) && std::isfinite(t_hi) && std::isfinite(x_lo) &&
           std::isfinite(x_hi) && t_lo >= 0.0 && x_lo >= 0.0 && t_lo < t_hi && x_lo < x_hi;
}

namespace {

bool has_coordinate_collision(const std::vector<Point>& pts) {
    std::vector<double> coord(pts.size());
    for (std::size_t pass = 0; pass < 2; ++pass) {
        for (std::size_t i = 0; i < pts.size(); ++i) {
            coord[i] = pass == 0 ? pts[i].t : pts[i].x;
        }
        std::sort(coord.begin(), coord.end());
        if (std::adjacent_find(coord.begin(), coord.end()) != coord.end()) return true;
    }
    return false;
}

}  // namespace

PointSet sample_ppp(RandomStream& stream, const Rect& rect) {
    if (!rect.valid()) throw std::domain_error("sample_ppp: invalid rectangle");
    PointSet out;
    for (;;) {
        const std::uint64_t n = stream.next_poisson_count(rect.area());
        out.points.clear();
        out.points.reserve(n);
        for (std::uint64_t i = 0; i < n; ++i) {
            const double t = rect.t_lo + rect.width() * stream.next_uniform();
            const double x = rect.x_lo + rect.height() * stream.next_uniform();
            out.points.push_back(Point{t, x});
        }
        if (!has_coordinate_collision(out.points)) return out;
        // Ties occur only through floating collision; resample the whole set.
    }
}

Point hyperbolic_shift(Point p, double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw std::domain_error("hyperbolic_shift: lambda must be positive and finite");
    }
    return Point{lambda * p.t, p.x / lambda};
}

}  // namespace rectiles
