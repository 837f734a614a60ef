#pragma once

#include <vector>

#include "rectiles/rng.hpp"

namespace rectiles {

/// A (time, value) pair in the open positive quadrant.
struct Point {
    double t = 0.0;
    double x = 0.0;
};

/// Axis-parallel open rectangle 0 <= t_lo < t_hi, 0 <= x_lo < x_hi.
struct Rect {
    double t_lo = 0.0;
    double t_hi = 0.0;
    double x_lo = 0.0;
    double x_hi = 0.0;

    double width() const noexcept { return t_hi - t_lo; }
    double height() const noexcept { return x_hi - x_lo; }
    double area() const noexcept { return width() * height(); }
    bool valid() const noexcept;
};

/// Finite realization of a point process. After sampling, all t coordinates
/// are pairwise distinct and all x coordinates are pairwise distinct.
struct PointSet {
    std::vector<Point> points;
};

/// Unit-intensity Poisson sample on rect: count ~ Poisson(area), points
/// i.i.d. uniform given the count. A floating coordinate collision triggers
/// a full resample of the set. Throws std::domain_error for invalid rects.
PointSet sample_ppp(RandomStream& stream, const Rect& rect);

/// (t, x) -> (lambda * t, x / lambda). Preserves areas and both
/// coordinate-wise orders. lambda must be positive.
Point hyperbolic_shift(Point p, double lambda);

/// (t, x) -> (x, t); an involution fixing the bisectrix t = x.
inline Point reflect_bisectrix(Point p) noexcept { return Point{p.x, p.t}; }

/// True iff a lies strictly south-west of b.
inline bool dominates_sw(Point a, Point b) noexcept { return a.t < b.t && a.x < b.x; }

}  // namespace rectiles
