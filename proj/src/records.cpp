#include "rectiles/records.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace rectiles {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool by_time(const Point& a, const Point& b) noexcept { return a.t < b.t; }

/**
 * Poisson sweep over the strip (t_lo, t_hi) x (x_lo, x_hi): arrivals in t at
 * rate (x_hi - x_lo), values uniform. Appends the strip's own south-west
 * minima to out in ascending t. Returns false on a floating coordinate tie
 * (degenerate spacing or a value landing on a strip edge); the caller then
 * resamples the whole realization.
 */
bool sweep_strip_minima(RandomStream& stream, double t_lo, double t_hi, double x_lo,
                        double x_hi, std::vector<Point>& out) {
    const double rate = x_hi - x_lo;
    if (!(rate > 0.0) || !(t_hi > t_lo)) return true;
    double t = t_lo;
    double run_min = kInf;
    for (;;) {
        const double spacing = stream.next_exponential() / rate;
        const double t_next = t + spacing;
        if (t_next >= t_hi) return true;
        if (t_next == t) return false;
        t = t_next;
        const double x = x_lo + rate * stream.next_uniform();
        if (x <= x_lo || x >= x_hi || x == run_min) return false;
        if (x < run_min) {
            out.push_back(Point{t, x});
            run_min = x;
        }
    }
}

/// Global minima of a t-sorted candidate list. Returns false on ties that
/// would make record status ambiguous.
bool sweep_minima(const std::vector<Point>& sorted, std::vector<Point>& out) {
    out.clear();
    double run_min = kInf;
    double prev_t = -kInf;
    for (const Point& p : sorted) {
        if (p.t == prev_t || p.x == run_min) return false;
        prev_t = p.t;
        if (p.x < run_min) {
            out.push_back(p);
            run_min = p.x;
        }
    }
    return true;
}

std::optional<RecordChain> try_simulate(RandomStream& stream, int k_min, int k_max,
                                        const ChainOptions& options) {
    double window = options.initial_window;
    std::vector<Point> recs;
    if (!sweep_strip_minima(stream, 0.0, window, 0.0, window, recs)) return std::nullopt;

    int expansions = 0;
    for (;;) {
        // Locate the bisectrix split: r_1 is the first record with t > x.
        std::size_t split = 0;
        bool tie_on_bisectrix = false;
        for (const Point& p : recs) {
            if (p.x == p.t) tie_on_bisectrix = true;
            if (p.x > p.t) ++split;
        }
        if (tie_on_bisectrix) return std::nullopt;

        if (split > 0 && split < recs.size()) {
            const int lmin = 1 - static_cast<int>(split);
            const int lmax = static_cast<int>(recs.size()) - static_cast<int>(split);
            if (lmin <= k_min && k_max <= lmax) {
                RecordChain chain;
                chain.records = std::move(recs);
                chain.split_index = split;
                chain.final_window = window;
                chain.expansions = expansions;
                return chain;
            }
        }

        if (expansions >= options.max_doublings) {
            throw WindowCapError(window, expansions);
        }

        // Undominated part of the shell [0,2T]^2 \ [0,T]^2: a north strip
        // left of the first record and an east strip below the last record
        // value. Everything else in the shell is dominated by a current
        // record and can never become one.
        const double t_first = recs.empty() ? 2.0 * window : recs.front().t;
        const double x_last = recs.empty() ? window : recs.back().x;

        std::vector<Point> merged;
        if (!sweep_strip_minima(stream, 0.0, t_first, window, 2.0 * window, merged)) {
            return std::nullopt;
        }
        merged.insert(merged.end(), recs.begin(), recs.end());
        if (!sweep_strip_minima(stream, window, 2.0 * window, 0.0, x_last, merged)) {
            return std::nullopt;
        }
        std::sort(merged.begin(), merged.end(), by_time);
        if (!sweep_minima(merged, recs)) return std::nullopt;

        window *= 2.0;
        ++expansions;
    }
}

bool touches_boundary(const Rect& rect, const std::vector<Point>& recs) noexcept {
    for (const Point& p : recs) {
        if (p.t == rect.t_lo || p.t == rect.t_hi || p.x == rect.x_lo || p.x == rect.x_hi) {
            return true;
        }
    }
    return false;
}

}  // namespace

std::vector<Point> extract_records(const PointSet& points) {
    std::vector<Point> sorted = points.points;
    std::sort(sorted.begin(), sorted.end(), by_time);
    std::vector<Point> out;
    double run_min = kInf;
    for (const Point& p : sorted) {
        if (p.x < run_min) {
            out.push_back(p);
            run_min = p.x;
        }
    }
    return out;
}

RecordChain simulate_quadrant_chain(RandomStream& stream, int k_min, int k_max,
                                    const ChainOptions& options) {
    if (k_min > 0 || k_max < 1) {
        throw std::invalid_argument("simulate_quadrant_chain: need k_min <= 0 < 1 <= k_max");
    }
    if (!(options.initial_window > 0.0) || options.max_doublings < 0) {
        throw std::invalid_argument("simulate_quadrant_chain: invalid window options");
    }
    for (;;) {
        auto chain = try_simulate(stream, k_min, k_max, options);
        if (chain) return std::move(*chain);
        // Floating coordinate tie; resample the whole realization.
    }
}

TileMatrix tile_matrix_from_chain(const RecordChain& chain, int k, std::size_t n) {
    if (n == 0) throw std::invalid_argument("tile_matrix_from_chain: n must be positive");
    if (k < chain.label_min() || k + static_cast<int>(n) > chain.label_max()) {
        throw std::out_of_range("tile_matrix_from_chain: records r_k..r_{k+n} not in chain");
    }
    std::vector<double> heights(n);
    std::vector<double> widths(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Point& a = chain.record(k + static_cast<int>(i));
        const Point& b = chain.record(k + static_cast<int>(i) + 1);
        heights[i] = a.x - b.x;
        widths[i] = b.t - a.t;
    }
    return TileMatrix(std::move(heights), std::move(widths));
}

TileMatrix box_tile_matrix(const Rect& rect, const std::vector<Point>& records) {
    std::vector<double> heights;
    std::vector<double> widths;
    heights.reserve(records.size() + 1);
    widths.reserve(records.size() + 1);
    double prev = rect.x_hi;
    for (const Point& r : records) {
        heights.push_back(prev - r.x);
        prev = r.x;
    }
    heights.push_back(prev - rect.x_lo);
    prev = rect.t_lo;
    for (const Point& r : records) {
        widths.push_back(r.t - prev);
        prev = r.t;
    }
    widths.push_back(rect.t_hi - prev);
    return TileMatrix(std::move(heights), std::move(widths));
}

BoxRecordResult box_records(RandomStream& stream, const Rect& rect) {
    for (;;) {
        const PointSet pts = sample_ppp(stream, rect);
        std::vector<Point> recs = extract_records(pts);
        if (touches_boundary(rect, recs)) continue;
        TileMatrix tiles = box_tile_matrix(rect, recs);
        return BoxRecordResult{std::move(recs), std::move(tiles)};
    }
}

}  // namespace rectiles
