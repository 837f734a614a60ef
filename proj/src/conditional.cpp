#include "rectiles/conditional.hpp"

#include <algorithm>
#include <cmath>

namespace rectiles {

BoxRecordResult box_records_given_count(RandomStream& stream, const Rect& rect,
                                        std::size_t n_records, std::uint64_t max_attempts) {
    for (std::uint64_t attempt = 0; attempt < max_attempts; ++attempt) {
        BoxRecordResult result = box_records(stream, rect);
        if (result.records.size() == n_records) return result;
    }
    throw AcceptanceRateError(max_attempts);
}

std::vector<double> encode_count_sorted_areas(const TileMatrix& tiles, std::size_t record_count,
                                              std::size_t area_slots) {
    std::vector<double> areas = tiles.entries();
    std::sort(areas.begin(), areas.end(), std::greater<>());
    std::vector<double> row;
    row.reserve(1 + area_slots);
    row.push_back(static_cast<double>(record_count));
    for (std::size_t i = 0; i < area_slots; ++i) {
        row.push_back(i < areas.size() ? areas[i] : 0.0);
    }
    return row;
}

std::vector<double> encode_count_row_major(const TileMatrix& tiles, std::size_t record_count,
                                           std::size_t max_records) {
    const std::size_t slots = (max_records + 1) * (max_records + 1);
    const auto& entries = tiles.entries();
    std::vector<double> row;
    row.reserve(1 + slots);
    row.push_back(static_cast<double>(record_count));
    for (std::size_t i = 0; i < slots; ++i) {
        row.push_back(i < entries.size() ? entries[i] : 0.0);
    }
    return row;
}

TestReport check_area_only_dependence(RandomStream& stream, const Rect& rect_a,
                                      const Rect& rect_b, std::size_t rows, int n_permutations,
                                      double alpha, bool enforce_equal_area,
                                      std::size_t max_records) {
    if (!rect_a.valid() || !rect_b.valid()) {
        throw std::domain_error("check_area_only_dependence: invalid rectangle");
    }
    if (enforce_equal_area) {
        const double scale = std::max(rect_a.area(), rect_b.area());
        if (std::fabs(rect_a.area() - rect_b.area()) > 1e-12 * scale) {
            throw std::domain_error("check_area_only_dependence: rectangle areas differ");
        }
    }
    const std::size_t area_slots = (max_records + 1) * (max_records + 1);
    const std::size_t dim = 1 + area_slots;
    auto draw_batch = [&](const Rect& rect) {
        std::vector<double> data;
        data.reserve(rows * dim);
        for (std::size_t i = 0; i < rows; ++i) {
            for (;;) {
                const BoxRecordResult result = box_records(stream, rect);
                if (result.records.size() > max_records) continue;  // symmetric truncation
                const auto row =
                    encode_count_sorted_areas(result.tiles, result.records.size(), area_slots);
                data.insert(data.end(), row.begin(), row.end());
                break;
            }
        }
        tame_in_place(data);
        return data;
    };
    const std::vector<double> batch_a = draw_batch(rect_a);
    const std::vector<double> batch_b = draw_batch(rect_b);
    TestReport report = permutation_test(view_of(batch_a, dim), view_of(batch_b, dim),
                                         Statistic::energy, n_permutations, alpha, stream);
    report.check = "area_only_dependence";
    report.transform = "tame";
    return report;
}

std::vector<double> draw_m1n_area_binned(RandomStream& stream, std::size_t n,
                                         ConditioningWindow& window,
                                         std::uint64_t max_attempts) {
    for (std::uint64_t attempt = 0; attempt < max_attempts; ++attempt) {
        ++window.attempted;
        const VarPack vars = draw_vars(stream, n, n);
        const double total = totalarea_from_vars(vars.us, vars.es);
        if (std::fabs(total - window.target_area) <= window.half_width) {
            ++window.accepted;
            return m1n_from_vars(vars.us, vars.es).entries();
        }
    }
    throw AcceptanceRateError(max_attempts);
}

AreaBinnedCheckResult check_lemma3(RandomStream& stream, std::size_t n, double v, double h,
                                   std::size_t rows, int n_permutations, double alpha,
                                   std::uint64_t max_attempts) {
    if (n == 0) throw std::invalid_argument("check_lemma3: n must be positive");
    if (!(v > 0.0) || !(h > 0.0) || !(h < v)) {
        throw std::invalid_argument("check_lemma3: need v > 0 and 0 < h < v");
    }
    AreaBinnedCheckResult out;
    out.closed_side.target_area = v;
    out.closed_side.half_width = h;

    const std::size_t dim = n * n;
    std::vector<double> batch_a;
    batch_a.reserve(rows * dim);
    for (std::size_t i = 0; i < rows; ++i) {
        const auto row = draw_m1n_area_binned(stream, n, out.closed_side, max_attempts);
        batch_a.insert(batch_a.end(), row.begin(), row.end());
    }

    const double side = std::sqrt(v);
    const Rect box{0.0, side, 0.0, side};
    std::vector<double> batch_b;
    batch_b.reserve(rows * dim);
    for (std::size_t i = 0; i < rows; ++i) {
        const BoxRecordResult result = box_records_given_count(stream, box, n - 1, max_attempts);
        const auto& entries = result.tiles.entries();
        batch_b.insert(batch_b.end(), entries.begin(), entries.end());
    }

    tame_in_place(batch_a);
    tame_in_place(batch_b);
    out.report = permutation_test(view_of(batch_a, dim), view_of(batch_b, dim), Statistic::energy,
                                  n_permutations, alpha, stream);
    out.report.check = "lemma3";
    out.report.n = static_cast<int>(n);
    out.report.transform = "tame";
    return out;
}

}  // namespace rectiles
