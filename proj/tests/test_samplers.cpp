#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "rectiles/samplers.hpp"

using namespace rectiles;

namespace {

double rel_diff(double a, double b) {
    const double scale = std::max({std::fabs(a), std::fabs(b), 1e-300});
    return std::fabs(a - b) / scale;
}

}  // namespace

TEST_CASE("closed-form matrix at fixed variables") {
    const double us[] = {0.5, 0.5};
    const double es[] = {1.0, 1.0};
    const TileMatrix m = m1n_from_vars(us, es);
    CHECK(m.entry(0, 0) == 0.5);
    CHECK(m.entry(0, 1) == 1.0);
    CHECK(m.entry(1, 0) == 0.25);
    CHECK(m.entry(1, 1) == 0.5);

    const double u1[] = {0.5};
    const double e1[] = {1.0};
    const TileMatrix one = m1n_from_vars(u1, e1);
    CHECK(one.size() == 1);
    CHECK(one.entry(0, 0) == 0.5);
}

TEST_CASE("diagonal and subdiagonal means") {
    const double diag_target = oracles::mean_diagonal_tile();
    const double sub_target = oracles::mean_subdiagonal_tile();
    CHECK(diag_target == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(sub_target == doctest::Approx(0.25).epsilon(1e-9));

    RandomStream s(41, "diagmeans", 0);
    const int n = 200000;
    double c11 = 0, c22 = 0, c21 = 0;
    for (int i = 0; i < n; ++i) {
        const TileMatrix m = sample_m1n_closed(s, 2);
        c11 += m.entry(0, 0);
        c22 += m.entry(1, 1);
        c21 += m.entry(1, 0);
    }
    // sd((1-U)E) = sqrt(5/12), sd(U(1-U')E) = sqrt(23/144)
    CHECK(std::fabs(c11 / n - 0.5) < 4.0 * std::sqrt(5.0 / 12.0 / n));
    CHECK(std::fabs(c22 / n - 0.5) < 4.0 * std::sqrt(5.0 / 12.0 / n));
    CHECK(std::fabs(c21 / n - 0.25) < 4.0 * std::sqrt(23.0 / 144.0 / n));
}

TEST_CASE("eq1 sides at fixed variables") {
    {
        const double us[] = {0.5, 0.5};
        const double es[] = {1.0};
        CHECK(eq1_lhs_from_vars(us, es) == 1.5);  // (1/0.5)(1 - 0.25)
    }
    {
        const double us[] = {0.5};
        const double es[] = {1.0, 1.0};
        CHECK(eq1_rhs_from_vars(us, es) == 1.5);  // (1 + 2)(1 - 0.5)
    }
    RandomStream s(42, "eq1pos", 0);
    for (std::size_t n = 1; n <= 4; ++n) {
        for (int i = 0; i < 5000; ++i) {
            CHECK(sample_eq1(s, n, Side::lhs) > 0.0);
            CHECK(sample_eq1(s, n, Side::rhs) > 0.0);
        }
    }
    CHECK_THROWS_AS((void)sample_eq1(s, 0, Side::lhs), std::invalid_argument);
}

TEST_CASE("eq3 displays at fixed variables") {
    {
        const double us[] = {0.5, 0.5};
        const double es[] = {1.0, 1.0};
        const auto lhs = eq3_from_vars(us, es, Side::lhs);
        const auto rhs = eq3_from_vars(us, es, Side::rhs);
        const std::array<double, 4> want{0.5, 1.0, 0.25, 0.5};
        for (int i = 0; i < 4; ++i) {
            CHECK(lhs[i] == want[i]);
            CHECK(rhs[i] == want[i]);  // coincides at this symmetric input
        }
    }
    {
        const double us[] = {0.5, 0.25};
        const double es[] = {1.0, 2.0};
        const auto lhs = eq3_from_vars(us, es, Side::lhs);
        const auto rhs = eq3_from_vars(us, es, Side::rhs);
        const std::array<double, 4> want_lhs{0.5, 2.0, 0.375, 1.5};
        const std::array<double, 4> want_rhs{1.5, 2.0, 0.375, 0.5};
        for (int i = 0; i < 4; ++i) {
            CHECK(lhs[i] == want_lhs[i]);
            CHECK(rhs[i] == want_rhs[i]);
        }
    }
}

TEST_CASE("eq3 is the order-2 matrix identity pathwise") {
    RandomStream s(43, "eq3path", 0);
    for (int i = 0; i < 2000; ++i) {
        const VarPack v = draw_vars(s, 2, 2);
        const TileMatrix m = m1n_from_vars(v.us, v.es);
        const auto lhs = eq3_from_vars(v.us, v.es, Side::lhs);
        const auto rhs = eq3_from_vars(v.us, v.es, Side::rhs);
        const TileMatrix r = antidiagonal_reflect(m);
        for (int k = 0; k < 4; ++k) {
            CHECK(rel_diff(lhs[k], m.entries()[k]) < 1e-14);
            CHECK(rel_diff(rhs[k], r.entries()[k]) < 1e-14);
        }
    }
}

TEST_CASE("reflected draws stay rank one") {
    RandomStream s(44, "prop1rank", 0);
    for (int i = 0; i < 1000; ++i) {
        const auto row = sample_prop1(s, 3, Side::rhs);
        // reconstruct 3x3 and check all 2x2 minors at the relative scale
        for (int a = 0; a < 3; ++a) {
            for (int b = a + 1; b < 3; ++b) {
                for (int c = 0; c < 3; ++c) {
                    for (int d = c + 1; d < 3; ++d) {
                        const double p1 = row[a * 3 + c] * row[b * 3 + d];
                        const double p2 = row[a * 3 + d] * row[b * 3 + c];
                        CHECK(std::fabs(p1 - p2) <= 1e-10 * std::max({1.0, p1, p2}));
                    }
                }
            }
        }
    }
}

TEST_CASE("row product identity") {
    {
        const double us[] = {0.5, 0.5};
        const double es[] = {1.0, 1.0};
        CHECK(rowprod_from_vars(us, es, Side::lhs) == 0.5);
        CHECK(rowprod_from_vars(us, es, Side::rhs) == 0.5);
    }
    RandomStream s(45, "rowprod", 0);
    SUBCASE("n = 1 sides coincide pathwise") {
        for (int i = 0; i < 1000; ++i) {
            const VarPack v = draw_vars(s, 1, 1);
            CHECK(rowprod_from_vars(v.us, v.es, Side::lhs) ==
                  rowprod_from_vars(v.us, v.es, Side::rhs));
        }
    }
    SUBCASE("lhs equals the product of the first row of the matrix") {
        for (std::size_t n = 2; n <= 5; ++n) {
            for (int i = 0; i < 1000; ++i) {
                const VarPack v = draw_vars(s, n, n);
                const TileMatrix m = m1n_from_vars(v.us, v.es);
                double prod = 1.0;
                for (std::size_t j = 0; j < n; ++j) prod *= m.entry(0, j);
                CHECK(rel_diff(prod, rowprod_from_vars(v.us, v.es, Side::lhs)) < 1e-12);
            }
        }
    }
    SUBCASE("rhs equals the product of the last column of the matrix") {
        for (std::size_t n = 2; n <= 5; ++n) {
            for (int i = 0; i < 1000; ++i) {
                const VarPack v = draw_vars(s, n, n);
                const TileMatrix m = m1n_from_vars(v.us, v.es);
                double prod = 1.0;
                for (std::size_t i2 = 0; i2 < n; ++i2) prod *= m.entry(i2, n - 1);
                CHECK(rel_diff(prod, rowprod_from_vars(v.us, v.es, Side::rhs)) < 1e-12);
            }
        }
    }
}

TEST_CASE("total area closed form") {
    {
        const double us[] = {0.5};
        const double es[] = {1.0};
        CHECK(totalarea_from_vars(us, es) == 0.5);
    }
    RandomStream s(46, "total", 0);
    for (std::size_t n = 1; n <= 8; ++n) {
        for (int i = 0; i < 2000; ++i) {
            const VarPack v = draw_vars(s, n, n);
            const TileMatrix m = m1n_from_vars(v.us, v.es);
            CHECK(rel_diff(m.entry_sum(), totalarea_from_vars(v.us, v.es)) < 1e-12);
        }
    }
}

TEST_CASE("row summation reduces the matrix to the eq1 sides") {
    RandomStream s(47, "rowsum", 0);
    for (std::size_t n = 1; n <= 7; ++n) {
        for (int i = 0; i < 2000; ++i) {
            const VarPack v = draw_vars(s, n + 1, n + 1);
            const TileMatrix m = m1n_from_vars(v.us, v.es);

            // all rows but the last: equals the rhs expression on matched variables
            double partial = 0.0;
            for (std::size_t r = 0; r + 1 < n + 1; ++r) {
                for (std::size_t c = 0; c < n + 1; ++c) partial += m.entry(r, c);
            }
            const double rhs = eq1_rhs_from_vars(std::span(v.us).subspan(0, n), v.es);
            CHECK(rel_diff(partial, rhs) < 1e-12);

            // all columns but the first: equals the lhs expression with the
            // exponential indices advanced by one
            double partial_col = 0.0;
            for (std::size_t r = 0; r < n + 1; ++r) {
                for (std::size_t c = 1; c < n + 1; ++c) partial_col += m.entry(r, c);
            }
            const double lhs = eq1_lhs_from_vars(v.us, std::span(v.es).subspan(1, n));
            CHECK(rel_diff(partial_col, lhs) < 1e-12);
        }
    }
}

TEST_CASE("transpose control diverges while the matrix entry does not") {
    // E[U(1-U')E] = 1/4 is finite; the transposed slot holds (1-U)E/U whose
    // mean is infinite, so its running mean grows with the sample size.
    RandomStream s(48, "diverge", 0);
    const auto median_of_batch_means = [&s](std::size_t rows) {
        std::vector<double> means;
        for (int b = 0; b < 21; ++b) {
            double sum = 0;
            for (std::size_t i = 0; i < rows; ++i) {
                const auto row = sample_negcontrol_transpose(s);
                sum += row[2];  // slot (2,1) of the transpose holds (1-U)E/U
            }
            means.push_back(sum / static_cast<double>(rows));
        }
        std::nth_element(means.begin(), means.begin() + 10, means.end());
        return means[10];
    };
    const double small = median_of_batch_means(100);
    const double large = median_of_batch_means(10000);
    CHECK(large > 1.4 * small);
    CHECK(small > 0.25);  // already far above the finite-mean slot value 1/4
}

TEST_CASE("identity catalog") {
    CHECK(make_identity_spec("eq1_lhs", 3).output_dim == 1);
    CHECK(make_identity_spec("prop1_rhs", 3).output_dim == 9);
    CHECK(make_identity_spec("eq3_lhs", 7).n == 2);   // forced order
    CHECK(make_identity_spec("eq2_rhs", 5).n == 1);   // forced order
    CHECK(make_identity_spec("negcontrol_transpose", 5).output_dim == 4);
    CHECK_THROWS_AS((void)make_identity_spec("nope", 1), std::invalid_argument);
    CHECK_THROWS_AS((void)make_identity_spec("eq1_lhs", 0), std::invalid_argument);
    CHECK(identity_names().size() == 14);
}

TEST_CASE("identity batches are deterministic") {
    const IdentitySpec spec = make_identity_spec("prop1_lhs", 2);
    RandomStream s1(77, "batch", 0);
    RandomStream s2(77, "batch", 0);
    const SampleBatch a = sample_identity_batch(s1, spec, 50);
    const SampleBatch b = sample_identity_batch(s2, spec, 50);
    CHECK(a.rows == 50);
    CHECK(a.data.size() == 50 * 4);
    CHECK(a.data == b.data);
    for (const double v : a.data) CHECK(std::isfinite(v));
}

TEST_CASE("geometric total area agrees with the closed law") {
    // Cheap two-sample sanity; the full-power comparison runs in the suite.
    RandomStream s(49, "geovs", 0);
    std::vector<double> geo;
    std::vector<double> closed;
    for (int i = 0; i < 20000; ++i) {
        geo.push_back(sample_totalarea_geometric(s, 2));
        closed.push_back(sample_totalarea_closed(s, 2));
    }
    // The total has an infinite mean through the E2/U1 term; compare medians.
    std::nth_element(geo.begin(), geo.begin() + geo.size() / 2, geo.end());
    std::nth_element(closed.begin(), closed.begin() + closed.size() / 2, closed.end());
    const double med_g = geo[geo.size() / 2];
    const double med_c = closed[closed.size() / 2];
    CHECK(std::fabs(med_g - med_c) < 0.12 * std::max(med_g, med_c));
}
