#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "rectiles/geometry.hpp"
#include "rectiles/stattest.hpp"

using namespace rectiles;

TEST_CASE("rect validity") {
    CHECK(Rect{0, 1, 0, 1}.valid());
    CHECK_FALSE(Rect{1, 1, 0, 1}.valid());
    CHECK_FALSE(Rect{0, 1, 2, 1}.valid());
    CHECK_FALSE(Rect{-1, 1, 0, 1}.valid());
    RandomStream s(1, "geo", 0);
    CHECK_THROWS_AS((void)sample_ppp(s, Rect{1, 0, 0, 1}), std::domain_error);
}

TEST_CASE("poisson void probability on a tiny rectangle") {
    RandomStream s(2, "void", 0);
    const Rect r{0, 0.01, 0, 0.01};  // area 1e-4
    const int n = 1000000;
    int empty = 0;
    for (int i = 0; i < n; ++i) {
        if (sample_ppp(s, r).points.empty()) ++empty;
    }
    CHECK(std::fabs(static_cast<double>(empty) / n - std::exp(-1e-4)) < 0.002);
}

TEST_CASE("unit square intensity equals area") {
    RandomStream s(3, "unitcount", 0);
    const Rect r{0, 1, 0, 1};
    const int n = 1000000;
    double total = 0;
    for (int i = 0; i < n; ++i) total += static_cast<double>(sample_ppp(s, r).points.size());
    CHECK(std::fabs(total / n - 1.0) < 0.004);
}

TEST_CASE("conditional uniformity given a single point") {
    RandomStream s(4, "cond", 0);
    const Rect r{0, 1, 0, 1};
    std::vector<double> ts;
    std::vector<double> xs;
    for (int i = 0; i < 30000; ++i) {
        const PointSet ps = sample_ppp(s, r);
        if (ps.points.size() == 1) {
            ts.push_back(ps.points[0].t);
            xs.push_back(ps.points[0].x);
        }
    }
    REQUIRE(ts.size() > 5000);
    const auto unif = [](double x) { return std::clamp(x, 0.0, 1.0); };
    CHECK(ks_one_sample(ts, unif).p_value > 0.01);
    CHECK(ks_one_sample(xs, unif).p_value > 0.01);
}

TEST_CASE("point set coordinates are pairwise distinct") {
    RandomStream s(5, "distinct", 0);
    const Rect r{0, 4, 0, 4};
    for (int trial = 0; trial < 200; ++trial) {
        const PointSet ps = sample_ppp(s, r);
        for (std::size_t i = 0; i < ps.points.size(); ++i) {
            for (std::size_t j = i + 1; j < ps.points.size(); ++j) {
                CHECK(ps.points[i].t != ps.points[j].t);
                CHECK(ps.points[i].x != ps.points[j].x);
            }
        }
    }
}

TEST_CASE("hyperbolic shift") {
    const Point p = hyperbolic_shift(Point{1, 1}, 2.0);
    CHECK(p.t == 2.0);
    CHECK(p.x == 0.5);
    const Point q{0.3, 1.7};
    const Point same = hyperbolic_shift(q, 1.0);
    CHECK(same.t == q.t);
    CHECK(same.x == q.x);
    CHECK_THROWS_AS((void)hyperbolic_shift(q, 0.0), std::domain_error);
    CHECK_THROWS_AS((void)hyperbolic_shift(q, -2.0), std::domain_error);

    // [0,2] x [0,0.5] maps onto the unit square under lambda = 1/2.
    const Point corner = hyperbolic_shift(Point{2.0, 0.5}, 0.5);
    CHECK(corner.t == 1.0);
    CHECK(corner.x == 1.0);
}

TEST_CASE("hyperbolic shift preserves south-west dominance") {
    RandomStream s(6, "order", 0);
    for (int i = 0; i < 10000; ++i) {
        const Point a{s.next_exponential(), s.next_exponential()};
        const Point b{s.next_exponential(), s.next_exponential()};
        const double lambda = s.next_exponential();
        CHECK(dominates_sw(a, b) ==
              dominates_sw(hyperbolic_shift(a, lambda), hyperbolic_shift(b, lambda)));
    }
}

TEST_CASE("bisectrix reflection") {
    CHECK(reflect_bisectrix(Point{2, 3}).t == 3.0);
    CHECK(reflect_bisectrix(Point{2, 3}).x == 2.0);
    CHECK(reflect_bisectrix(Point{1, 1}).t == 1.0);
    CHECK(reflect_bisectrix(Point{1, 1}).x == 1.0);
    RandomStream s(7, "refl", 0);
    for (int i = 0; i < 10000; ++i) {
        const Point p{s.next_exponential(), s.next_exponential()};
        const Point back = reflect_bisectrix(reflect_bisectrix(p));
        CHECK(back.t == p.t);
        CHECK(back.x == p.x);
        const Point q{s.next_exponential(), s.next_exponential()};
        CHECK(dominates_sw(p, q) == dominates_sw(reflect_bisectrix(p), reflect_bisectrix(q)));
    }
}

TEST_CASE("dominance is strict") {
    CHECK(dominates_sw(Point{1, 1}, Point{2, 2}));
    CHECK_FALSE(dominates_sw(Point{1, 3}, Point{2, 2}));
    CHECK_FALSE(dominates_sw(Point{1, 1}, Point{1, 1}));
    CHECK_FALSE(dominates_sw(Point{1, 2}, Point{1, 3}));
}

TEST_CASE("restriction to a sub-rectangle is again Poisson") {
    RandomStream s(8, "restrict", 0);
    const Rect big{0, 2, 0, 2};
    const Rect sub{0.5, 1.5, 0.25, 0.75};  // area 0.5
    const int n = 200000;
    double total = 0;
    double total2 = 0;
    for (int i = 0; i < n; ++i) {
        int count = 0;
        for (const Point& p : sample_ppp(s, big).points) {
            if (p.t > sub.t_lo && p.t < sub.t_hi && p.x > sub.x_lo && p.x < sub.x_hi) ++count;
        }
        total += count;
        total2 += static_cast<double>(count) * count;
    }
    const double mean = total / n;
    const double var = total2 / n - mean * mean;
    CHECK(std::fabs(mean - sub.area()) < 5.0 * std::sqrt(sub.area() / n));
    CHECK(std::fabs(var - sub.area()) < 0.02);
}
