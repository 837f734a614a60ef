#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rectiles/stattest.hpp"

using namespace rectiles;

TEST_CASE("tame transform") {
    const std::vector<double> in{0.0, 1.0, 3.0};
    const auto out = tame(in);
    CHECK(out[0] == 0.0);
    CHECK(out[1] == 0.5);
    CHECK(out[2] == 0.75);
    RandomStream s(61, "tame", 0);
    for (int i = 0; i < 10000; ++i) {
        const double x = s.next_exponential();
        const double y = s.next_exponential();
        const auto tx = tame(std::vector<double>{x})[0];
        const auto ty = tame(std::vector<double>{y})[0];
        CHECK((x < y) == (tx < ty));
        CHECK(tx >= 0.0);
        CHECK(tx < 1.0);
    }
    CHECK_THROWS_AS((void)tame(std::vector<double>{-1.0}), std::domain_error);
    CHECK_THROWS_AS((void)tame(std::vector<double>{std::nan("")}), std::domain_error);
}

TEST_CASE("two-sample KS statistic") {
    {
        const std::vector<double> a{0.3, 0.7, 0.9};
        CHECK(ks_two_sample(a, a).statistic == 0.0);
        CHECK(ks_two_sample(a, a).p_value == 1.0);
    }
    {
        const std::vector<double> a{0.1, 0.2};
        const std::vector<double> b{0.8, 0.9};
        CHECK(ks_two_sample(a, b).statistic == 1.0);
    }
    {
        const std::vector<double> a{1, 2, 3};
        const std::vector<double> b{1.5, 2.5};
        CHECK(ks_two_sample(a, b).statistic == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    }
    CHECK_THROWS_AS((void)ks_two_sample(std::vector<double>{}, std::vector<double>{1.0}),
                    std::domain_error);
}

TEST_CASE("one-sample KS against reference CDFs") {
    RandomStream s(62, "ks1", 0);
    std::vector<double> unif;
    for (int i = 0; i < 10000; ++i) unif.push_back(s.next_uniform());
    const auto cdf = [](double x) { return std::clamp(x, 0.0, 1.0); };
    CHECK(ks_one_sample(unif, cdf).p_value > 0.01);
    std::vector<double> shifted;
    for (double v : unif) shifted.push_back(v + 0.05);
    CHECK(ks_one_sample(shifted, cdf).p_value < 1e-6);
}

TEST_CASE("energy statistic on point masses") {
    const std::vector<double> zero{0.0};
    const std::vector<double> one{1.0};
    CHECK(energy_statistic(view_of(zero, 1), view_of(one, 1)) == 2.0);
    const std::vector<double> zz{0.0, 0.0};
    const std::vector<double> oo{1.0, 1.0};
    CHECK(energy_statistic(view_of(zz, 1), view_of(oo, 1)) == 2.0);
    const std::vector<double> a{0.1, 0.9, 0.4};
    CHECK(std::fabs(energy_statistic(view_of(a, 1), view_of(a, 1))) < 1e-12);
    const std::vector<double> b4{0.1, 0.2, 0.3, 0.4};
    CHECK_THROWS_AS((void)energy_statistic(view_of(a, 1), view_of(b4, 2)),
                    std::invalid_argument);
    const std::vector<double> inf_entry{std::numeric_limits<double>::infinity()};
    CHECK_THROWS_AS((void)energy_statistic(view_of(inf_entry, 1), view_of(one, 1)),
                    std::domain_error);
    RandomStream s(63, "energy", 0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> x, y;
        for (int i = 0; i < 40; ++i) x.push_back(s.next_uniform());
        for (int i = 0; i < 30; ++i) y.push_back(s.next_exponential());
        const auto ty = tame(y);
        CHECK(energy_statistic(view_of(x, 1), view_of(ty, 1)) >= 0.0);
    }
}

TEST_CASE("permutation test contracts") {
    RandomStream s(64, "perm", 0);
    const std::vector<double> a{1.0, 1.0, 1.0, 1.0};
    SUBCASE("B floor") {
        RandomStream p(64, "permp", 0);
        CHECK_THROWS_AS(
            (void)permutation_test(view_of(a, 1), view_of(a, 1), Statistic::ks, 5, 0.05, p),
            std::invalid_argument);
    }
    SUBCASE("identical batches give p = 1") {
        RandomStream p(64, "permp", 1);
        const TestReport r =
            permutation_test(view_of(a, 1), view_of(a, 1), Statistic::energy, 39, 0.05, p);
        CHECK(r.statistic == 0.0);
        CHECK(r.p_value == 1.0);
        CHECK_FALSE(r.reject);
    }
    SUBCASE("p stays within its lattice bounds") {
        RandomStream p(64, "permp", 2);
        RandomStream g(64, "permg", 0);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<double> x, y;
            for (int i = 0; i < 50; ++i) x.push_back(g.next_uniform());
            for (int i = 0; i < 50; ++i) y.push_back(g.next_uniform());
            const TestReport r =
                permutation_test(view_of(x, 1), view_of(y, 1), Statistic::ks, 19, 0.05, p);
            CHECK(r.p_value >= 1.0 / 20.0);
            CHECK(r.p_value <= 1.0);
        }
    }
    SUBCASE("ks requires univariate data") {
        RandomStream p(64, "permp", 3);
        const std::vector<double> m{1, 2, 3, 4};
        CHECK_THROWS_AS(
            (void)permutation_test(view_of(m, 2), view_of(m, 2), Statistic::ks, 19, 0.05, p),
            std::invalid_argument);
    }
}

TEST_CASE("permutation p-values are calibrated under the null") {
    RandomStream g(65, "calib.gen", 0);
    RandomStream p(65, "calib.perm", 0);
    const int replicates = 200;
    int rejections = 0;
    for (int rep = 0; rep < replicates; ++rep) {
        std::vector<double> x, y;
        for (int i = 0; i < 200; ++i) x.push_back(g.next_uniform());
        for (int i = 0; i < 200; ++i) y.push_back(g.next_uniform());
        const TestReport r =
            permutation_test(view_of(x, 1), view_of(y, 1), Statistic::ks, 199, 0.05, p);
        if (r.reject) ++rejections;
    }
    const double rate = static_cast<double>(rejections) / replicates;
    CHECK(rate >= 0.02);
    CHECK(rate <= 0.09);
}

TEST_CASE("permutation test power on a location shift") {
    RandomStream g(66, "power.gen", 0);
    RandomStream p(66, "power.perm", 0);
    int rejections = 0;
    const int replicates = 100;
    for (int rep = 0; rep < replicates; ++rep) {
        std::vector<double> x, y;
        for (int i = 0; i < 1000; ++i) x.push_back(g.next_uniform());
        for (int i = 0; i < 1000; ++i) y.push_back(0.5 + g.next_uniform());
        const TestReport r =
            permutation_test(view_of(x, 1), view_of(y, 1), Statistic::ks, 99, 0.05, p);
        if (r.reject) ++rejections;
    }
    CHECK(rejections >= 95);
}

TEST_CASE("moment check") {
    const std::vector<double> constant{2.5, 2.5, 2.5, 2.5};
    const MomentCheck c = moment_check(constant, 2.5, 3.0);
    CHECK(c.pass);
    CHECK(c.sem == 0.0);
    RandomStream s(67, "moment", 0);
    std::vector<double> unif;
    for (int i = 0; i < 100000; ++i) unif.push_back(s.next_uniform());
    CHECK(moment_check(unif, 0.5, 4.0).pass);
    CHECK_FALSE(moment_check(unif, 0.52, 3.0).pass);
    CHECK_THROWS_AS((void)moment_check(std::vector<double>{}, 0.0, 3.0), std::invalid_argument);
}

TEST_CASE("binomial quantile bound") {
    CHECK(binomial_upper_quantile(20, 0.05, 0.99) == 4);
    CHECK(binomial_upper_quantile(20, 0.05, 0.999) == 5);
    CHECK(binomial_upper_quantile(1, 0.05, 0.99) == 1);
    CHECK(binomial_upper_quantile(100, 0.0, 0.99) == 0);
}

TEST_CASE("replicate harness") {
    ReplicateSpec spec;
    spec.check = "harness_null";
    spec.n = 1;
    spec.dim = 1;
    spec.stat = Statistic::ks;
    spec.gen_a = [](RandomStream& s, std::vector<double>& out) { out.push_back(s.next_uniform()); };
    spec.gen_b = [](RandomStream& s, std::vector<double>& out) { out.push_back(s.next_uniform()); };
    SUBCASE("degenerate single replicate") {
        const ReplicateSummary one = run_replicates(spec, 1, 500, 19, 0.05, 7);
        CHECK(one.replicates == 1);
        CHECK(one.reports.size() == 1);
    }
    SUBCASE("bit-for-bit determinism") {
        const ReplicateSummary a = run_replicates(spec, 5, 400, 39, 0.05, 99);
        const ReplicateSummary b = run_replicates(spec, 5, 400, 39, 0.05, 99);
        REQUIRE(a.reports.size() == b.reports.size());
        for (std::size_t i = 0; i < a.reports.size(); ++i) {
            CHECK(a.reports[i].statistic == b.reports[i].statistic);
            CHECK(a.reports[i].p_value == b.reports[i].p_value);
        }
        CHECK(a.rejections == b.rejections);
    }
    SUBCASE("null bound holds") {
        const ReplicateSummary s20 = run_replicates(spec, 20, 400, 99, 0.05, 1234);
        CHECK(s20.null_bound == 4);
        CHECK(s20.pass);
    }
    SUBCASE("negative control power") {
        ReplicateSpec shifted = spec;
        shifted.check = "harness_shift";
        shifted.expected_reject = true;
        shifted.gen_b = [](RandomStream& s, std::vector<double>& out) {
            out.push_back(0.5 + s.next_uniform());
        };
        const ReplicateSummary sum = run_replicates(shifted, 20, 1000, 99, 0.05, 4321);
        CHECK(sum.reject_threshold == 18);
        CHECK(sum.rejections >= 18);
        CHECK(sum.pass);
    }
}
