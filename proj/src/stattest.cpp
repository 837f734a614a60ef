#include "rectiles/stattest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rectiles {

namespace {

double kolmogorov_q(double lambda) {
    if (lambda <= 0.0) return 1.0;
    const double a2 = -2.0 * lambda * lambda;
    double fac = 2.0;
    double sum = 0.0;
    double prev = 0.0;
    for (int j = 1; j <= 200; ++j) {
        const double term = fac * std::exp(a2 * j * j);
        sum += term;
        if (std::fabs(term) <= 0.001 * prev || std::fabs(term) <= 1e-14 * std::fabs(sum)) {
            return std::clamp(sum, 0.0, 1.0);
        }
        fac = -fac;
        prev = std::fabs(term);
    }
    return 1.0;  // series did not converge: lambda tiny, no evidence against the null
}

double ks_asymptotic_p(double d, double effective_n) {
    const double sn = std::sqrt(effective_n);
    return kolmogorov_q((sn + 0.12 + 0.11 / sn) * d);
}

double euclidean(std::span<const double> p, std::span<const double> q) {
    double s = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        const double d = p[k] - q[k];
        s += d * d;
    }
    return std::sqrt(s);
}

}  // namespace

std::vector<double> tame(std::span<const double> values) {
    std::vector<double> out(values.begin(), values.end());
    tame_in_place(out);
    return out;
}

void tame_in_place(std::span<double> values) {
    for (double& v : values) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw std::domain_error("tame: entries must be finite and nonnegative");
        }
        v = v / (1.0 + v);
    }
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw std::domain_error("ks_two_sample: empty sample");
    std::vector<double> sa(a.begin(), a.end());
    std::vector<double> sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    const double na = static_cast<double>(sa.size());
    const double nb = static_cast<double>(sb.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < sa.size() || j < sb.size()) {
        double v;
        if (i < sa.size() && j < sb.size()) {
            v = std::min(sa[i], sb[j]);
        } else if (i < sa.size()) {
            v = sa[i];
        } else {
            v = sb[j];
        }
        while (i < sa.size() && sa[i] == v) ++i;
        while (j < sb.size() && sb[j] == v) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    const double ne = na * nb / (na + nb);
    return KsResult{d, ks_asymptotic_p(d, ne)};
}

KsResult ks_one_sample(std::span<const double> sample,
                       const std::function<double(double)>& cdf) {
    if (sample.empty()) throw std::domain_error("ks_one_sample: empty sample");
    std::vector<double> s(sample.begin(), sample.end());
    std::sort(s.begin(), s.end());
    const double n = static_cast<double>(s.size());
    double d = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double f = cdf(s[i]);
        d = std::max(d, std::max(f - static_cast<double>(i) / n,
                                 static_cast<double>(i + 1) / n - f));
    }
    return KsResult{d, ks_asymptotic_p(d, n)};
}

double energy_statistic(SampleView a, SampleView b) {
    if (a.dim != b.dim) throw std::invalid_argument("energy_statistic: dimension mismatch");
    if (a.rows == 0 || b.rows == 0) throw std::invalid_argument("energy_statistic: empty sample");
    for (const SampleView* v : {&a, &b}) {
        for (std::size_t i = 0; i < v->rows * v->dim; ++i) {
            if (!std::isfinite(v->data[i])) {
                throw std::domain_error("energy_statistic: non-finite entry (tame heavy tails first)");
            }
        }
    }
    double cross = 0.0;
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t j = 0; j < b.rows; ++j) {
            cross += euclidean(a.row(i), b.row(j));
        }
    }
    double within_a = 0.0;
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t j = i + 1; j < a.rows; ++j) {
            within_a += euclidean(a.row(i), a.row(j));
        }
    }
    double within_b = 0.0;
    for (std::size_t i = 0; i < b.rows; ++i) {
        for (std::size_t j = i + 1; j < b.rows; ++j) {
            within_b += euclidean(b.row(i), b.row(j));
        }
    }
    const double na = static_cast<double>(a.rows);
    const double nb = static_cast<double>(b.rows);
    return 2.0 * cross / (na * nb) - 2.0 * within_a / (na * na) - 2.0 * within_b / (nb * nb);
}

namespace {

struct PooledKs {
    std::vector<double> values;       // sorted pooled values
    std::vector<std::uint8_t> label;  // side per sorted position (0 = a)
    std::vector<std::uint32_t> group_end;  // tie-group boundaries (exclusive)
    std::size_t na = 0;
    std::size_t nb = 0;
};

PooledKs pool_for_ks(SampleView a, SampleView b) {
    PooledKs pool;
    pool.na = a.rows;
    pool.nb = b.rows;
    const std::size_t total = a.rows + b.rows;
    std::vector<std::pair<double, std::uint8_t>> merged;
    merged.reserve(total);
    for (std::size_t i = 0; i < a.rows; ++i) merged.emplace_back(a.data[i], 0);
    for (std::size_t i = 0; i < b.rows; ++i) merged.emplace_back(b.data[i], 1);
    std::sort(merged.begin(), merged.end(),
              [](const auto& p, const auto& q) { return p.first < q.first; });
    pool.values.reserve(total);
    pool.label.reserve(total);
    for (const auto& [v, l] : merged) {
        pool.values.push_back(v);
        pool.label.push_back(l);
    }
    for (std::size_t i = 0; i < total; ++i) {
        if (i + 1 == total || pool.values[i + 1] != pool.values[i]) {
            pool.group_end.push_back(static_cast<std::uint32_t>(i + 1));
        }
    }
    return pool;
}

double ks_from_labels(const PooledKs& pool, const std::vector<std::uint8_t>& label) {
    const double na = static_cast<double>(pool.na);
    const double nb = static_cast<double>(pool.nb);
    double d = 0.0;
    std::size_t ca = 0;
    std::size_t cb = 0;
    std::size_t pos = 0;
    for (const std::uint32_t end : pool.group_end) {
        for (; pos < end; ++pos) {
            if (label[pos] == 0) {
                ++ca;
            } else {
                ++cb;
            }
        }
        d = std::max(d, std::fabs(static_cast<double>(ca) / na - static_cast<double>(cb) / nb));
    }
    return d;
}

struct PooledEnergy {
    std::vector<float> dist;  // (na+nb)^2 symmetric distance matrix
    std::size_t na = 0;
    std::size_t nb = 0;
    double sum_all = 0.0;  // unordered pair sum over the pool
};

PooledEnergy pool_for_energy(SampleView a, SampleView b) {
    PooledEnergy pool;
    pool.na = a.rows;
    pool.nb = b.rows;
    const std::size_t n = a.rows + b.rows;
    pool.dist.assign(n * n, 0.0F);
    auto row_of = [&](std::size_t i) { return i < a.rows ? a.row(i) : b.row(i - a.rows); };
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = euclidean(row_of(i), row_of(j));
            pool.dist[i * n + j] = static_cast<float>(d);
            pool.dist[j * n + i] = static_cast<float>(d);
            pool.sum_all += d;
        }
    }
    return pool;
}

double energy_from_indices(const PooledEnergy& pool, std::span<const std::uint32_t> order) {
    const std::size_t n = pool.na + pool.nb;
    double uaa = 0.0;
    for (std::size_t p = 0; p < pool.na; ++p) {
        const std::size_t base = static_cast<std::size_t>(order[p]) * n;
        for (std::size_t q = p + 1; q < pool.na; ++q) {
            uaa += pool.dist[base + order[q]];
        }
    }
    double ubb = 0.0;
    for (std::size_t p = pool.na; p < n; ++p) {
        const std::size_t base = static_cast<std::size_t>(order[p]) * n;
        for (std::size_t q = p + 1; q < n; ++q) {
            ubb += pool.dist[base + order[q]];
        }
    }
    const double uab = pool.sum_all - uaa - ubb;
    const double na = static_cast<double>(pool.na);
    const double nb = static_cast<double>(pool.nb);
    return 2.0 * uab / (na * nb) - 2.0 * uaa / (na * na) - 2.0 * ubb / (nb * nb);
}

}  // namespace

TestReport permutation_test(SampleView a, SampleView b, Statistic stat, int n_permutations,
                            double alpha, RandomStream& stream,
                            const PermutationOptions& options) {
    if (n_permutations < 19) {
        throw std::invalid_argument("permutation_test: need B >= 19 (p resolution too coarse)");
    }
    if (a.dim != b.dim) throw std::invalid_argument("permutation_test: dimension mismatch");
    if (a.rows == 0 || b.rows == 0) throw std::domain_error("permutation_test: empty sample");
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("permutation_test: alpha must lie in (0,1)");
    }
    if (stat == Statistic::ks && a.dim != 1) {
        throw std::invalid_argument("permutation_test: ks statistic is univariate");
    }

    TestReport report;
    report.n_permutations = n_permutations;
    report.alpha = alpha;

    int at_least_as_extreme = 0;
    if (stat == Statistic::ks) {
        const PooledKs pool = pool_for_ks(a, b);
        report.sample_size = a.rows;
        report.statistic = ks_from_labels(pool, pool.label);
        std::vector<std::uint8_t> label = pool.label;
        for (int p = 0; p < n_permutations; ++p) {
            stream.shuffle_in_place(label);
            if (ks_from_labels(pool, label) >= report.statistic) ++at_least_as_extreme;
        }
    } else {
        const std::size_t na = std::min(a.rows, options.energy_cap);
        const std::size_t nb = std::min(b.rows, options.energy_cap);
        const SampleView av{a.data, na, a.dim};
        const SampleView bv{b.data, nb, b.dim};
        const PooledEnergy pool = pool_for_energy(av, bv);
        report.sample_size = na;
        const std::size_t n = na + nb;
        std::vector<std::uint32_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        report.statistic = energy_from_indices(pool, order);
        for (int p = 0; p < n_permutations; ++p) {
            stream.shuffle_in_place(order);
            if (energy_from_indices(pool, order) >= report.statistic) ++at_least_as_extreme;
        }
    }

    report.p_value = static_cast<double>(1 + at_least_as_extreme) /
                     static_cast<double>(n_permutations + 1);
    report.reject = report.p_value <= alpha;
    return report;
}

MomentCheck moment_check(std::span<const double> sample, double target, double tolerance_sems) {
    if (sample.empty()) throw std::invalid_argument("moment_check: empty sample");
    MomentCheck out;
    out.target = target;
    out.tolerance_sems = tolerance_sems;
    const double n = static_cast<double>(sample.size());
    double sum = 0.0;
    for (const double v : sample) sum += v;
    out.mean = sum / n;
    double ss = 0.0;
    for (const double v : sample) {
        const double d = v - out.mean;
        ss += d * d;
    }
    const double sd = sample.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    out.sem = sd / std::sqrt(n);
    const double diff = std::fabs(out.mean - target);
    out.pass = diff == 0.0 || diff <= tolerance_sems * out.sem;
    return out;
}

int binomial_upper_quantile(int trials, double p, double level) {
    if (trials < 0 || !(p >= 0.0 && p <= 1.0) || !(level > 0.0 && level < 1.0)) {
        throw std::invalid_argument("binomial_upper_quantile: bad arguments");
    }
    double pmf = std::pow(1.0 - p, trials);
    double cum = pmf;
    int k = 0;
    while (k < trials && cum < level) {
        pmf *= (static_cast<double>(trials - k) / static_cast<double>(k + 1)) * (p / (1.0 - p));
        cum += pmf;
        ++k;
    }
    return k;
}

ReplicateSummary run_replicates(const ReplicateSpec& spec, int replicates, std::size_t rows,
                                int n_permutations, double alpha, std::uint64_t master_seed,
                                const PermutationOptions& options) {
    if (replicates < 1) throw std::invalid_argument("run_replicates: need K >= 1");
    if (rows == 0) throw std::invalid_argument("run_replicates: need N >= 1");

    ReplicateSummary summary;
    summary.check = spec.check;
    summary.n = spec.n;
    summary.replicates = replicates;
    summary.expected_reject = spec.expected_reject;
    summary.null_bound = binomial_upper_quantile(replicates, alpha, 0.99);
    summary.reject_threshold = static_cast<int>(std::ceil(0.9 * replicates));

    const std::string stem = spec.check + ".n" + std::to_string(spec.n);
    for (int rep = 0; rep < replicates; ++rep) {
        RandomStream stream_a(master_seed, stem + ".a", static_cast<std::uint64_t>(rep));
        RandomStream stream_b(master_seed, stem + ".b", static_cast<std::uint64_t>(rep));
        RandomStream stream_p(master_seed, stem + ".perm", static_cast<std::uint64_t>(rep));

        std::vector<double> da;
        std::vector<double> db;
        da.reserve(rows * spec.dim);
        db.reserve(rows * spec.dim);
        for (std::size_t r = 0; r < rows; ++r) spec.gen_a(stream_a, da);
        for (std::size_t r = 0; r < rows; ++r) spec.gen_b(stream_b, db);

        const bool use_tame = spec.stat == Statistic::energy;
        if (use_tame) {
            tame_in_place(da);
            tame_in_place(db);
        }
        TestReport report = permutation_test(view_of(da, spec.dim), view_of(db, spec.dim),
                                             spec.stat, n_permutations, alpha, stream_p, options);
        report.check = spec.check;
        report.n = spec.n;
        report.transform = use_tame ? "tame" : "none";
        if (report.reject) ++summary.rejections;
        summary.reports.push_back(std::move(report));
    }

    summary.pass = spec.expected_reject ? summary.rejections >= summary.reject_threshold
                                        : summary.rejections <= summary.null_bound;
    return summary;
}

}  // namespace rectiles
