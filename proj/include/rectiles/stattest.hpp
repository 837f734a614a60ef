#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rectiles/rng.hpp"

namespace rectiles {

/// Componentwise x -> x/(1+x), a strictly monotone bijection [0,inf) -> [0,1).
/// Preserves equality/inequality in distribution while guaranteeing finite
/// moments for the energy statistic. Throws std::domain_error on negative or
/// non-finite entries.
std::vector<double> tame(std::span<const double> values);
void tame_in_place(std::span<double> values);

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// D = sup |ECDF_a - ECDF_b| with the asymptotic two-sample Kolmogorov p.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

/// One-sample Kolmogorov test against a reference CDF.
KsResult ks_one_sample(std::span<const double> sample,
                       const std::function<double(double)>& cdf);

/// Non-owning row-major view of an N x d sample.
struct SampleView {
    const double* data = nullptr;
    std::size_t rows = 0;
    std::size_t dim = 1;

    std::span<const double> row(std::size_t i) const { return {data + i * dim, dim}; }
};

inline SampleView view_of(const std::vector<double>& flat, std::size_t dim) {
    return SampleView{flat.data(), flat.size() / dim, dim};
}

/// 2 mean||a_i - b_j|| - mean||a_i - a_i'|| - mean||b_j - b_j'|| over all
/// ordered pairs (V-statistic; diagonal included). Nonnegative, zero in
/// expectation iff the laws coincide.
double energy_statistic(SampleView a, SampleView b);

enum class Statistic { energy, ks };

struct TestReport {
    std::string check;
    int n = 0;
    double statistic = 0.0;
    double p_value = 1.0;
    int n_permutations = 0;
    std::size_t sample_size = 0;  // per-side rows entering the statistic
    double alpha = 0.0;
    bool reject = false;
    std::string transform = "none";
};

struct PermutationOptions {
    /// Per-side row cap for the energy statistic; the quadratic cost makes
    /// full 1e5-row batches infeasible inside a permutation loop. Rows
    /// beyond the cap are not used (batches are i.i.d., so a fixed prefix
    /// is a fair subsample). KS always runs on the full batches.
    std::size_t energy_cap = 1024;
};

/// Pools the samples, recomputes the statistic under n_permutations random
/// relabelings and returns p = (1 + #{perm >= observed}) / (B + 1). Ties
/// count as extreme. Requires B >= 19.
TestReport permutation_test(SampleView a, SampleView b, Statistic stat, int n_permutations,
                            double alpha, RandomStream& stream,
                            const PermutationOptions& options = {});

struct MomentCheck {
    double mean = 0.0;
    double sem = 0.0;
    double target = 0.0;
    double tolerance_sems = 0.0;
    bool pass = false;
};

/// Passes iff |mean - target| <= tolerance_sems * sample standard error.
/// Intended only for finite-mean functionals.
MomentCheck moment_check(std::span<const double> sample, double target, double tolerance_sems);

/// Smallest k with P(Binomial(trials, p) <= k) >= level.
int binomial_upper_quantile(int trials, double p, double level);

/// Fills one draw (dim values) of one side of a check.
using RowGenerator = std::function<void(RandomStream&, std::vector<double>&)>;

struct ReplicateSpec {
    std::string check;  // also the stream-label stem; must be unique per check
    int n = 0;
    std::size_t dim = 1;
    Statistic stat = Statistic::ks;
    bool expected_reject = false;
    RowGenerator gen_a;
    RowGenerator gen_b;
};

struct ReplicateSummary {
    std::string check;
    int n = 0;
    int replicates = 0;
    int rejections = 0;
    int null_bound = 0;        // Binomial(K, alpha) 99th percentile
    int reject_threshold = 0;  // ceil(0.9 K); power gate for negative controls
    bool expected_reject = false;
    bool pass = false;
    std::vector<TestReport> reports;
};

/// K independent permutation tests on fresh batches drawn from disjoint
/// streams. Under a true null, rejections ~ Binomial(K, alpha); the summary
/// passes iff rejections stay within the 99th-percentile bound (or, for
/// negative controls, reach the power threshold). Energy batches are tame'd.
ReplicateSummary run_replicates(const ReplicateSpec& spec, int replicates, std::size_t rows,
                                int n_permutations, double alpha, std::uint64_t master_seed,
                                const PermutationOptions& options = {});

}  // namespace rectiles
