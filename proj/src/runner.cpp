#include "rectiles/runner.hpp"

#include <algorithm>
#include <charconv>
#include <deque>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string_view>

#include "rectiles/conditional.hpp"
#include "rectiles/geometry.hpp"
#include "rectiles/samplers.hpp"

namespace rectiles {

namespace {

// ---------------------------------------------------------------------------
// Formatting and record bookkeeping
// ---------------------------------------------------------------------------

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return {buf};
}

struct RecordLine {
    std::string check;
    int n = 0;
    int kind = 0;  // 0 result, 1 summary/moment/trend, 2 stats, 3 resource
    long rep = -1;
    std::string text;
};

struct HumanRow {
    std::string check;
    int n = 0;
    std::string text;
};

struct WindowStats {
    std::uint64_t chains = 0;
    std::uint64_t expansions = 0;
    double max_window = 0.0;

    void note(const RecordChain& c) {
        ++chains;
        expansions += static_cast<std::uint64_t>(c.expansions);
        max_window = std::max(max_window, c.final_window);
    }
};

struct SuiteState {
    const RunConfig* cfg = nullptr;
    std::vector<RecordLine> records;
    std::vector<HumanRow> human;
    bool stat_failure = false;
    bool resource_failure = false;
};

std::string common_fields(const RunConfig& cfg, std::size_t rows) {
    std::ostringstream os;
    os << " N=" << rows << " B=" << cfg.permutations << " K=" << cfg.replicates
       << " seed=" << cfg.master_seed;
    return os.str();
}

void emit_result(SuiteState& st, const std::string& check, int n, long rep, std::size_t rows,
                 const TestReport& r, const char* expected) {
    std::ostringstream os;
    os << "result check=" << check << " n=" << n << " rep=" << rep
       << common_fields(*st.cfg, rows) << " transform=" << r.transform
       << " stat=" << fmt(r.statistic) << " p=" << fmt(r.p_value)
       << " decision=" << (r.reject ? "reject" : "accept") << " expected=" << expected;
    st.records.push_back({check, n, 0, rep, os.str()});
}

void emit_summary(SuiteState& st, const ReplicateSummary& s, std::size_t rows) {
    const char* expected = s.expected_reject ? "reject" : "null";
    std::ostringstream os;
    os << "summary check=" << s.check << " n=" << s.n << common_fields(*st.cfg, rows)
       << " rejections=" << s.rejections << " null_bound=" << s.null_bound
       << " reject_threshold=" << s.reject_threshold << " pass=" << (s.pass ? 1 : 0)
       << " expected=" << expected;
    st.records.push_back({s.check, s.n, 1, -1, os.str()});

    char row[160];
    std::snprintf(row, sizeof(row), "%-24s n=%-2d rejections=%2d/%-2d %-8s %s", s.check.c_str(),
                  s.n, s.rejections, s.replicates, expected, s.pass ? "ok" : "FAIL");
    st.human.push_back({s.check, s.n, row});
    if (!s.pass) st.stat_failure = true;
}

void emit_moment(SuiteState& st, const std::string& check, std::size_t rows,
                 const MomentCheck& m) {
    std::ostringstream os;
    os << "moment check=" << check << " n=0 N=" << rows << " seed=" << st.cfg->master_seed
       << " mean=" << fmt(m.mean) << " target=" << fmt(m.target) << " sem=" << fmt(m.sem)
       << " tol_sems=" << fmt(m.tolerance_sems) << " pass=" << (m.pass ? 1 : 0);
    st.records.push_back({check, 0, 1, -1, os.str()});

    char row[160];
    std::snprintf(row, sizeof(row), "%-24s n=0  mean=%-12.6g target=%-10.6g %s", check.c_str(),
                  m.mean, m.target, m.pass ? "ok" : "FAIL");
    st.human.push_back({check, 0, row});
    if (!m.pass) st.stat_failure = true;
}

void emit_window_stats(SuiteState& st, const std::string& check, int n, const WindowStats& ws) {
    if (ws.chains == 0) return;
    std::ostringstream os;
    os << "stats check=" << check << " n=" << n << " seed=" << st.cfg->master_seed
       << " chains=" << ws.chains << " max_window=" << fmt(ws.max_window)
       << " mean_expansions=" << fmt(static_cast<double>(ws.expansions) /
                                     static_cast<double>(ws.chains));
    st.records.push_back({check, n, 2, -1, os.str()});
}

void emit_acceptance_stats(SuiteState& st, const std::string& check, int n,
                           const ConditioningWindow& w) {
    std::ostringstream os;
    os << "stats check=" << check << " n=" << n << " seed=" << st.cfg->master_seed
       << " accepted=" << w.accepted << " attempted=" << w.attempted
       << " acceptance_rate=" << fmt(w.acceptance_rate());
    st.records.push_back({check, n, 2, -1, os.str()});
}

void emit_resource_failure(SuiteState& st, const std::string& check, int n,
                           const std::string& error, const std::string& detail) {
    std::ostringstream os;
    os << "resource check=" << check << " n=" << n << " seed=" << st.cfg->master_seed
       << " error=" << error << " detail=\"" << detail << "\"";
    st.records.push_back({check, n, 3, -1, os.str()});

    char row[200];
    std::snprintf(row, sizeof(row), "%-24s n=%-2d resource failure: %s", check.c_str(), n,
                  error.c_str());
    st.human.push_back({check, n, row});
    st.resource_failure = true;
}

void flush_report(SuiteState& st, std::ostream& out, int exit_code) {
    std::stable_sort(st.records.begin(), st.records.end(),
                     [](const RecordLine& a, const RecordLine& b) {
                         return std::tie(a.check, a.n, a.kind, a.rep) <
                                std::tie(b.check, b.n, b.kind, b.rep);
                     });
    for (const RecordLine& r : st.records) out << r.text << "\n";
    std::stable_sort(st.human.begin(), st.human.end(), [](const HumanRow& a, const HumanRow& b) {
        return std::tie(a.check, a.n) < std::tie(b.check, b.n);
    });
    out << "\n== summary ==\n";
    for (const HumanRow& r : st.human) out << r.text << "\n";
    out << "exit_code=" << exit_code << "\n";
}

int exit_code_of(const SuiteState& st) {
    if (st.resource_failure) return kExitResource;
    if (st.stat_failure) return kExitStatFailure;
    return kExitPass;
}

// ---------------------------------------------------------------------------
// Row generators
// ---------------------------------------------------------------------------

RowGenerator identity_gen(const IdentitySpec& spec, ChainOptions chain) {
    return [spec, chain](RandomStream& s, std::vector<double>& out) {
        sample_identity_row(s, spec, out, chain);
    };
}

RowGenerator totalarea_geom_gen(std::size_t n, ChainOptions chain, WindowStats* ws) {
    return [n, chain, ws](RandomStream& s, std::vector<double>& out) {
        const RecordChain c = simulate_quadrant_chain(s, 0, static_cast<int>(n) + 1, chain);
        if (ws) ws->note(c);
        out.push_back(tile_matrix_from_chain(c, 1, n).entry_sum());
    };
}

RowGenerator m1n_geom_gen(std::size_t n, ChainOptions chain, WindowStats* ws) {
    return [n, chain, ws](RandomStream& s, std::vector<double>& out) {
        const RecordChain c = simulate_quadrant_chain(s, 0, static_cast<int>(n) + 1, chain);
        if (ws) ws->note(c);
        const auto entries = tile_matrix_from_chain(c, 1, n).entries();
        out.insert(out.end(), entries.begin(), entries.end());
    };
}

RowGenerator m1n_closed_flatten_gen(std::size_t n) {
    return [n](RandomStream& s, std::vector<double>& out) {
        const auto entries = sample_m1n_closed(s, n).entries();
        out.insert(out.end(), entries.begin(), entries.end());
    };
}

RowGenerator c00_gen(ChainOptions chain, WindowStats* ws) {
    return [chain, ws](RandomStream& s, std::vector<double>& out) {
        const RecordChain c = simulate_quadrant_chain(s, -1, 1, chain);
        if (ws) ws->note(c);
        const Point& r0 = c.record(0);
        const Point& r1 = c.record(1);
        out.push_back((r0.x - r1.x) * (r1.t - r0.t));
    };
}

RowGenerator c11_gen(ChainOptions chain, WindowStats* ws) {
    return [chain, ws](RandomStream& s, std::vector<double>& out) {
        const RecordChain c = simulate_quadrant_chain(s, 0, 2, chain);
        if (ws) ws->note(c);
        const Point& r1 = c.record(1);
        const Point& r2 = c.record(2);
        out.push_back((r1.x - r2.x) * (r2.t - r1.t));
    };
}

/// The 2x2 block (C_{-j-1,-i-1}; i,j = 1,2) of the tile array, row-major.
RowGenerator reflected_block_gen(ChainOptions chain, WindowStats* ws) {
    return [chain, ws](RandomStream& s, std::vector<double>& out) {
        const RecordChain c = simulate_quadrant_chain(s, -3, 1, chain);
        if (ws) ws->note(c);
        auto h = [&](int k) { return c.record(k).x - c.record(k + 1).x; };
        auto w = [&](int k) { return c.record(k + 1).t - c.record(k).t; };
        out.push_back(h(-2) * w(-2));
        out.push_back(h(-3) * w(-2));
        out.push_back(h(-2) * w(-3));
        out.push_back(h(-3) * w(-3));
    };
}

RowGenerator transpose_gen() {
    return [](RandomStream& s, std::vector<double>& out) {
        const auto v = sample_negcontrol_transpose(s);
        out.insert(out.end(), v.begin(), v.end());
    };
}

RowGenerator box_given_count_gen(Rect rect, std::size_t count, std::uint64_t max_attempts,
                                 bool reflected) {
    return [rect, count, max_attempts, reflected](RandomStream& s, std::vector<double>& out) {
        const BoxRecordResult r = box_records_given_count(s, rect, count, max_attempts);
        const TileMatrix tiles = reflected ? antidiagonal_reflect(r.tiles) : r.tiles;
        const auto& entries = tiles.entries();
        out.insert(out.end(), entries.begin(), entries.end());
    };
}

RowGenerator box_pooled_rowmajor_gen(Rect rect, std::size_t max_records, bool reflected) {
    return [rect, max_records, reflected](RandomStream& s, std::vector<double>& out) {
        for (;;) {
            const BoxRecordResult r = box_records(s, rect);
            if (r.records.size() > max_records) continue;  // symmetric-in-law truncation
            const TileMatrix tiles = reflected ? antidiagonal_reflect(r.tiles) : r.tiles;
            const auto row = encode_count_row_major(tiles, r.records.size(), max_records);
            out.insert(out.end(), row.begin(), row.end());
            return;
        }
    };
}

RowGenerator box_sorted_areas_gen(Rect rect, std::size_t max_records) {
    const std::size_t slots = (max_records + 1) * (max_records + 1);
    return [rect, max_records, slots](RandomStream& s, std::vector<double>& out) {
        for (;;) {
            const BoxRecordResult r = box_records(s, rect);
            if (r.records.size() > max_records) continue;
            const auto row = encode_count_sorted_areas(r.tiles, r.records.size(), slots);
            out.insert(out.end(), row.begin(), row.end());
            return;
        }
    };
}

RowGenerator lemma3_closed_gen(std::size_t n, ConditioningWindow* window,
                               std::uint64_t max_attempts) {
    return [n, window, max_attempts](RandomStream& s, std::vector<double>& out) {
        const auto row = draw_m1n_area_binned(s, n, *window, max_attempts);
        out.insert(out.end(), row.begin(), row.end());
    };
}

RowGenerator lemma3_box_gen(std::size_t n, double v, std::uint64_t max_attempts) {
    const double side = std::sqrt(v);
    const Rect box{0.0, side, 0.0, side};
    return [n, box, max_attempts](RandomStream& s, std::vector<double>& out) {
        const BoxRecordResult r = box_records_given_count(s, box, n - 1, max_attempts);
        const auto& entries = r.tiles.entries();
        out.insert(out.end(), entries.begin(), entries.end());
    };
}

// ---------------------------------------------------------------------------
// Suite pieces
// ---------------------------------------------------------------------------

void run_family(SuiteState& st, const ReplicateSpec& spec, std::size_t rows) {
    const RunConfig& cfg = *st.cfg;
    try {
        const ReplicateSummary s =
            run_replicates(spec, cfg.replicates, rows, cfg.permutations, cfg.alpha,
                           cfg.master_seed, PermutationOptions{cfg.energy_cap});
        const char* expected = spec.expected_reject ? "reject" : "null";
        long rep = 0;
        for (const TestReport& r : s.reports) {
            emit_result(st, spec.check, spec.n, rep++, rows, r, expected);
        }
        emit_summary(st, s, rows);
    } catch (const WindowCapError& e) {
        emit_resource_failure(st, spec.check, spec.n, "window_cap", e.what());
    } catch (const AcceptanceRateError& e) {
        emit_resource_failure(st, spec.check, spec.n, "acceptance_rate", e.what());
    }
}

std::string family_of(const std::string& identity) {
    make_identity_spec(identity, 1);  // validates the name
    if (identity.rfind("eq1", 0) == 0) return "eq1";
    if (identity.rfind("eq2", 0) == 0) return "eq2";
    if (identity.rfind("eq3", 0) == 0) return "eq3";
    if (identity.rfind("prop1", 0) == 0) return "prop1";
    if (identity.rfind("rowprod", 0) == 0) return "rowprod";
    if (identity.rfind("totalarea", 0) == 0) return "totalarea";
    return identity;  // negative controls are their own families
}

void run_identity_families(SuiteState& st, std::deque<std::pair<std::string, WindowStats>>& wstats) {
    const RunConfig& cfg = *st.cfg;
    std::set<std::string> filter;
    for (const std::string& name : cfg.identities) filter.insert(family_of(name));
    auto enabled = [&](const char* fam) { return filter.empty() || filter.count(fam) > 0; };

    auto stats_slot = [&wstats](const std::string& key) {
        wstats.emplace_back(key, WindowStats{});
        return &wstats.back().second;
    };

    if (enabled("eq1")) {
        for (const int n : cfg.ns) {
            ReplicateSpec spec;
            spec.check = "eq1";
            spec.n = n;
            spec.dim = 1;
            spec.stat = Statistic::ks;
            spec.gen_a = identity_gen(make_identity_spec("eq1_lhs", n), cfg.chain);
            spec.gen_b = identity_gen(make_identity_spec("eq1_rhs", n), cfg.chain);
            run_family(st, spec, cfg.draws_per_side);
        }
    }
    if (enabled("eq2")) {
        ReplicateSpec spec;
        spec.check = "eq2";
        spec.n = 1;
        spec.dim = 1;
        spec.stat = Statistic::ks;
        spec.gen_a = identity_gen(make_identity_spec("eq2_lhs", 1), cfg.chain);
        spec.gen_b = identity_gen(make_identity_spec("eq2_rhs", 1), cfg.chain);
        run_family(st, spec, cfg.draws_per_side);
    }
    if (enabled("eq3")) {
        ReplicateSpec spec;
        spec.check = "eq3";
        spec.n = 2;
        spec.dim = 4;
        spec.stat = Statistic::energy;
        spec.gen_a = identity_gen(make_identity_spec("eq3_lhs", 2), cfg.chain);
        spec.gen_b = identity_gen(make_identity_spec("eq3_rhs", 2), cfg.chain);
        run_family(st, spec, cfg.draws_per_side);
    }
    if (enabled("prop1")) {
        for (const int n : cfg.ns) {
            if (n < 2) continue;  // the 1x1 reflection is the identity map
            ReplicateSpec spec;
            spec.check = "prop1";
            spec.n = n;
            spec.dim = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
            spec.stat = Statistic::energy;
            spec.gen_a = identity_gen(make_identity_spec("prop1_lhs", n), cfg.chain);
            spec.gen_b = identity_gen(make_identity_spec("prop1_rhs", n), cfg.chain);
            run_family(st, spec, cfg.draws_per_side);
        }
    }
    if (enabled("rowprod")) {
        for (const int n : cfg.ns) {
            if (n < 2) continue;  // both sides coincide pathwise at n = 1
            ReplicateSpec spec;
            spec.check = "rowprod";
            spec.n = n;
            spec.dim = 1;
            spec.stat = Statistic::ks;
            spec.gen_a = identity_gen(make_identity_spec("rowprod_lhs", n), cfg.chain);
            spec.gen_b = identity_gen(make_identity_spec("rowprod_rhs", n), cfg.chain);
            run_family(st, spec, cfg.draws_per_side);
        }
    }
    if (enabled("totalarea")) {
        for (const int n : cfg.ns) {
            if (n < 1 || n > 3) continue;  // geometric side depth cap at defaults
            ReplicateSpec spec;
            spec.check = "totalarea";
            spec.n = n;
            spec.dim = 1;
            spec.stat = Statistic::ks;
            spec.gen_a = identity_gen(make_identity_spec("totalarea_closed", n), cfg.chain);
            WindowStats* ws = stats_slot("totalarea.n" + std::to_string(n));
            spec.gen_b = totalarea_geom_gen(static_cast<std::size_t>(n), cfg.chain, ws);
            run_family(st, spec, cfg.draws_per_side);
            emit_window_stats(st, "totalarea", n, *ws);
        }
    }
    if (enabled("negcontrol_transpose")) {
        ReplicateSpec spec;
        spec.check = "negcontrol_transpose";
        spec.n = 2;
        spec.dim = 4;
        spec.stat = Statistic::energy;
        spec.expected_reject = true;
        spec.gen_a = transpose_gen();
        spec.gen_b = m1n_closed_flatten_gen(2);
        run_family(st, spec, cfg.draws_per_side);
    }
    if (enabled("negcontrol_c00")) {
        ReplicateSpec spec;
        spec.check = "negcontrol_c00";
        spec.n = 1;
        spec.dim = 1;
        spec.stat = Statistic::ks;
        spec.expected_reject = true;
        WindowStats* ws = stats_slot("negcontrol_c00");
        spec.gen_a = c00_gen(cfg.chain, ws);
        spec.gen_b = c11_gen(cfg.chain, ws);
        run_family(st, spec, cfg.draws_per_side);
        emit_window_stats(st, "negcontrol_c00", 1, *ws);
    }
}

void run_m1n_oracle_families(SuiteState& st,
                             std::deque<std::pair<std::string, WindowStats>>& wstats) {
    const RunConfig& cfg = *st.cfg;
    for (const int n : cfg.ns) {
        if (n < 1 || n > 3) continue;
        ReplicateSpec spec;
        spec.check = "m1n_geom_vs_closed";
        spec.n = n;
        spec.dim = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
        spec.stat = Statistic::energy;
        wstats.emplace_back("m1n.n" + std::to_string(n), WindowStats{});
        WindowStats* ws = &wstats.back().second;
        spec.gen_a = m1n_geom_gen(static_cast<std::size_t>(n), cfg.chain, ws);
        spec.gen_b = m1n_closed_flatten_gen(static_cast<std::size_t>(n));
        run_family(st, spec, cfg.draws_per_side);
        emit_window_stats(st, "m1n_geom_vs_closed", n, *ws);
    }
}

void run_markov_checks(SuiteState& st) {
    const RunConfig& cfg = *st.cfg;
    WindowStats ws;
    int rejections_exp = 0;
    int rejections_unif = 0;
    const auto exp_cdf = [](double x) { return x <= 0.0 ? 0.0 : 1.0 - std::exp(-x); };
    const auto unif_cdf = [](double x) { return std::clamp(x, 0.0, 1.0); };
    try {
        for (int rep = 0; rep < cfg.replicates; ++rep) {
            RandomStream stream(cfg.master_seed, "markov.steps", static_cast<std::uint64_t>(rep));
            std::vector<double> exp_steps;
            std::vector<double> unif_steps;
            exp_steps.reserve(cfg.markov_steps);
            unif_steps.reserve(cfg.markov_steps);
            while (exp_steps.size() < cfg.markov_steps) {
                const RecordChain c = simulate_quadrant_chain(stream, 0, 5, cfg.chain);
                ws.note(c);
                for (int k = 1; k <= 4 && exp_steps.size() < cfg.markov_steps; ++k) {
                    const Point& a = c.record(k);
                    const Point& b = c.record(k + 1);
                    exp_steps.push_back((b.t - a.t) * a.x);
                    unif_steps.push_back(b.x / a.x);
                }
            }
            const KsResult re = ks_one_sample(exp_steps, exp_cdf);
            const KsResult ru = ks_one_sample(unif_steps, unif_cdf);
            TestReport tr;
            tr.n_permutations = 0;
            tr.sample_size = cfg.markov_steps;
            tr.alpha = cfg.alpha;
            tr.statistic = re.statistic;
            tr.p_value = re.p_value;
            tr.reject = re.p_value <= cfg.alpha;
            emit_result(st, "markov_exp", 0, rep, cfg.markov_steps, tr, "null");
            if (tr.reject) ++rejections_exp;
            tr.statistic = ru.statistic;
            tr.p_value = ru.p_value;
            tr.reject = ru.p_value <= cfg.alpha;
            emit_result(st, "markov_unif", 0, rep, cfg.markov_steps, tr, "null");
            if (tr.reject) ++rejections_unif;
        }
    } catch (const WindowCapError& e) {
        emit_resource_failure(st, "markov", 0, "window_cap", e.what());
        return;
    }
    const int bound = binomial_upper_quantile(cfg.replicates, cfg.alpha, 0.99);
    for (const auto& [name, rejections] :
         {std::pair<const char*, int>{"markov_exp", rejections_exp},
          std::pair<const char*, int>{"markov_unif", rejections_unif}}) {
        ReplicateSummary s;
        s.check = name;
        s.n = 0;
        s.replicates = cfg.replicates;
        s.rejections = rejections;
        s.null_bound = bound;
        s.reject_threshold = static_cast<int>(std::ceil(0.9 * cfg.replicates));
        s.expected_reject = false;
        s.pass = rejections <= bound;
        emit_summary(st, s, cfg.markov_steps);
    }
    emit_window_stats(st, "markov", 0, ws);
}

void run_lemma2_checks(SuiteState& st) {
    const RunConfig& cfg = *st.cfg;
    const Rect unit{0.0, 1.0, 0.0, 1.0};
    const Rect flat{0.0, 2.0, 0.0, 0.5};
    const Rect big{0.0, 2.0, 0.0, 2.0};

    for (const std::size_t count : {std::size_t{0}, std::size_t{1}, std::size_t{2}}) {
        ReplicateSpec spec;
        spec.check = "lemma2_reflect";
        spec.n = static_cast<int>(count);
        spec.dim = (count + 1) * (count + 1);
        spec.stat = Statistic::energy;
        spec.gen_a = box_given_count_gen(unit, count, cfg.max_attempts, false);
        spec.gen_b = box_given_count_gen(unit, count, cfg.max_attempts, true);
        run_family(st, spec, cfg.draws_per_side);
    }
    {
        constexpr std::size_t kMaxRecords = 6;
        ReplicateSpec spec;
        spec.check = "lemma2_reflect_pooled";
        spec.n = 0;
        spec.dim = 1 + (kMaxRecords + 1) * (kMaxRecords + 1);
        spec.stat = Statistic::energy;
        spec.gen_a = box_pooled_rowmajor_gen(unit, kMaxRecords, false);
        spec.gen_b = box_pooled_rowmajor_gen(unit, kMaxRecords, true);
        run_family(st, spec, cfg.draws_per_side);
    }
    {
        constexpr std::size_t kMaxRecords = 8;
        ReplicateSpec spec;
        spec.check = "lemma2_area_equal";
        spec.n = 0;
        spec.dim = 1 + (kMaxRecords + 1) * (kMaxRecords + 1);
        spec.stat = Statistic::energy;
        spec.gen_a = box_sorted_areas_gen(unit, kMaxRecords);
        spec.gen_b = box_sorted_areas_gen(flat, kMaxRecords);
        run_family(st, spec, cfg.draws_per_side);
    }
    {
        constexpr std::size_t kMaxRecords = 8;
        ReplicateSpec spec;
        spec.check = "lemma2_area_mismatch";
        spec.n = 0;
        spec.dim = 1 + (kMaxRecords + 1) * (kMaxRecords + 1);
        spec.stat = Statistic::energy;
        spec.expected_reject = true;
        spec.gen_a = box_sorted_areas_gen(unit, kMaxRecords);
        spec.gen_b = box_sorted_areas_gen(big, kMaxRecords);
        run_family(st, spec, cfg.draws_per_side);
    }
}

void run_lemma3_checks(SuiteState& st) {
    const RunConfig& cfg = *st.cfg;
    const auto n = std::size_t{2};
    {
        ConditioningWindow window;
        window.target_area = cfg.lemma3_v;
        window.half_width = cfg.lemma3_h;
        ReplicateSpec spec;
        spec.check = "lemma3";
        spec.n = static_cast<int>(n);
        spec.dim = n * n;
        spec.stat = Statistic::energy;
        spec.gen_a = lemma3_closed_gen(n, &window, cfg.max_attempts);
        spec.gen_b = lemma3_box_gen(n, cfg.lemma3_v, cfg.max_attempts);
        run_family(st, spec, cfg.lemma3_rows);
        emit_acceptance_stats(st, "lemma3", static_cast<int>(n), window);
    }

    // Bias control: the accepted-window bias is O(h), so the mean energy
    // statistic must not grow as h shrinks.
    const double hs[3] = {2.0 * cfg.lemma3_h, cfg.lemma3_h, 0.5 * cfg.lemma3_h};
    double means[3] = {0, 0, 0};
    double ses[3] = {0, 0, 0};
    const std::size_t rows = std::min(cfg.lemma3_rows, cfg.energy_cap);
    try {
        for (int hi = 0; hi < 3; ++hi) {
            std::vector<double> stats;
            stats.reserve(cfg.replicates);
            for (int rep = 0; rep < cfg.replicates; ++rep) {
                const std::string stem = "lemma3_trend.h" + std::to_string(hi);
                RandomStream sa(cfg.master_seed, stem + ".a", static_cast<std::uint64_t>(rep));
                RandomStream sb(cfg.master_seed, stem + ".b", static_cast<std::uint64_t>(rep));
                ConditioningWindow window;
                window.target_area = cfg.lemma3_v;
                window.half_width = hs[hi];
                std::vector<double> da;
                std::vector<double> db;
                auto gen_a = lemma3_closed_gen(n, &window, cfg.max_attempts);
                auto gen_b = lemma3_box_gen(n, cfg.lemma3_v, cfg.max_attempts);
                for (std::size_t r = 0; r < rows; ++r) gen_a(sa, da);
                for (std::size_t r = 0; r < rows; ++r) gen_b(sb, db);
                tame_in_place(da);
                tame_in_place(db);
                stats.push_back(energy_statistic(view_of(da, n * n), view_of(db, n * n)));
            }
            double sum = 0;
            for (const double s : stats) sum += s;
            means[hi] = sum / static_cast<double>(stats.size());
            double ss = 0;
            for (const double s : stats) ss += (s - means[hi]) * (s - means[hi]);
            ses[hi] = std::sqrt(ss / (static_cast<double>(stats.size()) - 1.0)) /
                      std::sqrt(static_cast<double>(stats.size()));
        }
    } catch (const AcceptanceRateError& e) {
        emit_resource_failure(st, "lemma3_trend", 2, "acceptance_rate", e.what());
        return;
    }
    const bool pass =
        means[2] - means[0] <= 3.0 * std::sqrt(ses[0] * ses[0] + ses[2] * ses[2]);
    std::ostringstream os;
    os << "trend check=lemma3_trend n=2 N=" << rows << " K=" << cfg.replicates
       << " seed=" << cfg.master_seed << " h0=" << fmt(hs[0]) << " stat0=" << fmt(means[0])
       << " h1=" << fmt(hs[1]) << " stat1=" << fmt(means[1]) << " h2=" << fmt(hs[2])
       << " stat2=" << fmt(means[2]) << " se0=" << fmt(ses[0]) << " se2=" << fmt(ses[2])
       << " pass=" << (pass ? 1 : 0);
    st.records.push_back({"lemma3_trend", 2, 1, -1, os.str()});
    char row[160];
    std::snprintf(row, sizeof(row), "%-24s n=2  stats %.4g -> %.4g -> %.4g %s", "lemma3_trend",
                  means[0], means[1], means[2], pass ? "ok" : "FAIL");
    st.human.push_back({"lemma3_trend", 2, row});
    if (!pass) st.stat_failure = true;
}

void run_moment_checks(SuiteState& st) {
    const RunConfig& cfg = *st.cfg;
    const std::size_t draws = cfg.moment_draws;
    {
        RandomStream s(cfg.master_seed, "moment.m1n", 0);
        std::vector<double> c11;
        std::vector<double> c22;
        std::vector<double> c21;
        c11.reserve(draws);
        c22.reserve(draws);
        c21.reserve(draws);
        for (std::size_t i = 0; i < draws; ++i) {
            const TileMatrix m = sample_m1n_closed(s, 2);
            c11.push_back(m.entry(0, 0));
            c22.push_back(m.entry(1, 1));
            c21.push_back(m.entry(1, 0));
        }
        emit_moment(st, "moment_c11", draws, moment_check(c11, 0.5, 3.0));
        emit_moment(st, "moment_c22", draws, moment_check(c22, 0.5, 3.0));
        emit_moment(st, "moment_c21", draws, moment_check(c21, 0.25, 3.0));
    }
    {
        // E[#records] in a unit-area box: sum_{m>=1} e^-1 H_m / m!.
        RandomStream s(cfg.master_seed, "moment.box", 0);
        const Rect unit{0.0, 1.0, 0.0, 1.0};
        std::vector<double> counts;
        counts.reserve(draws);
        for (std::size_t i = 0; i < draws; ++i) {
            counts.push_back(static_cast<double>(box_records(s, unit).records.size()));
        }
        emit_moment(st, "moment_box_records", draws,
                    moment_check(counts, 0.79659959929705313, 3.0));
    }
    {
        // E[#chain records in [1,2]^2] = integral of e^{-tx} over the window.
        RandomStream s(cfg.master_seed, "moment.window", 0);
        const Rect big{0.0, 2.0, 0.0, 2.0};
        std::vector<double> counts;
        counts.reserve(draws);
        for (std::size_t i = 0; i < draws; ++i) {
            const PointSet pts = sample_ppp(s, big);
            const auto recs = extract_records(pts);
            int k = 0;
            for (const Point& p : recs) {
                if (p.t > 1.0 && p.t < 2.0 && p.x > 1.0 && p.x < 2.0) ++k;
            }
            counts.push_back(static_cast<double>(k));
        }
        emit_moment(st, "moment_window_records", draws,
                    moment_check(counts, 0.12536226538924694, 3.0));
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

void validate(const RunConfig& c) {
    if (!(c.alpha > 0.0 && c.alpha < 0.5)) throw ConfigError("alpha must lie in (0, 0.5)");
    if (c.permutations < 19) throw ConfigError("B must be at least 19");
    if (c.replicates < 1) throw ConfigError("K must be positive");
    if (c.draws_per_side < 1) throw ConfigError("N must be positive");
    if (c.ns.empty()) throw ConfigError("n list must be nonempty");
    for (const int n : c.ns) {
        if (n < 1) throw ConfigError("identity orders must be positive");
    }
    if (!(c.chain.initial_window > 0.0)) throw ConfigError("t0 must be positive");
    if (c.chain.max_doublings < 0) throw ConfigError("max_doublings must be nonnegative");
    if (c.energy_cap < 2) throw ConfigError("energy_cap must be at least 2");
    if (c.moment_draws < 2) throw ConfigError("moment_draws must be at least 2");
    if (c.markov_steps < 1) throw ConfigError("markov_steps must be positive");
    if (c.max_attempts < 1) throw ConfigError("max_attempts must be positive");
    if (!(c.lemma3_v > 0.0) || !(c.lemma3_h > 0.0) || !(c.lemma3_h < c.lemma3_v)) {
        throw ConfigError("lemma3 binning requires 0 < h < v");
    }
    if (c.lemma3_rows < 2) throw ConfigError("lemma3_rows must be at least 2");
    for (const std::string& name : c.identities) {
        make_identity_spec(name, 1);  // throws on unknown names
    }
}

namespace {

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
        throw ConfigError("bad integer for " + key + ": " + value);
    }
    return out;
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double out = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return out;
    } catch (const std::exception&) {
        throw ConfigError("bad number for " + key + ": " + value);
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "1" || value == "true" || value == "yes") return true;
    if (value == "0" || value == "false" || value == "no") return false;
    throw ConfigError("bad boolean for " + key + ": " + value);
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(value);
    while (std::getline(is, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

}  // namespace

void apply_key_value(RunConfig& c, const std::string& key, const std::string& value) {
    if (key == "seed") {
        c.master_seed = parse_u64(key, value);
    } else if (key == "identities") {
        c.identities = split_list(value);
    } else if (key == "n") {
        c.ns.clear();
        for (const std::string& item : split_list(value)) {
            c.ns.push_back(static_cast<int>(parse_u64(key, item)));
        }
    } else if (key == "N") {
        c.draws_per_side = parse_u64(key, value);
    } else if (key == "B") {
        c.permutations = static_cast<int>(parse_u64(key, value));
    } else if (key == "K") {
        c.replicates = static_cast<int>(parse_u64(key, value));
    } else if (key == "alpha") {
        c.alpha = parse_double(key, value);
    } else if (key == "out") {
        c.out_dir = value;
    } else if (key == "emit_samples") {
        c.emit_samples = parse_bool(key, value);
    } else if (key == "t0") {
        c.chain.initial_window = parse_double(key, value);
    } else if (key == "max_doublings") {
        c.chain.max_doublings = static_cast<int>(parse_u64(key, value));
    } else if (key == "energy_cap") {
        c.energy_cap = parse_u64(key, value);
    } else if (key == "moment_draws") {
        c.moment_draws = parse_u64(key, value);
    } else if (key == "markov_steps") {
        c.markov_steps = parse_u64(key, value);
    } else if (key == "max_attempts") {
        c.max_attempts = parse_u64(key, value);
    } else if (key == "lemma3_v") {
        c.lemma3_v = parse_double(key, value);
    } else if (key == "lemma3_h") {
        c.lemma3_h = parse_double(key, value);
    } else if (key == "lemma3_rows") {
        c.lemma3_rows = parse_u64(key, value);
    } else {
        throw ConfigError("unknown config key: " + key);
    }
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    RunConfig config;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto last = line.find_last_not_of(" \t\r");
        line = line.substr(first, last - first + 1);
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(lineno) + " is not key=value");
        }
        apply_key_value(config, line.substr(0, eq), line.substr(eq + 1));
    }
    return config;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

int run_sample(const RunConfig& cfg, std::ostream& log) {
    validate(cfg);
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);

    const std::vector<std::string>& names =
        cfg.identities.empty() ? identity_names() : cfg.identities;
    std::set<std::pair<std::string, int>> written;
    for (const std::string& name : names) {
        for (const int n : cfg.ns) {
            const IdentitySpec spec = make_identity_spec(name, n);
            if (!written.emplace(name, spec.n).second) continue;  // forced-n duplicates
            const fs::path path =
                fs::path(cfg.out_dir) / (name + "_n" + std::to_string(spec.n) + ".csv");
            std::ofstream out(path, std::ios::binary);
            if (!out) throw std::runtime_error("cannot write output file: " + path.string());
            out << "draw";
            for (std::size_t d = 1; d <= spec.output_dim; ++d) out << ",c_" << d;
            out << "\n";
            RandomStream stream(cfg.master_seed, "sample." + name + ".n" + std::to_string(spec.n),
                                0);
            std::vector<double> row;
            for (std::size_t i = 0; i < cfg.draws_per_side; ++i) {
                row.clear();
                sample_identity_row(stream, spec, row, cfg.chain);
                out << i;
                for (const double v : row) out << "," << fmt(v);
                out << "\n";
            }
            if (!out) throw std::runtime_error("write failure on: " + path.string());
            log << "wrote " << path.string() << "\n";
        }
    }
    return kExitPass;
}

int run_test(const RunConfig& cfg, std::ostream& report, std::ostream& log) {
    validate(cfg);
    SuiteState st;
    st.cfg = &cfg;
    std::deque<std::pair<std::string, WindowStats>> wstats;

    run_identity_families(st, wstats);
    if (cfg.identities.empty()) {
        run_m1n_oracle_families(st, wstats);
        run_markov_checks(st);
        run_lemma2_checks(st);
        run_lemma3_checks(st);
        run_moment_checks(st);
    }

    const int code = exit_code_of(st);
    flush_report(st, report, code);
    log << "suite finished with exit code " << code << "\n";
    return code;
}

int run_oracle(const RunConfig& cfg, std::ostream& report, std::ostream& log) {
    validate(cfg);
    SuiteState st;
    st.cfg = &cfg;
    std::deque<std::pair<std::string, WindowStats>> wstats;

    run_m1n_oracle_families(st, wstats);
    {
        ReplicateSpec spec;
        spec.check = "bisectrix_reflection";
        spec.n = 2;
        spec.dim = 4;
        spec.stat = Statistic::energy;
        wstats.emplace_back("reflect", WindowStats{});
        WindowStats* ws = &wstats.back().second;
        ChainOptions chain = cfg.chain;
        spec.gen_a = m1n_geom_gen(2, chain, ws);
        spec.gen_b = reflected_block_gen(chain, ws);
        run_family(st, spec, cfg.draws_per_side);
        emit_window_stats(st, "bisectrix_reflection", 2, *ws);
    }
    {
        ReplicateSpec spec;
        spec.check = "negcontrol_c00";
        spec.n = 1;
        spec.dim = 1;
        spec.stat = Statistic::ks;
        spec.expected_reject = true;
        wstats.emplace_back("c00", WindowStats{});
        WindowStats* ws = &wstats.back().second;
        spec.gen_a = c00_gen(cfg.chain, ws);
        spec.gen_b = c11_gen(cfg.chain, ws);
        run_family(st, spec, cfg.draws_per_side);
        emit_window_stats(st, "negcontrol_c00", 1, *ws);
    }

    const int code = exit_code_of(st);
    flush_report(st, report, code);
    log << "oracle finished with exit code " << code << "\n";
    return code;
}

}  // namespace rectiles
