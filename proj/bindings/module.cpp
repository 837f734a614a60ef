#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "rectiles/conditional.hpp"
#include "rectiles/geometry.hpp"
#include "rectiles/records.hpp"
#include "rectiles/rng.hpp"
#include "rectiles/runner.hpp"
#include "rectiles/samplers.hpp"
#include "rectiles/stattest.hpp"
#include "rectiles/tile_matrix.hpp"

namespace py = pybind11;
using namespace rectiles;

namespace {

Side side_from_string(const std::string& s) {
    if (s == "lhs") return Side::lhs;
    if (s == "rhs") return Side::rhs;
    throw std::invalid_argument("side must be 'lhs' or 'rhs'");
}

Statistic statistic_from_string(const std::string& s) {
    if (s == "energy") return Statistic::energy;
    if (s == "ks") return Statistic::ks;
    throw std::invalid_argument("statistic must be 'energy' or 'ks'");
}

std::vector<std::vector<double>> nested_entries(const TileMatrix& m) {
    std::vector<std::vector<double>> out(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        out[i].resize(m.size());
        for (std::size_t j = 0; j < m.size(); ++j) out[i][j] = m.entry(i, j);
    }
    return out;
}

struct FlatSample {
    std::vector<double> data;
    std::size_t dim = 1;
};

FlatSample flatten_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw std::invalid_argument("sample must be nonempty");
    FlatSample out;
    out.dim = rows.front().size();
    if (out.dim == 0) throw std::invalid_argument("rows must be nonempty");
    out.data.reserve(rows.size() * out.dim);
    for (const auto& row : rows) {
        if (row.size() != out.dim) throw std::invalid_argument("ragged sample rows");
        out.data.insert(out.data.end(), row.begin(), row.end());
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Record-induced rectangular tilings of the planar Poisson process: "
              "closed-form samplers and distributional verification.";

    py::class_<StreamId>(m, "StreamId")
        .def(py::init<std::string, std::uint64_t>(), py::arg("label"), py::arg("index") = 0)
        .def_readonly("label", &StreamId::label)
        .def_readonly("index", &StreamId::index);

    py::class_<RandomStream>(m, "RandomStream")
        .def(py::init([](std::uint64_t seed, const std::string& label, std::uint64_t index) {
                 return RandomStream(seed, label, index);
             }),
             py::arg("master_seed"), py::arg("label"), py::arg("index") = 0)
        .def("uniform", &RandomStream::next_uniform)
        .def("exponential", &RandomStream::next_exponential)
        .def("poisson", &RandomStream::next_poisson_count, py::arg("mean"))
        .def("below", &RandomStream::next_below, py::arg("bound"))
        .def_property_readonly("counter", &RandomStream::counter)
        .def_property_readonly("master_seed", &RandomStream::master_seed);

    py::class_<Point>(m, "Point")
        .def(py::init<double, double>(), py::arg("t"), py::arg("x"))
        .def_readonly("t", &Point::t)
        .def_readonly("x", &Point::x)
        .def("__repr__", [](const Point& p) {
            std::ostringstream os;
            os << "Point(t=" << p.t << ", x=" << p.x << ")";
            return os.str();
        });

    py::class_<Rect>(m, "Rect")
        .def(py::init<double, double, double, double>(), py::arg("t_lo"), py::arg("t_hi"),
             py::arg("x_lo"), py::arg("x_hi"))
        .def_readonly("t_lo", &Rect::t_lo)
        .def_readonly("t_hi", &Rect::t_hi)
        .def_readonly("x_lo", &Rect::x_lo)
        .def_readonly("x_hi", &Rect::x_hi)
        .def("area", &Rect::area)
        .def("valid", &Rect::valid);

    m.def("sample_ppp", [](RandomStream& s, const Rect& r) { return sample_ppp(s, r).points; },
          py::arg("stream"), py::arg("rect"),
          "Unit-intensity Poisson sample on the rectangle.");
    m.def("extract_records", [](const std::vector<Point>& pts) {
              return extract_records(PointSet{pts});
          },
          py::arg("points"), "South-west minimal points, sorted by time.");
    m.def("hyperbolic_shift", &hyperbolic_shift, py::arg("p"), py::arg("lambda_"));
    m.def("reflect_bisectrix", &reflect_bisectrix, py::arg("p"));
    m.def("dominates_sw", &dominates_sw, py::arg("a"), py::arg("b"));

    py::class_<TileMatrix>(m, "TileMatrix")
        .def(py::init<std::vector<double>, std::vector<double>>(), py::arg("heights"),
             py::arg("widths"))
        .def_property_readonly("n", &TileMatrix::size)
        .def("entry", &TileMatrix::entry, py::arg("i"), py::arg("j"))
        .def_property_readonly("heights",
                               [](const TileMatrix& t) {
                                   return std::vector<double>(t.heights().begin(),
                                                              t.heights().end());
                               })
        .def_property_readonly("widths",
                               [](const TileMatrix& t) {
                                   return std::vector<double>(t.widths().begin(),
                                                              t.widths().end());
                               })
        .def_property_readonly("entries", &nested_entries)
        .def_property_readonly("flat", [](const TileMatrix& t) { return t.entries(); })
        .def("entry_sum", &TileMatrix::entry_sum)
        .def("spanned_area", &TileMatrix::spanned_area);

    m.def("antidiagonal_reflect", &antidiagonal_reflect, py::arg("matrix"));
    m.def("transpose", &transpose, py::arg("matrix"));

    py::class_<ChainOptions>(m, "ChainOptions")
        .def(py::init([](double t0, int max_doublings) {
                 ChainOptions o;
                 o.initial_window = t0;
                 o.max_doublings = max_doublings;
                 return o;
             }),
             py::arg("t0") = 16.0, py::arg("max_doublings") = 48)
        .def_readwrite("initial_window", &ChainOptions::initial_window)
        .def_readwrite("max_doublings", &ChainOptions::max_doublings);

    py::register_exception<WindowCapError>(m, "WindowCapError", PyExc_RuntimeError);
    py::register_exception<AcceptanceRateError>(m, "AcceptanceRateError", PyExc_RuntimeError);

    py::class_<RecordChain>(m, "RecordChain")
        .def_readonly("records", &RecordChain::records)
        .def_readonly("split_index", &RecordChain::split_index)
        .def_readonly("final_window", &RecordChain::final_window)
        .def_readonly("expansions", &RecordChain::expansions)
        .def_property_readonly("label_min", &RecordChain::label_min)
        .def_property_readonly("label_max", &RecordChain::label_max)
        .def("record", &RecordChain::record, py::arg("label"));

    m.def("simulate_quadrant_chain", &simulate_quadrant_chain, py::arg("stream"),
          py::arg("k_min"), py::arg("k_max"), py::arg("options") = ChainOptions{},
          "Exact record chain r_{k_min}..r_{k_max} of the quadrant process.");
    m.def("tile_matrix_from_chain", &tile_matrix_from_chain, py::arg("chain"), py::arg("k"),
          py::arg("n"));

    py::class_<BoxRecordResult>(m, "BoxRecordResult")
        .def_readonly("records", &BoxRecordResult::records)
        .def_readonly("tiles", &BoxRecordResult::tiles);

    m.def("box_records", &box_records, py::arg("stream"), py::arg("rect"));
    m.def("box_records_given_count", &box_records_given_count, py::arg("stream"), py::arg("rect"),
          py::arg("n_records"), py::arg("max_attempts") = 10000000ull);

    // closed-form samplers
    m.def("sample_m1n", &sample_m1n_closed, py::arg("stream"), py::arg("n"));
    m.def("sample_eq1",
          [](RandomStream& s, std::size_t n, const std::string& side) {
              return sample_eq1(s, n, side_from_string(side));
          },
          py::arg("stream"), py::arg("n"), py::arg("side"));
    m.def("sample_eq3",
          [](RandomStream& s, const std::string& side) {
              const auto a = sample_eq3(s, side_from_string(side));
              return std::vector<double>(a.begin(), a.end());
          },
          py::arg("stream"), py::arg("side"));
    m.def("sample_prop1",
          [](RandomStream& s, std::size_t n, const std::string& side) {
              return sample_prop1(s, n, side_from_string(side));
          },
          py::arg("stream"), py::arg("n"), py::arg("side"));
    m.def("sample_rowprod",
          [](RandomStream& s, std::size_t n, const std::string& side) {
              return sample_rowprod(s, n, side_from_string(side));
          },
          py::arg("stream"), py::arg("n"), py::arg("side"));
    m.def("sample_totalarea_closed", &sample_totalarea_closed, py::arg("stream"), py::arg("n"));
    m.def("sample_totalarea_geometric", &sample_totalarea_geometric, py::arg("stream"),
          py::arg("n"), py::arg("options") = ChainOptions{});

    m.def("identity_names", [] { return identity_names(); });
    m.def("sample_identity",
          [](RandomStream& s, const std::string& name, int n, std::size_t rows) {
              const IdentitySpec spec = make_identity_spec(name, n);
              const SampleBatch batch = sample_identity_batch(s, spec, rows);
              std::vector<std::vector<double>> out(rows);
              for (std::size_t i = 0; i < rows; ++i) {
                  out[i].assign(batch.data.begin() + i * spec.output_dim,
                                batch.data.begin() + (i + 1) * spec.output_dim);
              }
              return out;
          },
          py::arg("stream"), py::arg("name"), py::arg("n"), py::arg("rows"),
          "Batch of i.i.d. draws from one identity side, one row per draw.");

    // statistics
    m.def("tame", [](const std::vector<double>& v) { return tame(v); }, py::arg("values"));
    m.def("ks_two_sample",
          [](const std::vector<double>& a, const std::vector<double>& b) {
              const KsResult r = ks_two_sample(a, b);
              return py::make_tuple(r.statistic, r.p_value);
          },
          py::arg("a"), py::arg("b"));
    m.def("ks_one_sample",
          [](const std::vector<double>& a, const std::function<double(double)>& cdf) {
              const KsResult r = ks_one_sample(a, cdf);
              return py::make_tuple(r.statistic, r.p_value);
          },
          py::arg("sample"), py::arg("cdf"));
    m.def("energy_statistic",
          [](const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b) {
              const FlatSample fa = flatten_rows(a);
              const FlatSample fb = flatten_rows(b);
              return energy_statistic(view_of(fa.data, fa.dim), view_of(fb.data, fb.dim));
          },
          py::arg("a"), py::arg("b"));

    py::class_<TestReport>(m, "TestReport")
        .def_readonly("check", &TestReport::check)
        .def_readonly("statistic", &TestReport::statistic)
        .def_readonly("p_value", &TestReport::p_value)
        .def_readonly("n_permutations", &TestReport::n_permutations)
        .def_readonly("sample_size", &TestReport::sample_size)
        .def_readonly("reject", &TestReport::reject)
        .def_readonly("transform", &TestReport::transform);

    m.def("permutation_test",
          [](const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b,
             const std::string& statistic, int n_permutations, double alpha, RandomStream& stream,
             std::size_t energy_cap) {
              const FlatSample fa = flatten_rows(a);
              const FlatSample fb = flatten_rows(b);
              return permutation_test(view_of(fa.data, fa.dim), view_of(fb.data, fb.dim),
                                      statistic_from_string(statistic), n_permutations, alpha,
                                      stream, PermutationOptions{energy_cap});
          },
          py::arg("a"), py::arg("b"), py::arg("statistic"), py::arg("n_permutations"),
          py::arg("alpha"), py::arg("stream"), py::arg("energy_cap") = 1024);

    m.def("binomial_upper_quantile", &binomial_upper_quantile, py::arg("trials"), py::arg("p"),
          py::arg("level"));

    // batch runner
    py::class_<RunConfig>(m, "RunConfig")
        .def(py::init<>())
        .def_readwrite("master_seed", &RunConfig::master_seed)
        .def_readwrite("identities", &RunConfig::identities)
        .def_readwrite("ns", &RunConfig::ns)
        .def_readwrite("draws_per_side", &RunConfig::draws_per_side)
        .def_readwrite("permutations", &RunConfig::permutations)
        .def_readwrite("replicates", &RunConfig::replicates)
        .def_readwrite("alpha", &RunConfig::alpha)
        .def_readwrite("out_dir", &RunConfig::out_dir)
        .def_readwrite("emit_samples", &RunConfig::emit_samples)
        .def_readwrite("energy_cap", &RunConfig::energy_cap)
        .def_readwrite("moment_draws", &RunConfig::moment_draws)
        .def_readwrite("markov_steps", &RunConfig::markov_steps)
        .def_readwrite("lemma3_rows", &RunConfig::lemma3_rows);

    m.def("run_test_suite",
          [](const RunConfig& cfg) {
              std::ostringstream report;
              std::ostringstream log;
              const int code = run_test(cfg, report, log);
              return py::make_tuple(code, report.str());
          },
          py::arg("config"), "Run the verification suite; returns (exit_code, report_text).");
    m.def("run_oracle_suite",
          [](const RunConfig& cfg) {
              std::ostringstream report;
              std::ostringstream log;
              const int code = run_oracle(cfg, report, log);
              return py::make_tuple(code, report.str());
          },
          py::arg("config"), "Run the geometric cross-validation; returns (exit_code, report_text).");
    m.def("run_sample_csv",
          [](const RunConfig& cfg) {
              std::ostringstream log;
              return run_sample(cfg, log);
          },
          py::arg("config"), "Write identity sample CSVs into config.out_dir.");
}
