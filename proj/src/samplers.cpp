#include "rectiles/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rectiles {

VarPack draw_vars(RandomStream& stream, std::size_t n_uniform, std::size_t n_exponential) {
    VarPack pack;
    pack.us.reserve(n_uniform);
    pack.es.reserve(n_exponential);
    const std::size_t rounds = std::max(n_uniform, n_exponential);
    for (std::size_t i = 0; i < rounds; ++i) {
        if (i < n_uniform) pack.us.push_back(stream.next_uniform());
        if (i < n_exponential) pack.es.push_back(stream.next_exponential());
    }
    return pack;
}

TileMatrix m1n_from_vars(std::span<const double> us, std::span<const double> es) {
    const std::size_t n = us.size();
    if (n == 0 || es.size() != n) {
        throw std::invalid_argument("m1n_from_vars: need n uniforms and n exponentials");
    }
    std::vector<double> heights(n);
    std::vector<double> widths(n);
    double prefix = 1.0;  // U_1 ... U_{i-1}
    for (std::size_t i = 0; i < n; ++i) {
        heights[i] = prefix * (1.0 - us[i]);
        widths[i] = es[i] / prefix;
        prefix *= us[i];
    }
    return TileMatrix(std::move(heights), std::move(widths));
}

TileMatrix sample_m1n_closed(RandomStream& stream, std::size_t n) {
    const VarPack v = draw_vars(stream, n, n);
    return m1n_from_vars(v.us, v.es);
}

double eq1_lhs_from_vars(std::span<const double> us, std::span<const double> es) {
    const std::size_t n = es.size();
    if (n == 0 || us.size() != n + 1) {
        throw std::invalid_argument("eq1_lhs_from_vars: need n+1 uniforms and n exponentials");
    }
    double prefix = 1.0;
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        prefix *= us[j];
        sum += es[j] / prefix;  // E_j / (U_1...U_j)
    }
    prefix *= us[n];
    return sum * (1.0 - prefix);
}

double eq1_rhs_from_vars(std::span<const double> us, std::span<const double> es) {
    const std::size_t n = us.size();
    if (n == 0 || es.size() != n + 1) {
        throw std::invalid_argument("eq1_rhs_from_vars: need n uniforms and n+1 exponentials");
    }
    double prefix = 1.0;
    double sum = 0.0;
    for (std::size_t j = 0; j <= n; ++j) {
        sum += es[j] / prefix;  // E_j / (U_1...U_{j-1})
        if (j < n) prefix *= us[j];
    }
    return sum * (1.0 - prefix);
}

double sample_eq1(RandomStream& stream, std::size_t n, Side side) {
    if (n == 0) throw std::invalid_argument("sample_eq1: n must be positive");
    if (side == Side::lhs) {
        const VarPack v = draw_vars(stream, n + 1, n);
        return eq1_lhs_from_vars(v.us, v.es);
    }
    const VarPack v = draw_vars(stream, n, n + 1);
    return eq1_rhs_from_vars(v.us, v.es);
}

std::array<double, 4> eq3_from_vars(std::span<const double> us, std::span<const double> es,
                                    Side side) {
    if (us.size() != 2 || es.size() != 2) {
        throw std::invalid_argument("eq3_from_vars: need two uniforms and two exponentials");
    }
    const double u1 = us[0];
    const double u2 = us[1];
    const double e1 = es[0];
    const double e2 = es[1];
    const double ne = (1.0 - u1) * e2 / u1;  // north-east entry, common to both displays
    const double sw = u1 * (1.0 - u2) * e1;  // south-west entry, common to both displays
    if (side == Side::lhs) {
        return {(1.0 - u1) * e1, ne, sw, (1.0 - u2) * e2};
    }
    return {(1.0 - u2) * e2, ne, sw, (1.0 - u1) * e1};
}

std::array<double, 4> sample_eq3(RandomStream& stream, Side side) {
    const VarPack v = draw_vars(stream, 2, 2);
    return eq3_from_vars(v.us, v.es, side);
}

std::vector<double> sample_prop1(RandomStream& stream, std::size_t n, Side side) {
    if (n == 0) throw std::invalid_argument("sample_prop1: n must be positive");
    const TileMatrix m = sample_m1n_closed(stream, n);
    if (side == Side::lhs) return m.entries();
    return antidiagonal_reflect(m).entries();
}

double rowprod_from_vars(std::span<const double> us, std::span<const double> es, Side side) {
    const std::size_t n = us.size();
    if (n == 0 || es.size() != n) {
        throw std::invalid_argument("rowprod_from_vars: need n uniforms and n exponentials");
    }
    if (side == Side::lhs) {
        // Product of the first row: prod_j (1-U_1) E_j / (U_1...U_{j-1}),
        // i.e. E_1...E_n (1-U_1)^n / (U_1^{n-1} U_2^{n-2} ... U_{n-1}).
        double value = 1.0;
        double prefix = 1.0;  // U_1 ... U_{j-1}
        for (std::size_t j = 0; j < n; ++j) {
            value *= (1.0 - us[0]) * es[j] / prefix;
            prefix *= us[j];
        }
        return value;
    }
    // Product of the last column: prod_i U_1...U_{i-1}(1-U_i) E_n/(U_1...U_{n-1}),
    // i.e. E_n^n (1-U_1)...(1-U_n) / (U_1 U_2^2 ... U_{n-1}^{n-1}).
    double full = 1.0;  // U_1 ... U_{n-1}
    for (std::size_t i = 0; i + 1 < n; ++i) full *= us[i];
    const double last_width = es[n - 1] / full;
    double value = 1.0;
    double prefix = 1.0;  // U_1 ... U_{i-1}
    for (std::size_t i = 0; i < n; ++i) {
        value *= prefix * (1.0 - us[i]) * last_width;
        prefix *= us[i];
    }
    return value;
}

double sample_rowprod(RandomStream& stream, std::size_t n, Side side) {
    const VarPack v = draw_vars(stream, n, n);
    return rowprod_from_vars(v.us, v.es, side);
}

double totalarea_from_vars(std::span<const double> us, std::span<const double> es) {
    const std::size_t n = us.size();
    if (n == 0 || es.size() != n) {
        throw std::invalid_argument("totalarea_from_vars: need n uniforms and n exponentials");
    }
    double prefix = 1.0;
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        sum += es[j] / prefix;
        prefix *= us[j];
    }
    return (1.0 - prefix) * sum;
}

double sample_totalarea_closed(RandomStream& stream, std::size_t n) {
    const VarPack v = draw_vars(stream, n, n);
    return totalarea_from_vars(v.us, v.es);
}

double sample_totalarea_geometric(RandomStream& stream, std::size_t n,
                                  const ChainOptions& options) {
    if (n == 0) throw std::invalid_argument("sample_totalarea_geometric: n must be positive");
    const RecordChain chain =
        simulate_quadrant_chain(stream, 0, static_cast<int>(n) + 1, options);
    return tile_matrix_from_chain(chain, 1, n).entry_sum();
}

std::vector<double> sample_negcontrol_transpose(RandomStream& stream) {
    return transpose(sample_m1n_closed(stream, 2)).entries();
}

double sample_c00_geometric(RandomStream& stream, const ChainOptions& options) {
    const RecordChain chain = simulate_quadrant_chain(stream, -1, 1, options);
    const Point& r0 = chain.record(0);
    const Point& r1 = chain.record(1);
    return (r0.x - r1.x) * (r1.t - r0.t);
}

double sample_c11_geometric(RandomStream& stream, const ChainOptions& options) {
    const RecordChain chain = simulate_quadrant_chain(stream, 0, 2, options);
    const Point& r1 = chain.record(1);
    const Point& r2 = chain.record(2);
    return (r1.x - r2.x) * (r2.t - r1.t);
}

// ---------------------------------------------------------------------------
// Catalog
// ---------------------------------------------------------------------------

namespace {

struct CatalogRow {
    Identity which;
    const char* name;
    int forced_n;  // 0 = free
    bool matrix_dim;
};

constexpr CatalogRow kCatalog[] = {
    {Identity::eq1_lhs, "eq1_lhs", 0, false},
    {Identity::eq1_rhs, "eq1_rhs", 0, false},
    {Identity::eq2_lhs, "eq2_lhs", 1, false},
    {Identity::eq2_rhs, "eq2_rhs", 1, false},
    {Identity::eq3_lhs, "eq3_lhs", 2, true},
    {Identity::eq3_rhs, "eq3_rhs", 2, true},
    {Identity::prop1_lhs, "prop1_lhs", 0, true},
    {Identity::prop1_rhs, "prop1_rhs", 0, true},
    {Identity::rowprod_lhs, "rowprod_lhs", 0, false},
    {Identity::rowprod_rhs, "rowprod_rhs", 0, false},
    {Identity::totalarea_closed, "totalarea_closed", 0, false},
    {Identity::totalarea_geom, "totalarea_geom", 0, false},
    {Identity::negcontrol_transpose, "negcontrol_transpose", 2, true},
    {Identity::negcontrol_c00, "negcontrol_c00", 1, false},
};

const CatalogRow& catalog_row(Identity which) {
    for (const CatalogRow& row : kCatalog) {
        if (row.which == which) return row;
    }
    throw std::logic_error("identity catalog: unknown identity");
}

}  // namespace

std::string IdentitySpec::name() const { return catalog_row(which).name; }

IdentitySpec make_identity_spec(std::string_view name, int n) {
    for (const CatalogRow& row : kCatalog) {
        if (name == row.name) {
            int effective = row.forced_n != 0 ? row.forced_n : n;
            if (effective < 1) {
                throw std::invalid_argument("identity order n must be positive");
            }
            const std::size_t dim =
                row.matrix_dim ? static_cast<std::size_t>(effective) * effective : 1;
            return IdentitySpec{row.which, effective, dim};
        }
    }
    throw std::invalid_argument("unknown identity name: " + std::string(name));
}

const std::vector<std::string>& identity_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const CatalogRow& row : kCatalog) out.emplace_back(row.name);
        return out;
    }();
    return names;
}

void sample_identity_row(RandomStream& stream, const IdentitySpec& spec, std::vector<double>& row,
                         const ChainOptions& options) {
    const auto n = static_cast<std::size_t>(spec.n);
    switch (spec.which) {
        case Identity::eq1_lhs:
        case Identity::eq2_lhs:
            row.push_back(sample_eq1(stream, n, Side::lhs));
            return;
        case Identity::eq1_rhs:
        case Identity::eq2_rhs:
            row.push_back(sample_eq1(stream, n, Side::rhs));
            return;
        case Identity::eq3_lhs:
        case Identity::eq3_rhs: {
            const auto m = sample_eq3(stream, spec.which == Identity::eq3_lhs ? Side::lhs : Side::rhs);
            row.insert(row.end(), m.begin(), m.end());
            return;
        }
        case Identity::prop1_lhs:
        case Identity::prop1_rhs: {
            const auto v =
                sample_prop1(stream, n, spec.which == Identity::prop1_lhs ? Side::lhs : Side::rhs);
            row.insert(row.end(), v.begin(), v.end());
            return;
        }
        case Identity::rowprod_lhs:
            row.push_back(sample_rowprod(stream, n, Side::lhs));
            return;
        case Identity::rowprod_rhs:
            row.push_back(sample_rowprod(stream, n, Side::rhs));
            return;
        case Identity::totalarea_closed:
            row.push_back(sample_totalarea_closed(stream, n));
            return;
        case Identity::totalarea_geom:
            row.push_back(sample_totalarea_geometric(stream, n, options));
            return;
        case Identity::negcontrol_transpose: {
            const auto v = sample_negcontrol_transpose(stream);
            row.insert(row.end(), v.begin(), v.end());
            return;
        }
        case Identity::negcontrol_c00:
            row.push_back(sample_c00_geometric(stream, options));
            return;
    }
    throw std::logic_error("sample_identity_row: unhandled identity");
}

SampleBatch sample_identity_batch(RandomStream& stream, const IdentitySpec& spec, std::size_t rows,
                                  const ChainOptions& options) {
    if (rows == 0) throw std::invalid_argument("sample_identity_batch: rows must be positive");
    SampleBatch batch;
    batch.spec = spec;
    batch.rows = rows;
    batch.master_seed = stream.master_seed();
    batch.stream_label = stream.id().label;
    batch.data.reserve(rows * spec.output_dim);
    for (std::size_t i = 0; i < rows; ++i) {
        sample_identity_row(stream, spec, batch.data, options);
    }
    return batch;
}

}  // namespace rectiles
