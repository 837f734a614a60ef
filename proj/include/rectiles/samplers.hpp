#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rectiles/records.hpp"
#include "rectiles/rng.hpp"
#include "rectiles/tile_matrix.hpp"

namespace rectiles {

/**
 * Closed-form samplers for both sides of each distributional identity,
 * expressed in independent rate-one exponentials E_1, E_2, ... and
 * uniforms U_1, U_2, ....
 *
 * Every stream-driven sampler consumes variables in the fixed order
 * U_1, E_1, U_2, E_2, ..., followed by whichever kind has surplus. The
 * *_from_vars functions take the variables explicitly, so matched-variable
 * (pathwise) checks are well-defined alongside the equality-in-law checks.
 */

enum class Side { lhs, rhs };

/// Interleaved draw U_1,E_1,U_2,E_2,... then trailing singles.
struct VarPack {
    std::vector<double> us;
    std::vector<double> es;
};
VarPack draw_vars(RandomStream& stream, std::size_t n_uniform, std::size_t n_exponential);

/// M_{1,n}: heights[i] = U_1...U_{i-1}(1 - U_i), widths[j] = E_j / (U_1...U_{j-1}).
TileMatrix m1n_from_vars(std::span<const double> us, std::span<const double> es);
TileMatrix sample_m1n_closed(RandomStream& stream, std::size_t n);

/// lhs(n): (sum_{j<=n} E_j/(U_1...U_j)) * (1 - U_1...U_{n+1}); takes n+1 U's, n E's.
double eq1_lhs_from_vars(std::span<const double> us, std::span<const double> es);
/// rhs(n): (sum_{j<=n+1} E_j/(U_1...U_{j-1})) * (1 - U_1...U_n); takes n U's, n+1 E's.
double eq1_rhs_from_vars(std::span<const double> us, std::span<const double> es);
double sample_eq1(RandomStream& stream, std::size_t n, Side side);

/// 2x2 displays; row-major. Takes U_1, U_2, E_1, E_2.
std::array<double, 4> eq3_from_vars(std::span<const double> us, std::span<const double> es,
                                    Side side);
std::array<double, 4> sample_eq3(RandomStream& stream, Side side);

/// lhs: flatten M_{1,n}; rhs: flatten of its antidiagonal reflection.
std::vector<double> sample_prop1(RandomStream& stream, std::size_t n, Side side);

/// First-row product of M_{1,n} and its reflected counterpart.
double rowprod_from_vars(std::span<const double> us, std::span<const double> es, Side side);
double sample_rowprod(RandomStream& stream, std::size_t n, Side side);

/// (1 - U_1...U_n)(E_1 + E_2/U_1 + ... + E_n/(U_1...U_{n-1})).
double totalarea_from_vars(std::span<const double> us, std::span<const double> es);
double sample_totalarea_closed(RandomStream& stream, std::size_t n);
/// Sum of entries of the chain tile matrix at k = 1; may throw WindowCapError.
double sample_totalarea_geometric(RandomStream& stream, std::size_t n,
                                  const ChainOptions& options = {});

/// Negative controls. The transpose of M_{1,2} is known not to share its
/// law (entry (1,2) has infinite mean, entry (2,1) mean 1/4); C_{0,0},
/// the tile straddling the bisectrix, differs in law from C_{1,1}.
std::vector<double> sample_negcontrol_transpose(RandomStream& stream);
double sample_c00_geometric(RandomStream& stream, const ChainOptions& options = {});
double sample_c11_geometric(RandomStream& stream, const ChainOptions& options = {});

// ---------------------------------------------------------------------------
// Identity catalog
// ---------------------------------------------------------------------------

enum class Identity {
    eq1_lhs,
    eq1_rhs,
    eq2_lhs,
    eq2_rhs,
    eq3_lhs,
    eq3_rhs,
    prop1_lhs,
    prop1_rhs,
    rowprod_lhs,
    rowprod_rhs,
    totalarea_closed,
    totalarea_geom,
    negcontrol_transpose,
    negcontrol_c00,
};

struct IdentitySpec {
    Identity which;
    int n;                   // identity order (forced to 1 for eq2, 2 for eq3/transpose)
    std::size_t output_dim;  // 1 for scalars, n^2 for matrix identities

    std::string name() const;
};

/// Parses a catalog name and validates (name, n). Throws std::invalid_argument.
IdentitySpec make_identity_spec(std::string_view name, int n);

const std::vector<std::string>& identity_names();

/// One draw of the identity; appends output_dim values to row.
void sample_identity_row(RandomStream& stream, const IdentitySpec& spec,
                         std::vector<double>& row, const ChainOptions& options = {});

/// A batch of i.i.d. draws, row-major N x output_dim.
struct SampleBatch {
    IdentitySpec spec;
    std::size_t rows = 0;
    std::vector<double> data;
    std::uint64_t master_seed = 0;
    std::string stream_label;
};

SampleBatch sample_identity_batch(RandomStream& stream, const IdentitySpec& spec, std::size_t rows,
                                  const ChainOptions& options = {});

}  // namespace rectiles
