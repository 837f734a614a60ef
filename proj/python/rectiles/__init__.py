"""Record-induced rectangular tilings of the planar Poisson process.

Exact simulation of the south-west record chain and its tile-area matrices,
closed-form exponential-uniform samplers for each side of the distributional
identities, and the statistical machinery (KS / energy permutation tests)
used to verify them. The heavy lifting lives in the compiled ``_core``
extension; this package re-exports its public surface.
"""

from rectiles._core import (  # noqa: F401
    AcceptanceRateError,
    BoxRecordResult,
    ChainOptions,
    Point,
    RandomStream,
    Rect,
    RecordChain,
    RunConfig,
    StreamId,
    TestReport,
    TileMatrix,
    WindowCapError,
    antidiagonal_reflect,
    binomial_upper_quantile,
    box_records,
    box_records_given_count,
    dominates_sw,
    energy_statistic,
    extract_records,
    hyperbolic_shift,
    identity_names,
    ks_one_sample,
    ks_two_sample,
    permutation_test,
    reflect_bisectrix,
    run_oracle_suite,
    run_sample_csv,
    run_test_suite,
    sample_eq1,
    sample_eq3,
    sample_identity,
    sample_m1n,
    sample_ppp,
    sample_prop1,
    sample_rowprod,
    sample_totalarea_closed,
    sample_totalarea_geometric,
    simulate_quadrant_chain,
    tame,
    tile_matrix_from_chain,
    transpose,
)

__version__ = "0.1.0"
