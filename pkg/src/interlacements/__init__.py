"""Continuous-time random interlacements on transient weighted graphs.

The package builds finite windows out of infinite graphs, collapses the
complement onto a single star state, simulates the resulting occupation
fields three independent ways, computes the matching potential theory by
dense linear algebra, and statistically checks the distributional identity
tying occupation times to the Gaussian free field.
"""

from .gff import (
    CovarianceError,
    GaussianSampleBatch,
    cholesky_with_jitter,
    covariance_hash,
    sample_gff,
    shifted_square_field,
)
from .graph import (
    STAR,
    CollapsedChain,
    GraphError,
    GraphGenerator,
    WeightedWindow,
    bary_tree,
    build_window,
    collapse,
    from_edges,
    internal_distances,
    lattice,
    read_edge_list,
    transition_matrix,
    vertices_by_distance,
)
from .interlace import (
    ExcursionRecord,
    FieldBatch,
    OccupationField,
    interlacement_set,
    sample_excursion_soup,
    sample_excursion_soup_batch,
    sample_field_batch,
    sample_hitting_soup,
    sample_hitting_soup_batch,
    simulate_collapse,
    simulate_collapse_batch,
    trace_excursions,
)
from .potential import (
    ConvergenceFailure,
    EquilibriumMeasure,
    GreenMatrix,
    LaplaceConditionError,
    PotentialError,
    PotentialFunction,
    equilibrium,
    feynman_kac,
    green_killed,
    green_limit,
    green_resolvent,
    hitting_probability,
    laplace_exact_finite,
    laplace_exact_limit,
    resolvent_check,
)
from .reporting import Check, TestReport, check_abs, check_pvalue, check_se
from .rng import BLOCK_SIZE, block_counts, block_generator, map_blocks
from .verify import (
    asymptotics_test,
    default_coords,
    isomorphism_test,
    kolmogorov_sf,
    laplace_test,
    sampler_agreement_test,
    shifted_isomorphism_test,
    two_sample_ks,
    vacant_test,
)

__all__ = [
    "BLOCK_SIZE",
    "STAR",
    "Check",
    "CollapsedChain",
    "ConvergenceFailure",
    "CovarianceError",
    "EquilibriumMeasure",
    "ExcursionRecord",
    "FieldBatch",
    "GaussianSampleBatch",
    "GraphError",
    "GraphGenerator",
    "GreenMatrix",
    "LaplaceConditionError",
    "OccupationField",
    "PotentialError",
    "PotentialFunction",
    "TestReport",
    "WeightedWindow",
    "asymptotics_test",
    "bary_tree",
    "block_counts",
    "block_generator",
    "build_window",
    "check_abs",
    "check_pvalue",
    "check_se",
    "cholesky_with_jitter",
    "collapse",
    "covariance_hash",
    "default_coords",
    "equilibrium",
    "feynman_kac",
    "from_edges",
    "green_killed",
    "green_limit",
    "green_resolvent",
    "hitting_probability",
    "interlacement_set",
    "internal_distances",
    "isomorphism_test",
    "kolmogorov_sf",
    "laplace_exact_finite",
    "laplace_exact_limit",
    "laplace_test",
    "lattice",
    "map_blocks",
    "read_edge_list",
    "resolvent_check",
    "sample_excursion_soup",
    "sample_excursion_soup_batch",
    "sample_field_batch",
    "sample_gff",
    "sample_hitting_soup",
    "sample_hitting_soup_batch",
    "sampler_agreement_test",
    "shifted_isomorphism_test",
    "shifted_square_field",
    "simulate_collapse",
    "simulate_collapse_batch",
    "trace_excursions",
    "transition_matrix",
    "two_sample_ks",
    "vacant_test",
    "vertices_by_distance",
]
