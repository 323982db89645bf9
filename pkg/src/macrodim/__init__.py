"""Large-scale (macroscopic) fractal dimension toolkit.

Exact minimal-cost integer-endpoint covers of discrete time sets, the
associated dimension estimator, fractional Brownian motion synthesis,
occupation-histogram local times, and the level/sojourn set constructors
tying them together.
"""

from .coverdim import (
    Block,
    CoverCost,
    DimEstimate,
    DiscreteSet,
    InsufficientDataError,
    IntegerInterval,
    block_of,
    default_rho_grid,
    estimate_dim,
    nu,
    nu_bruteforce,
    nu_profile,
    nu_tilde,
    optimal_cover,
    partial_sum,
    restrict,
    write_cover_csv,
)
from .fbm import (
    GridSpec,
    Hurst,
    SamplePath,
    check_self_similarity,
    check_stationary_increments,
    derive_seed,
    fgn_cov,
    generate_increments_batch,
    generate_path,
)
from .occupation import (
    FStat,
    LocalTimeField,
    SpaceGrid,
    ZStat,
    build_local_time_field,
    default_bin_width,
    expected_L0,
    f_partial,
    mc_mean_L0,
    occupation_histogram,
    scaling_check,
    spatial_regularity_probe,
    z_inf,
    z_stat,
)
from .pathsets import level_set, make_A_alpha, make_B_alpha, make_lacunary, sojourn_set
from .reports import KSReport

__version__ = "0.1.0"

__all__ = [
    "Block",
    "CoverCost",
    "DimEstimate",
    "DiscreteSet",
    "FStat",
    "GridSpec",
    "Hurst",
    "InsufficientDataError",
    "IntegerInterval",
    "KSReport",
    "LocalTimeField",
    "SamplePath",
    "SpaceGrid",
    "ZStat",
    "block_of",
    "build_local_time_field",
    "check_self_similarity",
    "check_stationary_increments",
    "default_bin_width",
    "default_rho_grid",
    "derive_seed",
    "estimate_dim",
    "expected_L0",
    "f_partial",
    "fgn_cov",
    "generate_increments_batch",
    "generate_path",
    "level_set",
    "make_A_alpha",
    "make_B_alpha",
    "make_lacunary",
    "mc_mean_L0",
    "nu",
    "nu_bruteforce",
    "nu_profile",
    "nu_tilde",
    "occupation_histogram",
    "optimal_cover",
    "partial_sum",
    "restrict",
    "scaling_check",
    "sojourn_set",
    "spatial_regularity_probe",
    "write_cover_csv",
    "z_inf",
    "z_stat",
]
