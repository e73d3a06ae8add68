"""Robust shifted POD: low-rank co-moving frames plus sparse noise."""

from ._robust_spod import (
    AlmNoiseUpdate,
    DivergedError,
    Method,
    MuPreset,
    SolverConfig,
    SpatialGrid,
    TransportOperator,
    alm_noise_weight,
    alm_noise_weight_snapshots,
    apply_shift,
    decompose,
    default_mu,
    estimate_rank,
    generate,
    l1_norm,
    lagrange_weights,
    nuclear_norm,
    pod_truncation_error,
    read_matrix,
    singular_values,
    soft_threshold,
    svt,
    write_matrix,
)

__all__ = [
    "AlmNoiseUpdate",
    "DivergedError",
    "Method",
    "MuPreset",
    "SolverConfig",
    "SpatialGrid",
    "TransportOperator",
    "alm_noise_weight",
    "alm_noise_weight_snapshots",
    "apply_shift",
    "decompose",
    "default_mu",
    "estimate_rank",
    "generate",
    "l1_norm",
    "lagrange_weights",
    "nuclear_norm",
    "pod_truncation_error",
    "read_matrix",
    "singular_values",
    "soft_threshold",
    "svt",
    "write_matrix",
]

__version__ = "0.1.0"
