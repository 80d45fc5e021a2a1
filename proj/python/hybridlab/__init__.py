"""Stability charts and control-based continuation for delayed hybrid tests."""

from ._hybridlab import (
    RigError,
    SolverError,
    ValidationError,
    __version__,
    assembly_frf,
    default_config,
    delayed_model,
    fourier_fit,
    implicit_euler_transfer,
    normalize_config,
    rightmost_eigenvalue,
    run_chart,
    run_frf,
    run_validation,
    scalar_dde_rightmost,
    solve_point,
    stability_chart,
)

__all__ = [
    "RigError",
    "SolverError",
    "ValidationError",
    "__version__",
    "assembly_frf",
    "default_config",
    "delayed_model",
    "fourier_fit",
    "implicit_euler_transfer",
    "normalize_config",
    "rightmost_eigenvalue",
    "run_chart",
    "run_frf",
    "run_validation",
    "scalar_dde_rightmost",
    "solve_point",
    "stability_chart",
]
