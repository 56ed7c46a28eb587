"""Constrained Langevin samplers on level sets.

Thin wrapper over the compiled ``_lss`` extension.
"""

from ._lss import (  # noqa: F401
    ChainReport,
    ConfigError,
    FlowConfig,
    LssError,
    Model,
    __version__,
    ellipse,
    linear,
    mean_curvature,
    pa_divergence,
    philox4x32,
    pi,
    projection,
    psi,
    reference_density,
    run_chain,
    sphere,
    theta,
    theta_skew,
    tv_distance,
    verify,
)

__all__ = [
    "ChainReport",
    "ConfigError",
    "FlowConfig",
    "LssError",
    "Model",
    "ellipse",
    "linear",
    "mean_curvature",
    "pa_divergence",
    "philox4x32",
    "pi",
    "projection",
    "psi",
    "reference_density",
    "run_chain",
    "sphere",
    "theta",
    "theta_skew",
    "tv_distance",
    "verify",
]
