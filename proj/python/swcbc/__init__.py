"""Galerkin shallow-water solver with characteristic boundary conditions."""

from ._swcbc import (
    Error,
    ValidationError,
    __version__,
    case_names,
    convergence,
    gauss_rule,
    normalize_config,
    riemann_forward,
    riemann_inverse,
    run,
    temporal_order,
)

__all__ = [
    "Error",
    "ValidationError",
    "__version__",
    "case_names",
    "convergence",
    "gauss_rule",
    "normalize_config",
    "riemann_forward",
    "riemann_inverse",
    "run",
    "temporal_order",
]
