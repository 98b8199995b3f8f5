"""Solver and verification suite for the translating-soliton Dirichlet problem.

Library layout mirrors the pipeline: one-dimensional profiles feed the
grim-reaper barrier machinery, which feeds the strip and disk solvers,
the Perron disk-lifting cross-check, and the property-check battery.
The ``stripsoliton`` command line drives the same code paths and writes
CSV/JSON reports with matplotlib figures beside them.
"""

from .errors import (
    ConfigError,
    ConvexityError,
    DomainError,
    MonotonicityError,
    ProfileError,
    SolveFailure,
    StripSolitonError,
    WidthError,
)
from .profiles import (
    Alpha,
    GrimReaper,
    PlanarProfile,
    RadialProfile,
    as_alpha,
    grim_reaper,
    halfwidth,
    integrate_bowl,
    integrate_profile,
    profile_covering,
    reaper_domain_halfwidth,
    reaper_eval,
)

__version__ = "0.1.0"

__all__ = [
    "Alpha",
    "GrimReaper",
    "PlanarProfile",
    "RadialProfile",
    "as_alpha",
    "grim_reaper",
    "halfwidth",
    "integrate_bowl",
    "integrate_profile",
    "profile_covering",
    "reaper_domain_halfwidth",
    "reaper_eval",
    "StripSolitonError",
    "DomainError",
    "ProfileError",
    "ConvexityError",
    "WidthError",
    "SolveFailure",
    "MonotonicityError",
    "ConfigError",
    "__version__",
]
