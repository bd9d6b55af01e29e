"""Chiral driven-dissipative Kerr chain: Gaussian dynamics, phase diagrams,
non-Hermitian topology diagnostics and an exact single-site benchmark."""

__version__ = "0.1.0"

from .model import (  # noqa: F401
    ChainParams,
    EffectiveQuadratic,
    Gauge,
    Profile,
    SiteProfiles,
    build_profiles,
    effective_quadratic,
    gauge_transform,
)
from .dynamics import (  # noqa: F401
    GaussianState,
    Outcome,
    SolverOptions,
    SteadyStateReport,
    find_steady_state,
    fluctuation_ratio,
    gaussian_rhs,
    integrate,
    meanfield_rhs,
)
