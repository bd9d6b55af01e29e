"""Exception types shared across the package."""


class KerrChainError(Exception):
    """Base class for all package errors."""


class ParameterError(KerrChainError, ValueError):
    """Invalid chain or solver parameters."""


class DimensionError(KerrChainError, ValueError):
    """Array argument does not match the chain size."""


class StiffnessError(KerrChainError, RuntimeError):
    """Adaptive integrator step size underflowed."""


class DivergenceError(KerrChainError, RuntimeError):
    """State norm exceeded the divergence guard."""


class TruncationError(KerrChainError, RuntimeError):
    """Fock-space tail populations exceed the admissible tolerance."""


class GapClosingError(KerrChainError, RuntimeError):
    """det H(k) passes too close to the origin for an integer winding."""


class SingularMatrixError(KerrChainError, RuntimeError):
    """Requested matrix inverse does not exist (gap closing / instability)."""


class StabilityError(KerrChainError, RuntimeError):
    """Linearized dynamics is not stable; offending eigenvalue reported."""


class ResolutionError(KerrChainError, RuntimeError):
    """Scan step too coarse to resolve the requested transition."""


class ConfigError(KerrChainError, ValueError):
    """Run configuration could not be parsed or validated."""
