"""Chain parameters, drive/detuning profiles, gauge transformations.

The chain is a 1D array of N lossy Kerr modes with uniform hopping J and a
chiral phase.  The phase can live either on the coherent drive (a linear
phase gradient psi_j = j*phi, gauge ``DRIVE_PHASE``) or on the hopping
amplitude (gauge ``HOPPING_PHASE``); the two descriptions are related by the
local rotation a_j -> a_j * exp(-i j phi) and share all moduli of
observables.  All dynamics in this package runs in the hopping-phase gauge.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DimensionError, ParameterError


class Profile(enum.Enum):
    HOMOGENEOUS = "homogeneous"
    TANH_BORDER = "tanh_border"


class Gauge(enum.Enum):
    DRIVE_PHASE = "drive_phase"
    HOPPING_PHASE = "hopping_phase"


def default_border_size(n_sites: int) -> int:
    """Border-ramp size used when none is given: 5 at N = 40, ~N/8 otherwise."""
    return max(2, round(n_sites / 8))


@dataclass(frozen=True)
class ChainParams:
    """Static parameters of the driven-dissipative chain (energies in units of J)."""

    N: int
    delta_base: float
    epsilon_base: float
    J: float = 1.0
    phi: float = 0.0
    U: float = 0.0
    kappa: float = 1.0
    N0: int | None = None
    profile: Profile = Profile.TANH_BORDER
    gauge: Gauge = Gauge.HOPPING_PHASE

    def __post_init__(self):
        if self.N < 1:
            raise ParameterError(f"N must be >= 1, got {self.N}")
        if self.kappa < 0:
            raise ParameterError(f"kappa must be >= 0, got {self.kappa}")
        if self.epsilon_base < 0:
            raise ParameterError(f"epsilon_base must be >= 0, got {self.epsilon_base}")
        if self.N0 is None:
            object.__setattr__(self, "N0", default_border_size(self.N))
        if self.N0 < 1:
            raise ParameterError(f"N0 must be >= 1, got {self.N0}")
        if self.profile is Profile.TANH_BORDER and 2 * self.N0 >= self.N:
            raise ParameterError(
                f"tanh border needs 2*N0 < N, got N0={self.N0}, N={self.N}"
            )

    @property
    def bulk_sites(self) -> np.ndarray:
        """1-based site indices strictly inside the border regions, N0 < j < N - N0."""
        return np.arange(self.N0 + 1, self.N - self.N0)


@dataclass(frozen=True)
class SiteProfiles:
    """Per-site drive amplitudes, detunings and drive phases."""

    epsilon: np.ndarray
    delta: np.ndarray
    psi: np.ndarray

    def __post_init__(self):
        n = len(self.epsilon)
        if len(self.delta) != n or len(self.psi) != n:
            raise DimensionError("epsilon, delta, psi must have equal length")


@dataclass(frozen=True)
class EffectiveQuadratic:
    """Per-site linearized parameters of the fluctuation Hamiltonian.

    ``delta_tilde[j] = delta[j] + 4 U |alpha_j|^2 + U`` is the Kerr-shifted
    detuning and ``g[j] = U alpha_j^2`` the induced parametric (two-photon)
    amplitude.
    """

    delta_tilde: np.ndarray
    g: np.ndarray

    def __post_init__(self):
        if len(self.delta_tilde) != len(self.g):
            raise DimensionError("delta_tilde and g must have equal length")

    def __len__(self) -> int:
        return len(self.g)


def build_profiles(params: ChainParams) -> SiteProfiles:
    """Per-site drive/detuning profiles for the configured profile kind.

    For ``TANH_BORDER`` and j <= N/2 the ramps are
    eps_j = eps * tanh(j / N0) and delta_j = delta * tanh^2(j / N0);
    sites j > N/2 take the mirror values of N + 1 - j.  The homogeneous
    profile is constant.  Drive phases are psi_j = j*phi in the drive-phase
    gauge and zero in the hopping-phase gauge.
    """
    n, n0 = params.N, params.N0
    j = np.arange(1, n + 1, dtype=float)
    if params.profile is Profile.HOMOGENEOUS:
        eps = np.full(n, params.epsilon_base)
        delta = np.full(n, params.delta_base)
    else:
        # distance from the nearer chain end, mirrored about the center
        ramp = np.where(j <= n / 2, j, n + 1 - j) / n0
        eps = params.epsilon_base * np.tanh(ramp)
        delta = params.delta_base * np.tanh(ramp) ** 2
    if params.gauge is Gauge.DRIVE_PHASE:
        psi = j * params.phi
    else:
        psi = np.zeros(n)
    return SiteProfiles(epsilon=eps, delta=delta, psi=psi)


def gauge_transform(
    profiles: SiteProfiles, params: ChainParams, target: Gauge
) -> tuple[SiteProfiles, ChainParams]:
    """Move the chiral phase between the drive phases and the hopping phase.

    Identity when the source gauge already equals ``target``.  Site moduli
    |alpha_j| and all correlator moduli are unchanged by construction.
    """
    if params.gauge is target:
        return profiles, params
    j = np.arange(1, params.N + 1, dtype=float)
    if target is Gauge.HOPPING_PHASE:
        # absorb psi_j = j*phi into the hopping amplitude
        psi = np.zeros(params.N)
    else:
        psi = j * params.phi
    new_params = replace(params, gauge=target)
    return SiteProfiles(epsilon=profiles.epsilon, delta=profiles.delta, psi=psi), new_params


def gauge_site_phases(params: ChainParams) -> np.ndarray:
    """Rotation angles theta_j = j*phi of the gauge map a_j -> a_j e^{-i theta_j}."""
    return np.arange(1, params.N + 1, dtype=float) * params.phi


def transform_state_gauge(
    alpha: np.ndarray, G: np.ndarray, F: np.ndarray, theta: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Apply the local rotation b_j -> b_j e^{-i theta_j} to mean fields and correlators."""
    ph = np.exp(-1j * theta)
    alpha_t = alpha * ph
    # G_jk = <b_j^dag b_k> picks up e^{+i theta_j - i theta_k}; F_jk = <b_j b_k> picks up both phases
    G_t = G * np.conj(ph)[:, None] * ph[None, :]
    F_t = F * ph[:, None] * ph[None, :]
    return alpha_t, G_t, F_t


def effective_quadratic(params: ChainParams, alpha: np.ndarray) -> EffectiveQuadratic:
    """Linearized per-site parameters around a mean-field configuration."""
    alpha = np.asarray(alpha, dtype=complex)
    if alpha.shape != (params.N,):
        raise DimensionError(
            f"alpha must have shape ({params.N},), got {alpha.shape}"
        )
    delta = build_profiles(params).delta
    delta_tilde = delta + 4.0 * params.U * np.abs(alpha) ** 2 + params.U
    g = params.U * alpha**2
    return EffectiveQuadratic(delta_tilde=delta_tilde, g=g)


def homogeneous_effective(delta_tilde: float, g: complex, n_sites: int) -> EffectiveQuadratic:
    """Constant-parameter EffectiveQuadratic, handy for bulk/topology studies."""
    return EffectiveQuadratic(
        delta_tilde=np.full(n_sites, float(delta_tilde)),
        g=np.full(n_sites, complex(g)),
    )
