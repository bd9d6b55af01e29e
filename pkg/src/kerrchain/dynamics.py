"""Gaussian-ansatz equations of motion and steady-state search.

The variational state keeps the mean fields alpha_j = <a_j> together with the
fluctuation correlators G_jk = <b_j^dag b_k> and F_jk = <b_j b_k>, where
b_j = a_j - alpha_j.  Quartic Kerr terms are closed by Wick factorization, so
the right-hand side is polynomial in (alpha, G, F).  Integration is adaptive
embedded Runge-Kutta (Dormand-Prince 4/5) from the photon vacuum; G and F are
re-projected onto Hermitian/symmetric form after every accepted step.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.integrate import RK45

from .errors import DimensionError, StiffnessError
from .model import (
    ChainParams,
    Gauge,
    SiteProfiles,
    build_profiles,
    gauge_transform,
)


@dataclass
class GaussianState:
    """Time-stamped variational state (mean fields + second moments)."""

    t: float
    alpha: np.ndarray
    G: np.ndarray
    F: np.ndarray

    @classmethod
    def vacuum(cls, n_sites: int) -> "GaussianState":
        return cls(
            t=0.0,
            alpha=np.zeros(n_sites, dtype=complex),
            G=np.zeros((n_sites, n_sites), dtype=complex),
            F=np.zeros((n_sites, n_sites), dtype=complex),
        )

    @property
    def n_sites(self) -> int:
        return len(self.alpha)

    @property
    def total_density(self) -> float:
        return float(np.sum(np.abs(self.alpha) ** 2))

    @property
    def sup_norm(self) -> float:
        return max(
            float(np.max(np.abs(self.alpha))) if self.alpha.size else 0.0,
            float(np.max(np.abs(self.G))),
            float(np.max(np.abs(self.F))),
        )

    def copy(self) -> "GaussianState":
        return GaussianState(self.t, self.alpha.copy(), self.G.copy(), self.F.copy())


class Outcome(enum.Enum):
    CONVERGED = "converged"
    OSCILLATING = "oscillating"
    DIVERGED = "diverged"
    TIMED_OUT = "timed_out"


@dataclass(frozen=True)
class SolverOptions:
    """Integrator and steady-state detection knobs (times in units of 1/J)."""

    dt_init: float | None = None
    rel_tol: float = 1e-9
    abs_tol: float = 1e-11
    t_max: float = 200.0
    tol_ss: float = 1e-6
    ss_window: float = 1.0
    sample_dt: float | None = None
    max_density: float = 1e12
    osc_band: float = 1e-4
    tail_fraction: float = 0.25


@dataclass
class Trajectory:
    """Sampled states plus the per-step convergence monitor."""

    samples: list[GaussianState]
    monitor_t: np.ndarray
    monitor_residual: np.ndarray
    monitor_density: np.ndarray
    final: GaussianState
    converged: bool
    diverged: bool
    t_converged: float | None


@dataclass
class SteadyStateReport:
    outcome: Outcome
    state: GaussianState
    residual: float
    t_converged: float | None
    envelope: tuple[float, float]


# ---------------------------------------------------------------------------
# right-hand sides
# ---------------------------------------------------------------------------


def _drive_vector(params: ChainParams, profiles: SiteProfiles) -> np.ndarray:
    # drive enters d alpha_j/dt as -i eps_j e^{-i psi_j}
    return profiles.epsilon * np.exp(-1j * profiles.psi)


def _hop_phase(params: ChainParams) -> float:
    # in the drive-phase gauge the hopping amplitude is real
    return params.phi if params.gauge is Gauge.HOPPING_PHASE else 0.0


def _shift_up(v: np.ndarray) -> np.ndarray:
    """v_{j+1} with open boundary (zero past the last site)."""
    out = np.empty_like(v)
    out[:-1] = v[1:]
    out[-1] = 0.0
    return out


def _shift_down(v: np.ndarray) -> np.ndarray:
    """v_{j-1} with open boundary (zero before the first site)."""
    out = np.empty_like(v)
    out[1:] = v[:-1]
    out[0] = 0.0
    return out


def _alpha_rhs(alpha, G_diag, F_diag, drive, delta, U, J, ephi_m, ephi_p, kappa):
    nl = np.abs(alpha) ** 2 * alpha + 2.0 * alpha * G_diag + np.conj(alpha) * F_diag
    hop = J * (_shift_up(alpha) * ephi_m + _shift_down(alpha) * ephi_p)
    return (
        -1j * (drive + (delta + U) * alpha + 2.0 * U * nl + hop)
        - 0.5 * kappa * alpha
    )


def _gaussian_rhs_arrays(alpha, G, F, drive, delta, U, J, phi, kappa):
    """dalpha/dt, dG/dt, dF/dt of the Wick-factorized equations of motion."""
    ephi_m = np.exp(-1j * phi)
    ephi_p = np.exp(1j * phi)
    g_diag = np.diagonal(G).copy()
    f_diag = np.diagonal(F).copy()
    abs2 = np.abs(alpha) ** 2

    dalpha = _alpha_rhs(alpha, g_diag, f_diag, drive, delta, U, J, ephi_m, ephi_p, kappa)

    # X_jk is the displayed half of dG_jk/dt; the full derivative is X + X^dagger,
    # which keeps G exactly Hermitian.
    G_rowdn = np.zeros_like(G)
    G_rowdn[1:, :] = G[:-1, :]  # G_{j-1,k}
    G_colup = np.zeros_like(G)
    G_colup[:, :-1] = G[:, 1:]  # G_{j,k+1}
    X = (
        1j
        * U
        * (
            2.0 * (np.conj(alpha) ** 2)[:, None] * F
            + 4.0 * abs2[:, None] * G
            + 2.0 * F * np.conj(f_diag)[:, None]
            + 4.0 * g_diag[:, None] * G
        )
        + 1j * delta[:, None] * G
        + 1j * J * ephi_m * (G_rowdn - G_colup)
        - 0.5 * kappa * G
    )
    dG = X + X.conj().T

    # Y_jk is the displayed half of dF_jk/dt; the full derivative is Y + Y^T,
    # which keeps F exactly symmetric.
    F_colup = np.zeros_like(F)
    F_colup[:, :-1] = F[:, 1:]  # F_{j,k+1}
    F_coldn = np.zeros_like(F)
    F_coldn[:, 1:] = F[:, :-1]  # F_{j,k-1}
    Y = (
        -1j
        * U
        * (
            4.0 * abs2[None, :] * F
            + 2.0 * (alpha**2)[:, None] * G
            + 4.0 * g_diag[:, None] * F
            + 2.0 * G.T * f_diag[None, :]
            + F
            + np.diag(alpha**2 + f_diag)
        )
        - 1j * delta[:, None] * F
        - 1j * J * (F_colup * ephi_m + F_coldn * ephi_p)
        - 0.5 * kappa * F
    )
    dF = Y + Y.T

    return dalpha, dG, dF


def gaussian_rhs(
    state: GaussianState, params: ChainParams, profiles: SiteProfiles
) -> GaussianState:
    """Time derivative of a Gaussian state under the full nonlinear equations."""
    n = params.N
    if state.alpha.shape != (n,) or state.G.shape != (n, n) or state.F.shape != (n, n):
        raise DimensionError("state dimensions do not match params.N")
    dalpha, dG, dF = _gaussian_rhs_arrays(
        state.alpha,
        state.G,
        state.F,
        _drive_vector(params, profiles),
        profiles.delta,
        params.U,
        params.J,
        _hop_phase(params),
        params.kappa,
    )
    return GaussianState(t=state.t, alpha=dalpha, G=dG, F=dF)


def meanfield_rhs(
    alpha: np.ndarray, params: ChainParams, profiles: SiteProfiles
) -> np.ndarray:
    """Coherent-state-ansatz derivative: the alpha line with G = F = 0."""
    alpha = np.asarray(alpha, dtype=complex)
    if alpha.shape != (params.N,):
        raise DimensionError("alpha length does not match params.N")
    zeros = np.zeros(params.N)
    return _alpha_rhs(
        alpha,
        zeros,
        zeros,
        _drive_vector(params, profiles),
        profiles.delta,
        params.U,
        params.J,
        np.exp(-1j * _hop_phase(params)),
        np.exp(1j * _hop_phase(params)),
        params.kappa,
    )


def linear_steady_alpha(params: ChainParams, profiles: SiteProfiles | None = None) -> np.ndarray:
    """Steady mean field of the U = 0 chain from a direct linear solve.

    Solves (M - i kappa/2) alpha = -eps_vec where M generates the linear part
    of the alpha equation of motion (detunings on the diagonal, hopping with
    the gauge's phases on the off-diagonals).
    """
    if profiles is None:
        profiles = build_profiles(params)
    n = params.N
    phi = _hop_phase(params)
    m = np.diag(profiles.delta.astype(complex))
    idx = np.arange(n - 1)
    m[idx, idx + 1] = params.J * np.exp(-1j * phi)
    m[idx + 1, idx] = params.J * np.exp(1j * phi)
    m -= 0.5j * params.kappa * np.eye(n)
    return np.linalg.solve(m, -_drive_vector(params, profiles))


def fluctuation_ratio(state: GaussianState) -> np.ndarray:
    """Validity check of the Gaussian ansatz: r_j = G_jj / |alpha_j|^2.

    Sites with exactly vanishing mean field report infinity.
    """
    abs2 = np.abs(state.alpha) ** 2
    g_diag = np.real(np.diagonal(state.G))
    out = np.full(len(abs2), np.inf)
    nz = abs2 > 0
    out[nz] = g_diag[nz] / abs2[nz]
    return out


# ---------------------------------------------------------------------------
# time integration
# ---------------------------------------------------------------------------


def _pack(state: GaussianState) -> np.ndarray:
    return np.concatenate([state.alpha, state.G.ravel(), state.F.ravel()])


def _unpack(t: float, y: np.ndarray, n: int) -> GaussianState:
    return GaussianState(
        t=t,
        alpha=y[:n].copy(),
        G=y[n : n + n * n].reshape(n, n).copy(),
        F=y[n + n * n :].reshape(n, n).copy(),
    )


def _project(y: np.ndarray, n: int) -> None:
    """Re-enforce G Hermitian / F symmetric in place after an accepted step."""
    G = y[n : n + n * n].reshape(n, n)
    F = y[n + n * n :].reshape(n, n)
    G[:] = 0.5 * (G + G.conj().T)
    F[:] = 0.5 * (F + F.T)


def integrate(
    initial: GaussianState | None,
    params: ChainParams,
    profiles: SiteProfiles | None = None,
    opts: SolverOptions | None = None,
    *,
    ansatz: str = "gaussian",
    stop_at_steady: bool = True,
) -> Trajectory:
    """Adaptive RK45 integration from ``initial`` (vacuum when None).

    Samples are stored on a uniform grid of stride ``opts.sample_dt`` via the
    integrator's dense output.  Crossing the density guard is recorded in the
    returned trajectory (not raised) so parameter sweeps can continue past
    unstable points; a step-size underflow raises :class:`StiffnessError`.
    """
    if opts is None:
        opts = SolverOptions()
    if profiles is None:
        profiles = build_profiles(params)
    if opts.t_max <= 0:
        raise ValueError("t_max must be positive")
    n = params.N
    if initial is None:
        initial = GaussianState.vacuum(n)
    if ansatz not in ("gaussian", "meanfield"):
        raise ValueError(f"unknown ansatz {ansatz!r}")
    meanfield = ansatz == "meanfield"

    drive = _drive_vector(params, profiles)
    delta = profiles.delta
    phi = _hop_phase(params)

    if meanfield:
        y0 = initial.alpha.astype(complex)

        def fun(t, y):
            return _alpha_rhs(
                y,
                0.0,
                0.0,
                drive,
                delta,
                params.U,
                params.J,
                np.exp(-1j * phi),
                np.exp(1j * phi),
                params.kappa,
            )

        def to_state(t, y):
            z = np.zeros((n, n), dtype=complex)
            return GaussianState(t=t, alpha=y.copy(), G=z, F=z.copy())

    else:
        y0 = _pack(initial)

        def fun(t, y):
            a = y[:n]
            G = y[n : n + n * n].reshape(n, n)
            F = y[n + n * n :].reshape(n, n)
            da, dG, dF = _gaussian_rhs_arrays(
                a, G, F, drive, delta, params.U, params.J, phi, params.kappa
            )
            return np.concatenate([da, dG.ravel(), dF.ravel()])

        def to_state(t, y):
            return _unpack(t, y, n)

    rk = RK45(
        fun,
        initial.t,
        y0,
        initial.t + opts.t_max,
        rtol=opts.rel_tol,
        atol=opts.abs_tol,
        first_step=opts.dt_init,
    )

    sample_dt = opts.sample_dt if opts.sample_dt is not None else opts.t_max / 400.0
    samples: list[GaussianState] = [to_state(rk.t, rk.y)]
    next_sample = rk.t + sample_dt

    mon_t: list[float] = [rk.t]
    mon_resid: list[float] = [float(np.max(np.abs(fun(rk.t, rk.y))))]
    mon_dens: list[float] = [float(np.sum(np.abs(rk.y[:n]) ** 2))]

    converged = False
    diverged = False
    t_converged: float | None = None
    window_start: float | None = None

    while rk.status == "running":
        msg = rk.step()
        if rk.status == "failed":
            if not np.all(np.isfinite(rk.y)):
                diverged = True
                break
            raise StiffnessError(f"integrator step failed at t={rk.t:.4g}: {msg}")

        if not np.all(np.isfinite(rk.y)):
            diverged = True
            break
        if not meanfield:
            _project(rk.y, n)

        density = float(np.sum(np.abs(rk.y[:n]) ** 2))
        if density > opts.max_density:
            diverged = True
            mon_t.append(rk.t)
            mon_dens.append(density)
            mon_resid.append(np.inf)
            break

        # rk.f is the FSAL derivative at the accepted point
        resid = float(np.max(np.abs(rk.f)))
        sup_y = float(np.max(np.abs(rk.y)))
        mon_t.append(rk.t)
        mon_resid.append(resid)
        mon_dens.append(density)

        # dense-output sampling on the uniform grid
        if rk.t >= next_sample:
            sol = rk.dense_output()
            while next_sample <= rk.t:
                samples.append(to_state(next_sample, sol(next_sample)))
                next_sample += sample_dt

        # sustained-window steady-state test
        if resid < opts.tol_ss * (1.0 + sup_y):
            if window_start is None:
                window_start = rk.t
            elif rk.t - window_start >= opts.ss_window:
                converged = True
                t_converged = window_start
                if stop_at_steady:
                    break
        else:
            window_start = None

    final = to_state(rk.t, rk.y)
    if samples[-1].t < final.t:
        samples.append(final.copy())
    return Trajectory(
        samples=samples,
        monitor_t=np.asarray(mon_t),
        monitor_residual=np.asarray(mon_resid),
        monitor_density=np.asarray(mon_dens),
        final=final,
        converged=converged,
        diverged=diverged,
        t_converged=t_converged,
    )


def find_steady_state(
    params: ChainParams,
    profiles: SiteProfiles | None = None,
    opts: SolverOptions | None = None,
    *,
    ansatz: str = "gaussian",
    initial: GaussianState | None = None,
) -> SteadyStateReport:
    """Integrate from the vacuum and classify the long-time behaviour.

    Outcomes: CONVERGED when the sup-norm of the right-hand side stays below
    tol_ss * (1 + sup-norm of the state) over a window of 1/J; DIVERGED when
    the total density crosses the guard; otherwise OSCILLATING when the tail
    envelope of the total density is bounded but wider than the convergence
    band, and TIMED_OUT for a bounded drift that never settles.
    """
    if opts is None:
        opts = SolverOptions()
    if profiles is None:
        profiles = build_profiles(params)
    # canonical internal gauge: hopping phase
    if params.gauge is Gauge.DRIVE_PHASE:
        profiles, params = gauge_transform(profiles, params, Gauge.HOPPING_PHASE)

    traj = integrate(
        initial, params, profiles, opts, ansatz=ansatz, stop_at_steady=True
    )
    return report_from_trajectory(traj, params, profiles, opts, ansatz=ansatz)


def report_from_trajectory(
    traj: Trajectory,
    params: ChainParams,
    profiles: SiteProfiles,
    opts: SolverOptions,
    *,
    ansatz: str = "gaussian",
) -> SteadyStateReport:
    """Classify an already-computed trajectory (same rules as find_steady_state)."""
    final = traj.final

    # min/max of the total density over the trailing window of the run
    t_end = traj.monitor_t[-1]
    if traj.converged and traj.t_converged is not None:
        t_tail = traj.t_converged
    else:
        t_tail = t_end - opts.tail_fraction * opts.t_max
    tail = traj.monitor_density[traj.monitor_t >= t_tail]
    if tail.size == 0:
        tail = traj.monitor_density[-1:]
    envelope = (float(np.min(tail)), float(np.max(tail)))

    if traj.diverged:
        return SteadyStateReport(
            outcome=Outcome.DIVERGED,
            state=final,
            residual=float(traj.monitor_residual[-1]),
            t_converged=None,
            envelope=envelope,
        )

    if ansatz == "meanfield":
        rhs_final = meanfield_rhs(final.alpha, params, profiles)
        residual = float(np.max(np.abs(rhs_final)))
    else:
        d = gaussian_rhs(final, params, profiles)
        residual = max(
            float(np.max(np.abs(d.alpha))),
            float(np.max(np.abs(d.G))),
            float(np.max(np.abs(d.F))),
        )

    if traj.converged:
        return SteadyStateReport(
            outcome=Outcome.CONVERGED,
            state=final,
            residual=residual,
            t_converged=traj.t_converged,
            envelope=envelope,
        )

    env_min, env_max = envelope
    env_mean = 0.5 * (env_min + env_max)
    if env_max - env_min > opts.osc_band * (1.0 + env_mean):
        outcome = Outcome.OSCILLATING
    else:
        outcome = Outcome.TIMED_OUT
    return SteadyStateReport(
        outcome=outcome,
        state=final,
        residual=residual,
        t_converged=None,
        envelope=envelope,
    )
