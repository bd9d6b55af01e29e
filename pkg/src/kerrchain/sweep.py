"""Phase-diagram sweeps, phase classification, critical drives and scaling.

Every grid point is an independent vacuum-start steady-state computation, so
sweeps parallelize over a process pool with deterministic, order-independent
results.  Classification: a point is II (coexistence) when any bulk site
carries local winding 1; otherwise the mean density is compared against the
log-midpoint of the bulk-density window that supports winding 1, which
separates the low- (I) and high-density (III) branches.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .dynamics import Outcome, SolverOptions, find_steady_state
from .errors import ResolutionError
from .model import ChainParams, build_profiles, effective_quadratic
from .topology import NU_UNKNOWN, local_winding_profile


class Phase:
    I = "I"
    II = "II"
    III = "III"
    UNSTABLE = "unstable"


@dataclass
class PhasePoint:
    """One steady-state record of a (delta, epsilon) sweep."""

    delta: float
    epsilon: float
    outcome: Outcome
    mean_density: float
    max_fluct: float
    nu_profile: np.ndarray
    phase: str
    density_profile: np.ndarray
    fluct_profile: np.ndarray
    alpha_abs: np.ndarray
    t_converged: float | None = None


@dataclass
class PhaseDiagram:
    delta_grid: np.ndarray
    epsilon_grid: np.ndarray
    points: list[list[PhasePoint]]  # indexed [i_delta][i_epsilon]

    def flat(self) -> list[PhasePoint]:
        return [pt for row in self.points for pt in row]


@dataclass
class CriticalScan:
    """Per-site critical drives and the coexistence-window boundaries."""

    delta: float
    epsilons: np.ndarray
    eps_c_per_site: np.ndarray
    eps_c1: float
    eps_c2: float
    bulk_range: tuple[int, int]
    alpha_abs: np.ndarray  # |alpha*_j| on the scanned grid, shape (n_eps, N)
    nu_profiles: np.ndarray  # shape (n_eps, N)


@dataclass
class ScalingFit:
    sizes: np.ndarray
    derivatives: np.ndarray
    eps_critical: np.ndarray
    exponent_a: float
    exponent_err: float
    fit_residual: float
    xi: float | None = None


def cpu_workers(requested: int | None = None) -> int:
    """Worker count: explicit argument, else KERRCHAIN_WORKERS, else cpu count."""
    if requested is not None and requested > 0:
        return requested
    env = os.environ.get("KERRCHAIN_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------


def winding_density_window(delta: float, params: ChainParams) -> tuple[float, float] | None:
    """Bulk-density window (x_lo, x_hi) supporting local winding 1.

    Solves 4 U^2 x^2 = (delta + U + 4 U x + 2 J cos(phi))^2 + kappa^2/4, the
    condition for det H(k=0) to cross the real axis; between its roots the
    homogeneous bulk at density x is in the amplifying phase.  None when the
    window does not exist (e.g. U = 0).
    """
    u, jc = params.U, 2.0 * params.J * math.cos(params.phi)
    if u == 0.0:
        return None
    # (-12 U^2) x^2 + b x + c > 0 between the roots
    d0 = delta + u + jc
    b = -8.0 * u * d0
    c = -(d0**2) - 0.25 * params.kappa**2
    aa = -12.0 * u * u
    disc = b * b - 4.0 * aa * c
    if disc <= 0:
        return None
    r1 = (-b + math.sqrt(disc)) / (2.0 * aa)
    r2 = (-b - math.sqrt(disc)) / (2.0 * aa)
    lo, hi = min(r1, r2), max(r1, r2)
    if hi <= 0:
        return None
    return max(lo, 0.0), hi


def density_split(delta: float, params: ChainParams) -> float:
    """Log-midpoint density separating the low and high branches.

    Uses the geometric mean of the winding-window edges; infinite when no
    window exists (a linear chain never reaches the high-density branch).
    """
    window = winding_density_window(delta, params)
    if window is None or window[0] <= 0:
        return math.inf
    return math.sqrt(window[0] * window[1])


def classify_phase(point: PhasePoint, params: ChainParams) -> str:
    """I / II / III / unstable decision for a computed sweep point."""
    if point.outcome is not Outcome.CONVERGED:
        return Phase.UNSTABLE
    bulk = params.bulk_sites - 1  # 0-based
    nu_bulk = point.nu_profile[bulk]
    if np.any(nu_bulk == 1):
        return Phase.II
    if point.mean_density < density_split(point.delta, params):
        return Phase.I
    return Phase.III


# ---------------------------------------------------------------------------
# sweep points
# ---------------------------------------------------------------------------


def phase_point(
    delta: float,
    epsilon: float,
    params: ChainParams,
    opts: SolverOptions | None = None,
) -> PhasePoint:
    """Steady state, observables and phase label at one (delta, epsilon)."""
    p = replace(params, delta_base=float(delta), epsilon_base=float(epsilon))
    report = find_steady_state(p, opts=opts)
    state = report.state
    dens = np.abs(state.alpha) ** 2
    fluct = np.real(np.diagonal(state.G))
    if report.outcome is Outcome.CONVERGED:
        nu = local_winding_profile(effective_quadratic(p, state.alpha), p)
    else:
        nu = np.full(p.N, NU_UNKNOWN, dtype=np.int64)
    point = PhasePoint(
        delta=float(delta),
        epsilon=float(epsilon),
        outcome=report.outcome,
        mean_density=float(np.mean(dens)),
        max_fluct=float(np.max(fluct)) if len(fluct) else 0.0,
        nu_profile=nu,
        phase=Phase.UNSTABLE,
        density_profile=dens,
        fluct_profile=fluct,
        alpha_abs=np.abs(state.alpha),
        t_converged=report.t_converged,
    )
    point.phase = classify_phase(point, p)
    return point


def _phase_point_task(args):
    i, j, delta, epsilon, params, opts = args
    return i, j, phase_point(delta, epsilon, params, opts)


def phase_diagram(
    delta_grid,
    epsilon_grid,
    params: ChainParams,
    workers: int | None = None,
    opts: SolverOptions | None = None,
) -> PhaseDiagram:
    """Evaluate phase_point over the Cartesian grid, points in parallel."""
    delta_grid = np.atleast_1d(np.asarray(delta_grid, dtype=float))
    epsilon_grid = np.atleast_1d(np.asarray(epsilon_grid, dtype=float))
    if delta_grid.size == 0 or epsilon_grid.size == 0:
        raise ValueError("sweep grids must be nonempty")
    tasks = [
        (i, j, d, e, params, opts)
        for i, d in enumerate(delta_grid)
        for j, e in enumerate(epsilon_grid)
    ]
    grid: list[list[PhasePoint | None]] = [
        [None] * len(epsilon_grid) for _ in delta_grid
    ]
    n_workers = cpu_workers(workers)
    if n_workers <= 1 or len(tasks) == 1:
        results = map(_phase_point_task, tasks)
        for i, j, pt in results:
            grid[i][j] = pt
    else:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            for i, j, pt in pool.map(_phase_point_task, tasks, chunksize=1):
                grid[i][j] = pt
    return PhaseDiagram(delta_grid=delta_grid, epsilon_grid=epsilon_grid, points=grid)


# ---------------------------------------------------------------------------
# critical drives
# ---------------------------------------------------------------------------


def _alpha_profiles_at(
    epsilons, delta, params, opts, workers
) -> dict[float, PhasePoint]:
    eps_list = sorted(set(float(e) for e in epsilons))
    diagram = phase_diagram([delta], eps_list, params, workers=workers, opts=opts)
    return {e: pt for e, pt in zip(eps_list, diagram.points[0])}


def _gradient_argmax(eps: np.ndarray, values: np.ndarray) -> tuple[float, float, int]:
    """(eps_at_max, max_gradient, index) from central differences on a sorted grid."""
    grad = np.gradient(values, eps)
    i = int(np.argmax(np.abs(grad)))
    return float(eps[i]), float(abs(grad[i])), i


def critical_drive_scan(
    delta: float,
    epsilon_range: tuple[float, float],
    step: float,
    params: ChainParams,
    opts: SolverOptions | None = None,
    *,
    fine_step: float = 0.02,
    sites: list[int] | None = None,
    workers: int | None = None,
) -> CriticalScan:
    """Upward drive sweep at fixed detuning with bracketed refinement.

    eps_c^j maximizes the finite-difference gradient of |alpha*_j| over the
    drive; eps_c1 is the first drive where any bulk site reaches winding 1
    and eps_c2 the first where the bulk winding has returned to 0 everywhere.
    ``sites`` restricts the per-site refinement (1-based indices); the
    boundary drives always use the full bulk.
    """
    lo, hi = float(epsilon_range[0]), float(epsilon_range[1])
    if not (hi > lo) or step <= 0:
        raise ValueError("epsilon_range must be increasing and step positive")
    n = params.N
    bulk = params.bulk_sites
    focus = list(bulk if sites is None else sites)

    cache = _alpha_profiles_at(np.arange(lo, hi + 0.5 * step, step), delta, params, opts, workers)

    # iterative local refinement around each focus site's gradient maximum
    while True:
        eps = np.array(sorted(cache.keys()))
        wanted: set[float] = set()
        for j in focus:
            aj = np.array([cache[e].alpha_abs[j - 1] for e in eps])
            _, _, i = _gradient_argmax(eps, aj)
            for k in (i - 1, i):
                if 0 <= k < len(eps) - 1 and eps[k + 1] - eps[k] > fine_step * 1.001:
                    mid = 0.5 * (eps[k] + eps[k + 1])
                    wanted.add(round(mid, 9))
        wanted -= set(cache.keys())
        if not wanted:
            break
        cache.update(_alpha_profiles_at(np.array(sorted(wanted)), delta, params, opts, workers))

    eps = np.array(sorted(cache.keys()))
    alpha_abs = np.vstack([cache[e].alpha_abs for e in eps])
    nu_profiles = np.vstack([cache[e].nu_profile for e in eps])

    eps_c = np.full(n, np.nan)
    for j in focus:
        e_c, g_max, i = _gradient_argmax(eps, alpha_abs[:, j - 1])
        if i == 0 or i == len(eps) - 1:
            raise ResolutionError(
                f"site {j}: gradient maximum at the scan boundary; widen epsilon_range"
            )
        grads = np.abs(np.gradient(alpha_abs[:, j - 1], eps))
        if g_max < 2.0 * np.median(grads):
            raise ResolutionError(
                f"site {j}: no dominant gradient (plateau); reduce the scan step"
            )
        eps_c[j - 1] = e_c

    bulk0 = bulk - 1
    any_one = np.array([np.any(row[bulk0] == 1) for row in nu_profiles])
    eps_c1 = math.nan
    eps_c2 = math.nan
    if np.any(any_one):
        i1 = int(np.argmax(any_one))
        eps_c1 = float(eps[i1])
        after = np.where(~any_one & (np.arange(len(eps)) > i1))[0]
        # require the winding to stay off for the rest of the scanned range
        for i2 in after:
            if not np.any(any_one[i2:]):
                eps_c2 = float(eps[i2])
                break

    return CriticalScan(
        delta=float(delta),
        epsilons=eps,
        eps_c_per_site=eps_c,
        eps_c1=eps_c1,
        eps_c2=eps_c2,
        bulk_range=(params.N0, params.N - params.N0),
        alpha_abs=alpha_abs,
        nu_profiles=nu_profiles,
    )


# ---------------------------------------------------------------------------
# finite-size scaling
# ---------------------------------------------------------------------------


def _max_slope_at_site(
    delta, params, opts, workers, site, center, h, n_points=9
) -> tuple[float, float]:
    """(eps_at_max_slope, slope) on a grid of spacing h around center.

    Re-centers and extends the window while the maximum sits on its edge, so
    a drifting transition cannot escape the refinement.
    """
    cache: dict[float, object] = {}
    for _ in range(8):
        eps = center + h * (np.arange(n_points) - n_points // 2)
        missing = [e for e in np.round(eps, 12) if e not in cache]
        if missing:
            cache.update(_alpha_profiles_at(missing, delta, params, opts, workers))
        grid = np.array(sorted(cache.keys()))
        vals = np.array([cache[e].alpha_abs[site - 1] for e in grid])
        e_c, slope, i = _gradient_argmax(grid, vals)
        if 0 < i < len(grid) - 1:
            return e_c, slope
        center = e_c
    return e_c, slope


def midchain_response_derivative(
    n_sites: int,
    delta: float,
    params: ChainParams,
    epsilon_range: tuple[float, float],
    opts: SolverOptions | None = None,
    *,
    coarse_step: float = 0.5,
    h_min: float = 1e-3,
    slope_rtol: float = 0.02,
    workers: int | None = None,
) -> tuple[float, float]:
    """(eps_c, d|alpha*_{N/2}|/d eps at eps_c) for a chain of n_sites.

    The midpoint site's transition is bracketed at ``coarse_step`` and the
    central-difference slope is refined on shrinking grids until it changes
    by less than ``slope_rtol`` between levels (or the grid reaches h_min).
    The border size of ``params`` is kept as-is across sizes so every chain
    carries the same drive-profile shape.
    """
    p = replace(params, N=int(n_sites))
    site = n_sites // 2
    scan = critical_drive_scan(
        delta,
        epsilon_range,
        coarse_step,
        p,
        opts,
        fine_step=coarse_step,  # coarse pass only; refinement below
        sites=[site],
        workers=workers,
    )
    center = scan.eps_c_per_site[site - 1]
    h = coarse_step / 5.0
    prev_slope = None
    e_c = center
    while True:
        e_c, slope = _max_slope_at_site(delta, p, opts, workers, site, e_c, h)
        if prev_slope is not None and abs(slope - prev_slope) <= slope_rtol * slope:
            return float(e_c), float(slope)
        prev_slope = slope
        if h <= h_min:
            return float(e_c), float(slope)
        h = max(h / 5.0, h_min)


def finite_size_scaling(
    sizes,
    delta: float,
    params: ChainParams,
    epsilon_range: tuple[float, float],
    opts: SolverOptions | None = None,
    *,
    workers: int | None = None,
    h_min: float = 1e-3,
) -> ScalingFit:
    """Power-law fit of the mid-chain response derivative against chain size."""
    sizes = np.asarray(sorted(int(s) for s in sizes))
    if len(sizes) < 3:
        raise ValueError("need at least 3 chain sizes for a scaling fit")
    derivs = np.empty(len(sizes))
    eps_cs = np.empty(len(sizes))
    for i, n_sites in enumerate(sizes):
        eps_cs[i], derivs[i] = midchain_response_derivative(
            n_sites, delta, params, epsilon_range, opts, h_min=h_min, workers=workers
        )
    logn = np.log(sizes.astype(float))
    logd = np.log(derivs)
    coeffs = np.polyfit(logn, logd, 1)
    fit = np.polyval(coeffs, logn)
    resid = float(np.sqrt(np.mean((fit - logd) ** 2)))
    dof = len(sizes) - 2
    if dof > 0:
        var = np.sum((logd - fit) ** 2) / dof
        sxx = np.sum((logn - logn.mean()) ** 2)
        err = float(np.sqrt(var / sxx))
    else:
        err = math.inf
    return ScalingFit(
        sizes=sizes,
        derivatives=derivs,
        eps_critical=eps_cs,
        exponent_a=float(coeffs[0]),
        exponent_err=err,
        fit_residual=resid,
    )
