"""Non-Hermitian topology diagnostics of the linearized chain.

The fluctuation dynamics around a steady state is generated by a 2N x 2N
non-Hermitian matrix in the Nambu basis (b_1..b_N, b_1^dag..b_N^dag).  Its
k-space determinant winding classifies amplifying phases, its singular values
control the zero-frequency Green's function, and a Lyapunov-type linear solve
gives the steady correlations of the frozen quadratic model.

Phase conventions: the real-space matrix built here is the generator of the
fluctuation equations of motion, with exp(-i phi) on the (j, j+1) hopping
entry; its Bloch form under the e^{-ikj} Fourier convention is
``bloch_matrix``, whose determinant winds by +1 (not -1) across the
amplifying phase at phi = pi/3.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import (
    DimensionError,
    GapClosingError,
    SingularMatrixError,
    StabilityError,
)
from .model import ChainParams, EffectiveQuadratic

#: marker used in winding profiles where det H(k) approaches the origin
NU_UNKNOWN = np.iinfo(np.int32).min

_INTEGER_TOL = 1e-3  # winding accepted when |nu - round(nu)| < this
_GRID_INIT = 1024
_GRID_CAP = 2**20


@dataclass(frozen=True)
class NambuMatrix:
    """Assembled dynamical matrix and its diagonal/anomalous blocks."""

    H: np.ndarray
    D: np.ndarray
    K: np.ndarray

    @property
    def n_sites(self) -> int:
        return self.D.shape[0]


@dataclass(frozen=True)
class SVDAnalysis:
    singular_values: np.ndarray  # descending
    s_min: float
    frobenius_G: float
    gap_ratio: float


def _hopping_block(delta_tilde: np.ndarray, params: ChainParams) -> np.ndarray:
    n = len(delta_tilde)
    d = np.diag(delta_tilde.astype(complex))
    idx = np.arange(n - 1)
    d[idx, idx + 1] = params.J * np.exp(-1j * params.phi)
    d[idx + 1, idx] = params.J * np.exp(1j * params.phi)
    return d


def build_nambu(effq: EffectiveQuadratic, params: ChainParams) -> NambuMatrix:
    """Nambu matrix generating d b_mu/dt = -i sum_nu H_mu_nu b_nu + input.

    Blocks: H = [[D - i kappa/2, K], [-K^*, -D^* - i kappa/2]] with the
    diagonal block D carrying the Kerr-shifted detunings and the chiral
    hopping, and K = diag(2 g_j) the parametric pairing.
    """
    n = len(effq)
    if n != params.N:
        raise DimensionError(f"effective parameters have length {n}, expected {params.N}")
    d = _hopping_block(effq.delta_tilde, params)
    k = np.diag(2.0 * effq.g.astype(complex))
    loss = 0.5j * params.kappa * np.eye(n)
    h = np.block([[d - loss, k], [-k.conj(), -d.conj() - loss]])
    return NambuMatrix(H=h, D=d, K=k)


# ---------------------------------------------------------------------------
# Bloch form and winding numbers
# ---------------------------------------------------------------------------


def bloch_matrix(
    delta_tilde: float, g: complex, params: ChainParams, k: float
) -> np.ndarray:
    """2x2 Bloch matrix H(k) of the homogeneous chain."""
    a = delta_tilde + 2.0 * params.J * np.cos(k + params.phi)
    b = delta_tilde + 2.0 * params.J * np.cos(k - params.phi)
    loss = 0.5j * params.kappa
    return np.array(
        [[a - loss, 2.0 * g], [-2.0 * np.conj(g), -b - loss]], dtype=complex
    )


def _det_bloch(delta_tilde: float, g: complex, params: ChainParams, k: np.ndarray):
    """det H(k) and its analytic k-derivative, vectorized over k."""
    j2 = 2.0 * params.J
    a = delta_tilde + j2 * np.cos(k + params.phi)
    b = delta_tilde + j2 * np.cos(k - params.phi)
    da = -j2 * np.sin(k + params.phi)
    db = -j2 * np.sin(k - params.phi)
    loss = 0.5j * params.kappa
    det = 4.0 * np.abs(g) ** 2 - (a - loss) * (b + loss)
    ddet = -(da * (b + loss) + (a - loss) * db)
    return det, ddet


def _origin_clearance(det: np.ndarray) -> float:
    """Smallest distance from the origin to the piecewise-linear det curve.

    Checking segments (not just vertices) catches contours that cross the
    origin between grid points, e.g. the real-valued det curve at phi = 0.
    """
    z1, z2 = det[:-1], det[1:]
    w = z2 - z1
    ww = np.abs(w) ** 2
    t = np.zeros_like(ww)
    nz = ww > 0
    t[nz] = np.clip(-np.real(np.conj(w[nz]) * z1[nz]) / ww[nz], 0.0, 1.0)
    return float(np.min(np.abs(z1 + t * w)))


def _winding_on_grid(delta_tilde, g, params, n_k):
    k = np.linspace(-np.pi, np.pi, n_k + 1)
    det, _ = _det_bloch(delta_tilde, g, params, k)
    scale = float(np.max(np.abs(det)))
    if scale == 0.0 or _origin_clearance(det) < 1e-9 * scale:
        raise GapClosingError(
            "det H(k) passes through the origin on the integration contour"
        )
    phase = np.unwrap(np.angle(det))
    return (phase[-1] - phase[0]) / (2.0 * np.pi)


def winding_number(
    delta_tilde: float, g: complex, params: ChainParams, n_k: int = _GRID_INIT
) -> int:
    """Integer winding of det H(k) around the origin over the Brillouin zone.

    Phase unwrapping on a uniform k-grid, doubled until the unwrapped total
    is within 1e-3 * 2pi of an integer (grid capped at 2^20 points).
    """
    n_k = max(int(n_k), 256)
    while True:
        nu = _winding_on_grid(delta_tilde, g, params, n_k)
        nearest = round(nu)
        if abs(nu - nearest) < _INTEGER_TOL:
            return int(nearest)
        if n_k >= _GRID_CAP:
            raise GapClosingError(
                f"winding did not converge to an integer (nu={nu:.6f}); "
                "det H(k) likely passes near the origin"
            )
        n_k *= 2


def winding_number_quadrature(
    delta_tilde: float, g: complex, params: ChainParams, n_k: int = _GRID_INIT
) -> float:
    """Winding via trapezoidal quadrature of Im d/dk log det H(k).

    Independent of the phase-unwrapping route; used as its cross-check.
    """
    n_k = max(int(n_k), 256)
    k = np.linspace(-np.pi, np.pi, n_k + 1)
    det, ddet = _det_bloch(delta_tilde, g, params, k)
    scale = float(np.max(np.abs(det)))
    if scale == 0.0 or _origin_clearance(det) < 1e-9 * scale:
        raise GapClosingError("det H(k) passes through the origin on the contour")
    integrand = np.imag(ddet / det)
    return float(np.trapezoid(integrand, k) / (2.0 * np.pi))


def local_winding_profile(
    effq: EffectiveQuadratic, params: ChainParams
) -> np.ndarray:
    """Quasi-homogeneous invariant nu_j from each site's (delta_tilde_j, g_j).

    Sites whose k-contour passes too close to the origin are reported as
    ``NU_UNKNOWN`` rather than forced to an integer.
    """
    out = np.empty(len(effq), dtype=np.int64)
    for j in range(len(effq)):
        try:
            out[j] = winding_number(effq.delta_tilde[j], effq.g[j], params)
        except GapClosingError:
            out[j] = NU_UNKNOWN
    return out


# ---------------------------------------------------------------------------
# Green's function and SVD diagnostics
# ---------------------------------------------------------------------------


def greens_function(nambu: NambuMatrix, omega: float = 0.0) -> np.ndarray:
    """G(omega) = (omega*1 - H)^(-1), dense LU solve; G(0) = -H^(-1)."""
    a = omega * np.eye(nambu.H.shape[0]) - nambu.H
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(a)
    if np.min(np.abs(np.diagonal(lu))) < 1e-14 * np.max(np.abs(np.diagonal(lu))):
        raise SingularMatrixError(
            f"omega*1 - H is numerically singular at omega={omega}"
        )
    return sla.lu_solve((lu, piv), np.eye(a.shape[0], dtype=complex))


def svd_analysis(nambu: NambuMatrix) -> SVDAnalysis:
    """Singular values of H with the Green's-function norm they imply."""
    s = np.linalg.svd(nambu.H, compute_uv=False)
    with np.errstate(divide="ignore"):
        frob = float(np.sqrt(np.sum(1.0 / s**2)))
        gap = float(s[-2] / s[-1]) if len(s) > 1 else np.inf
    return SVDAnalysis(
        singular_values=s,
        s_min=float(s[-1]),
        frobenius_G=frob,
        gap_ratio=gap,
    )


def extended_hermitian_check(nambu: NambuMatrix) -> dict:
    """Pairing test between eigenvalues of [[0, H], [H^dag, 0]] and svd(H).

    Returns the worst defect of (a) spectral E -> -E symmetry and (b) the
    multiset {|E_n|} against the singular values of H.
    """
    h = nambu.H
    m = h.shape[0]
    ext = np.zeros((2 * m, 2 * m), dtype=complex)
    ext[:m, m:] = h
    ext[m:, :m] = h.conj().T
    evals = np.sort(np.linalg.eigvalsh(ext))
    sym_defect = float(np.max(np.abs(evals + evals[::-1])))
    s = np.linalg.svd(h, compute_uv=False)
    paired = np.sort(np.concatenate([s, s]))
    pairing_defect = float(np.max(np.abs(np.sort(np.abs(evals)) - paired)))
    return {"max_pairing_defect": max(sym_defect, pairing_defect)}


# ---------------------------------------------------------------------------
# frozen quadratic model
# ---------------------------------------------------------------------------


def quadratic_steady_correlations(
    effq: EffectiveQuadratic, params: ChainParams
) -> tuple[np.ndarray, np.ndarray]:
    """Steady (G, F) of the quadratic model with coefficients frozen at effq.

    The frozen equations are the full Gaussian equations of motion with the
    nonlinear Wick-closure terms dropped and (delta_tilde_j, g_j) held fixed;
    they close into the Lyapunov problem  H M + M H^T = -i S  for the Nambu
    second-moment matrix M, with S feeding vacuum noise into <b b^dag>.
    Requires every eigenvalue of the dynamical matrix strictly below the real
    axis.
    """
    n = len(effq)
    hdyn = build_nambu(effq, params).H
    evals = np.linalg.eigvals(hdyn)
    worst = evals[np.argmax(evals.imag)]
    if worst.imag >= 0:
        raise StabilityError(
            f"linearized dynamics unstable: eigenvalue {worst:.6g} "
            "has non-negative imaginary part"
        )
    s = np.zeros((2 * n, 2 * n), dtype=complex)
    s[:n, n:] = -1j * params.kappa * np.eye(n)
    m = sla.solve_sylvester(hdyn, hdyn.T, s)
    F = m[:n, :n]
    G = m[n:, :n]
    # exact structure enforcement (the solve is symmetric up to rounding)
    G = 0.5 * (G + G.conj().T)
    F = 0.5 * (F + F.T)
    return G, F


def quadratic_residual(
    G: np.ndarray, F: np.ndarray, effq: EffectiveQuadratic, params: ChainParams
) -> float:
    """Max-norm residual of the frozen linear equations at (G, F)."""
    n = len(effq)
    hdyn = build_nambu(effq, params).H
    m = np.empty((2 * n, 2 * n), dtype=complex)
    m[:n, :n] = F
    m[:n, n:] = G.T + np.eye(n)
    m[n:, :n] = G
    m[n:, n:] = F.conj()
    s = np.zeros((2 * n, 2 * n), dtype=complex)
    s[:n, n:] = -1j * params.kappa * np.eye(n)
    return float(np.max(np.abs(hdyn @ m + m @ hdyn.T - s)))


def normalized_correlations(G: np.ndarray) -> np.ndarray:
    """Gbar_jk = G_jk / sqrt(n_j n_k); rows with n_j <= 0 are NaN sentinels."""
    n = np.real(np.diagonal(G)).copy()
    good = n > 0
    root = np.sqrt(np.where(good, n, np.nan))
    with np.errstate(invalid="ignore"):
        return G / np.outer(root, root)
