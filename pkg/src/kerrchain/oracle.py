"""Exact single-site Lindblad benchmark in a truncated Fock space.

For one driven lossy Kerr mode the master equation can be solved exactly by
vectorizing the Liouvillian on a D-dimensional Fock space and extracting its
null vector.  The result benchmarks the Gaussian and mean-field ansatz
steady states; multi-site exact solving is out of reach at the occupations
of interest and deliberately not attempted.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ParameterError, TruncationError
from .dynamics import SolverOptions, find_steady_state
from .model import ChainParams, Profile


@dataclass(frozen=True)
class FockConfig:
    """Fock truncation dimension and admissible top-level population."""

    dim: int = 40
    tail_tol: float = 1e-8

    def __post_init__(self):
        if self.dim < 2:
            raise ParameterError(f"Fock dimension must be >= 2, got {self.dim}")
        if self.tail_tol <= 0:
            raise ParameterError("tail_tol must be positive")


def _destroy(dim: int) -> np.ndarray:
    a = np.zeros((dim, dim))
    a[np.arange(dim - 1), np.arange(1, dim)] = np.sqrt(np.arange(1, dim))
    return a


def _liouvillian(eps: float, delta: float, kappa: float, U: float, dim: int) -> sp.csr_matrix:
    """Vectorized Liouvillian, row-major convention vec(A rho B) = (A kron B^T) vec(rho)."""
    a = _destroy(dim)
    n = a.T @ a
    h = delta * n + U * (n @ n) + eps * (a + a.T)
    eye = np.eye(dim)
    L = (
        -1j * (sp.kron(h, eye) - sp.kron(eye, h.T))
        + kappa * sp.kron(a, a)
        - 0.5 * kappa * (sp.kron(n, eye) + sp.kron(eye, n))
    )
    return sp.csr_matrix(L)


def _null_density_matrix(L: sp.csr_matrix, dim: int, pivot_row: int = 0) -> np.ndarray:
    """Steady rho from the trace-augmented sparse solve.

    The Liouvillian is singular with (generically) a one-dimensional null
    space; adding a weighted trace row onto one equation and solving
    L' x = w e_row pins the normalization.
    """
    weight = max(float(abs(L).max()), 1.0)
    trace_idx = np.arange(dim) * dim + np.arange(dim)  # row-major diagonal slots
    bump = sp.csr_matrix(
        (np.full(dim, weight), (np.full(dim, pivot_row), trace_idx)),
        shape=L.shape,
    )
    rhs = np.zeros(L.shape[0], dtype=complex)
    rhs[pivot_row] = weight
    x = spla.spsolve((L + bump).tocsc(), rhs)
    rho = x.reshape(dim, dim)
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def lindblad_steady_single_site(
    eps: float, delta: float, kappa: float, U: float, fock: FockConfig | None = None
) -> tuple[np.ndarray, complex, float]:
    """Exact steady state of one driven lossy Kerr mode.

    Returns (rho, <a>, <a^dag a>).  Raises :class:`TruncationError` when the
    top two Fock levels hold more population than ``fock.tail_tol``; emits a
    degeneracy warning when the null space looks non-unique.
    """
    if fock is None:
        fock = FockConfig()
    dim = fock.dim
    L = _liouvillian(eps, delta, kappa, U, dim)
    rho = _null_density_matrix(L, dim)

    # a non-unique null space shows up as pivot-row dependence of the solution
    rho_alt = _null_density_matrix(L, dim, pivot_row=dim + 1)
    if np.max(np.abs(rho - rho_alt)) > 1e-8:
        warnings.warn(
            "Liouvillian null space appears degenerate; steady state may not be unique",
            RuntimeWarning,
            stacklevel=2,
        )

    tail = float(np.real(rho[dim - 2, dim - 2] + rho[dim - 1, dim - 1]))
    if tail > fock.tail_tol:
        raise TruncationError(
            f"top-two Fock populations {tail:.3e} exceed tail_tol={fock.tail_tol:.1e}; "
            f"retry with dim > {dim} (e.g. {2 * dim})"
        )

    a = _destroy(dim)
    alpha = complex(np.trace(rho @ a))
    n_mean = float(np.real(np.trace(rho @ (a.T @ a))))
    return rho, alpha, n_mean


def liouvillian_residual(
    rho: np.ndarray, eps: float, delta: float, kappa: float, U: float
) -> float:
    """Max-norm of L(rho), for validating a claimed steady state."""
    dim = rho.shape[0]
    L = _liouvillian(eps, delta, kappa, U, dim)
    return float(np.max(np.abs(L @ rho.reshape(-1))))


def _single_site_params(eps: float, delta: float, kappa: float, U: float) -> ChainParams:
    return ChainParams(
        N=1,
        delta_base=delta,
        epsilon_base=eps,
        J=0.0,
        phi=0.0,
        U=U,
        kappa=kappa,
        N0=1,
        profile=Profile.HOMOGENEOUS,
    )


def compare_ansatz_error(
    eps: float,
    delta: float,
    kappa: float,
    U: float,
    fock: FockConfig | None = None,
    opts: SolverOptions | None = None,
) -> dict:
    """Relative steady-state coherence errors of both variational ansatz.

    err_X = |alpha*_X - alpha*_exact| / |alpha*_exact| with alpha*_X from the
    Gaussian / mean-field time evolution at N = 1, J = 0.
    """
    if opts is None:
        opts = SolverOptions(tol_ss=1e-9, t_max=400.0)
    _, alpha_exact, _ = lindblad_steady_single_site(eps, delta, kappa, U, fock)
    params = _single_site_params(eps, delta, kappa, U)
    errs = {}
    for name, ansatz in (("err_gaussian", "gaussian"), ("err_meanfield", "meanfield")):
        rep = find_steady_state(params, opts=opts, ansatz=ansatz)
        alpha = rep.state.alpha[0]
        errs[name] = float(abs(alpha - alpha_exact) / abs(alpha_exact))
    return errs
