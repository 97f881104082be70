"""Sparse symmetric solvers: preconditioned CG and extreme generalized eigenvalues.

Everything here is deterministic: fixed iteration order, fixed seeds for any
randomized start vector, no threading.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import EigenFailure, SolverFailure

DEFAULT_SOLVE_TOL = 1e-12
DEFAULT_EIGEN_TOL = 1e-10
EIGEN_SEED = 20240601


@dataclass
class SolveReport:
    x: np.ndarray
    iterations: int
    residual: float


def solve_spd(A, rhs, tol: float = DEFAULT_SOLVE_TOL, x0=None, max_iter=None) -> SolveReport:
    """Conjugate gradients with diagonal (Jacobi) preconditioning.

    Stops when ||A x - rhs|| <= tol * ||rhs||. Raises SolverFailure with the
    last residual attached if the iteration cap (20 * dimension by default)
    is exhausted first.
    """
    if tol <= 0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    A = sp.csr_matrix(A)
    rhs = np.asarray(rhs, dtype=float)
    n = rhs.shape[0]
    if max_iter is None:
        max_iter = 20 * n

    rhs_norm = np.linalg.norm(rhs)
    if rhs_norm == 0.0 and x0 is None:
        return SolveReport(x=np.zeros(n), iterations=0, residual=0.0)
    threshold = tol * rhs_norm

    diag = A.diagonal()
    if np.any(diag <= 0):
        raise SolverFailure("matrix has non-positive diagonal entries; not SPD")
    inv_diag = 1.0 / diag

    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    r = rhs - A @ x
    res = np.linalg.norm(r)
    if res <= threshold:
        return SolveReport(x=x, iterations=0, residual=res)

    z = inv_diag * r
    p = z.copy()
    rz = r @ z
    for k in range(1, max_iter + 1):
        Ap = A @ p
        pAp = p @ Ap
        if pAp <= 0:
            raise SolverFailure("conjugate gradients broke down (non-SPD matrix?)",
                                residual=res, iterations=k)
        step = rz / pAp
        x = x + step * p
        r = r - step * Ap
        res = np.linalg.norm(r)
        if res <= threshold:
            return SolveReport(x=x, iterations=k, residual=res)
        z = inv_diag * r
        rz_next = r @ z
        p = z + (rz_next / rz) * p
        rz = rz_next
    raise SolverFailure(
        f"CG did not reach tolerance {tol:g} within {max_iter} iterations "
        f"(relative residual {res / rhs_norm:.3e})",
        residual=res, iterations=max_iter)


def _rayleigh(A, B, x) -> float:
    return (x @ (A @ x)) / (x @ (B @ x))


def extreme_generalized_eigenvalue(A, B, which: str = "smallest",
                                   tol: float = DEFAULT_EIGEN_TOL,
                                   max_iter: int = 100_000,
                                   shift: float = 0.0,
                                   seed: int = EIGEN_SEED):
    """Extreme eigenvalue of A x = mu B x for symmetric A (PSD) and SPD B.

    The smallest pair comes from inverse iteration on the (optionally shifted)
    system (A + shift*B) y = B x; the largest from power iteration on B^-1 A.
    Iteration stops once successive Rayleigh quotients agree to `tol`
    relative. Returns (value, vector) with the vector B-normalized.
    """
    if which not in ("smallest", "largest"):
        raise ValueError(f"which must be 'smallest' or 'largest', got {which!r}")
    A = sp.csr_matrix(A)
    B = sp.csr_matrix(B)
    n = A.shape[0]

    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n)
    x /= np.sqrt(x @ (B @ x))

    op = (A + shift * B).tocsr() if shift != 0.0 else A
    mu_prev = None
    diff_prev = None
    y = None
    for _ in range(max_iter):
        if which == "smallest":
            y = solve_spd(op, B @ x, x0=y).x
        else:
            y = solve_spd(B, A @ x, x0=y).x
        norm = np.sqrt(y @ (B @ y))
        if not np.isfinite(norm) or norm == 0.0:
            raise EigenFailure("eigen iteration broke down (zero or non-finite iterate)")
        x = y / norm
        mu = _rayleigh(A, B, x)
        if mu_prev is not None:
            diff = abs(mu - mu_prev)
            scale = max(abs(mu), 1e-300)
            if diff == 0.0:
                return mu, x
            # Rayleigh quotients converge geometrically; extrapolate the
            # remaining error from the contraction rate so a slowly
            # converging (clustered) spectrum cannot stop the iteration early.
            if diff_prev is not None and 0.0 < diff < diff_prev:
                rate = diff / diff_prev
                if diff * rate / (1.0 - rate) <= tol * scale:
                    return mu, x
            elif diff <= tol * scale * 1e-3:
                return mu, x
            diff_prev = diff
        mu_prev = mu
    raise EigenFailure(f"eigen iteration did not settle within {max_iter} steps")
