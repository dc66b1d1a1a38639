"""Preconditioned CG and restarted GMRES over operator callables.

Operators and preconditioners are plain callables acting on fields of
any shape; inner products flatten internally.  Stopping rules follow
the conventions of stock library solvers so iteration counts are
comparable across implementations:

* CG tests the true relative residual ``||b - A x|| / ||b||``;
* left-preconditioned GMRES tests the preconditioned relative residual
  ``||M^{-1}(b - A x)|| / ||M^{-1} b||``.

``residual_history`` records the tested quantity, one entry per
iteration, starting with the initial value.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = [
    "KrylovConfig",
    "SolveStats",
    "gmres_restarted",
    "gmres_two_sided",
    "pcg",
]

Operator = Callable[[np.ndarray], np.ndarray]


def _identity(x: np.ndarray) -> np.ndarray:
    return x


@dataclass(frozen=True)
class KrylovConfig:
    """Stopping tolerance, iteration cap, and GMRES cycle length.

    ``maxit=None`` defaults to the number of unknowns at solve time.
    """

    tol: float = 1e-9
    maxit: Optional[int] = None
    restart: int = 20

    def __post_init__(self):
        if self.tol <= 0.0:
            raise ValueError("tol must be positive")
        if self.restart < 1:
            raise ValueError("restart must be at least 1")
        if self.maxit is not None and self.maxit < 1:
            raise ValueError("maxit must be at least 1")

    def cap(self, size: int) -> int:
        return self.maxit if self.maxit is not None else size


@dataclass
class SolveStats:
    iterations: int = 0
    residual_history: list[float] = field(default_factory=list)
    converged: bool = False
    breakdown_reason: Optional[str] = None


def _norm(x: np.ndarray) -> float:
    return float(np.linalg.norm(x.ravel()))


def _dot(x: np.ndarray, y: np.ndarray) -> float:
    return float(np.dot(x.ravel(), y.ravel()))


def pcg(
    apply_A: Operator,
    apply_Minv: Optional[Operator],
    b: np.ndarray,
    x0: np.ndarray,
    cfg: KrylovConfig,
) -> tuple[np.ndarray, SolveStats]:
    """Preconditioned conjugate gradients for SPD operator and preconditioner.

    Returns the iterate and stats.  Nonpositive curvature ``p^T A p <= 0``
    signals a non-SPD operator (misuse on a non-symmetric problem) and is
    reported as a breakdown rather than raised.
    """
    apply_Minv = apply_Minv or _identity
    b = np.asarray(b, dtype=float)
    stats = SolveStats()
    norm_b = _norm(b)
    if norm_b == 0.0:
        stats.converged = True
        stats.residual_history = [0.0]
        return np.zeros_like(b), stats

    x = np.array(x0, dtype=float, copy=True)
    r = b - apply_A(x)
    relres = _norm(r) / norm_b
    stats.residual_history.append(relres)
    if relres <= cfg.tol:
        stats.converged = True
        return x, stats

    z = apply_Minv(r)
    p = z.copy()
    rho = _dot(r, z)
    for iteration in range(1, cfg.cap(b.size) + 1):
        ap = apply_A(p)
        curvature = _dot(p, ap)
        if curvature <= 0.0:
            stats.iterations = iteration - 1
            stats.breakdown_reason = "nonpositive_curvature"
            return x, stats
        alpha = rho / curvature
        x += alpha * p
        r -= alpha * ap
        relres = _norm(r) / norm_b
        stats.residual_history.append(relres)
        stats.iterations = iteration
        if relres <= cfg.tol:
            stats.converged = True
            return x, stats
        z = apply_Minv(r)
        rho_next = _dot(r, z)
        p = z + (rho_next / rho) * p
        rho = rho_next
    return x, stats


def gmres_restarted(
    apply_A: Operator,
    apply_Minv: Optional[Operator],
    b: np.ndarray,
    x0: np.ndarray,
    cfg: KrylovConfig,
) -> tuple[np.ndarray, SolveStats]:
    """Left-preconditioned restarted GMRES.

    Arnoldi with modified Gram-Schmidt; the least-squares problem is
    kept triangular with Givens rotations, whose trailing entry is the
    preconditioned residual norm.  Happy breakdown (an exactly invariant
    Krylov space) is treated as convergence.  A restart cycle that makes
    no progress is reported as stagnation.
    """
    apply_Minv = apply_Minv or _identity
    b = np.asarray(b, dtype=float)
    stats = SolveStats()
    mb = apply_Minv(b)
    norm_mb = _norm(mb)
    if norm_mb == 0.0:
        stats.converged = True
        stats.residual_history = [0.0]
        return np.zeros_like(b), stats

    x = np.array(x0, dtype=float, copy=True)
    maxit = cfg.cap(b.size)
    total = 0
    first_cycle = True
    while True:
        r = apply_Minv(b - apply_A(x))
        beta = _norm(r)
        if first_cycle:
            stats.residual_history.append(beta / norm_mb)
            first_cycle = False
        else:
            # same iterate as the last Givens estimate; keep the true value
            stats.residual_history[-1] = beta / norm_mb
        if beta / norm_mb <= cfg.tol:
            stats.iterations = total
            stats.converged = True
            return x, stats
        if total >= maxit:
            stats.iterations = total
            return x, stats

        m = min(cfg.restart, maxit - total)
        basis = np.empty((m + 1,) + b.shape)
        hess = np.zeros((m + 1, m))
        cs = np.zeros(m)
        sn = np.zeros(m)
        g = np.zeros(m + 1)
        g[0] = beta
        basis[0] = r / beta
        inner = 0
        happy = False
        for k in range(m):
            # copy: operators may return their input (e.g. the identity),
            # and w is modified in place below
            w = np.array(apply_Minv(apply_A(basis[k])), dtype=float)
            for j in range(k + 1):
                hess[j, k] = _dot(basis[j], w)
                w -= hess[j, k] * basis[j]
            hess[k + 1, k] = _norm(w)
            if hess[k + 1, k] > 0.0:
                basis[k + 1] = w / hess[k + 1, k]
            else:
                happy = True
            for j in range(k):
                temp = cs[j] * hess[j, k] + sn[j] * hess[j + 1, k]
                hess[j + 1, k] = -sn[j] * hess[j, k] + cs[j] * hess[j + 1, k]
                hess[j, k] = temp
            denom = np.hypot(hess[k, k], hess[k + 1, k])
            cs[k], sn[k] = hess[k, k] / denom, hess[k + 1, k] / denom
            hess[k, k] = denom
            hess[k + 1, k] = 0.0
            g[k + 1] = -sn[k] * g[k]
            g[k] = cs[k] * g[k]
            inner = k + 1
            total += 1
            stats.residual_history.append(abs(g[k + 1]) / norm_mb)
            if happy or abs(g[k + 1]) / norm_mb <= cfg.tol:
                break

        y = np.linalg.solve(np.triu(hess[:inner, :inner]), g[:inner])
        x = x + np.tensordot(y, basis[:inner], axes=(0, 0))
        stats.iterations = total
        if happy:
            stats.converged = True
            return x, stats
        if abs(g[inner]) >= beta * (1.0 - 1e-14) and inner == cfg.restart:
            stats.breakdown_reason = "stagnation"
            return x, stats


def gmres_two_sided(
    apply_A: Operator,
    apply_Pinvhalf: Operator,
    b: np.ndarray,
    cfg: KrylovConfig,
    x0: Optional[np.ndarray] = None,
) -> tuple[np.ndarray, SolveStats]:
    """GMRES on the symmetrically preconditioned system.

    Solves ``P^{-1/2} A P^{-1/2} v = P^{-1/2} b`` with unpreconditioned
    GMRES and maps back ``u = P^{-1/2} v``.  The residual history of the
    auxiliary system is what the linear-rate envelope bounds.
    """
    b_hat = apply_Pinvhalf(np.asarray(b, dtype=float))
    v0 = np.zeros_like(b_hat) if x0 is None else x0

    def a_hat(v):
        return apply_Pinvhalf(apply_A(apply_Pinvhalf(v)))

    v, stats = gmres_restarted(a_hat, None, b_hat, v0, cfg)
    return apply_Pinvhalf(v), stats
