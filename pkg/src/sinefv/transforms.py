"""Type-I discrete sine transform, 1-D and axis-wise over tensors.

The orthonormal DST-I matrix

    S_n[j, k] = sqrt(2/(n+1)) * sin(j*k*pi/(n+1)),   1 <= j, k <= n

is symmetric and involutory (``S_n @ S_n == I``), which makes it both
the diagonalizing transform of the preconditioner and its own inverse.
Applications go through ``scipy.fft.dst(type=1, norm="ortho")``, whose
normalization is exactly ``S_n``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np
import scipy.fft

__all__ = [
    "SineTransformPlan",
    "dst1_apply",
    "sine_matrix",
    "tensor_dst_apply",
]


@dataclass(frozen=True)
class SineTransformPlan:
    """Length and normalization of one 1-D orthonormal DST-I."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"transform length must be positive, got {self.n}")

    @property
    def normalization(self) -> float:
        return sqrt(2.0 / (self.n + 1))


def dst1_apply(plan: SineTransformPlan, x: np.ndarray) -> np.ndarray:
    """Apply ``S_n`` to a 1-D vector in O(n log n)."""
    x = np.asarray(x, dtype=float)
    if x.shape != (plan.n,):
        raise ValueError(f"expected vector of length {plan.n}, got shape {x.shape}")
    return scipy.fft.dst(x, type=1, norm="ortho")


def tensor_dst_apply(plans: list[SineTransformPlan], u: np.ndarray) -> np.ndarray:
    """Apply the per-axis DST-I along every axis of ``u`` in turn.

    Axis 0 is the x-direction, axis 1 the y-direction, and so on, which
    under the x-fastest vectorization (Fortran ravel) equals the action
    of the Kronecker product ``S_{n_d} (x) ... (x) S_{n_1}``.
    """
    u = np.asarray(u, dtype=float)
    if u.ndim != len(plans) or u.shape != tuple(p.n for p in plans):
        raise ValueError(
            f"field shape {u.shape} does not match plan lengths "
            f"{tuple(p.n for p in plans)}"
        )
    for axis in range(u.ndim):
        u = scipy.fft.dst(u, type=1, norm="ortho", axis=axis)
    return u


def sine_matrix(n: int) -> np.ndarray:
    """Dense ``S_n``; the O(n^2) oracle for the fast path and dense spectra."""
    j = np.arange(1, n + 1)
    return sqrt(2.0 / (n + 1)) * np.sin(np.outer(j, j) * np.pi / (n + 1))
