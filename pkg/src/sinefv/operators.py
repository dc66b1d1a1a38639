"""Matrix-free structured operators of the Crank-Nicolson FV scheme.

Fields live on the interior of a tensor-product grid as plain numpy
arrays of shape ``(n_1, ..., n_d)`` with axis 0 the x-direction.  The
x-fastest vectorization (x first, then y, then z) is the Fortran ravel
of that array, so a Kronecker factor acting on axis ``i`` is the
``i``-th matrix from the right in ``M_d (x) ... (x) M_1``.

Three matrix actions are provided, all without materializing anything:

* tridiagonal mass stencil ``(x_{i-1} + 6 x_i + x_{i+1}) / 8`` with
  zero-extension at the boundary,
* the lower-Hessenberg stiffness Toeplitz and its transpose via FFT of
  a circulant embedding,
* the full d-dimensional operator

      A = A_N + sum_i eta_i * (mass on axes != i) (x) B_i,
      B_i = k_{i,+} T_i + k_{i,-} T_i^T,
      eta_i = dt / (2 * Gamma(delta_i + 1) * h_i**(2 - delta_i)),

  with ``sign=-1`` flipping every stiffness term (the right-hand-side
  operator of the scheme).  The sign is folded into the one pass rather
  than forming ``2*A_N*u - A*u``, which would subtract two large terms.

``materialize_dense`` builds the same matrices entry-by-entry from
Kronecker products and is the oracle the fast path is tested against.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gamma

import numpy as np
import scipy.linalg

from .coeffs import coefficient_table, validate_order

__all__ = [
    "CnFvOperator",
    "GridSpec",
    "DENSE_GUARD",
    "ToeplitzOperator",
    "dense_mass_matrix",
    "mass_matvec",
    "mass_apply_along_axis",
]

DENSE_GUARD = 4096


@dataclass(frozen=True)
class GridSpec:
    """Tensor-product grid: per-axis bounds and interior point counts."""

    bounds: tuple[tuple[float, float], ...]
    counts: tuple[int, ...]

    def __post_init__(self):
        if len(self.bounds) != len(self.counts):
            raise ValueError("bounds and counts must have equal length")
        if self.dim not in (2, 3):
            raise ValueError(f"supported dimensions are 2 and 3, got {self.dim}")
        for (a, b), n in zip(self.bounds, self.counts):
            if not b > a:
                raise ValueError(f"empty axis interval ({a}, {b})")
            if n < 1:
                raise ValueError(f"interior count must be positive, got {n}")

    @classmethod
    def unit_box(cls, counts) -> "GridSpec":
        counts = tuple(int(n) for n in counts)
        return cls(bounds=((0.0, 1.0),) * len(counts), counts=counts)

    @property
    def dim(self) -> int:
        return len(self.counts)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.counts

    @property
    def size(self) -> int:
        return int(np.prod(self.counts))

    @property
    def steps(self) -> tuple[float, ...]:
        return tuple(
            (b - a) / (n + 1) for (a, b), n in zip(self.bounds, self.counts)
        )

    def axis_points(self, axis: int) -> np.ndarray:
        """Interior node coordinates along one axis."""
        (a, _), n, h = self.bounds[axis], self.counts[axis], self.steps[axis]
        return a + h * np.arange(1, n + 1)

    def meshgrid(self) -> list[np.ndarray]:
        """Sparse broadcastable interior meshes, one per axis."""
        return np.meshgrid(
            *(self.axis_points(i) for i in range(self.dim)),
            indexing="ij",
            sparse=True,
        )


def mass_matvec(n: int, x: np.ndarray) -> np.ndarray:
    """Tridiagonal mass stencil ``(x_{i-1} + 6 x_i + x_{i+1}) / 8``.

    Neighbors outside the interior are zero (homogeneous Dirichlet
    exterior), so no boundary nodes are ever referenced.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (n,):
        raise ValueError(f"expected vector of length {n}, got shape {x.shape}")
    return mass_apply_along_axis(x, 0)


def mass_apply_along_axis(u: np.ndarray, axis: int) -> np.ndarray:
    y = 6.0 * u
    lo = [slice(None)] * u.ndim
    hi = [slice(None)] * u.ndim
    lo[axis] = slice(1, None)
    hi[axis] = slice(None, -1)
    lo, hi = tuple(lo), tuple(hi)
    y[lo] += u[hi]
    y[hi] += u[lo]
    return y / 8.0


def dense_mass_matrix(n: int) -> np.ndarray:
    """Dense ``(1/8) tridiag(1, 6, 1)`` oracle."""
    return (
        6.0 * np.eye(n) + np.diag(np.ones(n - 1), 1) + np.diag(np.ones(n - 1), -1)
    ) / 8.0


def _next_pow2(m: int) -> int:
    return 1 << (m - 1).bit_length()


class ToeplitzOperator:
    """FFT matvec with an ``n x n`` Toeplitz matrix and its transpose.

    The matrix is embedded into a circulant of size ``next_pow2(2n)``
    (extra padding is zero and does not affect the product).  The
    transpose shares the embedding: a real circulant's transpose has the
    conjugate eigenvalues.
    """

    def __init__(self, first_column: np.ndarray, first_row: np.ndarray):
        first_column = np.asarray(first_column, dtype=float)
        first_row = np.asarray(first_row, dtype=float)
        if first_column.ndim != 1 or first_column.shape != first_row.shape:
            raise ValueError("first column/row must be 1-D and equally long")
        if first_column[0] != first_row[0]:
            raise ValueError("first column and row disagree on the diagonal entry")
        self.n = len(first_column)
        self.first_column = first_column
        self.first_row = first_row
        length = max(_next_pow2(2 * self.n), 2)
        embed = np.zeros(length)
        embed[: self.n] = first_column
        if self.n > 1:
            embed[-(self.n - 1):] = first_row[1:][::-1]
        self.embedded_symbol = np.fft.fft(embed)
        self._length = length

    @classmethod
    def stiffness(cls, order: float, n: int) -> "ToeplitzOperator":
        """The one-axis stiffness Toeplitz built from the q coefficients.

        First column ``[q_1, q_2, ..., q_n]``; first row
        ``[q_1, q_0, 0, ..., 0]``.
        """
        q = coefficient_table(validate_order(order), n).q
        row = np.zeros(n)
        row[0] = q[1]
        if n > 1:
            row[1] = q[0]
        return cls(first_column=q[1:].copy(), first_row=row)

    def matvec(self, x: np.ndarray, transpose: bool = False) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise ValueError(f"expected vector of length {self.n}, got {x.shape}")
        return self.apply_along_axis(x, 0, transpose=transpose)

    def apply_along_axis(
        self, u: np.ndarray, axis: int, transpose: bool = False
    ) -> np.ndarray:
        """Batched matvec along one tensor axis."""
        if u.shape[axis] != self.n:
            raise ValueError(
                f"axis {axis} has length {u.shape[axis]}, operator needs {self.n}"
            )
        symbol = self.embedded_symbol
        if transpose:
            symbol = symbol.conj()
        shape = [1] * u.ndim
        shape[axis] = self._length
        spectrum = np.fft.fft(u, n=self._length, axis=axis)
        product = np.fft.ifft(spectrum * symbol.reshape(shape), axis=axis)
        keep = [slice(None)] * u.ndim
        keep[axis] = slice(0, self.n)
        return product[tuple(keep)].real

    def dense(self) -> np.ndarray:
        return scipy.linalg.toeplitz(self.first_column, self.first_row)


class CnFvOperator:
    """The scheme's left-hand (``sign=+1``) or right-hand (``sign=-1``) matrix."""

    def __init__(
        self,
        grid: GridSpec,
        orders: tuple[float, ...],
        diffusivities: tuple[tuple[float, float], ...],
        dt: float,
        sign: int = +1,
    ):
        if len(orders) != grid.dim or len(diffusivities) != grid.dim:
            raise ValueError("orders/diffusivities must match the grid dimension")
        if sign not in (+1, -1):
            raise ValueError("sign must be +1 or -1")
        if dt <= 0.0:
            raise ValueError("time step must be positive")
        for kp, km in diffusivities:
            if kp < 0.0 or km < 0.0:
                raise ValueError("diffusivities must be nonnegative")
        self.grid = grid
        self.orders = tuple(validate_order(d) for d in orders)
        self.diffusivities = tuple((float(kp), float(km)) for kp, km in diffusivities)
        self.dt = float(dt)
        self.sign = sign
        self.etas = tuple(
            dt / (2.0 * gamma(d + 1.0) * h ** (2.0 - d))
            for d, h in zip(self.orders, grid.steps)
        )
        self.toeplitz = tuple(
            ToeplitzOperator.stiffness(d, n) for d, n in zip(self.orders, grid.counts)
        )

    @property
    def symmetric(self) -> bool:
        return all(kp == km for kp, km in self.diffusivities)

    def with_sign(self, sign: int) -> "CnFvOperator":
        if sign == self.sign:
            return self
        other = CnFvOperator.__new__(CnFvOperator)
        other.__dict__.update(self.__dict__)
        other.sign = sign
        return other

    def _stiffness_along_axis(self, u: np.ndarray, axis: int) -> np.ndarray:
        kp, km = self.diffusivities[axis]
        top = self.toeplitz[axis]
        out = kp * top.apply_along_axis(u, axis)
        if km != 0.0:
            out += km * top.apply_along_axis(u, axis, transpose=True)
        return out

    def apply(self, u: np.ndarray) -> np.ndarray:
        """Apply the operator axis-wise in O(d * N log max n_i)."""
        u = np.asarray(u, dtype=float)
        if u.shape != self.grid.shape:
            raise ValueError(f"field shape {u.shape} != grid shape {self.grid.shape}")
        result = mass_apply_along_axis(u, 0)
        for axis in range(1, self.grid.dim):
            result = mass_apply_along_axis(result, axis)
        for axis in range(self.grid.dim):
            if self.diffusivities[axis] == (0.0, 0.0):
                continue
            term = self._stiffness_along_axis(u, axis)
            for other in range(self.grid.dim):
                if other != axis:
                    term = mass_apply_along_axis(term, other)
            result += self.sign * self.etas[axis] * term
        return result

    def __call__(self, u: np.ndarray) -> np.ndarray:
        return self.apply(u)

    def materialize_dense(self) -> np.ndarray:
        """Entry-by-entry Kronecker assembly; test/analysis oracle only."""
        size = self.grid.size
        if size > DENSE_GUARD:
            raise ValueError(f"dense materialization refused for N={size} > {DENSE_GUARD}")
        masses = [dense_mass_matrix(n) for n in self.grid.counts]

        def kron_x_fastest(per_axis):
            out = per_axis[-1]
            for m in per_axis[-2::-1]:
                out = np.kron(out, m)
            return out

        dense = kron_x_fastest(masses)
        for axis in range(self.grid.dim):
            kp, km = self.diffusivities[axis]
            t = self.toeplitz[axis].dense()
            factors = list(masses)
            factors[axis] = kp * t + km * t.T
            dense = dense + self.sign * self.etas[axis] * kron_x_fastest(factors)
        return dense
