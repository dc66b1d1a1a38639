"""Sine-transform (tau) preconditioner and circulant baselines.

The tau preconditioner replaces each one-axis stiffness block by the
tau-algebra approximation of its symmetric part: the matrix diagonalized
by the DST-I whose eigenvalues are the cosine sums of the symmetric
part's first column,

    lambda_k = t_0 + 2 * sum_{j=1}^{n-1} t_j * cos(j*k*pi/(n+1)).

Because the mass matrix is itself a tau matrix (it is tridiagonal
symmetric Toeplitz), the whole d-level preconditioner diagonalizes as
``P = S_N diag(Lambda) S_N`` with an eigen-tensor Lambda assembled from
per-axis eigenvalue vectors.  Applying ``P^{-1}`` (or ``P^{-1/2}``) is
two tensor DSTs and one elementwise divide, O(N log N).

The circulant baselines substitute every Toeplitz block (mass included)
with its Strang (copy central diagonals) or T. Chan (Frobenius-optimal
diagonal averaging) circulant; the inverse is applied with per-axis
FFTs in complex arithmetic.
"""

from __future__ import annotations

import numpy as np
import scipy.fft

from .coeffs import CoefficientTable, coefficient_table
from .operators import DENSE_GUARD, CnFvOperator
from .transforms import SineTransformPlan, sine_matrix, tensor_dst_apply

__all__ = [
    "CirculantPreconditioner",
    "PreconditionerBreakdown",
    "TauPreconditioner",
    "apply_tau_inverse",
    "assemble_circulant",
    "assemble_tau",
    "chan_circulant_column",
    "mass_eigenvalues",
    "strang_circulant_column",
    "tau_eigenvalues",
    "tau_sym_eigenvalues",
]


class PreconditionerBreakdown(Exception):
    """A (near-)singular eigenvalue makes the preconditioner unusable."""


def mass_eigenvalues(n: int) -> np.ndarray:
    """Eigenvalues ``(3 + cos(k*pi/(n+1))) / 4`` of the mass matrix, k=1..n.

    All of them lie in the open interval (1/2, 1).
    """
    if n < 1:
        raise ValueError("n must be positive")
    k = np.arange(1, n + 1)
    return (3.0 + np.cos(k * np.pi / (n + 1))) / 4.0


def tau_eigenvalues(first_column: np.ndarray) -> np.ndarray:
    """Tau-algebra eigenvalues from a symmetric-Toeplitz first column.

    Computed for all k at once with a single DCT-I of the zero-padded
    column, which evaluates ``t_0 + 2 sum_j t_j cos(j theta_k)`` at
    ``theta_k = k*pi/(n+1)``.
    """
    t = np.asarray(first_column, dtype=float)
    n = len(t)
    padded = np.concatenate([t, [0.0, 0.0]])
    return scipy.fft.dct(padded, type=1)[1 : n + 1]


def tau_sym_eigenvalues(coeffs: CoefficientTable) -> np.ndarray:
    """Eigenvalues of the tau approximation of the stiffness symmetric part.

    The symmetric part of the one-axis stiffness Toeplitz has first
    column ``[q_1, (q_0+q_2)/2, q_3/2, ..., q_n/2]``; its tau eigenvalues

        lambda_k = q_1 + (q_0+q_2) cos(theta_k)
                   + sum_{j=2}^{n-1} q_{j+1} cos(j theta_k)

    are strictly positive for every order in (0, 1).
    """
    q, n = coeffs.q, coeffs.n
    column = np.empty(n)
    column[0] = q[1]
    if n >= 2:
        column[1] = 0.5 * (q[0] + q[2])
    if n >= 3:
        column[2:] = 0.5 * q[3:n + 1]
    return tau_eigenvalues(column)


def _outer_tensor(vectors: list[np.ndarray]) -> np.ndarray:
    """Elementwise outer product: out[k1,..,kd] = prod_i vectors[i][k_i]."""
    dim = len(vectors)
    out = np.ones(tuple(len(v) for v in vectors), dtype=np.result_type(*vectors))
    for axis, vec in enumerate(vectors):
        shape = [1] * dim
        shape[axis] = -1
        out = out * vec.reshape(shape)
    return out


def _combined_eigen_tensor(op: CnFvOperator, mass_eigs, stiff_eigs) -> np.ndarray:
    """Assemble Lambda = prod_i mass_i + sum_i eta_i*(k+ + k-)*stiff_i*prod_{j!=i} mass_j.

    For the tau preconditioner the stiffness vectors already absorb the
    symmetric-part halving, so the weight is eta_i*(k_{i,+}+k_{i,-});
    circulant assembly passes eta_i-weighted complex vectors directly.
    """
    tensor = _outer_tensor(mass_eigs)
    for axis in range(op.grid.dim):
        factors = list(mass_eigs)
        factors[axis] = stiff_eigs[axis]
        tensor = tensor + _outer_tensor(factors)
    return tensor


class TauPreconditioner:
    """``P = S_N diag(Lambda) S_N`` with strictly positive Lambda."""

    def __init__(self, grid, eigen_tensor: np.ndarray, plans: list[SineTransformPlan]):
        self.grid = grid
        self.eigen_tensor = eigen_tensor
        self.plans = plans

    def apply_inverse(self, r: np.ndarray) -> np.ndarray:
        """``P^{-1} r`` via DST -> divide -> DST."""
        return tensor_dst_apply(self.plans, tensor_dst_apply(self.plans, r) / self.eigen_tensor)

    def apply_inverse_sqrt(self, r: np.ndarray) -> np.ndarray:
        """``P^{-1/2} r``; exact because the DST diagonalization is exact."""
        return tensor_dst_apply(
            self.plans, tensor_dst_apply(self.plans, r) / np.sqrt(self.eigen_tensor)
        )

    def materialize_dense(self) -> np.ndarray:
        """Dense ``P``; oracle for tests and the spectral analysis."""
        if self.grid.size > DENSE_GUARD:
            raise ValueError(f"dense materialization refused for N={self.grid.size}")
        return self._sandwich(self.eigen_tensor.ravel(order="F"))

    def materialize_inverse_sqrt_dense(self) -> np.ndarray:
        if self.grid.size > DENSE_GUARD:
            raise ValueError(f"dense materialization refused for N={self.grid.size}")
        return self._sandwich(1.0 / np.sqrt(self.eigen_tensor.ravel(order="F")))

    def _sandwich(self, diagonal: np.ndarray) -> np.ndarray:
        s_full = sine_matrix(self.grid.counts[-1])
        for n in self.grid.counts[-2::-1]:
            s_full = np.kron(s_full, sine_matrix(n))
        return (s_full * diagonal) @ s_full


def assemble_tau(op: CnFvOperator) -> TauPreconditioner:
    """Build the tau preconditioner for a ``sign=+1`` operator.

    The eigen-tensor depends only on (grid, orders, diffusivities, dt),
    all constant over a time march, so assembly happens once per run.
    """
    if op.sign != +1:
        raise ValueError("preconditioner is assembled from the sign=+1 operator")
    grid = op.grid
    mass_eigs = [mass_eigenvalues(n) for n in grid.counts]
    stiff_eigs = []
    for axis in range(grid.dim):
        kp, km = op.diffusivities[axis]
        table = coefficient_table(op.orders[axis], grid.counts[axis])
        stiff_eigs.append(op.etas[axis] * (kp + km) * tau_sym_eigenvalues(table))
    tensor = _combined_eigen_tensor(op, mass_eigs, stiff_eigs)
    floor = 0.5**grid.dim
    if tensor.min() <= floor:
        raise PreconditionerBreakdown(
            f"tau eigenvalue {tensor.min():.3e} at or below the mass floor {floor}"
        )
    return TauPreconditioner(grid, tensor, [SineTransformPlan(n) for n in grid.counts])


def apply_tau_inverse(p: TauPreconditioner, r: np.ndarray) -> np.ndarray:
    return p.apply_inverse(r)


def strang_circulant_column(first_column, first_row) -> np.ndarray:
    """Strang circulant: copy the central diagonals, wrap the rest.

    Diagonals ``0..floor(n/2)`` come from the Toeplitz lower triangle
    (first column), the remainder wrap around to the upper diagonals.
    """
    col = np.asarray(first_column, dtype=float)
    row = np.asarray(first_row, dtype=float)
    n = len(col)
    out = np.zeros(n)
    half = n // 2
    out[: half + 1] = col[: half + 1]
    for j in range(half + 1, n):
        out[j] = row[n - j]
    return out


def chan_circulant_column(first_column, first_row) -> np.ndarray:
    """T. Chan circulant: Frobenius-optimal diagonal averaging.

    Circulant diagonal j collects the n-j entries of Toeplitz diagonal
    -j (first column) and the j entries of diagonal n-j (first row):
    ``c_j = ((n-j)*col[j] + j*row[n-j]) / n``.
    """
    col = np.asarray(first_column, dtype=float)
    row = np.asarray(first_row, dtype=float)
    n = len(col)
    out = np.empty(n)
    out[0] = col[0]
    for j in range(1, n):
        out[j] = ((n - j) * col[j] + j * row[n - j]) / n
    return out


_CIRCULANT_COLUMNS = {
    "strang": strang_circulant_column,
    "chan": chan_circulant_column,
}


class CirculantPreconditioner:
    """Kronecker-sum of per-axis circulants, diagonalized by the DFT."""

    def __init__(self, grid, eigen_tensor: np.ndarray, variant: str):
        self.grid = grid
        self.eigen_tensor = eigen_tensor
        self.variant = variant

    def apply_inverse(self, r: np.ndarray) -> np.ndarray:
        """Per-axis FFTs, elementwise divide, inverse FFTs, real part."""
        spectrum = np.asarray(r, dtype=complex)
        for axis in range(r.ndim):
            spectrum = np.fft.fft(spectrum, axis=axis)
        spectrum /= self.eigen_tensor
        for axis in range(r.ndim):
            spectrum = np.fft.ifft(spectrum, axis=axis)
        scale = np.abs(spectrum.real).max()
        residue = np.abs(spectrum.imag).max()
        # complex arithmetic throughout; the result must be real to roundoff
        assert residue <= 1e-10 * max(scale, 1.0), "circulant inverse left imaginary residue"
        return spectrum.real


def _circulant_axis_eigenvalues(op: CnFvOperator, axis: int, variant: str):
    column_of = _CIRCULANT_COLUMNS[variant]
    n = op.grid.counts[axis]
    mass_col = np.zeros(n)
    mass_col[0] = 0.75
    if n >= 2:
        mass_col[1] = 0.125
    mass_row = mass_col.copy()
    mass_eigs = np.fft.fft(column_of(mass_col, mass_row))
    top = op.toeplitz[axis]
    t_eigs = np.fft.fft(column_of(top.first_column, top.first_row))
    kp, km = op.diffusivities[axis]
    # transpose of a real circulant has conjugate eigenvalues
    stiff_eigs = kp * t_eigs + km * t_eigs.conj()
    return mass_eigs, stiff_eigs


def assemble_circulant(op: CnFvOperator, variant: str) -> CirculantPreconditioner:
    """Circulant-substituted preconditioner, ``variant`` in {strang, chan}."""
    if op.sign != +1:
        raise ValueError("preconditioner is assembled from the sign=+1 operator")
    if variant not in _CIRCULANT_COLUMNS:
        raise ValueError(f"unknown circulant variant {variant!r}")
    mass_eigs, stiff_eigs = [], []
    for axis in range(op.grid.dim):
        m, s = _circulant_axis_eigenvalues(op, axis, variant)
        mass_eigs.append(m)
        stiff_eigs.append(op.etas[axis] * s)
    tensor = _combined_eigen_tensor(op, mass_eigs, stiff_eigs)
    if np.abs(tensor).min() < 1e-14:
        raise PreconditionerBreakdown(
            f"{variant} circulant eigenvalue with modulus {np.abs(tensor).min():.3e}"
        )
    return CirculantPreconditioner(op.grid, tensor, variant)
