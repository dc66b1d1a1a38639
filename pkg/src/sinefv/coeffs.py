"""Fractional finite-volume coefficients.

Each spatial axis of the discretization carries a fractional order
``delta`` in the open interval (0, 1).  Two coefficient families drive
everything downstream:

* ``s_k``: second differences of ``x**delta`` sampled at half-integers,

      s_0 = (1/2)**delta
      s_1 = (3/2)**delta - 2*(1/2)**delta
      s_k = (k+1/2)**delta - 2*(k-1/2)**delta + (k-3/2)**delta,  k >= 2

* ``q_k``: the sign-flipped first difference of ``s``,

      q_0 = -s_0,     q_k = s_{k-1} - s_k,  1 <= k <= n

The ``q`` vector is the diagonal data of the one-dimensional stiffness
Toeplitz matrix (``q_1`` on the main diagonal, ``q_0`` on the first
superdiagonal, ``q_2, q_3, ...`` below).  Its sign pattern and
monotonicity are what make the sine-transform preconditioner work, so
they are validated here and property-tested heavily.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "CoefficientTable",
    "coefficient_table",
    "compute_q_coefficients",
    "compute_s_coefficients",
    "validate_order",
]


def validate_order(order: float) -> float:
    """Check that a fractional order lies strictly inside (0, 1)."""
    order = float(order)
    if not 0.0 < order < 1.0:
        raise ValueError(f"fractional order must lie in (0, 1), got {order}")
    return order


def _validate(order: float, n: int) -> tuple[float, int]:
    order = validate_order(order)
    n = int(n)
    if n < 2:
        raise ValueError(f"need at least n=2 coefficients, got n={n}")
    return order, n


def compute_s_coefficients(order: float, n: int) -> np.ndarray:
    """Second-difference coefficients ``s_0 .. s_n`` for one axis.

    Parameters
    ----------
    order : float
        Fractional order ``delta`` in (0, 1).
    n : int
        Largest index; the result has length ``n + 1``.

    Notes
    -----
    The three-term difference loses roughly ``2*log10(k)`` digits to
    cancellation; with n capped at desk scale (<= 2**10 in the solvers,
    ~1e5 in the symbol checks) the absolute error stays near 1e-13,
    which is accepted as a known precision limit.
    """
    order, n = _validate(order, n)
    s = np.empty(n + 1)
    s[0] = 0.5**order
    s[1] = 1.5**order - 2.0 * 0.5**order
    k = np.arange(2.0, n + 1.0)
    s[2:] = (k + 0.5) ** order - 2.0 * (k - 0.5) ** order + (k - 1.5) ** order
    return s


def compute_q_coefficients(order: float, n: int) -> np.ndarray:
    """Stiffness Toeplitz coefficients ``q_0 .. q_n`` for one axis."""
    s = compute_s_coefficients(order, n)
    q = np.empty(n + 1)
    q[0] = -s[0]
    q[1:] = s[:-1] - s[1:]
    return q


@dataclass(frozen=True)
class CoefficientTable:
    """Immutable bundle of the ``s`` and ``q`` vectors for one (order, n)."""

    order: float
    n: int
    s: np.ndarray
    q: np.ndarray

    def validate(self, rtol: float = 1e-12) -> None:
        """Assert the analytic sign/monotonicity structure of ``q``.

        Raises ``AssertionError`` if any of the following fail:
        the defining difference relation, ``q_1 > 0``, ``q_0 + q_2 < 0``,
        ``q_k < 0`` for k >= 3, the strict increase of ``q_3 < q_4 < ...``
        above ``q_0 + q_2``, and positivity of all partial sums
        ``q_1 + sum_{k != 1, k <= m} q_k`` for m >= 2.
        """
        q, s = self.q, self.s
        scale = np.abs(q).max()
        assert abs(q[0] + s[0]) <= rtol * scale
        assert np.abs(q[1:] - (s[:-1] - s[1:])).max() <= rtol * scale
        assert q[1] > 0.0
        assert q[0] + q[2] < 0.0
        if self.n >= 3:
            assert np.all(q[3:] < 0.0)
            tail = np.concatenate(([q[0] + q[2]], q[3:]))
            assert np.all(np.diff(tail) > 0.0)
        # partial sums telescope: q_1 + sum_{k != 1}^{m} q_k = -s_m > 0
        partial = np.cumsum(q)[2:]
        assert np.all(partial > 0.0)


@lru_cache(maxsize=256)
def coefficient_table(order: float, n: int) -> CoefficientTable:
    """Build (and cache) the coefficient table for one axis.

    Every time step reuses the same ``q`` vector, so tables are cached
    per ``(order, n)``.  The arrays are frozen; treat them as read-only.
    """
    order, n = _validate(order, n)
    s = compute_s_coefficients(order, n)
    q = compute_q_coefficients(order, n)
    s.setflags(write=False)
    q.setflags(write=False)
    return CoefficientTable(order=order, n=n, s=s, q=q)
