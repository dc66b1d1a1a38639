"""Built-in manufactured problems on the unit box.

Both problems share the separable bump ``v(w) = w^2 (1-w)^2`` per axis,
whose one-axis flux divergence has the closed form

    d/dw D^{order} v = sum_{k=0}^{2} (-1)^(2-k) C(2,k)
                       * Gamma(5-k)/Gamma(3-k+order)
                       * [k_plus * w^(2-k+order) + k_minus * (1-w)^(2-k+order)]

so the source terms are exact polynomials in fractional powers.

* "ex1" (2-D): exact solution ``4 e^t v(x) v(y)``.
* "ex2" (3-D): exact solution ``sin(t+1) v(x) v(y) v(z)``.
"""

from __future__ import annotations

from math import gamma

import numpy as np

from .operators import GridSpec
from .scheme import ProblemSpec

__all__ = ["PROBLEM_DIMS", "make_problem"]

PROBLEM_DIMS = {"ex1": 2, "ex2": 3}

_BINOMIAL_WEIGHTS = (1.0, 2.0, 1.0)


def _bump(w):
    return w**2 * (1.0 - w) ** 2


def _flux_divergence(w, order, k_plus, k_minus):
    out = np.zeros(np.shape(w))
    for k in range(3):
        coeff = (-1.0) ** (2 - k) * _BINOMIAL_WEIGHTS[k] * gamma(5.0 - k) / gamma(
            3.0 - k + order
        )
        out = out + coeff * (
            k_plus * w ** (2 - k + order) + k_minus * (1.0 - w) ** (2 - k + order)
        )
    return out


def make_problem(
    name: str,
    orders,
    diffusivities,
    grid_size: int,
    steps: int,
    horizon: float = 1.0,
) -> ProblemSpec:
    """Instantiate "ex1" or "ex2" with chosen orders and diffusivities.

    ``grid_size`` is ``n + 1`` (the per-axis cell count); the grid has
    ``n`` interior unknowns per axis.  ``diffusivities`` is one
    ``(k_plus, k_minus)`` pair per axis.
    """
    if name not in PROBLEM_DIMS:
        raise ValueError(f"unknown problem {name!r}; choose from {sorted(PROBLEM_DIMS)}")
    dim = PROBLEM_DIMS[name]
    orders = tuple(float(o) for o in orders)
    diffusivities = tuple((float(kp), float(km)) for kp, km in diffusivities)
    if len(orders) != dim or len(diffusivities) != dim:
        raise ValueError(f"{name} needs {dim} orders and diffusivity pairs")
    if grid_size < 3:
        raise ValueError("grid_size (n+1) must be at least 3")
    grid = GridSpec.unit_box((grid_size - 1,) * dim)

    if name == "ex1":

        def amplitude(t):
            return 4.0 * np.exp(t)

        def amplitude_rate(t):
            return 4.0 * np.exp(t)

    else:

        def amplitude(t):
            return np.sin(t + 1.0)

        def amplitude_rate(t):
            return np.cos(t + 1.0)

    def exact(points, t):
        out = amplitude(t)
        for w in points:
            out = out * _bump(w)
        return out

    def initial(points):
        return exact(points, 0.0)

    def source(points, t):
        bumps = [_bump(w) for w in points]
        total = amplitude_rate(t)
        for b in bumps:
            total = total * b
        for axis in range(dim):
            others = amplitude(t)
            for j in range(dim):
                if j != axis:
                    others = others * bumps[j]
            kp, km = diffusivities[axis]
            total = total - others * _flux_divergence(
                points[axis], orders[axis], kp, km
            )
        return total

    return ProblemSpec(
        grid=grid,
        orders=orders,
        diffusivities=diffusivities,
        horizon=horizon,
        steps=steps,
        source=source,
        initial=initial,
        exact=exact,
    )
