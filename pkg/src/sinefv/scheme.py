"""Crank-Nicolson finite-volume time marching.

One step solves ``A u^m = R u^{m-1} + dt * F^{m-1/2}`` where ``A`` and
``R`` are the ``sign=+1`` / ``sign=-1`` operators and ``F`` is the
cell-averaged source at the half step.  Symmetric diffusivities route to
(P)CG, anything else to (P)GMRES; asking for a CG-family method on a
non-symmetric problem is refused before stepping.

Fields never allocate exterior nodes; every stencil zero-extends, which
is the homogeneous Dirichlet condition of the model.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .krylov import KrylovConfig, SolveStats, gmres_restarted, pcg
from .operators import CnFvOperator, GridSpec
from .preconditioners import assemble_circulant, assemble_tau

__all__ = [
    "METHODS",
    "ProblemSpec",
    "SolveReport",
    "cell_average_source",
    "cn_step",
    "observed_order",
    "time_march",
]

# method name -> (krylov family, preconditioner variant)
METHODS = {
    "cg": ("cg", None),
    "pcg_tau": ("cg", "tau"),
    "pcg_strang": ("cg", "strang"),
    "pcg_chan": ("cg", "chan"),
    "gmres": ("gmres", None),
    "pgmres_tau": ("gmres", "tau"),
    "pgmres_strang": ("gmres", "strang"),
    "pgmres_chan": ("gmres", "chan"),
}

_GAUSS2_OFFSET = 0.5 / np.sqrt(3.0)  # 2-point Gauss nodes at cell center +- h*this


@dataclass(frozen=True)
class ProblemSpec:
    """Model data for one run: grid, orders, diffusivities, callbacks.

    ``source`` and ``exact`` take ``(points, t)`` where ``points`` is the
    tuple of per-axis coordinate arrays (broadcastable against each
    other); ``initial`` takes ``points`` only.  All callbacks must be
    numpy-vectorized.
    """

    grid: GridSpec
    orders: tuple[float, ...]
    diffusivities: tuple[tuple[float, float], ...]
    horizon: float
    steps: int
    source: Callable
    initial: Callable
    exact: Optional[Callable] = None

    def __post_init__(self):
        if self.horizon <= 0.0 or self.steps < 1:
            raise ValueError("need a positive horizon and at least one step")

    @property
    def dt(self) -> float:
        return self.horizon / self.steps

    @property
    def symmetric(self) -> bool:
        return all(kp == km for kp, km in self.diffusivities)

    def operators(self) -> tuple[CnFvOperator, CnFvOperator]:
        plus = CnFvOperator(
            self.grid, self.orders, self.diffusivities, self.dt, sign=+1
        )
        return plus, plus.with_sign(-1)


@dataclass
class SolveReport:
    """Per-step solver stats plus final-time errors for one march."""

    method: str
    steps: list[SolveStats] = field(default_factory=list)
    l2_error: Optional[float] = None
    max_error: Optional[float] = None
    wall_seconds: float = 0.0
    params: dict = field(default_factory=dict)

    @property
    def mean_iterations(self) -> float:
        return float(np.mean([s.iterations for s in self.steps]))

    @property
    def converged_all(self) -> bool:
        return all(s.converged for s in self.steps)


def cell_average_source(spec: ProblemSpec, m: int, rule: str = "gauss2") -> np.ndarray:
    """Cell averages of the source at the half step ``t_{m-1/2}``.

    The default tensor-product 2-point Gauss rule is exact through cubic
    polynomials per axis, so the quadrature error never dominates the
    scheme's spatial accuracy; the midpoint rule is available for cost
    comparisons.
    """
    if not 1 <= m <= spec.steps:
        raise ValueError(f"time index {m} outside 1..{spec.steps}")
    t_mid = (m - 0.5) * spec.dt
    grid = spec.grid
    if rule == "midpoint":
        return np.asarray(
            np.broadcast_to(spec.source(tuple(grid.meshgrid()), t_mid), grid.shape)
        ).astype(float)
    if rule != "gauss2":
        raise ValueError(f"unknown quadrature rule {rule!r}")
    axes_points = [grid.axis_points(i) for i in range(grid.dim)]
    offsets = [h * _GAUSS2_OFFSET for h in grid.steps]
    total = np.zeros(grid.shape)
    for bits in range(2**grid.dim):
        shifted = []
        for axis in range(grid.dim):
            delta = offsets[axis] if bits >> axis & 1 else -offsets[axis]
            shape = [1] * grid.dim
            shape[axis] = -1
            shifted.append((axes_points[axis] + delta).reshape(shape))
        total += spec.source(tuple(shifted), t_mid)
    return total / 2**grid.dim


def cn_step(
    op_plus: CnFvOperator,
    op_minus: CnFvOperator,
    precond_inv,
    u_prev: np.ndarray,
    source_avg: np.ndarray,
    cfg: KrylovConfig,
    x0: Optional[np.ndarray] = None,
) -> tuple[np.ndarray, SolveStats]:
    """Advance one step: assemble the right-hand side and solve.

    ``precond_inv`` is a callable applying the preconditioner inverse
    (or None).  The solver family follows the operator's symmetry.
    """
    if op_plus.sign != +1 or op_minus.sign != -1:
        raise ValueError("cn_step needs the (sign=+1, sign=-1) operator pair")
    b = op_minus.apply(u_prev) + op_plus.dt * source_avg
    if x0 is None:
        x0 = np.zeros_like(u_prev)
    solver = pcg if op_plus.symmetric else gmres_restarted
    return solver(op_plus.apply, precond_inv, b, x0, cfg)


def _build_preconditioner(op_plus: CnFvOperator, variant):
    if variant is None:
        return None
    if variant == "tau":
        return assemble_tau(op_plus).apply_inverse
    return assemble_circulant(op_plus, variant).apply_inverse


def _final_errors(spec: ProblemSpec, u: np.ndarray):
    if spec.exact is None:
        return None, None
    exact = np.broadcast_to(
        spec.exact(tuple(spec.grid.meshgrid()), spec.horizon), spec.grid.shape
    )
    err = u - exact
    cell_volume = float(np.prod(spec.grid.steps))
    l2 = float(np.sqrt(cell_volume * np.sum(err**2)))
    return l2, float(np.abs(err).max())


def time_march(
    spec: ProblemSpec,
    method: str,
    cfg: Optional[KrylovConfig] = None,
    initial_guess: str = "warm",
    quadrature: str = "gauss2",
) -> SolveReport:
    """March the scheme over all time steps with one named solver.

    ``initial_guess`` is "warm" (previous step's solution, the default)
    or "zero" (the stock solver convention).  Solver non-convergence in
    a step is recorded and the march continues with the best iterate.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {sorted(METHODS)}")
    family, variant = METHODS[method]
    if family == "cg" and not spec.symmetric:
        raise ValueError(
            f"{method} requires symmetric diffusivities; "
            f"got {spec.diffusivities}"
        )
    if initial_guess not in ("warm", "zero"):
        raise ValueError("initial_guess must be 'warm' or 'zero'")
    cfg = cfg or KrylovConfig()

    started = time.perf_counter()
    op_plus, op_minus = spec.operators()
    precond_inv = _build_preconditioner(op_plus, variant)
    u = np.asarray(
        np.broadcast_to(spec.initial(tuple(spec.grid.meshgrid())), spec.grid.shape),
        dtype=float,
    ).copy()

    report = SolveReport(
        method=method,
        params={
            "orders": spec.orders,
            "diffusivities": spec.diffusivities,
            "grid": spec.grid.counts,
            "steps": spec.steps,
            "horizon": spec.horizon,
            "tol": cfg.tol,
            "restart": cfg.restart,
            "initial_guess": initial_guess,
            "quadrature": quadrature,
        },
    )
    for m in range(1, spec.steps + 1):
        source_avg = cell_average_source(spec, m, rule=quadrature)
        x0 = u if initial_guess == "warm" else np.zeros_like(u)
        u, stats = cn_step(op_plus, op_minus, precond_inv, u, source_avg, cfg, x0=x0)
        report.steps.append(stats)
    report.l2_error, report.max_error = _final_errors(spec, u)
    report.wall_seconds = time.perf_counter() - started
    return report


def observed_order(errors, norm: str = "l2") -> float:
    """Mean slope ``log2(e_coarse / e_fine)`` over successive refinements.

    Accepts a sequence of final-time error norms ordered coarse to fine
    (each level refined by a factor 2), or a sequence of ``SolveReport``
    from which the ``norm`` ("l2" or "max") error is taken.  With more
    than two levels the mean telescopes to the endpoint slope over the
    number of gaps.
    """
    if norm not in ("l2", "max"):
        raise ValueError("norm must be 'l2' or 'max'")
    errors = [
        (e.l2_error if norm == "l2" else e.max_error)
        if isinstance(e, SolveReport)
        else e
        for e in errors
    ]
    if any(e is None for e in errors):
        raise ValueError("reports lack error norms (no exact solution?)")
    errors = [float(e) for e in errors]
    if len(errors) < 2:
        raise ValueError("need at least two refinement levels")
    if any(not np.isfinite(e) or e <= 0.0 for e in errors):
        raise ValueError(f"errors must be positive and finite, got {errors}")
    slopes = [np.log2(errors[i] / errors[i + 1]) for i in range(len(errors) - 1)]
    return float(np.mean(slopes))
