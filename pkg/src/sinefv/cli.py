"""Experiment runner: iteration tables, spectral checks, order studies.

Three subcommands, each driven by a ``key = value`` config file:

* ``table``  - time-march every (grid, M, method) combination and emit
  the iteration/error table as CSV plus a Markdown rendering.
* ``verify`` - draw random small instances, compute dense spectra of the
  preconditioned operator, and check the uniform eigenvalue bounds and
  the skew-radius bound per draw.
* ``order``  - spatial and temporal refinement studies with observed
  convergence slopes.

Exit codes: 0 full success, 1 any per-row failure, 2 config errors.
Wall-clock columns are reported but never asserted on; with a fixed
seed every other column is deterministic.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from .analysis import dense_preconditioned_spectrum
from .config import ConfigError, ExperimentConfig
from .operators import CnFvOperator, GridSpec
from .preconditioners import assemble_circulant, assemble_tau
from .problems import PROBLEM_DIMS, make_problem
from .scheme import METHODS, cell_average_source, cn_step, time_march

__all__ = ["main", "run_order_study", "run_table", "run_verification"]


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _orders_token(orders) -> str:
    return ";".join(repr(float(o)) for o in orders)


def _diffusivities_token(pairs) -> str:
    return ";".join(f"{repr(float(kp))}:{repr(float(km))}" for kp, km in pairs)


TABLE_HEADER = [
    "orders", "M", "n_plus_1", "method", "mean_iters", "wall_seconds",
    "final_L2_error", "final_max_error", "converged_all_steps",
    "diffusivities", "tol", "restart", "initial_guess", "quadrature", "horizon",
]


def run_table(config: ExperimentConfig, out_dir) -> tuple[list[dict], bool]:
    """Run the sweep and write ``table.csv`` / ``table.md``.

    Returns the row dicts and a flag for any per-row failure (solver
    non-convergence); failures are recorded and the sweep continues.
    """
    if not config.methods:
        raise ConfigError("methods list is empty; nothing to run")
    unknown = [m for m in config.methods if m not in METHODS]
    if unknown:
        raise ConfigError(f"unknown methods: {unknown}")
    if config.problem not in PROBLEM_DIMS:
        raise ConfigError(f"unknown problem {config.problem!r}")
    symmetric = all(kp == km for kp, km in config.diffusivities)
    if not symmetric:
        bad = [m for m in config.methods if METHODS[m][0] == "cg"]
        if bad:
            raise ConfigError(
                f"methods {bad} need symmetric diffusivities, got "
                f"{config.diffusivities}"
            )

    out_dir = Path(out_dir)
    rows: list[dict] = []
    any_failed = False
    for grid_size in config.grid_sizes:
        for steps in config.time_steps:
            spec = make_problem(
                config.problem, config.orders, config.diffusivities,
                grid_size, steps, horizon=config.horizon,
            )
            cfg = config.krylov_config(spec.grid.size)
            for method in config.methods:
                report = time_march(
                    spec, method, cfg,
                    initial_guess=config.initial_guess,
                    quadrature=config.quadrature,
                )
                ok = report.converged_all
                any_failed = any_failed or not ok
                rows.append({
                    "orders": _orders_token(config.orders),
                    "M": steps,
                    "n_plus_1": grid_size,
                    "method": method,
                    "mean_iters": f"{report.mean_iterations:.2f}",
                    "wall_seconds": report.wall_seconds,
                    "final_L2_error": report.l2_error,
                    "final_max_error": report.max_error,
                    "converged_all_steps": ok,
                    "diffusivities": _diffusivities_token(config.diffusivities),
                    "tol": config.tol,
                    "restart": config.restart,
                    "initial_guess": config.initial_guess,
                    "quadrature": config.quadrature,
                    "horizon": config.horizon,
                })
    _write_csv(out_dir / "table.csv", TABLE_HEADER,
               [[row[key] for key in TABLE_HEADER] for row in rows])
    _write_markdown_table(out_dir / "table.md", config, rows)
    return rows, any_failed


def _write_markdown_table(path: Path, config: ExperimentConfig, rows: list[dict]) -> None:
    """Wide layout: one line per (M, n+1), method columns in Iter/CPU pairs."""
    methods = list(config.methods)
    header = ["orders", "M", "n+1"]
    for method in methods:
        header += [f"{method} Iter", f"{method} CPU(s)"]
    lines = [
        f"# {config.problem}: mean iterations per time step",
        "",
        "| " + " | ".join(header) + " |",
        "|" + "|".join("---" for _ in header) + "|",
    ]
    by_cell: dict[tuple, dict[str, dict]] = {}
    for row in rows:
        by_cell.setdefault((row["M"], row["n_plus_1"]), {})[row["method"]] = row
    for (steps, grid_size), cells in by_cell.items():
        line = [f"({', '.join(_orders_token(config.orders).split(';'))})",
                str(steps), str(grid_size)]
        for method in methods:
            cell = cells.get(method)
            if cell is None:
                line += ["-", "-"]
            else:
                line += [cell["mean_iters"], f"{cell['wall_seconds']:.2f}"]
        lines.append("| " + " | ".join(line) + " |")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")


VERIFY_HEADER = [
    "draw", "dim", "counts", "orders", "diffusivities", "dt",
    "lambda_min", "lambda_max", "skew_radius", "varsigma", "omega",
    "pass_hermitian_bounds", "pass_skew_bound",
]


def run_verification(config: ExperimentConfig, out_dir) -> tuple[list[dict], bool]:
    """Random-instance dense spectral checks; write ``verification.csv``."""
    rng = np.random.default_rng(config.seed)
    rows: list[dict] = []
    all_pass = True
    for draw in range(config.draws):
        dim = int(rng.choice(list(config.dims)))
        counts = tuple(int(rng.integers(2, config.max_axis + 1)) for _ in range(dim))
        orders = tuple(float(rng.uniform(0.05, 0.95)) for _ in range(dim))
        if config.symmetric_draws:
            diffusivities = tuple(
                (k, k) for k in (float(rng.uniform(1.0, 30.0)) for _ in range(dim))
            )
        else:
            diffusivities = tuple(
                (float(rng.uniform(1.0, 30.0)), float(rng.uniform(1.0, 30.0)))
                for _ in range(dim)
            )
        dt = float(rng.uniform(0.05, 0.5))
        grid = GridSpec.unit_box(counts)
        op = CnFvOperator(grid, orders, diffusivities, dt, sign=+1)
        report = dense_preconditioned_spectrum(op, assemble_tau(op))
        lam_min, lam_max = report.hermitian_extremes
        pass_h = 0.5 < lam_min and lam_max < 1.5
        pass_s = report.skew_radius <= report.varsigma
        all_pass = all_pass and pass_h and pass_s
        rows.append({
            "draw": draw,
            "dim": dim,
            "counts": ";".join(str(c) for c in counts),
            "orders": _orders_token(orders),
            "diffusivities": _diffusivities_token(diffusivities),
            "dt": dt,
            "lambda_min": lam_min,
            "lambda_max": lam_max,
            "skew_radius": report.skew_radius,
            "varsigma": report.varsigma,
            "omega": report.omega,
            "pass_hermitian_bounds": pass_h,
            "pass_skew_bound": pass_s,
        })
    _write_csv(Path(out_dir) / "verification.csv", VERIFY_HEADER,
               [[row[key] for key in VERIFY_HEADER] for row in rows])
    return rows, not all_pass


ORDER_HEADER = [
    "study", "n_plus_1", "M", "l2_error", "max_error", "slope_l2", "slope_max",
]


def _default_order_method(config: ExperimentConfig) -> str:
    if config.order_method:
        return config.order_method
    symmetric = all(kp == km for kp, km in config.diffusivities)
    return "pcg_tau" if symmetric else "pgmres_tau"


def run_order_study(config: ExperimentConfig, out_dir) -> tuple[list[dict], bool]:
    """Refinement studies; write ``order.csv`` with per-level slopes.

    Spatial: error against the exact solution with ``dt`` tied to ``h``
    (``dt = spatial_dt_per_h * h``, small enough that the opposite-sign
    temporal component stays negligible).  Temporal: error against a
    time-refined reference on the same grid, which isolates the O(dt^2)
    component from the fixed spatial floor.
    """
    method = _default_order_method(config)
    if method not in METHODS:
        raise ConfigError(f"unknown order_method {method!r}")
    if config.study in ("spatial", "both") and len(config.spatial_sizes) < 3:
        raise ConfigError("spatial study needs >= 3 refinement levels")
    if config.study in ("temporal", "both") and len(config.temporal_steps) < 3:
        raise ConfigError("temporal study needs >= 3 refinement levels")

    rows: list[dict] = []
    failed = False

    def push(study, grid_size, steps, l2, mx, prev):
        slope_l2 = "" if prev is None else repr(float(np.log2(prev[0] / l2)))
        slope_mx = "" if prev is None else repr(float(np.log2(prev[1] / mx)))
        rows.append({
            "study": study, "n_plus_1": grid_size, "M": steps,
            "l2_error": l2, "max_error": mx,
            "slope_l2": slope_l2, "slope_max": slope_mx,
        })

    if config.study in ("spatial", "both"):
        prev = None
        for grid_size in config.spatial_sizes:
            # dt = spatial_dt_per_h * h with h = horizon-independent 1/(n+1)
            steps = max(1, round(config.horizon * grid_size / config.spatial_dt_per_h))
            spec = make_problem(config.problem, config.orders, config.diffusivities,
                                grid_size, steps, horizon=config.horizon)
            report = time_march(spec, method, config.krylov_config(spec.grid.size),
                                initial_guess=config.initial_guess,
                                quadrature=config.quadrature)
            failed = failed or not report.converged_all
            push("spatial", grid_size, steps, report.l2_error, report.max_error, prev)
            prev = (report.l2_error, report.max_error)

    if config.study in ("temporal", "both"):
        reference_steps = config.temporal_reference_factor * max(config.temporal_steps)
        u_ref = _march_final_field(config, method, config.temporal_grid, reference_steps)
        spec0 = make_problem(config.problem, config.orders, config.diffusivities,
                             config.temporal_grid, reference_steps,
                             horizon=config.horizon)
        cell_volume = float(np.prod(spec0.grid.steps))
        prev = None
        for steps in config.temporal_steps:
            u = _march_final_field(config, method, config.temporal_grid, steps)
            err = u - u_ref
            l2 = float(np.sqrt(cell_volume * np.sum(err**2)))
            mx = float(np.abs(err).max())
            push("temporal", config.temporal_grid, steps, l2, mx, prev)
            prev = (l2, mx)

    _write_csv(Path(out_dir) / "order.csv", ORDER_HEADER,
               [[row[key] for key in ORDER_HEADER] for row in rows])
    return rows, failed


def _march_final_field(config: ExperimentConfig, method: str,
                       grid_size: int, steps: int) -> np.ndarray:
    """March and return the final-time field (order studies need fields)."""
    spec = make_problem(config.problem, config.orders, config.diffusivities,
                        grid_size, steps, horizon=config.horizon)
    cfg = config.krylov_config(spec.grid.size)
    op_plus, op_minus = spec.operators()
    variant = METHODS[method][1]
    if variant == "tau":
        precond = assemble_tau(op_plus).apply_inverse
    elif variant is not None:
        precond = assemble_circulant(op_plus, variant).apply_inverse
    else:
        precond = None
    u = np.asarray(
        np.broadcast_to(spec.initial(tuple(spec.grid.meshgrid())), spec.grid.shape),
        dtype=float,
    ).copy()
    for m in range(1, steps + 1):
        source_avg = cell_average_source(spec, m, rule=config.quadrature)
        x0 = u if config.initial_guess == "warm" else np.zeros_like(u)
        u, _ = cn_step(op_plus, op_minus, precond, u, source_avg, cfg, x0=x0)
    return u


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sinefv",
        description="Fractional-diffusion CN-FV experiments with "
                    "sine-transform preconditioned Krylov solvers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, doc in (
        ("table", "run iteration-count table sweeps at desk scale"),
        ("verify", "dense spectral verification of the preconditioner bounds"),
        ("order", "convergence-order studies"),
    ):
        cmd = sub.add_parser(name, help=doc)
        cmd.add_argument("--config", required=True, help="key = value config file")
        cmd.add_argument("--out", required=True, help="output directory")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = ExperimentConfig.from_file(args.config)
        if args.command == "table":
            _, failed = run_table(config, args.out)
        elif args.command == "verify":
            _, failed = run_verification(config, args.out)
        else:
            _, failed = run_order_study(config, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if failed:
        print("one or more rows failed; see the output CSV", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
