"""Flat ``key = value`` experiment configuration files.

The experiment sweeps are four-dimensional (orders x grid sizes x time
steps x methods), so configs are files rather than flag soup.  Syntax:

    # comment
    problem = ex1
    orders = [0.1, 0.2]
    diffusivities = [5, 5, 5, 5]     # k1+, k1-, k2+, k2-, (k3+, k3-)
    grid_sizes = [16, 32, 64]        # n+1 values
    time_steps = [8]                 # M values
    methods = [cg, pcg_tau]

Lists use ``[a, b, c]``; scalars parse as int, then float, then bool,
then bare string.  Unknown or malformed keys raise ``ConfigError`` with
the offending line.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .krylov import KrylovConfig

__all__ = ["ConfigError", "ExperimentConfig", "parse_config_file"]


class ConfigError(Exception):
    """Bad configuration input; the CLI maps this to exit code 2."""


def _parse_scalar(token: str):
    token = token.strip()
    try:
        return int(token)
    except ValueError:
        pass
    try:
        return float(token)
    except ValueError:
        pass
    if token.lower() in ("true", "false"):
        return token.lower() == "true"
    return token


def _parse_value(raw: str, lineno: int):
    raw = raw.strip()
    if raw.startswith("["):
        if not raw.endswith("]"):
            raise ConfigError(f"line {lineno}: unterminated list {raw!r}")
        inner = raw[1:-1].strip()
        if not inner:
            return []
        return [_parse_scalar(tok) for tok in inner.split(",")]
    if not raw:
        raise ConfigError(f"line {lineno}: empty value")
    return _parse_scalar(raw)


def parse_config_file(path) -> dict:
    """Read a config file into a {key: scalar-or-list} mapping."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    entries: dict = {}
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = stripped.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigError(f"line {lineno}: missing key")
        if key in entries:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        entries[key] = _parse_value(raw, lineno)
    return entries


def _as_list(value):
    return list(value) if isinstance(value, list) else [value]


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated sweep description shared by the CLI commands."""

    problem: str = "ex1"
    orders: tuple[float, ...] = (0.1, 0.2)
    diffusivities: tuple[tuple[float, float], ...] = ((5.0, 5.0), (5.0, 5.0))
    grid_sizes: tuple[int, ...] = (8,)
    time_steps: tuple[int, ...] = (4,)
    methods: tuple[str, ...] = ()
    horizon: float = 1.0
    tol: float = 1e-9
    maxit: int = 0  # 0 -> number of unknowns
    restart: int = 20
    initial_guess: str = "warm"
    quadrature: str = "gauss2"
    seed: int = 1234
    # verify command
    draws: int = 20
    max_axis: int = 6
    dims: tuple[int, ...] = (2, 3)
    symmetric_draws: bool = False
    # order command
    study: str = "both"
    spatial_sizes: tuple[int, ...] = (16, 32, 64)
    spatial_dt_per_h: float = 0.25
    temporal_steps: tuple[int, ...] = (4, 8, 16)
    temporal_grid: int = 32
    temporal_reference_factor: int = 8
    order_method: str = ""

    _KNOWN = {
        "problem", "orders", "diffusivities", "grid_sizes", "time_steps",
        "methods", "horizon", "tol", "maxit", "restart", "initial_guess",
        "quadrature", "seed", "draws", "max_axis", "dims", "symmetric_draws",
        "study", "spatial_sizes", "spatial_dt_per_h", "temporal_steps",
        "temporal_grid", "temporal_reference_factor", "order_method",
    }

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        return cls.from_mapping(parse_config_file(path))

    @classmethod
    def from_mapping(cls, entries: dict) -> "ExperimentConfig":
        unknown = set(entries) - cls._KNOWN
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kwargs: dict = {}
        if "problem" in entries:
            kwargs["problem"] = str(entries["problem"])
        if "orders" in entries:
            kwargs["orders"] = tuple(float(v) for v in _as_list(entries["orders"]))
        if "diffusivities" in entries:
            flat = [float(v) for v in _as_list(entries["diffusivities"])]
            if len(flat) % 2 != 0:
                raise ConfigError(
                    "diffusivities must list (plus, minus) pairs per axis"
                )
            kwargs["diffusivities"] = tuple(
                (flat[i], flat[i + 1]) for i in range(0, len(flat), 2)
            )
        for key in ("grid_sizes", "time_steps", "dims", "spatial_sizes", "temporal_steps"):
            if key in entries:
                kwargs[key] = tuple(int(v) for v in _as_list(entries[key]))
        if "methods" in entries:
            kwargs["methods"] = tuple(str(v) for v in _as_list(entries["methods"]))
        for key in ("horizon", "tol", "spatial_dt_per_h"):
            if key in entries:
                kwargs[key] = float(entries[key])
        for key in ("maxit", "restart", "seed", "draws", "max_axis",
                    "temporal_grid", "temporal_reference_factor"):
            if key in entries:
                kwargs[key] = int(entries[key])
        for key in ("initial_guess", "quadrature", "study", "order_method"):
            if key in entries:
                kwargs[key] = str(entries[key])
        if "symmetric_draws" in entries:
            value = entries["symmetric_draws"]
            if not isinstance(value, bool):
                raise ConfigError("symmetric_draws must be true or false")
            kwargs["symmetric_draws"] = value
        try:
            config = cls(**kwargs)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        config.validate()
        return config

    def validate(self) -> None:
        if self.tol <= 0:
            raise ConfigError("tol must be positive")
        if self.restart < 1:
            raise ConfigError("restart must be >= 1")
        if self.maxit < 0:
            raise ConfigError("maxit must be >= 0 (0 means 'matrix size')")
        if self.initial_guess not in ("warm", "zero"):
            raise ConfigError("initial_guess must be 'warm' or 'zero'")
        if self.quadrature not in ("gauss2", "midpoint"):
            raise ConfigError("quadrature must be 'gauss2' or 'midpoint'")
        if self.study not in ("spatial", "temporal", "both"):
            raise ConfigError("study must be spatial, temporal, or both")
        if any(g < 3 for g in self.grid_sizes + self.spatial_sizes):
            raise ConfigError("grid sizes (n+1) must be >= 3")
        if any(m < 1 for m in self.time_steps + self.temporal_steps):
            raise ConfigError("time step counts must be >= 1")
        if any(d not in (2, 3) for d in self.dims):
            raise ConfigError("dims entries must be 2 or 3")
        if self.draws < 1 or self.max_axis < 2:
            raise ConfigError("draws must be >= 1 and max_axis >= 2")

    def krylov_config(self, size: int) -> KrylovConfig:
        maxit = self.maxit if self.maxit > 0 else size
        return KrylovConfig(tol=self.tol, maxit=maxit, restart=self.restart)
