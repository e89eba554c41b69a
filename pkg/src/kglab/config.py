"""Experiment configuration: one human-editable JSON file per run.

Every module precondition that a run would hit is validated here before
any computation starts; the first failing rule is named in the raised
:class:`ConfigError` so a bad config is rejected with a machine-readable
reason.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .spectral import Field, UniformGrid, make_bump

__all__ = [
    "CONE_MARGIN_CELLS",
    "ConfigError",
    "GridSection",
    "StateSection",
    "QuadratureSection",
    "EvolveConfig",
    "HegerfeldtConfig",
    "PropagatorConfig",
    "load_config",
]

#: geometric slack, in grid cells, added to every light-cone check to
#: absorb threshold and discretization fuzz
CONE_MARGIN_CELLS = 5


class ConfigError(Exception):
    """Invalid configuration; ``rule`` names the first failing check."""

    def __init__(self, rule: str, message: str):
        super().__init__(f"{rule}: {message}")
        self.rule = rule
        self.message = message


def _require(condition: bool, rule: str, message: str) -> None:
    if not condition:
        raise ConfigError(rule, message)


def _get(tree: dict, key: str, rule: str):
    _require(key in tree, rule, f"missing required key {key!r}")
    return tree[key]


@dataclass(frozen=True)
class GridSection:
    n: int
    dx: float

    def build(self) -> UniformGrid:
        try:
            return UniformGrid(n=self.n, dx=self.dx)
        except ValueError as exc:
            raise ConfigError("grid", str(exc)) from exc


@dataclass(frozen=True)
class StateSection:
    factory: str
    center: float
    radius: float
    amplitude: float
    pi: str = "zero"

    def build_phi(self, grid: UniformGrid) -> Field:
        try:
            return make_bump(grid, self.center, self.radius, self.amplitude)
        except ValueError as exc:
            raise ConfigError("initial_state", str(exc)) from exc

    def build_pi(self, grid: UniformGrid) -> Field:
        if self.pi == "zero":
            return Field(grid, np.zeros(grid.n, dtype=np.complex128))
        # right mover: Pi = -Phi' with the closed-form bump derivative
        u = (grid.x - self.center) / self.radius
        vals = np.zeros(grid.n, dtype=np.complex128)
        inside = np.abs(u) < 1.0
        ui = u[inside]
        prof = self.amplitude * np.exp(1.0 - 1.0 / (1.0 - ui**2))
        vals[inside] = -prof * (-2.0 * ui / (1.0 - ui**2) ** 2) / self.radius
        return Field(grid, vals)


@dataclass(frozen=True)
class QuadratureSection:
    cutoff: float | None = None
    eps_base: float | None = None
    rungs: int = 4
    residual_tol: float = 1e-6
    band_fraction: float = 0.5


@dataclass(frozen=True)
class EvolveConfig:
    grid: GridSection
    mass: float
    state: StateSection
    method: str
    dt: float | None
    times: tuple[float, ...]
    snapshot_times: tuple[float, ...]
    support_threshold: float
    leakage_ceiling: float
    cone_margin_cells: int
    out_format: str


@dataclass(frozen=True)
class HegerfeldtConfig:
    grid: GridSection
    mass: float
    state: StateSection
    times: tuple[float, ...]
    leakage_floor: float
    contrast_ceiling: float
    support_threshold: float
    cone_margin_cells: int
    window: tuple[float, float]
    snapshot_time: float
    rate_band: float
    min_r2: float
    grid_doubling_check: bool
    doubling_tolerance: float
    out_format: str


@dataclass(frozen=True)
class PropagatorConfig:
    grid: GridSection
    mass: float
    times: tuple[float, ...]
    margin: float
    quadrature: QuadratureSection
    ratio_ceiling: float
    multiplier_error_ceiling: float
    zero_slice_ceiling: float
    out_format: str


def _parse_grid(tree: dict) -> GridSection:
    g = _get(tree, "grid", "grid")
    _require(isinstance(g, dict), "grid", "grid section must be an object")
    n = _get(g, "n", "grid.n")
    dx = _get(g, "dx", "grid.dx")
    _require(isinstance(n, int) and n >= 16 and not (n & (n - 1)), "grid.n", f"n must be a power of two >= 16, got {n}")
    _require(isinstance(dx, (int, float)) and math.isfinite(dx) and dx > 0, "grid.dx", f"dx must be finite and positive, got {dx}")
    return GridSection(n=n, dx=float(dx))


def _parse_mass(tree: dict, positive: bool) -> float:
    m = _get(tree, "mass", "mass")
    _require(isinstance(m, (int, float)) and math.isfinite(m), "mass", f"mass must be a finite number, got {m}")
    if positive:
        _require(m > 0, "mass.positive", f"this command needs m > 0 (1/omega is singular at m = 0), got {m}")
    else:
        _require(m >= 0, "mass", f"mass must be non-negative, got {m}")
    return float(m)


def _parse_state(tree: dict, grid: GridSection, allow_pi: bool) -> StateSection:
    s = _get(tree, "initial_state", "initial_state")
    _require(isinstance(s, dict), "initial_state", "initial_state must be an object")
    factory = _get(s, "factory", "initial_state.factory")
    _require(factory == "bump", "initial_state.factory", f"unknown factory {factory!r}; available: bump")
    center = float(s.get("center", 0.0))
    radius = _get(s, "radius", "initial_state.radius")
    amplitude = float(s.get("amplitude", 1.0))
    _require(
        isinstance(radius, (int, float)) and radius > 4.0 * grid.dx,
        "initial_state.radius",
        f"radius {radius} must exceed 4*dx = {4.0 * grid.dx}",
    )
    L = grid.n * grid.dx
    _require(
        center - radius >= -L / 2 + L / 8 and center + radius <= L / 2 - L / 8,
        "initial_state.margin",
        f"support [{center - radius}, {center + radius}] leaves less than L/8 of edge clearance",
    )
    pi = s.get("pi", "zero")
    allowed = ("zero", "right-mover") if allow_pi else ("zero",)
    _require(pi in allowed, "initial_state.pi", f"pi must be one of {allowed}, got {pi!r}")
    return StateSection(factory=factory, center=center, radius=float(radius), amplitude=amplitude, pi=pi)


def _parse_times(tree: dict, grid: GridSection, key: str = "times") -> tuple[float, ...]:
    times = _get(tree, key, key)
    _require(isinstance(times, list) and times, key, "need a non-empty list of times")
    L = grid.n * grid.dx
    out = []
    for t in times:
        _require(isinstance(t, (int, float)) and math.isfinite(t), key, f"times must be finite numbers, got {t}")
        _require(abs(t) <= L / 4, f"{key}.margin", f"|t| = {abs(t)} exceeds the periodic safety margin L/4 = {L / 4}")
        out.append(float(t))
    return tuple(out)


def _parse_format(tree: dict) -> str:
    out = tree.get("output", {})
    _require(isinstance(out, dict), "output", "output section must be an object")
    fmt = out.get("format", "csv")
    _require(fmt in ("csv", "json"), "output.format", f"format must be csv or json, got {fmt!r}")
    return fmt


def _check_keys(tree: dict, allowed: set[str]) -> None:
    for key in tree:
        _require(key in allowed, "unknown-key", f"unrecognized config key {key!r}")


def _parse_evolve(tree: dict) -> EvolveConfig:
    _check_keys(tree, {"command", "grid", "mass", "initial_state", "method", "dt", "times", "snapshot_times", "thresholds", "cone_margin_cells", "output"})
    grid = _parse_grid(tree)
    mass = _parse_mass(tree, positive=False)
    state = _parse_state(tree, grid, allow_pi=True)
    times = _parse_times(tree, grid)
    method = tree.get("method", "spectral-exact")
    _require(method in ("spectral-exact", "local-fd"), "method", f"method must be spectral-exact or local-fd, got {method!r}")
    dt = tree.get("dt")
    if method == "local-fd":
        _require(isinstance(dt, (int, float)) and dt > 0, "dt", "local-fd needs a positive dt")
        _require(dt / grid.dx <= 1.0, "dt.courant", f"courant dt/dx = {dt / grid.dx} exceeds 1")
        for t in times:
            steps = round(t / dt)
            _require(steps >= 1 and abs(steps * dt - t) <= 1e-9 * max(t, dt), "times.dt-multiple", f"t = {t} is not a positive integer multiple of dt = {dt}")
    else:
        dt = None
    snapshot_times = tuple(float(t) for t in tree.get("snapshot_times", []))
    for t in snapshot_times:
        _require(t in times, "snapshot_times", f"snapshot time {t} is not in the time ladder")
    thresholds = tree.get("thresholds", {})
    support = float(thresholds.get("support", 1e-12))
    leakage = float(thresholds.get("cone_leakage", 1e-8))
    _require(support > 0, "thresholds.support", "support threshold must be positive")
    _require(leakage > 0, "thresholds.cone_leakage", "leakage ceiling must be positive")
    cells = int(tree.get("cone_margin_cells", CONE_MARGIN_CELLS))
    _require(cells >= 0, "cone_margin_cells", "margin cells must be non-negative")
    return EvolveConfig(
        grid=grid, mass=mass, state=state, method=method,
        dt=None if dt is None else float(dt),
        times=times, snapshot_times=snapshot_times,
        support_threshold=support, leakage_ceiling=leakage,
        cone_margin_cells=cells, out_format=_parse_format(tree),
    )


def _parse_hegerfeldt(tree: dict) -> HegerfeldtConfig:
    _check_keys(tree, {"command", "grid", "mass", "initial_state", "times", "leakage_floor", "contrast_ceiling", "thresholds", "cone_margin_cells", "tail_fit", "grid_doubling_check", "doubling_tolerance", "output"})
    grid = _parse_grid(tree)
    mass = _parse_mass(tree, positive=True)
    state = _parse_state(tree, grid, allow_pi=False)
    times = _parse_times(tree, grid)
    for t in times:
        _require(t > 0, "times.positive", f"leakage times must be positive, got {t}")
    thresholds = tree.get("thresholds", {})
    support = float(thresholds.get("support", 1e-12))
    floor = float(tree.get("leakage_floor", 1e-10))
    ceiling = float(tree.get("contrast_ceiling", 1e-8))
    _require(floor > 0 and ceiling > 0, "leakage_floor", "leakage bounds must be positive")
    tail = tree.get("tail_fit", {})
    _require(isinstance(tail, dict), "tail_fit", "tail_fit section must be an object")
    window = tail.get("window")
    _require(
        isinstance(window, list) and len(window) == 2 and 0 < window[0] < window[1],
        "tail_fit.window",
        f"window must be [lo, hi] with 0 < lo < hi, got {window}",
    )
    L = grid.n * grid.dx
    compton = 1.0 / mass
    _require(
        window[0] >= state.center + state.radius + 3.0 * compton,
        "tail_fit.window.near-field",
        f"window must start >= 3 Compton lengths beyond the support edge {state.center + state.radius}",
    )
    _require(
        window[1] <= L / 2 - L / 16 - 2.0 * compton,
        "tail_fit.window.wrap",
        "window must end >= 2 Compton lengths before the boundary-floor strip",
    )
    snapshot_time = float(tail.get("snapshot_time", times[-1]))
    _require(snapshot_time in times, "tail_fit.snapshot_time", f"snapshot time {snapshot_time} is not in the time ladder")
    rate_band = float(tail.get("rate_band", 0.15))
    min_r2 = float(tail.get("min_r2", 0.99))
    cells = int(tree.get("cone_margin_cells", CONE_MARGIN_CELLS))
    return HegerfeldtConfig(
        grid=grid, mass=mass, state=state, times=times,
        leakage_floor=floor, contrast_ceiling=ceiling,
        support_threshold=support, cone_margin_cells=cells,
        window=(float(window[0]), float(window[1])),
        snapshot_time=snapshot_time, rate_band=rate_band, min_r2=min_r2,
        grid_doubling_check=bool(tree.get("grid_doubling_check", True)),
        doubling_tolerance=float(tree.get("doubling_tolerance", 0.1)),
        out_format=_parse_format(tree),
    )


def _parse_propagator(tree: dict) -> PropagatorConfig:
    _check_keys(tree, {"command", "grid", "mass", "times", "margin", "quadrature", "ratio_ceiling", "multiplier_error_ceiling", "zero_slice_ceiling", "output"})
    grid = _parse_grid(tree)
    mass = _parse_mass(tree, positive=True)
    times = _parse_times(tree, grid)
    margin = float(tree.get("margin", 0.2))
    _require(margin >= 3.0 * grid.dx, "margin", f"margin {margin} below 3*dx = {3.0 * grid.dx}")
    L = grid.n * grid.dx
    for t in times:
        _require(abs(t) + margin < L / 2, "times.scan-region", f"|t| + margin = {abs(t) + margin} reaches the boundary L/2 = {L / 2}")
    q = tree.get("quadrature", {})
    _require(isinstance(q, dict), "quadrature", "quadrature section must be an object")
    cutoff = q.get("cutoff")
    if cutoff is not None:
        floor = 40.0 * max(mass, 1.0 / grid.dx)
        _require(cutoff >= floor, "quadrature.cutoff", f"cutoff {cutoff} below the required floor {floor}")
    rungs = int(q.get("rungs", 4))
    _require(rungs >= 2, "quadrature.rungs", "need at least 2 extrapolation rungs")
    quad = QuadratureSection(
        cutoff=None if cutoff is None else float(cutoff),
        eps_base=None if q.get("eps_base") is None else float(q["eps_base"]),
        rungs=rungs,
        residual_tol=float(q.get("residual_tol", 1e-6)),
        band_fraction=float(q.get("band_fraction", 0.5)),
    )
    return PropagatorConfig(
        grid=grid, mass=mass, times=times, margin=margin, quadrature=quad,
        ratio_ceiling=float(tree.get("ratio_ceiling", 1e-4)),
        multiplier_error_ceiling=float(tree.get("multiplier_error_ceiling", 1e-3)),
        zero_slice_ceiling=float(tree.get("zero_slice_ceiling", 1e-10)),
        out_format=_parse_format(tree),
    )


_PARSERS = {
    "evolve": _parse_evolve,
    "hegerfeldt": _parse_hegerfeldt,
    "propagator": _parse_propagator,
}


def load_config(path: Path, command: str):
    """Parse and fully validate a config file for the given command."""
    try:
        with open(path) as fh:
            tree = json.load(fh)
    except OSError as exc:
        raise ConfigError("config.path", f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError("config.json", f"invalid JSON in {path}: {exc}") from exc
    _require(isinstance(tree, dict), "config", "top level must be an object")
    declared = tree.get("command")
    if declared is not None:
        _require(declared == command, "command", f"config declares command {declared!r}, invoked as {command!r}")
    return _PARSERS[command](tree)
