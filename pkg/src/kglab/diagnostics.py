"""Support, leakage and tail measurements shared by all experiments.

Support is thresholded everywhere except the stencil bound of the local
evolution, which is asserted at exact zero; floating point makes exact
zero-sets meaningful only for stencil schemes.  Tail fits symmetrize the
left and right tails by averaging log-magnitudes; a left/right rate
mismatch above 10% is flagged.

A practical note on fit windows: multiplier kernels built from
sqrt(p^2 + m^2) produce tails |f| ~ exp(-m |x|) |x|^(-3/2), so a pure
log-linear fit reads high by roughly 1.5 <1/|x|> over the window.  Fits
meant to resolve the Compton rate m should therefore start several
Compton lengths beyond the support edge and use windows centered far
enough out that the algebraic correction is inside the stated band.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .spectral import Field

__all__ = [
    "SupportReport",
    "TailFit",
    "cone_leakage",
    "fit_exponential_tail",
    "support_radius",
    "boundary_floor",
    "support_report",
]

REPORT_SCHEMA = "kglab.support-report/1"

#: magnitudes below this are treated as numerically zero in tail fits
_TAIL_FLOOR = 1e-300

#: left/right fitted-rate mismatch above this fraction flags the fit
_ASYMMETRY_LIMIT = 0.10


@dataclass(frozen=True)
class TailFit:
    """Least-squares exponential fit log|f| = intercept - rate * |x|."""

    rate: float
    intercept: float
    r2: float
    window: tuple[float, float]
    n_points: int
    flags: tuple[str, ...] = ()


@dataclass(frozen=True)
class SupportReport:
    support_radius: float
    leakage_fraction: float
    tail_rate: float
    tail_intercept: float
    fit_r2: float
    window: tuple[float, float]
    flags: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        if not 0.0 <= self.leakage_fraction <= 1.0:
            raise ValueError(f"leakage fraction {self.leakage_fraction} outside [0, 1]")
        lo, hi = self.window
        if not lo < hi:
            raise ValueError(f"window {self.window} must satisfy lo < hi")

    def to_json(self) -> str:
        payload = {
            "schema": REPORT_SCHEMA,
            "support_radius": self.support_radius,
            "leakage_fraction": self.leakage_fraction,
            "tail_rate": self.tail_rate,
            "tail_intercept": self.tail_intercept,
            "fit_r2": self.fit_r2,
            "window": list(self.window),
            "flags": list(self.flags),
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def cone_leakage(f: Field, R0: float, t: float, margin: float) -> float:
    """L2 mass fraction outside the light cone |x| <= R0 + t + margin."""
    grid = f.grid
    edge = R0 + t + margin
    if not edge < grid.L / 2.0:
        raise ValueError(f"cone edge {edge} reaches the domain boundary L/2 = {grid.L / 2.0}")
    dens = np.abs(f.values) ** 2
    total = float(np.sum(dens))
    if total == 0.0:
        raise ValueError("cone leakage undefined for a field with zero total norm")
    outside = np.abs(grid.x) > edge
    return float(np.sum(dens[outside]) / total)


def _side_fit(radii: np.ndarray, logmags: np.ndarray) -> tuple[float, float, float]:
    slope, intercept = np.polyfit(radii, logmags, 1)
    fitted = slope * radii + intercept
    ss_res = float(np.sum((logmags - fitted) ** 2))
    ss_tot = float(np.sum((logmags - np.mean(logmags)) ** 2))
    r2 = 1.0 if ss_tot == 0.0 and ss_res == 0.0 else 1.0 - ss_res / ss_tot
    return float(slope), float(intercept), r2


def fit_exponential_tail(f: Field, window: tuple[float, float]) -> TailFit:
    """Fit log|f| against |x| over the window, symmetrized over both sides."""
    lo, hi = window
    if not 0.0 < lo < hi:
        raise ValueError(f"window {window} must satisfy 0 < lo < hi")
    grid = f.grid
    x = grid.x
    right = np.flatnonzero((x >= lo) & (x <= hi))
    if right.size < 16:
        raise ValueError(f"window {window} holds {right.size} grid points per side, need >= 16")
    left = (grid.n - right) % grid.n
    mag_r = np.abs(f.values[right])
    mag_l = np.abs(f.values[left])
    if np.any(mag_r <= _TAIL_FLOOR) or np.any(mag_l <= _TAIL_FLOOR):
        raise ValueError("zero magnitude inside the fit window; tail fit rejected")
    radii = x[right]
    log_r = np.log(mag_r)
    log_l = np.log(mag_l)
    slope, intercept, r2 = _side_fit(radii, 0.5 * (log_r + log_l))
    flags: list[str] = []
    rate_r = -_side_fit(radii, log_r)[0]
    rate_l = -_side_fit(radii, log_l)[0]
    scale = max(abs(rate_r), abs(rate_l), 1e-30)
    if abs(rate_r - rate_l) > _ASYMMETRY_LIMIT * scale:
        flags.append("asymmetric-tails")
    return TailFit(
        rate=-slope,
        intercept=intercept,
        r2=r2,
        window=(lo, hi),
        n_points=int(right.size),
        flags=tuple(flags),
    )


def support_radius(f: Field, threshold: float) -> float:
    """Smallest R with max |f| < threshold beyond |x| > R (thresholded support)."""
    if not threshold > 0:
        raise ValueError("threshold must be positive")
    above = np.abs(f.values) >= threshold
    if not np.any(above):
        return 0.0
    return float(np.max(np.abs(f.grid.x[above])))


def boundary_floor(f: Field) -> float:
    """max |f| over the outer L/16 strips of the domain.

    Experiments assert this stays below 1e-10 of the field peak; larger
    values mean periodic wrap-around has contaminated the run.
    """
    grid = f.grid
    strip = np.abs(grid.x) >= grid.L / 2.0 - grid.L / 16.0
    return float(np.max(np.abs(f.values[strip])))


def support_report(
    f: Field,
    *,
    threshold: float,
    window: tuple[float, float],
    cone: tuple[float, float, float] | None = None,
) -> SupportReport:
    """Bundle radius, optional cone leakage and tail fit into one report."""
    radius = support_radius(f, threshold)
    flags: list[str] = []
    if radius >= f.grid.L / 2.0:
        flags.append("nowhere-below-threshold")
    leakage = 0.0
    if cone is not None:
        leakage = cone_leakage(f, *cone)
    tail = fit_exponential_tail(f, window)
    flags.extend(tail.flags)
    return SupportReport(
        support_radius=radius,
        leakage_fraction=leakage,
        tail_rate=tail.rate,
        tail_intercept=tail.intercept,
        fit_r2=tail.r2,
        window=tail.window,
        flags=tuple(flags),
    )
