"""Periodic grid, continuum-normalized Fourier transforms, and compactly
supported test states.

Conventions (natural units, c = 1):

* grid points   x_j = -L/2 + j dx,   j = 0 .. n-1
* momenta       p_k = 2 pi k / L,    k = -n/2 .. n/2-1, stored in FFT order
* forward       F(p_k) = dx * sum_j exp(-i p_k x_j) f(x_j)
* inverse       f(x_j) = (1/L) * sum_k exp(+i p_k x_j) F(p_k)

The dx and 1/L weights make the discrete pair a Riemann sum for the
continuum transform, so discrete quantities converge to continuum
integrals without stray constants.  With the half-domain offset the
kernel splits as exp(-i p_k x_j) = (-1)^k exp(-2 pi i k j / n); the
alternating sign is applied exactly instead of through exp(i pi k).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = [
    "UniformGrid",
    "Field",
    "SpectralField",
    "forward_transform",
    "inverse_transform",
    "make_bump",
    "complex_momentum_transform",
]

# log-domain guard for the exponentially weighted transform
_MAX_LOG_WEIGHT = 700.0


def _alternating(n: int) -> np.ndarray:
    alt = np.ones(n)
    alt[1::2] = -1.0
    return alt


@dataclass(frozen=True)
class UniformGrid:
    """Uniform periodic lattice covering [-L/2, L/2) with L = n * dx."""

    n: int
    dx: float

    def __post_init__(self) -> None:
        if self.n < 16 or self.n & (self.n - 1):
            raise ValueError(f"grid size must be a power of two >= 16, got {self.n}")
        if not (math.isfinite(self.dx) and self.dx > 0):
            raise ValueError(f"grid spacing must be finite and positive, got {self.dx}")

    @property
    def L(self) -> float:
        return self.n * self.dx

    @cached_property
    def x(self) -> np.ndarray:
        pts = -0.5 * self.L + self.dx * np.arange(self.n)
        pts.flags.writeable = False
        return pts

    @cached_property
    def p(self) -> np.ndarray:
        mom = 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.dx)
        mom.flags.writeable = False
        return mom


def _validated_samples(grid: UniformGrid, values, what: str) -> np.ndarray:
    arr = np.array(values, dtype=np.complex128, copy=True).reshape(-1)
    if arr.shape != (grid.n,):
        raise ValueError(f"{what} needs {grid.n} samples, got {arr.shape[0]}")
    bad = np.flatnonzero(~np.isfinite(arr))
    if bad.size:
        raise ValueError(f"non-finite {what} sample at index {bad[0]}")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class Field:
    """Complex samples on the grid, immutable after construction."""

    grid: UniformGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", _validated_samples(self.grid, self.values, "field"))


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Discrete-momentum coefficients, indexed like ``grid.p`` (FFT order)."""

    grid: UniformGrid
    coefficients: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "coefficients", _validated_samples(self.grid, self.coefficients, "coefficient")
        )


def forward_transform(f: Field) -> SpectralField:
    """Riemann-sum DFT: F(p_k) = dx * sum_j exp(-i p_k x_j) f_j."""
    g = f.grid
    coeffs = g.dx * _alternating(g.n) * np.fft.fft(f.values)
    return SpectralField(g, coeffs)


def inverse_transform(F: SpectralField) -> Field:
    """Exact inverse of :func:`forward_transform`."""
    g = F.grid
    values = np.fft.ifft(_alternating(g.n) * F.coefficients) / g.dx
    return Field(g, values)


def make_bump(grid: UniformGrid, center: float, radius: float, amplitude: float) -> Field:
    """Smooth bump amplitude * exp(1 - 1/(1 - u^2)), u = (x - center)/radius.

    The profile is exactly zero for |u| >= 1 and infinitely smooth at the
    cutoff in the continuum limit; the normalization makes the peak value
    equal the requested amplitude.  Requires radius > 4 dx (resolution)
    and at least L/8 of clearance between the support and the domain edge
    so that periodic wrap-around stays below the numerical floor over the
    simulated times.
    """
    if not (radius > 4.0 * grid.dx):
        raise ValueError(
            f"under-resolved bump: radius {radius} must exceed 4*dx = {4.0 * grid.dx}"
        )
    margin = grid.L / 8.0
    half = grid.L / 2.0
    if center - radius < -half + margin or center + radius > half - margin:
        raise ValueError(
            f"bump support [{center - radius}, {center + radius}] leaves less than "
            f"L/8 = {margin} of edge clearance"
        )
    u = (grid.x - center) / radius
    values = np.zeros(grid.n, dtype=np.complex128)
    inside = np.abs(u) < 1.0
    values[inside] = amplitude * np.exp(1.0 - 1.0 / (1.0 - u[inside] ** 2))
    return Field(grid, values)


def complex_momentum_transform(f: Field, q: float) -> np.ndarray:
    """log |F(p_k + i q)| for every grid momentum, evaluated overflow-safely.

    Shifting the momentum by i q weights the samples by exp(q x); the
    weight is accumulated in the log domain (a common factor exp(M) is
    split off) so the probe works up to |q| L/2 = 700.  For a field
    supported in |x| <= R the growth bound

        max_k log |F(p_k + i q)|  <=  log C + R |q|

    holds, which is what makes the probe a compact-support detector:
    slow growth in q certifies analyticity of exponential type R, while
    fields with tails exp(-m |x|) blow up as soon as |q| > m.
    """
    g = f.grid
    if abs(q) * g.L / 2.0 > _MAX_LOG_WEIGHT:
        raise ValueError(
            f"weight overflow: |q| L/2 = {abs(q) * g.L / 2.0} exceeds {_MAX_LOG_WEIGHT} for q = {q}"
        )
    mags = np.abs(f.values)
    nz = mags > 0.0
    if not np.any(nz):
        return np.full(g.n, -np.inf)
    with np.errstate(divide="ignore"):
        log_terms = q * g.x + np.log(mags)
    shift = np.max(log_terms[nz])
    weighted = np.zeros(g.n, dtype=np.complex128)
    weighted[nz] = np.exp(log_terms[nz] - shift) * (f.values[nz] / mags[nz])
    spectrum = g.dx * _alternating(g.n) * np.fft.fft(weighted)
    with np.errstate(divide="ignore"):
        return shift + np.log(np.abs(spectrum))
