"""Causal propagator of the 1+1 dimensional Klein-Gordon equation by
regularized momentum quadrature.

The positive-frequency kernel is evaluated as

    Dp(t, x) = (i / 4 pi) Int_{-P}^{P} dp  exp(-eps p^2) exp(-i w t + i p x) / w,

w = sqrt(p^2 + m^2), on a declining damping ladder eps, eps/2, eps/4, ...
followed by Richardson extrapolation toward eps -> 0.  The change across
the last extrapolation rung is reported as the residual; samples whose
residual exceeds the declared tolerance are flagged, never silently
returned.  The commutator kernel is the odd combination

    D(t, x) = Dp(t, x) - Dp(-t, -x),

supported inside the light cone |x| <= |t| up to quadrature residual, and
its spatial Fourier multiplier is sin(w t)/w.  That single multiplier
identity ties the kernel to the exact mode evolution and to the
initial-value convolution formula; it - and not any transplanted
three-dimensional prefactor - is what fixes the normalization, with
i/(4 pi) the one-dimensional analog of the conventional constant.

Quadrature nodes sit on the lattice dp = 2 pi / L of the target grid, so
a kernel sample equals the periodization of the continuum kernel and the
synthesis over all grid points folds onto the n momentum bins, costing
one FFT per damping rung.  Sampling a kernel with jump discontinuities on
the cone necessarily aliases content beyond the grid band onto lower
bins; the multiplier identity is therefore compared over the declared
band |p| <= band_fraction * pi / dx in the uniform norm (error divided by
the multiplier's sup over the band).  At the Nyquist bin itself the
folded coefficient doubles for an even kernel, so an all-mode pointwise
comparison is not a meaningful target for any sampled kernel.

The kernels carry genuine distributional edges on the cone (D jumps by
1/2 there, Dp adds a logarithmic spike), so pointwise values at the one
or two grid cells straddling |x| = |t| do not converge as eps -> 0.  The
residual is therefore measured outside a declared collar of
``residual_collar_cells`` cells around the cone; the collar width is part
of the sample metadata, and the cells inside it are exactly the ones
every cone-support assertion already grants as geometric margin.

The massless commutator kernel is finite (multiplier sin(|p| t)/|p| -> t)
and is built directly from the odd part; Dp itself has an infrared
divergent imaginary part at m = 0 on the line and is rejected there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dispersion import Mass, omega
from .spectral import Field, SpectralField, UniformGrid, forward_transform, inverse_transform

__all__ = [
    "QuadratureSpec",
    "ResolvedQuadrature",
    "KernelSlice",
    "PropagatorSample",
    "SuppressionScan",
    "delta_plus",
    "pauli_jordan",
    "spacelike_suppression_scan",
    "cauchy_via_propagator",
    "bridge_identity_error",
    "time_derivative_identity_error",
]

#: default cutoff rule: P = CUTOFF_FACTOR * max(m, 1/dx)
CUTOFF_FACTOR = 40.0

#: default damping ladder base: eps = EPS_BASE_FACTOR / P^2
EPS_BASE_FACTOR = 80.0

#: spacelike-to-timelike magnitude ratio below which a scan passes
SUPPRESSION_RATIO = 1e-4


@dataclass(frozen=True)
class QuadratureSpec:
    """Tunable quadrature parameters; ``None`` fields use the default rules."""

    cutoff: float | None = None
    eps_base: float | None = None
    rungs: int = 4
    residual_tol: float = 1e-6
    band_fraction: float = 0.5
    residual_collar_cells: int = 4

    def __post_init__(self) -> None:
        if self.rungs < 2:
            raise ValueError("Richardson extrapolation needs at least 2 rungs")
        if not 0.0 < self.band_fraction <= 1.0:
            raise ValueError("band_fraction must lie in (0, 1]")
        if self.residual_tol <= 0:
            raise ValueError("residual tolerance must be positive")
        if self.residual_collar_cells < 0:
            raise ValueError("residual collar must be non-negative")

    def resolve(self, grid: UniformGrid, m: Mass) -> "ResolvedQuadrature":
        floor = CUTOFF_FACTOR * max(m.m, 1.0 / grid.dx)
        cutoff = floor if self.cutoff is None else float(self.cutoff)
        if cutoff < floor:
            raise ValueError(f"cutoff {cutoff} below the required floor {floor}")
        eps = EPS_BASE_FACTOR / cutoff**2 if self.eps_base is None else float(self.eps_base)
        if not eps > 0:
            raise ValueError("damping must be positive")
        ladder = tuple(eps / 2.0**r for r in range(self.rungs))
        return ResolvedQuadrature(
            cutoff=cutoff,
            eps_ladder=ladder,
            residual_tol=self.residual_tol,
            band_fraction=self.band_fraction,
            residual_collar_cells=self.residual_collar_cells,
        )


@dataclass(frozen=True)
class ResolvedQuadrature:
    cutoff: float
    eps_ladder: tuple[float, ...]
    residual_tol: float
    band_fraction: float
    residual_collar_cells: int

    def metadata(self) -> dict:
        return {
            "cutoff": self.cutoff,
            "eps_ladder": list(self.eps_ladder),
            "residual_tol": self.residual_tol,
            "band_fraction": self.band_fraction,
            "residual_collar_cells": self.residual_collar_cells,
        }


@dataclass(frozen=True, eq=False)
class KernelSlice:
    """One extrapolated kernel on the grid plus its convergence record."""

    field: Field
    residual: float
    converged: bool
    quad: ResolvedQuadrature


@dataclass(frozen=True, eq=False)
class PropagatorSample:
    """Dp(t, .) and D(t, .) on a grid slice with quadrature metadata."""

    t: float
    m: Mass
    delta: Field
    delta_plus: Field | None
    residual: float
    converged: bool
    quad: ResolvedQuadrature
    flags: tuple[str, ...] = ()

    @property
    def grid(self) -> UniformGrid:
        return self.delta.grid


def _lattice(grid: UniformGrid, cutoff: float) -> tuple[np.ndarray, float]:
    dp = 2.0 * np.pi / grid.L
    q_max = int(math.ceil(cutoff / dp))
    return np.arange(-q_max, q_max + 1), dp


def _synthesize(grid: UniformGrid, q: np.ndarray, g: np.ndarray) -> np.ndarray:
    """sum_q g_q exp(i p_q x_j) over all grid points via folding plus one FFT."""
    bins = np.mod(q, grid.n)
    G = np.bincount(bins, weights=g.real, minlength=grid.n) + 1j * np.bincount(
        bins, weights=g.imag, minlength=grid.n
    )
    alt = np.ones(grid.n)
    alt[1::2] = -1.0  # exp(i p_q x_j) = (-1)^q exp(2 pi i q j / n)
    return np.fft.ifft(alt * G) * grid.n


def _extrapolate(levels: list[np.ndarray], smooth: np.ndarray) -> tuple[np.ndarray, float]:
    """Richardson table for a ladder halving eps per rung; returns the value
    and the change across the last rung, measured over ``smooth``."""
    table = list(levels)
    for col in range(1, len(table)):
        fac = 2.0**col
        for i in range(len(table) - 1, col - 1, -1):
            table[i] = (fac * table[i] - table[i - 1]) / (fac - 1.0)
    residual = float(np.max(np.abs(table[-1][smooth] - table[-2][smooth])))
    return table[-1], residual


def _off_cone(grid: UniformGrid, t: float, collar_cells: int) -> np.ndarray:
    """Mask of grid points farther than the collar from the cone |x| = |t|."""
    return np.abs(np.abs(grid.x) - abs(t)) > collar_cells * grid.dx


def _damped_kernel(grid, m, res, t: float, multiplier) -> tuple[np.ndarray, float]:
    """Extrapolated (1/2 pi) Int dp e^{-eps p^2} multiplier(p, w) e^{i p x}."""
    q, dp = _lattice(grid, res.cutoff)
    p = q * dp
    w = omega(p, m)
    base = multiplier(p, w)
    levels = [
        (dp / (2.0 * np.pi)) * _synthesize(grid, q, np.exp(-eps * p * p) * base)
        for eps in res.eps_ladder
    ]
    return _extrapolate(levels, _off_cone(grid, t, res.residual_collar_cells))


def delta_plus(t: float, grid: UniformGrid, m: Mass, quad: QuadratureSpec = QuadratureSpec()) -> KernelSlice:
    """Positive-frequency kernel Dp(t, .) on the grid (m > 0 only)."""
    if m.m <= 0:
        raise ValueError(
            "the positive-frequency kernel is infrared divergent at m = 0 in one dimension"
        )
    res = quad.resolve(grid, m)
    values, residual = _damped_kernel(
        grid, m, res, t, lambda p, w: 0.5j * np.exp(-1j * w * t) / w
    )
    return KernelSlice(
        field=Field(grid, values),
        residual=residual,
        converged=residual <= res.residual_tol,
        quad=res,
    )


def _mirror(values: np.ndarray) -> np.ndarray:
    """Index map j -> (n - j) mod n, i.e. x -> -x on the periodic grid."""
    return np.roll(values[::-1], 1)


def pauli_jordan(t: float, grid: UniformGrid, m: Mass, quad: QuadratureSpec = QuadratureSpec()) -> PropagatorSample:
    """Commutator kernel D(t, .) = Dp(t, x) - Dp(-t, -x) on the grid.

    For m > 0 the two kernel evaluations are combined pointwise and the
    (mathematically real) result keeps its residual imaginary part as an
    honest record of the cancellation.  For m = 0 the odd part is built
    directly from the finite multiplier sin(w t)/w.
    """
    flags: list[str] = []
    if m.m > 0:
        plus_t = delta_plus(t, grid, m, quad)
        plus_back = delta_plus(-t, grid, m, quad)
        delta_vals = plus_t.field.values - _mirror(plus_back.field.values)
        residual = plus_t.residual + plus_back.residual
        res = plus_t.quad
        plus_field = plus_t.field
    else:
        res = quad.resolve(grid, m)
        delta_vals, residual = _damped_kernel(
            grid, m, res, t, lambda p, w: t * np.sinc(w * t / np.pi)
        )
        plus_field = None
        flags.append("massless-odd-part-only")
    scale = float(np.max(np.abs(delta_vals)))
    if scale > 0 and float(np.max(np.abs(delta_vals.imag))) > 1e-10 * scale:
        flags.append("identity-violation")
    converged = residual <= res.residual_tol
    if not converged:
        flags.append("unconverged")
    return PropagatorSample(
        t=t,
        m=m,
        delta=Field(grid, delta_vals),
        delta_plus=plus_field,
        residual=residual,
        converged=converged,
        quad=res,
        flags=tuple(flags),
    )


@dataclass(frozen=True)
class SuppressionScan:
    """Spacelike versus timelike magnitude contrast for one (t, m) slice."""

    t: float
    margin: float
    spacelike_max: float
    timelike_max: float
    ratio: float
    passed: bool
    residual: float
    converged: bool


def spacelike_suppression_scan(
    t: float,
    grid: UniformGrid,
    m: Mass,
    margin: float,
    quad: QuadratureSpec = QuadratureSpec(),
    ratio_ceiling: float = SUPPRESSION_RATIO,
) -> SuppressionScan:
    """max |D| over |x| > |t| + margin against the timelike maximum.

    Failures are reported in the returned record, not raised.
    """
    if margin < 3.0 * grid.dx:
        raise ValueError(f"margin {margin} below 3*dx = {3.0 * grid.dx}")
    if abs(t) + margin >= grid.L / 2.0:
        raise ValueError("scan region reaches the domain boundary")
    sample = pauli_jordan(t, grid, m, quad)
    mags = np.abs(sample.delta.values)
    ax = np.abs(grid.x)
    spacelike = float(np.max(mags[ax > abs(t) + margin]))
    inside = ax <= abs(t)
    timelike = float(np.max(mags[inside])) if np.any(inside) else 0.0
    ratio = spacelike / timelike if timelike > 0 else math.inf
    return SuppressionScan(
        t=t,
        margin=margin,
        spacelike_max=spacelike,
        timelike_max=timelike,
        ratio=ratio,
        passed=ratio < ratio_ceiling,
        residual=sample.residual,
        converged=sample.converged,
    )


def _band_mask(grid: UniformGrid, band_fraction: float) -> np.ndarray:
    return np.abs(grid.p) <= band_fraction * np.pi / grid.dx


def bridge_identity_error(sample: PropagatorSample) -> float:
    """Uniform-norm relative error of D's multiplier against sin(w t)/w.

    Compared over the declared band and normalized by the multiplier's
    sup there; the identity links the quadrature kernel to the exact mode
    evolution.
    """
    grid = sample.grid
    measured = forward_transform(sample.delta).coefficients
    w = omega(grid.p, sample.m)
    target = sample.t * np.sinc(w * sample.t / np.pi)
    band = _band_mask(grid, sample.quad.band_fraction)
    sup = float(np.max(np.abs(target[band])))
    if sup == 0.0:
        return float(np.max(np.abs(measured[band])))
    return float(np.max(np.abs(measured[band] - target[band])) / sup)


def time_derivative_identity_error(
    t: float,
    grid: UniformGrid,
    m: Mass,
    quad: QuadratureSpec = QuadratureSpec(),
    h: float | None = None,
) -> float:
    """Centered finite difference of D in t against the quadrature kernel of
    the cos(w t) multiplier, compared pointwise away from the cone.

    Both objects converge to the same smooth function off the light cone
    (the cone itself carries the propagating delta pair, which no pointwise
    comparison can see), so the uniform-norm relative deviation over the
    off-cone region validates that differentiating the commutator kernel
    in time reproduces the multiplier used by the initial-value formula.
    h defaults to dx.
    """
    if h is None:
        h = grid.dx
    fwd = pauli_jordan(t + h, grid, m, quad)
    bwd = pauli_jordan(t - h, grid, m, quad)
    fd = (fwd.delta.values - bwd.delta.values) / (2.0 * h)
    res = fwd.quad
    dt_vals, _ = _damped_kernel(grid, m, res, t, lambda p, w: np.cos(w * t))
    collar = res.residual_collar_cells + int(math.ceil(h / grid.dx))
    mask = (
        _off_cone(grid, t, collar)
        & _off_cone(grid, t + h, res.residual_collar_cells)
        & _off_cone(grid, t - h, res.residual_collar_cells)
    )
    sup = float(np.max(np.abs(dt_vals[mask])))
    return float(np.max(np.abs(fd[mask] - dt_vals[mask])) / sup)


def cauchy_via_propagator(data, t: float, quad: QuadratureSpec = QuadratureSpec()) -> Field:
    """Solve the initial-value problem through the commutator kernel,

        Phi(t, .) = dD/dt(dt, .) * Phi0 + D(dt, .) * Pi0,

    with * the periodic grid convolution dx * sum.  The D term convolves
    the quadrature kernel; the dD/dt term is applied as the band
    multiplier cos(w dt) (its kernel is a propagating delta pair that no
    grid sampling can represent), cross-checked separately by
    :func:`time_derivative_identity_error`.
    """
    grid = data.grid
    dt = t - data.t0
    sample = pauli_jordan(dt, grid, data.m, quad)
    if not sample.converged:
        raise ValueError(
            f"propagator quadrature did not converge: residual {sample.residual} "
            f"exceeds {sample.quad.residual_tol}"
        )
    kernel = np.roll(sample.delta.values, -(grid.n // 2))  # displacement layout
    conv = grid.dx * np.fft.ifft(np.fft.fft(kernel) * np.fft.fft(data.pi.values))
    w = omega(grid.p, data.m)
    F = forward_transform(data.phi).coefficients
    phi_part = inverse_transform(SpectralField(grid, np.cos(w * dt) * F))
    return Field(grid, phi_part.values + conv)
