"""Polyspectra: multidimensional Fourier transforms of stationary cumulants.

The measured tensor lives on non-negative lags; stationarity plus the
permutation symmetry of C̃⁽ⁿ⁾(t₁..tₙ) extend it to the full lag lattice
(every lattice point maps to the sorted, origin-shifted key of its time
tuple).  The spectrum is the Riemann-sum discrete transform

    S(ω) = Δt^{n-1} Σ_Δ  w(Δ) C̃(Δ) e^{-i ω·Δ}

reported as its real part on the grid [0, π/Δt]^{n-1}, with the residual
imaginary magnitude kept as a diagnostic and per-point standard errors
propagated from the cumulant tensor.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import GridError, ParameterError
from .estimation import CorrelationTensor, canonical_key
from .protocol import RimConfig


@dataclass(frozen=True)
class FrequencyGrid:
    """Regular per-axis frequency grid [0, omega_max] in rad/µs.

    omega_max = π/Δt_eff (sampling theorem) and resolution = π/(N Δt_eff),
    so n_points = N + 1 per axis and omega_max = resolution * N.
    """

    dims: int
    omega_max: float
    resolution: float
    n_points: int

    def __post_init__(self):
        if self.dims < 1 or self.n_points < 1:
            raise GridError("dims and n_points must be >= 1")
        n = self.n_points - 1
        if n > 0 and not np.isclose(self.omega_max, self.resolution * n):
            raise GridError("omega_max must equal resolution * (n_points - 1)")

    def axis(self) -> np.ndarray:
        return np.linspace(0.0, self.omega_max, self.n_points)


def frequency_grid(cfg: RimConfig, order: int = 2) -> FrequencyGrid:
    """Detectable frequency grid of a RIM configuration for an order-n cumulant."""
    dt = cfg.dt_eff
    return FrequencyGrid(
        dims=order - 1,
        omega_max=np.pi / dt,
        resolution=np.pi / (cfg.n_cycles * dt),
        n_points=cfg.n_cycles + 1,
    )


@dataclass
class Polyspectrum:
    """(n-1)-dimensional real spectral density with its frequency axes."""

    order: int  # spectral order n-1
    axes: tuple  # per-axis ω arrays (rad/µs)
    values: np.ndarray  # MHzⁿ µsⁿ⁻¹
    std_errors: np.ndarray
    dt_eff: float
    imag_ratio: float = 0.0

    def to_csv(self, path) -> None:
        """Write `omega1_radus,...,value` rows in C order."""
        headers = [f"omega{d + 1}_radus" for d in range(self.order)]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(headers + ["value"])
            for gi in np.ndindex(self.values.shape):
                row = [repr(float(self.axes[d][gi[d]])) for d in range(self.order)]
                writer.writerow(row + [repr(float(self.values[gi]))])


def _hann(lattice_axis: np.ndarray, l_max: int) -> np.ndarray:
    """Separable Hann taper on lags, 1 at lag 0 and 0 just past ±l_max."""
    return 0.5 * (1.0 + np.cos(np.pi * lattice_axis / (l_max + 1)))


def _symmetric_lattice(cumulant: CorrelationTensor):
    """Extend the measured tensor over the full lag lattice by its symmetries.

    Returns (l_max, lattice values array, entries) where entries maps each
    canonical key to (variance, [lattice points using it]) for error
    propagation.
    """
    cmap = cumulant.canonical_map()
    dims = cumulant.order - 1
    idx_axes = cumulant.index_axes()
    l_max = int(max(ax.max() for ax in idx_axes))
    side = 2 * l_max + 1
    values = np.zeros((side,) * dims)
    entries: dict = {}
    for point in np.ndindex(*values.shape):
        lags = tuple(p - l_max for p in point)
        key = canonical_key((0,) + lags)
        hit = cmap.get(key)
        if hit is None:
            continue
        value, var, _ = hit
        values[point] = value
        entries.setdefault(key, (var, []))[1].append(lags)
    return l_max, values, entries


def polyspectrum(
    cumulant: CorrelationTensor,
    window: str = "none",
    grid: FrequencyGrid | None = None,
    axes: Sequence[np.ndarray] | None = None,
) -> Polyspectrum:
    """Transform a fully repaired cumulant tensor into its polyspectrum.

    The frequency axes default to [0, π/Δt] at the lag window's natural
    resolution π/(l_max Δt); pass `grid` (from `frequency_grid`) or explicit
    `axes` to override, e.g. to take slices of higher-order spectra.
    """
    if window not in ("none", "hann"):
        raise ParameterError(f"unknown window {window!r}")
    if not np.all(cumulant.mask):
        raise GridError("cumulant has masked points; repair them before transforming")
    dims = cumulant.order - 1
    if dims < 1:
        raise GridError("polyspectra need order >= 2 cumulants")
    dt = cumulant.dt_eff

    l_max, lattice, entries = _symmetric_lattice(cumulant)
    lag_axis = np.arange(-l_max, l_max + 1)
    taper = _hann(lag_axis, l_max) if window == "hann" else np.ones(lag_axis.size)

    if axes is not None:
        omega_axes = tuple(np.atleast_1d(np.asarray(a, dtype=float)) for a in axes)
        if len(omega_axes) != dims:
            raise GridError(f"need {dims} frequency axes, got {len(omega_axes)}")
    elif grid is not None:
        if grid.dims != dims:
            raise GridError(f"grid dims {grid.dims} does not match cumulant order")
        omega_axes = tuple(grid.axis() for _ in range(dims))
    else:
        n_pts = l_max + 1
        omega_axes = tuple(np.linspace(0.0, np.pi / dt, n_pts) for _ in range(dims))

    # separable transform: contract each lattice axis with its Fourier kernel
    work = (lattice * _separable(taper, dims)).astype(complex)
    for d in range(dims):
        kernel = np.exp(-1j * np.outer(omega_axes[d], lag_axis * dt))
        work = np.moveaxis(np.tensordot(kernel, work, axes=(1, d)), 0, d)
    scale = dt**dims
    values = scale * work.real
    imag_ratio = float(np.max(np.abs(work.imag)) / (np.max(np.abs(work.real)) + 1e-300))

    # first-order error propagation: each canonical entry enters through the
    # (windowed) cosine sum over its lattice images
    variance = np.zeros(values.shape)
    for key, (var, points) in entries.items():
        if var == 0.0 or not points:
            continue
        coef = np.zeros(values.shape)
        for lags in points:
            w = np.prod([taper[l + l_max] for l in lags])
            cos_parts = [np.cos(omega_axes[d] * (lags[d] * dt)) for d in range(dims)]
            sin_parts = [np.sin(omega_axes[d] * (lags[d] * dt)) for d in range(dims)]
            coef = coef + w * _real_outer(cos_parts, sin_parts)
        variance += var * coef**2
    std_errors = scale * np.sqrt(variance)

    return Polyspectrum(
        order=dims,
        axes=omega_axes,
        values=values,
        std_errors=std_errors,
        dt_eff=dt,
        imag_ratio=imag_ratio,
    )


def _separable(taper: np.ndarray, dims: int) -> np.ndarray:
    """Outer product of the taper across all lattice axes."""
    out = taper
    for _ in range(dims - 1):
        out = np.multiply.outer(out, taper)
    return out


def _real_outer(cos_parts, sin_parts) -> np.ndarray:
    """Re ∏_d e^{-i ω_d x_d} over the grid, expanded without complex storage."""
    dims = len(cos_parts)
    if dims == 1:
        return cos_parts[0]
    # Re(∏ (c_d - i s_d)): sum over even numbers of sine factors with sign
    total = np.zeros(tuple(c.size for c in cos_parts))
    import itertools

    for picks in itertools.product((0, 1), repeat=dims):
        n_sin = sum(picks)
        if n_sin % 2:
            continue
        sign = (-1) ** (n_sin // 2)
        factors = [sin_parts[d] if picks[d] else cos_parts[d] for d in range(dims)]
        term = factors[0]
        for f in factors[1:]:
            term = np.multiply.outer(term, f)
        total += sign * term
    return total
