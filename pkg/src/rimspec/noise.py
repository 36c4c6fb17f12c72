"""Stationary classical noise generators on the measurement time grid.

Two noise classes are provided, both in MHz/µs units:

* Ornstein-Uhlenbeck (OU): zero-mean Gaussian process with autocovariance
  (big_gamma/2) * exp(-gamma*|dt|), sampled with the exact AR(1)
  discretization (no step-size bias).
* Random telegraph noise (RTN): a two-level fluctuator switching between
  ξ = ±1 with rates w_plus (up) and w_minus (down), emitting
  lambda*(ξ - ξ̄) so the output is zero-mean.  Ensembles of independent
  fluctuators are summed pointwise.

All samplers are pure functions of (params, grid, seed): identical inputs
give bit-identical trajectories, and distinct `SeedSequence` spawn keys
give independent substreams safe for parallel use.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import GridError, ParameterError

SeedLike = Union[int, np.random.SeedSequence]


def substream(seed: SeedLike, *path: int) -> np.random.SeedSequence:
    """Derive a deterministic child SeedSequence by appending `path` to the spawn key."""
    if isinstance(seed, np.random.SeedSequence):
        key = tuple(seed.spawn_key) + tuple(path)
        return np.random.SeedSequence(entropy=seed.entropy, spawn_key=key)
    return np.random.SeedSequence(entropy=seed, spawn_key=tuple(path))


def _rng(seed: SeedLike) -> np.random.Generator:
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class OuParams:
    """OU process parameters: spectral width gamma (MHz) and intensity big_gamma (MHz²).

    The stationary variance is big_gamma/2 and the correlation time 1/gamma.
    """

    gamma: float
    big_gamma: float

    def __post_init__(self):
        if not (self.gamma > 0):
            raise ParameterError(f"gamma must be > 0, got {self.gamma}")
        if not (self.big_gamma > 0):
            raise ParameterError(f"big_gamma must be > 0, got {self.big_gamma}")

    @property
    def variance(self) -> float:
        return 0.5 * self.big_gamma

    @property
    def correlation_time(self) -> float:
        return 1.0 / self.gamma


@dataclass(frozen=True)
class TlfParams:
    """Single two-level fluctuator: coupling lam (MHz), switching rates w_plus/w_minus (MHz)."""

    lam: float
    w_plus: float
    w_minus: float

    def __post_init__(self):
        if not (self.w_plus > 0):
            raise ParameterError(f"w_plus must be > 0, got {self.w_plus}")
        if not (self.w_minus > 0):
            raise ParameterError(f"w_minus must be > 0, got {self.w_minus}")

    @property
    def w_total(self) -> float:
        return self.w_plus + self.w_minus

    @property
    def asymmetry(self) -> float:
        """ξ̄ = (w_minus - w_plus) / (w_plus + w_minus), always in (-1, 1)."""
        return (self.w_minus - self.w_plus) / self.w_total

    @property
    def variance(self) -> float:
        return self.lam**2 * (1.0 - self.asymmetry**2)

    @classmethod
    def from_asymmetry(cls, lam: float, w_total: float, asymmetry: float) -> "TlfParams":
        """Build from total rate W and asymmetry ξ̄ instead of the two rates."""
        if not (w_total > 0):
            raise ParameterError(f"w_total must be > 0, got {w_total}")
        if not (-1.0 < asymmetry < 1.0):
            raise ParameterError(f"asymmetry must lie in (-1, 1), got {asymmetry}")
        w_minus = 0.5 * w_total * (1.0 + asymmetry)
        w_plus = 0.5 * w_total * (1.0 - asymmetry)
        return cls(lam=lam, w_plus=w_plus, w_minus=w_minus)


@dataclass(frozen=True)
class TlfEnsembleParams:
    """Ordered list of statistically independent fluctuators."""

    fluctuators: tuple

    def __post_init__(self):
        flucts = tuple(self.fluctuators)
        if len(flucts) == 0:
            raise ParameterError("ensemble must contain at least one fluctuator")
        for f in flucts:
            if not isinstance(f, TlfParams):
                raise ParameterError(f"expected TlfParams, got {type(f).__name__}")
        object.__setattr__(self, "fluctuators", flucts)

    @property
    def variance(self) -> float:
        return sum(f.variance for f in self.fluctuators)


NoiseParams = Union[OuParams, TlfParams, TlfEnsembleParams]


@dataclass
class NoiseTrajectory:
    """One noise realization β(t_k) on a uniform grid (times µs, values MHz).

    `fine_values`, when present, holds m sub-samples per cycle taken at
    t_k + i*tau/m; column 0 equals `values`.  It is produced by the opt-in
    fine-grid mode used to probe the short-evolution approximation.
    """

    times: np.ndarray
    values: np.ndarray
    process: str
    seed: object = None
    fine_values: np.ndarray | None = None
    fine_tau: float | None = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        check_uniform_grid(self.times)
        if self.values.shape != self.times.shape:
            raise GridError("values and times must have the same length")
        if not np.all(np.isfinite(self.values)):
            raise GridError("trajectory values must be finite")

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0]) if self.times.size > 1 else 0.0

    def phases(self, tau: float) -> np.ndarray:
        """Accumulated RIM phases φ_k = ∫ β dt over [t_k, t_k+tau] (radians).

        Point-sample approximation φ_k = β(t_k)·tau unless fine sub-samples
        were generated, in which case a left Riemann sum over the m
        sub-samples is used.
        """
        if self.fine_values is None:
            return self.values * tau
        if self.fine_tau is not None and not np.isclose(self.fine_tau, tau):
            raise GridError(
                f"fine sub-samples were generated for tau={self.fine_tau}, requested {tau}"
            )
        m = self.fine_values.shape[1]
        return self.fine_values.sum(axis=1) * (tau / m)

    def dump_csv(self, path) -> None:
        """Write `t_us,beta_MHz` rows."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t_us", "beta_MHz"])
            for t, b in zip(self.times, self.values):
                writer.writerow([f"{t:.12g}", f"{b:.12g}"])


def check_uniform_grid(times: np.ndarray) -> float:
    """Validate a strictly increasing uniform grid; return its step."""
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise GridError("time grid must be a non-empty 1-D array")
    if times.size == 1:
        return 0.0
    steps = np.diff(times)
    if np.any(steps <= 0):
        raise GridError("time grid must be strictly increasing")
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=1e-12):
        raise GridError("time grid must be uniform")
    return float(steps[0])


def make_grid(n_points: int, dt: float, t0: float = 0.0) -> np.ndarray:
    """Uniform grid t_k = t0 + k*dt with n_points entries."""
    if n_points < 1:
        raise GridError(f"n_points must be >= 1, got {n_points}")
    if not (dt > 0) and n_points > 1:
        raise GridError(f"dt must be > 0, got {dt}")
    return t0 + dt * np.arange(n_points, dtype=float)


def make_log_uniform_rates(n: int, w_min: float, w_max: float) -> np.ndarray:
    """n switching rates with logarithms uniformly spaced on [ln w_min, ln w_max].

    n=1 returns {w_min}; the endpoints are always included for n >= 2.
    """
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    if not (0 < w_min < w_max):
        raise ParameterError(f"need 0 < w_min < w_max, got [{w_min}, {w_max}]")
    return np.geomspace(w_min, w_max, n)


def _step_plan(n_points: int, dt: float, tau: float | None, subsamples: int):
    """Sub-time layout for the fine-grid mode.

    Returns (steps, m): `steps` are the n_points*m - 1 propagation intervals
    visiting t_k + i*tau/m for i < m within each cycle, then jumping to the
    next cycle start.
    """
    m = int(subsamples)
    if m < 1:
        raise ParameterError(f"subsamples must be >= 1, got {m}")
    if m == 1:
        return np.full(max(n_points - 1, 0), dt), 1
    if tau is None or not (tau > 0):
        raise ParameterError("fine-grid mode needs the RIM evolution time tau > 0")
    sub = tau / m
    gap = dt - (m - 1) * sub
    if gap <= 0:
        raise ParameterError(
            f"fine grid does not fit: (m-1)*tau/m = {(m - 1) * sub} >= dt = {dt}"
        )
    steps = np.empty(n_points * m - 1)
    pattern = np.full(m, sub)
    pattern[-1] = gap
    steps[:] = np.tile(pattern, n_points)[: steps.size]
    return steps, m


def _ou_batch(
    params: OuParams,
    n_points: int,
    dt: float,
    seeds: Sequence[np.random.SeedSequence],
    tau: float | None = None,
    subsamples: int = 1,
) -> np.ndarray:
    """Exact-discretization OU rows, one independent substream per row.

    Returns shape (len(seeds), n_points) or (..., n_points, m) in fine mode.
    Row i consumes exactly n_points*m standard normals from its stream.
    """
    steps, m = _step_plan(n_points, dt, tau, subsamples)
    n_total = n_points * m
    batch = len(seeds)
    z = np.empty((batch, n_total))
    for i, s in enumerate(seeds):
        z[i] = np.random.default_rng(s).standard_normal(n_total)

    var = params.variance
    beta = np.empty_like(z)
    beta[:, 0] = np.sqrt(var) * z[:, 0]
    if n_total > 1:
        decay = np.exp(-params.gamma * steps)
        sig = np.sqrt(var * (1.0 - decay**2))
        for k in range(n_total - 1):
            beta[:, k + 1] = beta[:, k] * decay[k] + sig[k] * z[:, k + 1]
    if m == 1:
        return beta
    return beta.reshape(batch, n_points, m)


def _rtn_batch(
    params: TlfParams,
    n_points: int,
    dt: float,
    seeds: Sequence[np.random.SeedSequence],
    tau: float | None = None,
    subsamples: int = 1,
) -> np.ndarray:
    """Stationary telegraph rows via the exact two-state propagator.

    The hidden state ξ ∈ {+1, -1} starts from its stationary law
    (P(+1) = w_minus/W) and evolves with
    P(ξ'|ξ) = p_st(ξ') + exp(-W dt) (δ_{ξξ'} - p_st(ξ')); the emitted value
    is lam*(ξ - ξ̄).  Row i consumes exactly n_points*m uniforms.
    """
    steps, m = _step_plan(n_points, dt, tau, subsamples)
    n_total = n_points * m
    batch = len(seeds)
    u = np.empty((batch, n_total))
    for i, s in enumerate(seeds):
        u[i] = np.random.default_rng(s).random(n_total)

    w = params.w_total
    p_plus = params.w_minus / w  # stationary P(ξ = +1)
    xi = np.empty((batch, n_total), dtype=np.int8)
    xi[:, 0] = np.where(u[:, 0] < p_plus, 1, -1)
    if n_total > 1:
        mix = np.exp(-w * steps)
        for k in range(n_total - 1):
            up = xi[:, k] == 1
            # P(next = +1 | current)
            p_next = p_plus + mix[k] * (up.astype(float) - p_plus)
            xi[:, k + 1] = np.where(u[:, k + 1] < p_next, 1, -1)
    values = params.lam * (xi.astype(float) - params.asymmetry)
    if m == 1:
        return values
    return values.reshape(batch, n_points, m)


def _ensemble_batch(
    params: TlfEnsembleParams,
    n_points: int,
    dt: float,
    seeds: Sequence[np.random.SeedSequence],
    tau: float | None = None,
    subsamples: int = 1,
) -> np.ndarray:
    """Pointwise sum of independent fluctuators, substream j per fluctuator."""
    total = None
    for j, fluct in enumerate(params.fluctuators):
        child_seeds = [substream(s, j) for s in seeds]
        part = _rtn_batch(fluct, n_points, dt, child_seeds, tau, subsamples)
        total = part if total is None else total + part
    return total


def _finish(values, grid, process, seed, subsamples, tau) -> NoiseTrajectory:
    if subsamples == 1:
        return NoiseTrajectory(times=grid, values=values[0], process=process, seed=seed)
    fine = values[0]
    return NoiseTrajectory(
        times=grid,
        values=fine[:, 0],
        process=process,
        seed=seed,
        fine_values=fine,
        fine_tau=tau,
    )


def sample_ou_trajectory(
    params: OuParams,
    grid: np.ndarray,
    seed: SeedLike,
    tau: float | None = None,
    subsamples: int = 1,
) -> NoiseTrajectory:
    """Sample an OU trajectory on `grid` with the exact AR(1) update.

    β(t_0) is drawn from the stationary law Normal(0, big_gamma/2) and
    β(t_{k+1}) = β(t_k) e^{-γ dt} + η_k with η_k ~ Normal(0, (Γ/2)(1-e^{-2γ dt})),
    which is distribution-exact at the grid points for any step size.
    """
    grid = np.asarray(grid, dtype=float)
    dt = check_uniform_grid(grid)
    values = _ou_batch(params, grid.size, dt, [substream(seed)], tau, subsamples)
    return _finish(values, grid, "ou", seed, subsamples, tau)


def sample_rtn_trajectory(
    params: TlfParams,
    grid: np.ndarray,
    seed: SeedLike,
    tau: float | None = None,
    subsamples: int = 1,
) -> NoiseTrajectory:
    """Sample a single-fluctuator telegraph trajectory (zero-mean output)."""
    grid = np.asarray(grid, dtype=float)
    dt = check_uniform_grid(grid)
    values = _rtn_batch(params, grid.size, dt, [substream(seed)], tau, subsamples)
    return _finish(values, grid, "rtn", seed, subsamples, tau)


def sample_ensemble_trajectory(
    params: TlfEnsembleParams,
    grid: np.ndarray,
    seed: SeedLike,
    tau: float | None = None,
    subsamples: int = 1,
) -> NoiseTrajectory:
    """Sample the sum of independent fluctuators.

    Fluctuator j draws from the deterministic substream `substream(seed, j)`,
    so ensembles are reproducible and per-fluctuator parallelizable.
    """
    grid = np.asarray(grid, dtype=float)
    dt = check_uniform_grid(grid)
    root = substream(seed)
    values = _ensemble_batch(params, grid.size, dt, [root], tau, subsamples)
    return _finish(values, grid, "ensemble", seed, subsamples, tau)


def sample_batch(
    params: NoiseParams,
    n_points: int,
    dt: float,
    seeds: Sequence[np.random.SeedSequence],
    tau: float | None = None,
    subsamples: int = 1,
) -> np.ndarray:
    """Vectorized multi-trajectory sampling; row i uses seeds[i].

    Row i is bit-identical to the corresponding single-trajectory sampler
    called with the same SeedSequence.
    """
    if isinstance(params, OuParams):
        return _ou_batch(params, n_points, dt, seeds, tau, subsamples)
    if isinstance(params, TlfParams):
        return _rtn_batch(params, n_points, dt, seeds, tau, subsamples)
    if isinstance(params, TlfEnsembleParams):
        return _ensemble_batch(params, n_points, dt, seeds, tau, subsamples)
    raise ParameterError(f"unknown noise parameter type {type(params).__name__}")
