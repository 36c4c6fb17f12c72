"""Single-cycle Ramsey interferometry measurement (RIM) model.

Each cycle accumulates a phase φ_k over the free evolution and is read out
with a second π/2 pulse shifted by Δφ from the first.  The outcome
statistics are

    P(α | φ) = [1 + (-1)^α D cos(φ + Δφ)] / 2,      D = exp(-τ/T₂),

so Δφ = -π/2 gives a linear response (r ≈ τβ) and Δφ = π a quadratic one
(r ≈ τ²β²/2 - 1).  Readout imperfections (weak optical readout truncated to
0/1 photons, assignment errors) only rescale the signal contrast.

`run_trajectory` turns one noise realization into one `OutcomeRecord`,
either by sampling the per-cycle outcomes ("bernoulli") or by recording the
exact conditional mean of the per-cycle reading given the noise
("conditional"), which is unbiased for the same correlators with no shot
noise.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import GridError, ParameterError
from .noise import NoiseTrajectory, SeedLike, make_grid, substream

LINEAR_DPHI = -np.pi / 2
QUADRATIC_DPHI = np.pi


@dataclass(frozen=True)
class RimConfig:
    """Protocol parameters for a trajectory of sequential RIMs.

    tau: free evolution time (µs); delta_t: programmed cycle delay (µs);
    n_cycles: RIMs per trajectory; dphi: per-cycle phase difference between
    the two π/2 pulses (scalar or length-n_cycles array, radians);
    t_dead: readout/reset dead time added to the delay (µs);
    subsamples: fine-grid sub-steps per evolution window (1 = point sample).
    """

    tau: float
    delta_t: float
    n_cycles: int
    dphi: object = LINEAR_DPHI
    t_dead: float = 0.0
    subsamples: int = 1

    def __post_init__(self):
        if not (self.tau > 0):
            raise ParameterError(f"tau must be > 0, got {self.tau}")
        if not (self.delta_t > 0):
            raise ParameterError(f"delta_t must be > 0, got {self.delta_t}")
        if self.t_dead < 0:
            raise ParameterError(f"t_dead must be >= 0, got {self.t_dead}")
        if self.n_cycles < 1:
            raise ParameterError(f"n_cycles must be >= 1, got {self.n_cycles}")
        if self.subsamples < 1:
            raise ParameterError(f"subsamples must be >= 1, got {self.subsamples}")
        if self.tau >= self.dt_eff:
            raise ParameterError(
                f"tau = {self.tau} must be smaller than the cycle time {self.dt_eff}"
            )
        sched = np.atleast_1d(np.asarray(self.dphi, dtype=float))
        if sched.size == 1:
            sched = np.full(self.n_cycles, sched[0])
        if sched.shape != (self.n_cycles,):
            raise ParameterError(
                f"dphi must be a scalar or length-{self.n_cycles} schedule"
            )
        object.__setattr__(self, "dphi", sched)

    @property
    def dt_eff(self) -> float:
        """Effective sampling interval Δt + t_dead (µs)."""
        return self.delta_t + self.t_dead

    def grid(self) -> np.ndarray:
        return make_grid(self.n_cycles, self.dt_eff)


@dataclass(frozen=True)
class MeasurementModel:
    """Readout model: 'ideal', 'weak-optical' (g0, g1) or 'assignment-error' (p0, p1).

    t2 (µs) optionally damps every conditional expectation by exp(-tau/t2);
    None disables it.  Derived contrast/offset describe the affine map from
    the ideal reading r to the recorded statistic's conditional mean.
    """

    kind: str = "ideal"
    g0: float | None = None
    g1: float | None = None
    p0: float | None = None
    p1: float | None = None
    t2: float | None = None

    def __post_init__(self):
        if self.kind not in ("ideal", "weak-optical", "assignment-error"):
            raise ParameterError(f"unknown measurement kind {self.kind!r}")
        if self.kind == "weak-optical":
            if self.g0 is None or self.g1 is None:
                raise ParameterError("weak-optical readout needs g0 and g1")
            if not (0 <= self.g1 < self.g0 <= 1):
                raise ParameterError(f"need 0 <= g1 < g0 <= 1, got g0={self.g0}, g1={self.g1}")
        if self.kind == "assignment-error":
            if self.p0 is None or self.p1 is None:
                raise ParameterError("assignment-error readout needs p0 and p1")
            if self.p0 < 0 or self.p1 < 0 or self.p0 + self.p1 >= 1:
                raise ParameterError(f"need p0, p1 >= 0 and p0 + p1 < 1, got {self.p0}, {self.p1}")
        if self.t2 is not None and not (self.t2 > 0):
            raise ParameterError(f"t2 must be > 0 (or None), got {self.t2}")

    @property
    def g_bar(self) -> float:
        return 0.5 * (self.g0 + self.g1)

    @property
    def delta(self) -> float:
        return 0.5 * (self.g0 - self.g1)

    @property
    def a(self) -> float:
        return self.p1 - self.p0

    @property
    def b(self) -> float:
        return 1.0 - (self.p0 + self.p1)

    @property
    def offset(self) -> float:
        """Conditional mean of the recorded statistic at r = 0."""
        if self.kind == "weak-optical":
            return self.g_bar
        if self.kind == "assignment-error":
            return self.a
        return 0.0

    @property
    def contrast(self) -> float:
        """Slope of the recorded statistic's conditional mean in r (T₂ excluded)."""
        if self.kind == "weak-optical":
            return self.delta
        if self.kind == "assignment-error":
            return self.b
        return 1.0

    def damping(self, tau: float) -> float:
        return 1.0 if self.t2 is None else float(np.exp(-tau / self.t2))


IDEAL = MeasurementModel()


def conditional_expectation(phi, dphi, damping: float = 1.0):
    """Exact conditional mean of (-1)^α given the noise: D cos(φ + Δφ)."""
    return damping * np.cos(np.asarray(phi, dtype=float) + dphi)


def outcome_probability(phi, dphi, alpha, damping: float = 1.0):
    """P(α | φ) = [1 + (-1)^α D cos(φ + Δφ)] / 2."""
    sign = 1.0 - 2.0 * np.asarray(alpha)
    return 0.5 * (1.0 + sign * conditional_expectation(phi, dphi, damping))


@dataclass
class OutcomeRecord:
    """Per-cycle readings of one simulated trajectory.

    mode 'bernoulli': values are sampled bits (ideal/assignment-error) or
    0/1 photon counts (weak-optical).  mode 'conditional': values are the
    exact conditional means of the corresponding reading given the noise.
    The protocol parameters ride along so estimators can check homogeneity
    and apply the right contrast normalization.
    """

    values: np.ndarray
    mode: str
    model: MeasurementModel
    tau: float
    dt_eff: float
    dphi: np.ndarray
    seed: object = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.dphi = np.asarray(self.dphi, dtype=float)
        if self.mode not in ("bernoulli", "conditional"):
            raise ParameterError(f"unknown mode {self.mode!r}")

    @property
    def n_cycles(self) -> int:
        return self.values.size

    def statistic(self) -> np.ndarray:
        """Centered per-cycle statistic whose products sample the correlators."""
        return batch_statistic(self.values, self.mode, self.model)

    def contrast(self) -> float:
        """Per-cycle signal contrast, T₂ damping included."""
        return self.model.contrast * self.model.damping(self.tau)

    def dump_csv(self, path) -> None:
        """Write `cycle,value` rows."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["cycle", "value"])
            for k, v in enumerate(self.values):
                writer.writerow([k, f"{v:.12g}"])


def batch_statistic(values: np.ndarray, mode: str, model: MeasurementModel) -> np.ndarray:
    """Centered statistic of raw readings: r-like for conditional, δg or δm for sampled."""
    values = np.asarray(values, dtype=float)
    if mode == "conditional":
        return values - model.offset
    if model.kind == "weak-optical":
        return values - model.g_bar  # photon counts
    signs = 1.0 - 2.0 * values  # bits -> (-1)^α
    return signs - model.a if model.kind == "assignment-error" else signs


def record_batch(
    phases: np.ndarray,
    cfg: RimConfig,
    model: MeasurementModel,
    mode: str,
    seeds,
) -> np.ndarray:
    """Vectorized readings for a (batch, n_cycles) phase array."""
    damping = model.damping(cfg.tau)
    r = conditional_expectation(phases, cfg.dphi[np.newaxis, :], damping)
    if mode == "conditional":
        return model.offset + model.contrast * r

    if mode != "bernoulli":
        raise ParameterError(f"unknown mode {mode!r}")
    batch, n = phases.shape
    u = np.empty((batch, 2, n))
    for i, s in enumerate(seeds):
        u[i] = np.random.default_rng(s).random((2, n))
    p_one = 0.5 * (1.0 - r)  # P(α = 1 | noise)
    alpha = (u[:, 0, :] < p_one).astype(float)
    if model.kind == "ideal":
        return alpha
    if model.kind == "weak-optical":
        g_alpha = np.where(alpha == 0, model.g0, model.g1)
        return (u[:, 1, :] < g_alpha).astype(float)
    p_flip = np.where(alpha == 0, model.p0, model.p1)
    flip = u[:, 1, :] < p_flip
    return np.where(flip, 1.0 - alpha, alpha)


def run_trajectory(
    noise: NoiseTrajectory,
    cfg: RimConfig,
    model: MeasurementModel = IDEAL,
    mode: str = "bernoulli",
    seed: SeedLike = 0,
) -> OutcomeRecord:
    """Simulate one trajectory of sequential RIMs over a noise realization.

    The qubit is reset between cycles, so bernoulli outcomes are drawn
    independently per cycle at probability P(α | φ_k); conditional mode
    records the conditional mean of the same reading with no sampling.
    """
    if noise.times.size != cfg.n_cycles:
        raise GridError(
            f"noise grid has {noise.times.size} points, config expects {cfg.n_cycles}"
        )
    if cfg.n_cycles > 1 and not np.isclose(noise.dt, cfg.dt_eff):
        raise GridError(
            f"noise grid step {noise.dt} does not match cycle time {cfg.dt_eff}"
        )
    phases = noise.phases(cfg.tau)[np.newaxis, :]
    values = record_batch(phases, cfg, model, mode, [substream(seed)])
    return OutcomeRecord(
        values=values[0],
        mode=mode,
        model=model,
        tau=cfg.tau,
        dt_eff=cfg.dt_eff,
        dphi=cfg.dphi,
        seed=seed,
    )
