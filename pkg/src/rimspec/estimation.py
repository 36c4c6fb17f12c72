"""Reconstruction of correlation functions and cumulants from outcome records.

The n-point moment estimator averages products of the centered per-cycle
statistic at the requested lag tuples, divided by (contrast·τ)ⁿ; origin
averaging over a trajectory is licensed by stationarity and is the default.
Points whose cycle-index tuple contains a repeated index cannot be sampled
this way (the squared bit collapses) and are masked; `repair_repeated_indices`
fills them either by neighborhood interpolation or from auxiliary cycles run
with Δφ = π (quadratic response).

Moments and cumulants are connected by the set-partition formula; with
zero-mean noise only partitions without singleton blocks contribute, and the
inversion carries first-order (delta-method) error propagation.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from statistics import NormalDist
from typing import Iterable, Mapping, Sequence

import numpy as np

from ._partitions import mobius_coefficient, set_partitions
from .errors import EstimationError, GridError, ParameterError, RepairError
from .protocol import OutcomeRecord

LAG_DECIMALS = 9  # lag values are multiples of dt_eff; round keys at the ns level


# ---------------------------------------------------------------------------
# Correlation tensors


@dataclass
class CorrelationTensor:
    """Order-n correlation values on a rectangular grid of lag tuples.

    `axes` holds one array of non-negative lags (µs) per tensor dimension
    (n-1 of them); `values`/`std_errors`/`mask` share the grid shape.
    Stationarity means the tensor is indexed by lags only, with the first
    time pinned to 0.  mask=True marks valid points.
    """

    order: int
    axes: tuple
    values: np.ndarray
    std_errors: np.ndarray
    kind: str  # "moment" | "cumulant"
    dt_eff: float
    mask: np.ndarray = None
    n_samples: int = 0

    def __post_init__(self):
        if self.order < 1:
            raise ParameterError(f"order must be >= 1, got {self.order}")
        if self.kind not in ("moment", "cumulant"):
            raise ParameterError(f"kind must be moment or cumulant, got {self.kind!r}")
        self.axes = tuple(np.asarray(ax, dtype=float) for ax in self.axes)
        if len(self.axes) != self.order - 1:
            raise GridError(f"order {self.order} needs {self.order - 1} lag axes")
        shape = tuple(ax.size for ax in self.axes)
        self.values = np.asarray(self.values, dtype=float).reshape(shape)
        self.std_errors = np.asarray(self.std_errors, dtype=float).reshape(shape)
        if self.mask is None:
            self.mask = np.ones(shape, dtype=bool)
        self.mask = np.asarray(self.mask, dtype=bool).reshape(shape)
        for ax in self.axes:
            if np.any(ax < 0):
                raise GridError("lags must be non-negative (other orderings follow by symmetry)")

    @property
    def shape(self):
        return self.values.shape

    def index_axes(self) -> tuple:
        """Axes converted to integer multiples of dt_eff."""
        out = []
        for ax in self.axes:
            idx = np.rint(ax / self.dt_eff)
            if not np.allclose(idx * self.dt_eff, ax, rtol=1e-9, atol=1e-12):
                raise GridError("lags must be integer multiples of dt_eff")
            out.append(idx.astype(int))
        return tuple(out)

    def points(self):
        """Iterate (grid_index, integer_lag_tuple) over the grid."""
        idx_axes = self.index_axes()
        for gi in np.ndindex(self.shape):
            yield gi, tuple(int(idx_axes[d][gi[d]]) for d in range(len(idx_axes)))

    def copy(self) -> "CorrelationTensor":
        return CorrelationTensor(
            order=self.order,
            axes=tuple(ax.copy() for ax in self.axes),
            values=self.values.copy(),
            std_errors=self.std_errors.copy(),
            kind=self.kind,
            dt_eff=self.dt_eff,
            mask=self.mask.copy(),
            n_samples=self.n_samples,
        )

    def canonical_map(self) -> dict:
        """Map canonical time keys -> (value, variance, valid).

        The key of a grid point with integer lags u is the sorted tuple of
        times (0, *u) shifted to start at 0; grid points sharing a key
        estimate the same stationary quantity (permutation symmetry) and are
        averaged, preferring valid entries.
        """
        groups: dict = {}
        for gi, tup in self.points():
            key = canonical_key((0,) + tup)
            groups.setdefault(key, []).append(gi)
        out = {}
        for key, indices in groups.items():
            valid = [gi for gi in indices if self.mask[gi]]
            use = valid if valid else indices
            vals = np.array([self.values[gi] for gi in use])
            var = np.array([self.std_errors[gi] ** 2 for gi in use])
            out[key] = (vals.mean(), var.sum() / len(use) ** 2, bool(valid))
        return out

    def to_csv(self, path) -> None:
        """Write `lag1_us,...,lag{n-1}_us,value,std_err,valid` rows in C order."""
        headers = [f"lag{d + 1}_us" for d in range(self.order - 1)]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(headers + ["value", "std_err", "valid"])
            for gi in np.ndindex(self.shape):
                lags = [repr(float(self.axes[d][gi[d]])) for d in range(len(self.axes))]
                writer.writerow(
                    lags
                    + [
                        repr(float(self.values[gi])),
                        repr(float(self.std_errors[gi])),
                        int(self.mask[gi]),
                    ]
                )


def canonical_key(times: Sequence[float]) -> tuple:
    """Sorted, origin-shifted time tuple identifying a stationary correlation point."""
    arr = sorted(float(t) for t in times)
    t0 = arr[0]
    return tuple(float(round(t - t0, LAG_DECIMALS)) for t in arr)


def tensor_from_csv(path, order: int, dt_eff: float, kind: str = "moment") -> CorrelationTensor:
    """Read a tensor written by `CorrelationTensor.to_csv` (rectangular grids only)."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    n_axes = order - 1
    if len(header) != n_axes + 3:
        raise GridError(f"expected {n_axes + 3} columns for order {order}, got {len(header)}")
    lag_cols = [[float(r[d]) for r in body] for d in range(n_axes)]
    axes = [np.unique(col) for col in lag_cols]
    shape = tuple(ax.size for ax in axes)
    if math.prod(shape) != len(body):
        raise GridError("CSV rows do not form a rectangular lag grid")
    values = np.empty(shape)
    errs = np.empty(shape)
    mask = np.empty(shape, dtype=bool)
    for r in body:
        gi = tuple(int(np.searchsorted(axes[d], float(r[d]))) for d in range(n_axes))
        values[gi] = float(r[n_axes])
        errs[gi] = float(r[n_axes + 1])
        mask[gi] = bool(int(r[n_axes + 2]))
    return CorrelationTensor(
        order=order, axes=tuple(axes), values=values, std_errors=errs,
        kind=kind, dt_eff=dt_eff, mask=mask,
    )


# ---------------------------------------------------------------------------
# Streaming moment accumulator


class MomentAccumulator:
    """Mergeable sums of per-trajectory lag products.

    Per lag point the accumulator keeps Σp and Σp² of the per-trajectory
    product statistic (origin-averaged or fixed-origin), so partial
    accumulators merge associatively and the final tensor is identical for
    any work partition.
    """

    def __init__(self, order: int, index_tuples: Sequence[tuple], n_cycles: int,
                 origin_mode: str = "averaged"):
        if origin_mode not in ("averaged", "fixed"):
            raise EstimationError(f"unknown origin_mode {origin_mode!r}")
        self.order = order
        self.n_cycles = n_cycles
        self.origin_mode = origin_mode
        self.tuples = [tuple(int(u) for u in tup) for tup in index_tuples]
        for tup in self.tuples:
            if len(tup) != order - 1:
                raise EstimationError(f"lag tuple {tup} does not match order {order}")
            if any(u < 0 for u in tup):
                raise EstimationError(f"negative lag in {tup}")
            if tup and max(tup) >= n_cycles:
                raise EstimationError(
                    f"lag {max(tup)} out of range for {n_cycles} cycles"
                )
        self.sum_p = np.zeros(len(self.tuples))
        self.sum_p2 = np.zeros(len(self.tuples))
        self.count = 0

    def update(self, stats: np.ndarray) -> None:
        """Accumulate a (batch, n_cycles) block of per-cycle statistics."""
        stats = np.asarray(stats, dtype=float)
        if stats.ndim != 2 or stats.shape[1] != self.n_cycles:
            raise EstimationError(f"expected (batch, {self.n_cycles}) statistics")
        for j, tup in enumerate(self.tuples):
            if self.origin_mode == "fixed":
                p = stats[:, 0].copy()
                for u in tup:
                    p *= stats[:, u]
            else:
                span = max(tup) if tup else 0
                length = self.n_cycles - span
                p = stats[:, :length].copy()
                for u in tup:
                    p *= stats[:, u:u + length]
                p = p.mean(axis=1)
            self.sum_p[j] += p.sum()
            self.sum_p2[j] += (p * p).sum()
        self.count += stats.shape[0]

    def merge(self, other: "MomentAccumulator") -> "MomentAccumulator":
        if self.tuples != other.tuples or self.origin_mode != other.origin_mode:
            raise EstimationError("cannot merge accumulators with different layouts")
        self.sum_p += other.sum_p
        self.sum_p2 += other.sum_p2
        self.count += other.count
        return self

    def results(self, scale: float):
        """Per-point (estimate, standard error) after dividing by `scale`."""
        if self.count == 0:
            raise EstimationError("no trajectories accumulated")
        mean = self.sum_p / self.count
        if self.count > 1:
            var = (self.sum_p2 - self.count * mean**2) / (self.count - 1)
            var = np.maximum(var, 0.0)
            se = np.sqrt(var / self.count)
        else:
            se = np.full_like(mean, np.inf)
        return mean / scale, se / abs(scale)


def has_repeated_index(tup: tuple) -> bool:
    """True when the cycle-index tuple (0, *lags) visits any cycle twice."""
    full = (0,) + tuple(tup)
    return len(set(full)) != len(full)


def _normalize_lag_axes(lags, order: int, dt_eff: float) -> tuple:
    """Accept a single lag array (order 2) or per-axis arrays; return µs axes."""
    if order == 1:
        return ()
    if order == 2 and np.ndim(lags) <= 1:
        axes = (np.atleast_1d(np.asarray(lags, dtype=float)),)
    else:
        axes = tuple(np.atleast_1d(np.asarray(ax, dtype=float)) for ax in lags)
    if len(axes) != order - 1:
        raise GridError(f"order {order} needs {order - 1} lag axes, got {len(axes)}")
    return axes


def estimate_correlation(
    records: Sequence[OutcomeRecord],
    order: int,
    lags,
    origin_mode: str = "averaged",
) -> CorrelationTensor:
    """Estimate the order-n moment tensor from homogeneous outcome records.

    `lags` is one array of lags (µs) for order 2, or a tuple of per-axis lag
    arrays spanning a rectangular grid; all lags must be non-negative
    multiples of the records' cycle time.  Repeated-index points are
    estimated anyway but masked invalid.
    """
    records = list(records)
    if not records:
        raise EstimationError("no records given")
    first = records[0]
    for r in records[1:]:
        if (
            not np.isclose(r.tau, first.tau)
            or not np.isclose(r.dt_eff, first.dt_eff)
            or r.mode != first.mode
            or r.model != first.model
            or r.n_cycles != first.n_cycles
            or not np.allclose(r.dphi, first.dphi)
        ):
            raise EstimationError("records are heterogeneous (tau/dt/mode/model/schedule)")

    axes = _normalize_lag_axes(lags, order, first.dt_eff)
    tensor = CorrelationTensor(
        order=order,
        axes=axes,
        values=np.zeros(tuple(a.size for a in axes)),
        std_errors=np.zeros(tuple(a.size for a in axes)),
        kind="moment",
        dt_eff=first.dt_eff,
    )
    tuples = [tup for _, tup in tensor.points()]
    acc = MomentAccumulator(order, tuples, first.n_cycles, origin_mode)
    acc.update(np.stack([r.statistic() for r in records]))
    return finalize_moments(acc, tensor, tau=first.tau, contrast=first.contrast())


def finalize_moments(
    acc: MomentAccumulator, tensor: CorrelationTensor, tau: float, contrast: float
) -> CorrelationTensor:
    """Fill a tensor template from an accumulator, masking repeated-index points."""
    scale = (contrast * tau) ** acc.order
    values, errors = acc.results(scale)
    out = tensor.copy()
    for j, (gi, tup) in enumerate(out.points()):
        out.values[gi] = values[j]
        out.std_errors[gi] = errors[j]
        out.mask[gi] = not has_repeated_index(tup)
    out.n_samples = acc.count
    return out


# ---------------------------------------------------------------------------
# Moment <-> cumulant algebra


def _lookup(maps: Mapping[int, dict], order: int, times: tuple, what: str):
    """Fetch (value, variance, valid) for a time tuple from the canonical maps."""
    if order not in maps:
        raise EstimationError(f"missing order-{order} {what} tensor for the inversion")
    key = canonical_key(times)
    entry = maps[order].get(key)
    if entry is None:
        raise EstimationError(
            f"order-{order} {what} tensor does not cover the lag key {key}"
        )
    return entry


def _convert(tensors: Iterable[CorrelationTensor], direction: str) -> dict:
    """Shared implementation of the partition-formula conversion.

    direction "to_cumulants": κ_n = M_n + Σ_{|P|>1, no singletons} (-1)^{k-1}(k-1)! ∏ M_B
    direction "to_moments":   M_n = κ_n + Σ_{|P|>1, no singletons} ∏ κ_B
    Zero-mean noise is assumed throughout (order-1 tensors are implicit
    zeros), and variances propagate to first order treating distinct
    canonical entries as independent.
    """
    tensors = {t.order: t for t in tensors}
    if not tensors:
        raise EstimationError("no tensors given")
    from_kind = "moment" if direction == "to_cumulants" else "cumulant"
    to_kind = "cumulant" if direction == "to_cumulants" else "moment"
    dts = [t.dt_eff for t in tensors.values()]
    if not np.allclose(dts, dts[0]):
        raise GridError("all tensors must share one dt_eff for the inversion")
    for t in tensors.values():
        if t.kind != from_kind:
            raise EstimationError(f"expected kind={from_kind!r} tensors, got {t.kind!r}")
    maps = {order: t.canonical_map() for order, t in tensors.items()}

    out = {}
    for order, tensor in sorted(tensors.items()):
        result = tensor.copy()
        result.kind = to_kind
        if order <= 3:
            out[order] = result  # zero-mean: orders 2 and 3 are identical
            continue
        for gi, tup in tensor.points():
            # index units keep the canonical keys exact across orders
            times = np.array((0,) + tuple(tup))
            base_val = tensor.values[gi]
            base_var = tensor.std_errors[gi] ** 2
            valid = bool(tensor.mask[gi])
            total = base_val
            grads: dict = {}
            for partition in set_partitions(order):
                if len(partition) == 1 or any(len(b) == 1 for b in partition):
                    continue
                coef = mobius_coefficient(len(partition)) if direction == "to_cumulants" else 1
                block_entries = []
                for block in partition:
                    val, var, ok = _lookup(maps, len(block), tuple(times[list(block)]), from_kind)
                    valid = valid and ok
                    block_entries.append((block, val, var))
                term = coef * math.prod(v for _, v, _ in block_entries)
                total += term
                for i, (block, val, var) in enumerate(block_entries):
                    grad = coef * math.prod(
                        v for k, (_, v, _) in enumerate(block_entries) if k != i
                    )
                    key = (len(block), canonical_key(tuple(times[list(block)])))
                    g0, v0 = grads.get(key, (0.0, var))
                    grads[key] = (g0 + grad, var)
            var_total = base_var + sum(g * g * v for g, v in grads.values())
            result.values[gi] = total
            result.std_errors[gi] = math.sqrt(var_total)
            result.mask[gi] = valid
        out[order] = result
    return out


def moments_to_cumulants(moments: Iterable[CorrelationTensor]) -> dict:
    """Möbius-invert moment tensors into cumulant tensors (zero-mean noise).

    Returns {order: cumulant tensor}; each order n >= 4 needs the lower even
    moment tensors on grids covering all pairwise block lags of its points.
    """
    return _convert(moments, "to_cumulants")


def cumulants_to_moments(cumulants: Iterable[CorrelationTensor]) -> dict:
    """Exact inverse of `moments_to_cumulants` (the plain partition formula)."""
    return _convert(cumulants, "to_moments")


# ---------------------------------------------------------------------------
# Repairing repeated-index points


def _axis_fill(values, errs, mask, point, axis):
    """Linear interpolation/extrapolation along one axis from valid neighbors."""
    n = values.shape[axis]
    pos = point[axis]

    def at(i):
        idx = list(point)
        idx[axis] = i
        return tuple(idx)

    left = [i for i in range(pos - 1, -1, -1) if mask[at(i)]]
    right = [i for i in range(pos + 1, n) if mask[at(i)]]
    if left and right:
        l, r = left[0], right[0]
        dl, dr = pos - l, r - pos
        wl, wr = dr / (dl + dr), dl / (dl + dr)
        return (
            wl * values[at(l)] + wr * values[at(r)],
            wl**2 * errs[at(l)] ** 2 + wr**2 * errs[at(r)] ** 2,
        )
    side = right if right else left
    if len(side) >= 2:
        i1, i2 = side[0], side[1]
        d1, d2 = abs(i1 - pos), abs(i2 - pos)
        # linear extrapolation through the two nearest valid points
        w1 = (d2) / (d2 - d1)
        w2 = -(d1) / (d2 - d1)
        return (
            w1 * values[at(i1)] + w2 * values[at(i2)],
            w1**2 * errs[at(i1)] ** 2 + w2**2 * errs[at(i2)] ** 2,
        )
    if len(side) == 1:
        i1 = side[0]
        return values[at(i1)], errs[at(i1)] ** 2
    return None


def _interpolate_masked(tensor: CorrelationTensor) -> CorrelationTensor:
    out = tensor.copy()
    if not np.any(out.mask):
        raise RepairError("tensor has no unmasked points to interpolate from")
    # repeated-index points can cluster (rows/diagonals); fill in passes so
    # later passes can lean on earlier fills (e.g. the all-masked corner)
    while not np.all(out.mask):
        fills = {}
        for gi in np.ndindex(out.shape):
            if out.mask[gi]:
                continue
            estimates = []
            for axis in range(len(out.shape)):
                est = _axis_fill(out.values, out.std_errors, out.mask, gi, axis)
                if est is not None:
                    estimates.append(est)
            if estimates:
                vals = np.array([e[0] for e in estimates])
                vars_ = np.array([e[1] for e in estimates])
                fills[gi] = (vals.mean(), vars_.sum() / len(estimates) ** 2)
        if not fills:
            raise RepairError(
                f"masked points {np.argwhere(~out.mask).tolist()} have no unmasked neighbors"
            )
        for gi, (v, var) in fills.items():
            out.values[gi] = v
            out.std_errors[gi] = math.sqrt(var)
            out.mask[gi] = True
    return out


def doubled_index_pattern(tup: tuple):
    """Split the cycle tuple (0, *lags) into (doubled index, single indices).

    Returns None when the point is not repairable by one quadratic RIM,
    i.e. unless exactly one index appears exactly twice and the rest once.
    """
    full = (0,) + tuple(tup)
    counts = {}
    for u in full:
        counts[u] = counts.get(u, 0) + 1
    doubled = [u for u, c in counts.items() if c == 2]
    if len(doubled) != 1 or any(c > 2 for c in counts.values()):
        return None
    singles = tuple(sorted(u for u, c in counts.items() if c == 1))
    return doubled[0], singles


class QuadRepairAccumulator:
    """Streaming estimator of repeated-index moments from Δφ = π cycles.

    For a masked point whose cycle tuple doubles index d and keeps singles
    p_i, every π-cycle position q with linear cycles at q + (p_i - d) yields
    one sample of (r^q + 1) ∏ r^l, whose mean is τⁿ⟨β²(t_d) ∏ β(t_p)⟩ / 2.
    """

    def __init__(self, patterns: Sequence[tuple], schedule_is_pi: np.ndarray):
        self.patterns = list(patterns)  # (doubled, singles) per masked point
        self.is_pi = np.asarray(schedule_is_pi, dtype=bool)
        n = self.is_pi.size
        pi_positions = np.flatnonzero(self.is_pi)
        self.positions = []
        for doubled, singles in self.patterns:
            offsets = [p - doubled for p in singles]
            admissible = []
            for q in pi_positions:
                targets = [q + off for off in offsets]
                if all(0 <= t < n and not self.is_pi[t] for t in targets):
                    admissible.append((q, targets))
            self.positions.append(admissible)
        self.sum_p = np.zeros(len(self.patterns))
        self.sum_p2 = np.zeros(len(self.patterns))
        self.count = 0

    def update(self, stats: np.ndarray, contrast: float) -> None:
        """Accumulate normalized aux statistics; stats is (batch, n_cycles)."""
        z = np.asarray(stats, dtype=float) / contrast
        for j, admissible in enumerate(self.positions):
            if not admissible:
                continue
            acc = None
            for q, targets in admissible:
                p = z[:, q] + 1.0
                for t in targets:
                    p = p * z[:, t]
                acc = p if acc is None else acc + p
            per_traj = acc / len(admissible)
            self.sum_p[j] += per_traj.sum()
            self.sum_p2[j] += (per_traj * per_traj).sum()
        self.count += stats.shape[0]

    def merge(self, other: "QuadRepairAccumulator") -> "QuadRepairAccumulator":
        self.sum_p += other.sum_p
        self.sum_p2 += other.sum_p2
        self.count += other.count
        return self

    def results(self, tau: float, order: int):
        """(value, std_error, has_data) per pattern, scaled by 2/τⁿ."""
        out = []
        scale = 2.0 / tau**order
        for j, admissible in enumerate(self.positions):
            if not admissible or self.count == 0:
                out.append((np.nan, np.nan, False))
                continue
            mean = self.sum_p[j] / self.count
            if self.count > 1:
                var = (self.sum_p2[j] - self.count * mean**2) / (self.count - 1)
                se = math.sqrt(max(var, 0.0) / self.count)
            else:
                se = math.inf
            out.append((scale * mean, scale * se, True))
        return out


def _quadratic_repair(tensor: CorrelationTensor, aux_records) -> CorrelationTensor:
    if not aux_records:
        raise RepairError("quadratic-rim repair needs aux records with Δφ = π cycles")
    aux = list(aux_records)
    first = aux[0]
    is_pi = np.isclose(np.mod(first.dphi, 2 * np.pi), np.pi)
    if not np.any(is_pi):
        raise RepairError("aux records contain no Δφ = π cycles")
    for r in aux[1:]:
        if not np.allclose(r.dphi, first.dphi) or r.n_cycles != first.n_cycles:
            raise RepairError("aux records must share one Δφ schedule")
    if not np.isclose(first.dt_eff, tensor.dt_eff):
        raise RepairError("aux records are on a different time grid than the tensor")

    masked = [(gi, tup) for gi, tup in tensor.points() if not tensor.mask[gi]]
    patterns = []
    targets = []
    for gi, tup in masked:
        pat = doubled_index_pattern(tup)
        if pat is not None:
            patterns.append(pat)
            targets.append(gi)
    acc = QuadRepairAccumulator(patterns, is_pi)
    stats = np.stack([r.statistic() for r in aux])
    acc.update(stats, first.contrast())
    out = tensor.copy()
    for gi, (value, se, ok) in zip(targets, acc.results(first.tau, tensor.order)):
        if not ok:
            raise RepairError(
                f"aux schedule has no admissible π cycle for masked point {gi}"
            )
        out.values[gi] = value
        out.std_errors[gi] = se
        out.mask[gi] = True
    return out


def repair_repeated_indices(
    tensor: CorrelationTensor,
    method: str = "interpolate",
    aux_records=None,
) -> CorrelationTensor:
    """Fill masked (repeated-index) points of a tensor.

    "interpolate" fills each masked point from its valid neighbors by
    per-axis linear interpolation (extrapolating at grid edges);
    "quadratic-rim" estimates ⟨β²(t_d) ∏ β(t_p)⟩ from aux records whose
    schedule runs Δφ = π at the doubled cycle, and applies to moment-kind
    tensors (orders 2 and 3 equal their cumulants).  Points with more than
    one coincidence stay un-repairable by a single quadratic RIM.
    """
    if method == "interpolate":
        return _interpolate_masked(tensor)
    if method == "quadratic-rim":
        if tensor.kind == "cumulant" and tensor.order > 3:
            raise RepairError(
                "quadratic-rim estimates raw moments; repair the moment tensors "
                "before converting to cumulants"
            )
        return _quadratic_repair(tensor, aux_records)
    raise ParameterError(f"unknown repair method {method!r}")


# ---------------------------------------------------------------------------
# Sample-size planning


@dataclass(frozen=True)
class SamplePlan:
    """Trajectories needed to bound each correlation point's error."""

    order: int
    delta: float
    eps: float
    tau: float
    n_trajectories: int
    method: str = "hoeffding"


def hoeffding_sample_size(order: int, delta: float, eps: float, tau: float) -> SamplePlan:
    """N_s >= 2/(δ² τ^{2n}) ln(2/ε): trajectories for absolute error δ w.p. 1-ε."""
    if order < 1:
        raise ParameterError(f"order must be >= 1, got {order}")
    if not (0 < delta < 1):
        raise ParameterError(f"delta must lie in (0, 1), got {delta}")
    if not (0 < eps < 1):
        raise ParameterError(f"eps must lie in (0, 1), got {eps}")
    if not (tau > 0):
        raise ParameterError(f"tau must be > 0, got {tau}")
    bound = 2.0 / (delta**2 * tau ** (2 * order)) * math.log(2.0 / eps)
    return SamplePlan(order, delta, eps, tau, math.ceil(bound))


def normal_approx_sample_size(
    order: int, delta: float, eps: float, tau: float, product_variance: float = 1.0
) -> SamplePlan:
    """Normal-approximation N_s for conditional-mode runs.

    Uses N_s = z²_{1-ε/2} · Var(product) / (δ τⁿ)² with a caller-supplied
    per-trajectory product variance (<= 1 for bounded readings).
    """
    if not (0 < eps < 1):
        raise ParameterError(f"eps must lie in (0, 1), got {eps}")
    if not (delta > 0 and tau > 0 and product_variance > 0):
        raise ParameterError("delta, tau and product_variance must be positive")
    z = NormalDist().inv_cdf(1.0 - eps / 2.0)
    n = z**2 * product_variance / (delta * tau**order) ** 2
    return SamplePlan(order, delta, eps, tau, math.ceil(n), method="normal-approx")
