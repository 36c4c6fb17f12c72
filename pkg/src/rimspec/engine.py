"""Experiment orchestration: noise → RIMs → estimation → spectra, reproducibly.

A JSON config fully determines a run.  Trajectories are never stored:
per-trajectory products stream into mergeable accumulators, so memory is
O(lag set) regardless of the trajectory budget.  Trajectory i draws from the
substreams SeedSequence(seed, spawn_key=(domain, i)) with domain 0 for noise
(fluctuator j appends j), 1 for the measurement and 2 for auxiliary Δφ = π
measurements, which makes every output byte a function of (config, seed)
alone, independent of the worker count.
"""

from __future__ import annotations

import json
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import estimation as est
from . import oracles
from .errors import ConfigError, ParameterError
from .noise import (
    NoiseParams,
    OuParams,
    TlfEnsembleParams,
    TlfParams,
    make_log_uniform_rates,
    sample_batch,
    substream,
)
from .protocol import (
    LINEAR_DPHI,
    QUADRATIC_DPHI,
    MeasurementModel,
    RimConfig,
    batch_statistic,
    record_batch,
)
from .spectra import frequency_grid, polyspectrum

NOISE_DOMAIN, MEAS_DOMAIN, AUX_DOMAIN = 0, 1, 2
SHORT_EVOLUTION_PROXY_LIMIT = 0.3


# ---------------------------------------------------------------------------
# Configuration


def _noise_params(section: dict) -> NoiseParams:
    kind = section.get("kind")
    if kind == "ou":
        return OuParams(gamma=section["gamma"], big_gamma=section["big_gamma"])
    if kind == "rtn":
        return _tlf_from(section)
    if kind == "ensemble":
        if "fluctuators" in section:
            return TlfEnsembleParams(tuple(_tlf_from(f) for f in section["fluctuators"]))
        n = section["n_fluctuators"]
        rates = make_log_uniform_rates(n, section["w_min"], section["w_max"])
        lam = section["lam"]
        xi = section.get("asymmetry", 0.0)
        return TlfEnsembleParams(
            tuple(TlfParams.from_asymmetry(lam, w, xi) for w in rates)
        )
    raise ConfigError(f"unknown noise kind {kind!r}")


def _tlf_from(section: dict) -> TlfParams:
    if "w_plus" in section:
        return TlfParams(lam=section["lam"], w_plus=section["w_plus"],
                         w_minus=section["w_minus"])
    return TlfParams.from_asymmetry(
        section["lam"], section["w_total"], section.get("asymmetry", 0.0)
    )


def _dphi_value(raw) -> float:
    if raw in (None, "linear"):
        return LINEAR_DPHI
    if raw == "quadratic":
        return QUADRATIC_DPHI
    return float(raw)


def _lag_axes(spec, order: int) -> tuple:
    """Per-axis integer lag lists from an int max or explicit lists."""
    n_axes = order - 1
    if isinstance(spec, int):
        return tuple(list(range(spec + 1)) for _ in range(n_axes))
    axes = [list(int(v) for v in ax) for ax in spec]
    if len(axes) != n_axes:
        raise ConfigError(f"order {order} needs {n_axes} lag axes, got {len(axes)}")
    return tuple(axes)


@dataclass
class ExperimentConfig:
    """Validated, picklable form of the JSON experiment configuration."""

    noise: NoiseParams
    rim: RimConfig
    model: MeasurementModel
    mode: str
    orders: tuple
    lag_axes: dict  # order -> tuple of per-axis integer lag lists
    origin_mode: str
    repair: str  # none | interpolate | quadratic-rim
    cumulants: bool
    spectra_enabled: bool
    spectrum_points: int | None
    window: str
    n_trajectories: int
    seed: int
    workers: int
    batch_size: int
    out_dir: str
    dump: bool
    plots: bool
    raw: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        try:
            noise = _noise_params(data["noise"])
            rim_raw = dict(data["rim"])
            rim = RimConfig(
                tau=rim_raw["tau"],
                delta_t=rim_raw["delta_t"],
                n_cycles=int(rim_raw.get("n_cycles", 256)),
                dphi=_dphi_value(rim_raw.get("dphi")),
                t_dead=rim_raw.get("t_dead", 0.0),
                subsamples=int(rim_raw.get("subsamples", 1)),
            )
            meas = dict(data.get("measurement", {"kind": "ideal"}))
            model = MeasurementModel(
                kind=meas.get("kind", "ideal"),
                g0=meas.get("g0"), g1=meas.get("g1"),
                p0=meas.get("p0"), p1=meas.get("p1"),
                t2=meas.get("t2"),
            )
            est_sec = dict(data.get("estimation", {}))
            orders = tuple(int(n) for n in est_sec.get("orders", [2]))
            lag_spec = est_sec.get("lags", {})
            lag_axes = {}
            for order in orders:
                spec = lag_spec.get(str(order), lag_spec.get(order, 10))
                lag_axes[order] = _lag_axes(spec, order)
            run = dict(data.get("run", {}))
            out = dict(data.get("output", {}))
            cfg = cls(
                noise=noise,
                rim=rim,
                model=model,
                mode=est_sec.get("mode", "conditional"),
                orders=orders,
                lag_axes=lag_axes,
                origin_mode=est_sec.get("origin_mode", "averaged"),
                repair=est_sec.get("repair", "interpolate"),
                cumulants=bool(est_sec.get("cumulants", True)),
                spectra_enabled=bool(est_sec.get("spectra", True)),
                spectrum_points=est_sec.get("spectrum_points"),
                window=est_sec.get("window", "none"),
                n_trajectories=int(run.get("n_trajectories", 1000)),
                seed=int(run.get("seed", 0)),
                workers=int(run.get("workers", 1)),
                batch_size=int(run.get("batch_size", 4096)),
                out_dir=out.get("directory", "rimspec-out"),
                dump=bool(out.get("dump", False)),
                plots=bool(out.get("plots", False)),
                raw=data,
            )
        except ConfigError:
            raise
        except (KeyError, TypeError, ValueError, ParameterError) as exc:
            raise ConfigError(f"invalid configuration: {exc}") from exc
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(data)

    def validate(self) -> None:
        if self.mode not in ("conditional", "bernoulli"):
            raise ConfigError(f"unknown estimation mode {self.mode!r}")
        if self.origin_mode not in ("averaged", "fixed"):
            raise ConfigError(f"unknown origin mode {self.origin_mode!r}")
        if self.repair not in ("none", "interpolate", "quadratic-rim"):
            raise ConfigError(f"unknown repair method {self.repair!r}")
        if self.window not in ("none", "hann"):
            raise ConfigError(f"unknown window {self.window!r}")
        if self.n_trajectories < 1:
            raise ConfigError("run.n_trajectories must be >= 1")
        if self.batch_size < 1 or self.workers < 1:
            raise ConfigError("run.batch_size and run.workers must be >= 1")
        for order, axes in self.lag_axes.items():
            for ax in axes:
                if any(u < 0 for u in ax):
                    raise ConfigError(f"negative lag in order-{order} axes")
                if max(ax) >= self.rim.n_cycles:
                    raise ConfigError(
                        f"order-{order} lag {max(ax)} out of range for "
                        f"{self.rim.n_cycles} cycles"
                    )

    def short_evolution_proxy(self) -> float:
        """√Var(β) · τ: the small parameter of the sampling identity."""
        return float(np.sqrt(self.noise.variance) * self.rim.tau)


# ---------------------------------------------------------------------------
# Streaming workers


def _needed_pair_lags(cfg: ExperimentConfig) -> list:
    """Order-2 lags required by the cumulant inversion of higher orders."""
    needed = set()
    for order, axes in cfg.lag_axes.items():
        if order < 4 or not cfg.cumulants:
            continue
        for tup in _grid_tuples(axes):
            times = (0,) + tup
            for i in range(len(times)):
                for j in range(i + 1, len(times)):
                    needed.add(abs(times[i] - times[j]))
    return sorted(needed)


def _grid_tuples(axes) -> list:
    out = [()]
    for ax in axes:
        out = [tup + (u,) for tup in out for u in ax]
    return out


def _tensor_template(order, axes, dt_eff) -> est.CorrelationTensor:
    shape = tuple(len(ax) for ax in axes)
    return est.CorrelationTensor(
        order=order,
        axes=tuple(np.asarray(ax, dtype=float) * dt_eff for ax in axes),
        values=np.zeros(shape),
        std_errors=np.zeros(shape),
        kind="moment",
        dt_eff=dt_eff,
    )


def _build_accumulators(cfg: ExperimentConfig):
    """Templates plus (moment, quad-repair) accumulators for each order."""
    dt = cfg.rim.dt_eff
    lag_axes = dict(cfg.lag_axes)
    if cfg.cumulants:
        extra = _needed_pair_lags(cfg)
        if extra:
            base = list(lag_axes.get(2, ((),))[0]) if 2 in lag_axes else []
            merged = sorted(set(base) | set(extra))
            lag_axes[2] = (merged,)
    templates = {}
    moment_accs = {}
    quad_accs = {}
    aux_schedule = None
    for order in sorted(lag_axes):
        axes = lag_axes[order]
        template = _tensor_template(order, axes, dt)
        tuples = [tup for _, tup in template.points()]
        templates[order] = template
        moment_accs[order] = est.MomentAccumulator(
            order, tuples, cfg.rim.n_cycles, cfg.origin_mode
        )
        if cfg.repair == "quadratic-rim":
            patterns, targets = [], []
            for gi, tup in template.points():
                if est.has_repeated_index(tup):
                    pat = est.doubled_index_pattern(tup)
                    if pat is not None:
                        patterns.append(pat)
                        targets.append(gi)
            if patterns:
                if aux_schedule is None:
                    aux_schedule = np.zeros(cfg.rim.n_cycles, dtype=bool)
                    aux_schedule[cfg.rim.n_cycles // 2] = True
                quad_accs[order] = (
                    est.QuadRepairAccumulator(patterns, aux_schedule),
                    targets,
                )
    return templates, moment_accs, quad_accs, aux_schedule


def _run_chunk(cfg: ExperimentConfig, start: int, stop: int):
    """Accumulate trajectories [start, stop); pure function of (cfg, range)."""
    _, moment_accs, quad_accs, aux_schedule = _build_accumulators(cfg)
    rim = cfg.rim
    n = rim.n_cycles
    contrast = cfg.model.contrast * cfg.model.damping(rim.tau)
    aux_cfg = None
    if aux_schedule is not None:
        dphi = np.where(aux_schedule, QUADRATIC_DPHI, LINEAR_DPHI)
        aux_cfg = replace(rim, dphi=dphi)

    batch = cfg.batch_size
    dumped = []
    for lo in range(start, stop, batch):
        hi = min(lo + batch, stop)
        idx = range(lo, hi)
        noise_seeds = [substream(cfg.seed, NOISE_DOMAIN, i) for i in idx]
        beta = sample_batch(cfg.noise, n, rim.dt_eff, noise_seeds,
                            rim.tau, rim.subsamples)
        if rim.subsamples == 1:
            phases = beta * rim.tau
        else:
            phases = beta.sum(axis=2) * (rim.tau / rim.subsamples)

        meas_seeds = [substream(cfg.seed, MEAS_DOMAIN, i) for i in idx]
        values = record_batch(phases, rim, cfg.model, cfg.mode, meas_seeds)
        stats = batch_statistic(values, cfg.mode, cfg.model)
        for acc in moment_accs.values():
            acc.update(stats)
        if aux_cfg is not None:
            aux_seeds = [substream(cfg.seed, AUX_DOMAIN, i) for i in idx]
            aux_values = record_batch(phases, aux_cfg, cfg.model, cfg.mode, aux_seeds)
            aux_stats = batch_statistic(aux_values, cfg.mode, cfg.model)
            for acc, _ in quad_accs.values():
                acc.update(aux_stats, contrast)
        if cfg.dump:
            dumped.append((lo, values.copy(),
                           beta if rim.subsamples == 1 else beta[..., 0]))
    return moment_accs, {k: v[0] for k, v in quad_accs.items()}, dumped


@dataclass
class RunReport:
    """Everything a run produced, reproducible from (config, seed)."""

    config: dict
    seed: int
    n_trajectories: int
    wall_time_s: float
    moments: dict
    cumulants: dict
    spectra: dict
    diagnostics: dict
    files: list


def run_experiment(config, out_dir=None) -> RunReport:
    """Execute a full experiment described by a config dict/path/ExperimentConfig."""
    if isinstance(config, ExperimentConfig):
        cfg = config
    elif isinstance(config, dict):
        cfg = ExperimentConfig.from_dict(config)
    else:
        cfg = ExperimentConfig.from_json(config)
    if out_dir is not None:
        cfg.out_dir = str(out_dir)

    t0 = time.perf_counter()
    diagnostics = {"short_evolution_proxy": cfg.short_evolution_proxy()}
    if diagnostics["short_evolution_proxy"] > SHORT_EVOLUTION_PROXY_LIMIT:
        msg = (
            f"short-evolution proxy sqrt(var)*tau = "
            f"{diagnostics['short_evolution_proxy']:.3f} exceeds "
            f"{SHORT_EVOLUTION_PROXY_LIMIT}; the sampling identity degrades"
        )
        warnings.warn(msg)
        diagnostics["warnings"] = [msg]

    templates, moment_accs, quad_accs, aux_schedule = _build_accumulators(cfg)
    chunk_bounds = [
        (lo, min(lo + cfg.batch_size, cfg.n_trajectories))
        for lo in range(0, cfg.n_trajectories, cfg.batch_size)
    ]
    dumped = []
    if cfg.workers == 1 or len(chunk_bounds) == 1:
        partials = [_run_chunk(cfg, lo, hi) for lo, hi in chunk_bounds]
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            partials = list(
                pool.map(_chunk_star, [(cfg, lo, hi) for lo, hi in chunk_bounds])
            )
    # fixed-order merge keeps results identical for any worker count
    for part_m, part_q, part_d in partials:
        for order, acc in part_m.items():
            moment_accs[order].merge(acc)
        for order, acc in part_q.items():
            quad_accs[order][0].merge(acc)
        dumped.extend(part_d)

    contrast = cfg.model.contrast * cfg.model.damping(cfg.rim.tau)
    moments = {}
    for order, acc in moment_accs.items():
        moments[order] = est.finalize_moments(
            acc, templates[order], tau=cfg.rim.tau, contrast=contrast
        )

    repaired = {}
    for order, tensor in moments.items():
        fixed = tensor
        if cfg.repair == "quadratic-rim" and order in quad_accs:
            acc, targets = quad_accs[order]
            fixed = tensor.copy()
            for gi, (value, se_pt, ok) in zip(
                targets, acc.results(cfg.rim.tau, order)
            ):
                if ok:
                    fixed.values[gi] = value
                    fixed.std_errors[gi] = se_pt
                    fixed.mask[gi] = True
        if cfg.repair != "none" and not np.all(fixed.mask):
            fixed = est.repair_repeated_indices(fixed, "interpolate")
        repaired[order] = fixed

    cumulants = {}
    if cfg.cumulants:
        cumulants = est.moments_to_cumulants(repaired.values())

    spectra = {}
    if cfg.spectra_enabled and cfg.cumulants:
        for order, tensor in cumulants.items():
            if order not in cfg.orders or order - 1 > 2:
                continue
            grid = frequency_grid(cfg.rim, order)
            if cfg.spectrum_points:
                axes = tuple(
                    np.linspace(0.0, grid.omega_max, cfg.spectrum_points)
                    for _ in range(order - 1)
                )
                spectra[order] = polyspectrum(tensor, cfg.window, axes=axes)
            else:
                spectra[order] = polyspectrum(tensor, cfg.window, grid=grid)

    files = _write_outputs(cfg, moments, repaired, cumulants, spectra, dumped)
    report = RunReport(
        config=cfg.raw,
        seed=cfg.seed,
        n_trajectories=cfg.n_trajectories,
        wall_time_s=time.perf_counter() - t0,
        moments=repaired,
        cumulants=cumulants,
        spectra=spectra,
        diagnostics=diagnostics,
        files=files,
    )
    _write_report(cfg, report)
    return report


def _chunk_star(args):
    return _run_chunk(*args)


def _write_outputs(cfg, moments, repaired, cumulants, spectra, dumped) -> list:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = []

    def emit(name, obj):
        path = out / name
        obj.to_csv(path)
        files.append(str(path))

    for order, tensor in repaired.items():
        emit(f"moment_order{order}.csv", tensor)
    for order, tensor in cumulants.items():
        emit(f"cumulant_order{order}.csv", tensor)
    for order, spec in spectra.items():
        emit(f"spectrum_order{order}.csv", spec)
    if cfg.dump:
        dump_dir = out / "records"
        dump_dir.mkdir(exist_ok=True)
        meta = {
            "tau": cfg.rim.tau,
            "dt_eff": cfg.rim.dt_eff,
            "n_cycles": cfg.rim.n_cycles,
            "mode": cfg.mode,
            "dphi": list(map(float, cfg.rim.dphi)),
            "measurement": cfg.raw.get("measurement", {"kind": "ideal"}),
        }
        with open(dump_dir / "meta.json", "w") as fh:
            json.dump(meta, fh, indent=1, sort_keys=True)
        files.append(str(dump_dir / "meta.json"))
        for lo, values, beta in dumped:
            for row in range(values.shape[0]):
                path = dump_dir / f"outcomes_{lo + row:08d}.csv"
                with open(path, "w") as fh:
                    fh.write("cycle,value\n")
                    for k, v in enumerate(values[row]):
                        fh.write(f"{k},{float(v)!r}\n")
                files.append(str(path))
    if cfg.plots:
        from . import plots

        for order, spec in spectra.items():
            if spec.order == 1:
                files.append(plots.plot_spectrum_1d(spec, out / f"spectrum_order{order}.svg"))
            elif spec.order == 2:
                files.append(plots.plot_heatmap(
                    spec.axes[0], spec.axes[1], spec.values,
                    out / f"spectrum_order{order}.svg",
                    xlabel="omega1 (rad/us)", ylabel="omega2 (rad/us)",
                ))
    return files


def _write_report(cfg, report: RunReport) -> None:
    out = Path(cfg.out_dir)
    payload = {
        "config": report.config,
        "seed": report.seed,
        "n_trajectories": report.n_trajectories,
        "wall_time_s": report.wall_time_s,
        "diagnostics": report.diagnostics,
        "files": report.files,
        "tensors": {
            f"order{order}": {
                "n_samples": t.n_samples,
                "kind": t.kind,
                "shape": list(t.shape),
            }
            for order, t in report.moments.items()
        },
    }
    with open(out / "report.json", "w") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)


# ---------------------------------------------------------------------------
# Published figure recipes (scaled to desk budgets via `scale`)


FIGURES = {
    "fig2": {
        "n_published": 5e8,
        "comment": "OU two-point cumulant and spectrum for three correlation times",
    },
    "fig3": {
        "n_published": 4e8,
        "comment": "bispectrum of three asymmetric fluctuators",
    },
    "fig4": {
        "n_published": 9e8,
        "comment": "Gaussian crossover of a fluctuator bath",
    },
    "figS1": {
        "n_published": 5e8,
        "comment": "four-point cumulant slice and trispectrum slice of one fluctuator",
    },
}

CONDITIONAL_SCALE_THRESHOLD = 1e-2  # below this budget fraction, use conditional mode


def _recipe_common(scale: float, seed: int, n_published: float, workers: int) -> dict:
    n = max(int(round(n_published * scale)), 100)
    mode = "conditional" if scale < CONDITIONAL_SCALE_THRESHOLD else "bernoulli"
    return {
        "run": {"n_trajectories": n, "seed": seed, "workers": workers},
        "mode": mode,
    }


def reproduce(figure: str, scale: float = 1e-4, seed: int = 1, out_dir="rimspec-out",
              workers: int = 1) -> dict:
    """Run a published figure's parameter set at a scaled trajectory budget.

    Emits, per run, the tensors/spectra plus overlay CSVs (estimate ± std
    error against the closed-form/transfer-matrix oracle).  Returns a dict
    of RunReports keyed by sub-run label.
    """
    if figure not in FIGURES:
        raise ConfigError(f"unknown figure {figure!r}; choose from {sorted(FIGURES)}")
    if not (0 < scale <= 1):
        raise ConfigError(f"scale must lie in (0, 1], got {scale}")
    common = _recipe_common(scale, seed, FIGURES[figure]["n_published"], workers)
    out = Path(out_dir) / figure
    if figure == "fig2":
        return _reproduce_fig2(common, out)
    if figure == "fig3":
        return _reproduce_fig3(common, out)
    if figure == "fig4":
        return _reproduce_fig4(common, out)
    return _reproduce_figs1(common, out)


def _overlay_tensor(tensor, oracle_fn, path) -> None:
    with open(path, "w", newline="") as fh:
        import csv as _csv

        writer = _csv.writer(fh)
        n_axes = tensor.order - 1
        writer.writerow(
            [f"lag{d + 1}_us" for d in range(n_axes)]
            + ["estimate", "std_err", "oracle"]
        )
        for gi, tup in tensor.points():
            lags = [tensor.axes[d][gi[d]] for d in range(n_axes)]
            writer.writerow(
                [repr(float(v)) for v in lags]
                + [
                    repr(float(tensor.values[gi])),
                    repr(float(tensor.std_errors[gi])),
                    repr(float(oracle_fn(np.asarray(lags, dtype=float)))),
                ]
            )


def _overlay_spectrum(spec, oracle_fn, path) -> None:
    with open(path, "w", newline="") as fh:
        import csv as _csv

        writer = _csv.writer(fh)
        writer.writerow(["omega_radus", "estimate", "std_err", "oracle"])
        for i, w in enumerate(spec.axes[0]):
            writer.writerow(
                [
                    repr(float(w)),
                    repr(float(spec.values[i])),
                    repr(float(spec.std_errors[i])),
                    repr(float(oracle_fn(w))),
                ]
            )


def _reproduce_fig2(common, out) -> dict:
    reports = {}
    for tau_c in (1.0, 0.5, 0.25):
        params = OuParams(gamma=1.0 / tau_c, big_gamma=1.0)
        config = {
            "noise": {"kind": "ou", "gamma": params.gamma, "big_gamma": 1.0},
            "rim": {"tau": 0.05, "delta_t": 0.1, "n_cycles": 256},
            "estimation": {
                "orders": [2, 3],
                "lags": {"2": 100, "3": [[2], list(range(11))]},
                "mode": common["mode"],
                "repair": "quadratic-rim",
                "spectrum_points": 129,
            },
            "run": common["run"],
            "output": {"directory": str(out / f"tauC_{tau_c}")},
        }
        report = run_experiment(config)
        label = f"tauC_{tau_c}"
        _overlay_tensor(
            report.cumulants[2],
            lambda lags, p=params: oracles.ou_cumulant2(p, lags[0]),
            Path(report.files[0]).parent / "overlay_cumulant2.csv",
        )
        _overlay_spectrum(
            report.spectra[2],
            lambda w, p=params: float(oracles.ou_spectrum(p, w)),
            Path(report.files[0]).parent / "overlay_spectrum.csv",
        )
        reports[label] = report
    return reports


FIG3_ASYMMETRY = 0.5  # the caption leaves ξ̄ unstated; bispectra need ξ̄ ≠ 0


def _reproduce_fig3(common, out) -> dict:
    rates_khz = (4.77, 21.35, 95.49)
    flucts = [
        {"lam": 0.119, "w_total": w / 1000.0, "asymmetry": FIG3_ASYMMETRY}
        for w in rates_khz
    ]
    config = {
        "noise": {"kind": "ensemble", "fluctuators": flucts},
        "rim": {"tau": 0.15, "delta_t": 2.0, "n_cycles": 256},
        "estimation": {
            "orders": [2, 3],
            "lags": {"2": 20, "3": [list(range(11)), list(range(11))]},
            "mode": common["mode"],
            "repair": "interpolate",
            "spectrum_points": 65,
        },
        "run": common["run"],
        "output": {"directory": str(out)},
    }
    report = run_experiment(config)
    params = _noise_params(config["noise"])
    _overlay_tensor(
        report.cumulants[3],
        lambda lags: oracles.ensemble_cumulant(params, 3, lags),
        Path(report.files[0]).parent / "overlay_cumulant3.csv",
    )
    return {"fig3": report}


def _reproduce_fig4(common, out) -> dict:
    reports = {}
    lam_base = 0.207
    for xi in (0.7, 0.3, 0.0):
        reports[f"xi_{xi}"] = _fig4_run(common, out / f"xi_{xi}", 10, xi, lam_base)
    for n_t in (1, 4, 16):
        reports[f"nt_{n_t}"] = _fig4_run(common, out / f"nt_{n_t}", n_t, 0.3, lam_base)
    return reports


def _fig4_run(common, out, n_t, xi, lam_base):
    config = {
        "noise": {
            "kind": "ensemble",
            "n_fluctuators": n_t,
            "lam": lam_base / np.sqrt(n_t),
            "w_min": 0.00477,
            "w_max": 0.09549,
            "asymmetry": xi,
        },
        "rim": {"tau": 0.15, "delta_t": 2.0, "n_cycles": 256},
        "estimation": {
            "orders": [2, 3],
            "lags": {"2": 10, "3": [[2], list(range(11))]},
            "mode": common["mode"],
            "repair": "interpolate",
            "spectra": False,
        },
        "run": common["run"],
        "output": {"directory": str(out)},
    }
    report = run_experiment(config)
    params = _noise_params(config["noise"])
    _overlay_tensor(
        report.cumulants[3],
        lambda lags: oracles.ensemble_cumulant(params, 3, lags),
        Path(report.files[0]).parent / "overlay_cumulant3.csv",
    )
    return report


def _reproduce_figs1(common, out) -> dict:
    config = {
        "noise": {"kind": "rtn", "lam": 0.206, "w_total": 0.063, "asymmetry": 0.0},
        "rim": {"tau": 0.25, "delta_t": 1.0, "n_cycles": 256},
        "estimation": {
            "orders": [2, 4],
            "lags": {"2": 16, "4": [[2], list(range(9)), list(range(9))]},
            "mode": common["mode"],
            "repair": "interpolate",
            "spectra": False,
        },
        "run": common["run"],
        "output": {"directory": str(out)},
    }
    report = run_experiment(config)
    params = _noise_params(config["noise"])
    _overlay_tensor(
        report.cumulants[4],
        lambda lags: oracles.ensemble_cumulant(params, 4, lags),
        Path(report.files[0]).parent / "overlay_cumulant4.csv",
    )
    # trispectrum slice S(ω1, ω2, 0) on the natural grid
    tris = polyspectrum(
        report.cumulants[4],
        axes=(
            np.linspace(0.0, np.pi / 1.0, 33),
            np.linspace(0.0, np.pi / 1.0, 33),
            np.array([0.0]),
        ),
    )
    tris.to_csv(Path(report.files[0]).parent / "trispectrum_slice.csv")
    return {"figS1": report}


# ---------------------------------------------------------------------------
# Planner and oracle front-ends


def plan(order: int, delta: float, eps: float, tau: float,
         product_variance: float = 1.0) -> dict:
    """Hoeffding and normal-approximation trajectory budgets as a JSON-able dict."""
    hoeffding = est.hoeffding_sample_size(order, delta, eps, tau)
    normal = est.normal_approx_sample_size(order, delta, eps, tau, product_variance)
    return {
        "order": order,
        "delta": delta,
        "eps": eps,
        "tau": tau,
        "n_trajectories_hoeffding": hoeffding.n_trajectories,
        "n_trajectories_conditional": normal.n_trajectories,
        "product_variance": product_variance,
    }


ORACLE_KINDS = (
    "ou_cumulant2",
    "ou_spectrum",
    "rtn_moment",
    "rtn_cumulant",
    "ensemble_cumulant",
    "ensemble_spectrum",
    "sin_moment",
)


def oracle_query(kind: str, params: dict, points) -> dict:
    """Evaluate a named oracle at a list of points; deterministic JSON payload."""
    if kind not in ORACLE_KINDS:
        raise ConfigError(f"unknown oracle {kind!r}; choose from {ORACLE_KINDS}")
    values = []
    if kind in ("ou_cumulant2", "ou_spectrum"):
        p = OuParams(gamma=params["gamma"], big_gamma=params["big_gamma"])
        fn = oracles.ou_cumulant2 if kind == "ou_cumulant2" else oracles.ou_spectrum
        method = "closed-form"
        for x in points:
            values.append({"point": x, "value": float(fn(p, x)), "method": method})
    elif kind in ("rtn_moment", "rtn_cumulant"):
        p = _tlf_from(params)
        fn = oracles.rtn_moment if kind == "rtn_moment" else oracles.rtn_cumulant
        for times in points:
            values.append(
                {
                    "point": list(times),
                    "value": float(fn(p, np.asarray(times, dtype=float))),
                    "method": "transfer-matrix",
                }
            )
    elif kind in ("ensemble_cumulant", "ensemble_spectrum"):
        p = _noise_params({"kind": "ensemble", **params})
        if kind == "ensemble_spectrum":
            for w in points:
                values.append(
                    {"point": w, "value": float(oracles.ensemble_spectrum(p, w)),
                     "method": "closed-form"}
                )
        else:
            order = int(params["order"])
            for lags in points:
                values.append(
                    {"point": list(lags),
                     "value": float(oracles.ensemble_cumulant(p, order, lags)),
                     "method": "transfer-matrix"}
                )
    else:  # sin_moment
        p = _noise_params(params["noise"])
        tau = float(params["tau"])
        for times in points:
            values.append(
                {"point": list(times),
                 "value": oracles.sin_moment(p, tau, np.asarray(times, dtype=float)),
                 "method": "characteristic-function"}
            )
    return {"kind": kind, "values": values}
