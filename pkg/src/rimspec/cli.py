"""Command-line front end.

Subcommands: simulate, estimate, spectrum, oracle, plan, reproduce.
Exit codes: 0 success, 2 configuration error, 3 runtime failure.
RIMSPEC_SEED and RIMSPEC_WORKERS override the config's seed/worker count.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import engine
from .errors import ConfigError
from .estimation import estimate_correlation, tensor_from_csv
from .protocol import MeasurementModel, OutcomeRecord
from .spectra import polyspectrum


def _add_common(parser):
    parser.add_argument("--seed", type=int, default=None, help="override run seed")
    parser.add_argument("--workers", type=int, default=None, help="override worker count")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--dump", action="store_true", help="also dump per-trajectory CSVs")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rimspec",
        description="Simulate sequential Ramsey measurements and reconstruct "
        "noise correlations, cumulants and polyspectra.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run an experiment from a JSON config")
    p_sim.add_argument("config", help="path to the experiment JSON")
    _add_common(p_sim)

    p_est = sub.add_parser("estimate", help="re-estimate correlations from dumped records")
    p_est.add_argument("--records", required=True, help="records directory (from --dump)")
    p_est.add_argument("-n", "--order", type=int, required=True)
    p_est.add_argument(
        "--lags",
        required=True,
        help="per-axis integer lags, e.g. '0:10' or '0,2,4;0:6' (axes split by ';')",
    )
    p_est.add_argument("--origin-mode", default="averaged", choices=["averaged", "fixed"])
    p_est.add_argument("--out", default="tensor.csv")

    p_spec = sub.add_parser("spectrum", help="transform a tensor CSV to a spectrum CSV")
    p_spec.add_argument("tensor", help="cumulant tensor CSV (fully valid)")
    p_spec.add_argument("-n", "--order", type=int, required=True)
    p_spec.add_argument("--dt", type=float, required=True, help="lag grid unit (µs)")
    p_spec.add_argument("--window", default="none", choices=["none", "hann"])
    p_spec.add_argument("--points", type=int, default=None, help="frequency points per axis")
    p_spec.add_argument("--out", default="spectrum.csv")

    p_orc = sub.add_parser("oracle", help="query an exact reference value")
    p_orc.add_argument("kind", choices=list(engine.ORACLE_KINDS))
    p_orc.add_argument("--params", required=True, help="JSON oracle parameters")
    p_orc.add_argument("--points", required=True, help="JSON list of evaluation points")

    p_plan = sub.add_parser("plan", help="trajectory budget for a target accuracy")
    p_plan.add_argument("-n", "--order", type=int, required=True)
    p_plan.add_argument("--delta", type=float, required=True, help="absolute error target")
    p_plan.add_argument("--eps", type=float, required=True, help="failure probability")
    p_plan.add_argument("--tau", type=float, required=True, help="evolution time (µs)")
    p_plan.add_argument("--variance", type=float, default=1.0,
                        help="per-trajectory product variance for the conditional bound")

    p_rep = sub.add_parser("reproduce", help="rerun a published figure recipe")
    p_rep.add_argument("figure", choices=sorted(engine.FIGURES))
    p_rep.add_argument("--scale", type=float, default=1e-4,
                       help="fraction of the published trajectory budget")
    _add_common(p_rep)

    return parser


def _parse_lags(text: str):
    axes = []
    for part in text.split(";"):
        part = part.strip()
        if ":" in part:
            lo, hi = part.split(":")
            axes.append(list(range(int(lo), int(hi) + 1)))
        else:
            axes.append([int(v) for v in part.split(",") if v != ""])
    return axes


def _load_records(records_dir: str):
    root = Path(records_dir)
    meta_path = root / "meta.json"
    if not meta_path.exists():
        raise ConfigError(f"no meta.json under {records_dir}")
    with open(meta_path) as fh:
        meta = json.load(fh)
    meas = meta.get("measurement", {"kind": "ideal"})
    model = MeasurementModel(
        kind=meas.get("kind", "ideal"),
        g0=meas.get("g0"), g1=meas.get("g1"),
        p0=meas.get("p0"), p1=meas.get("p1"), t2=meas.get("t2"),
    )
    records = []
    for path in sorted(root.glob("outcomes_*.csv")):
        values = np.loadtxt(path, delimiter=",", skiprows=1, usecols=1, ndmin=1)
        records.append(
            OutcomeRecord(
                values=values,
                mode=meta["mode"],
                model=model,
                tau=meta["tau"],
                dt_eff=meta["dt_eff"],
                dphi=np.asarray(meta["dphi"], dtype=float),
            )
        )
    if not records:
        raise ConfigError(f"no outcomes_*.csv files under {records_dir}")
    return records


def _apply_overrides(args) -> tuple:
    seed = args.seed
    workers = args.workers
    if seed is None and os.environ.get("RIMSPEC_SEED"):
        seed = int(os.environ["RIMSPEC_SEED"])
    if workers is None and os.environ.get("RIMSPEC_WORKERS"):
        workers = int(os.environ["RIMSPEC_WORKERS"])
    return seed, workers


def _cmd_simulate(args) -> int:
    cfg = engine.ExperimentConfig.from_json(args.config)
    seed, workers = _apply_overrides(args)
    if seed is not None:
        cfg.seed = seed
    if workers is not None:
        cfg.workers = workers
    if args.out is not None:
        cfg.out_dir = args.out
    if args.dump:
        cfg.dump = True
    report = engine.run_experiment(cfg)
    print(json.dumps({
        "out": cfg.out_dir,
        "n_trajectories": report.n_trajectories,
        "wall_time_s": round(report.wall_time_s, 3),
        "files": report.files,
    }, indent=1))
    return 0


def _cmd_estimate(args) -> int:
    records = _load_records(args.records)
    axes_idx = _parse_lags(args.lags)
    dt = records[0].dt_eff
    lag_axes = tuple(np.asarray(ax, dtype=float) * dt for ax in axes_idx)
    lags = lag_axes[0] if args.order == 2 else lag_axes
    tensor = estimate_correlation(records, args.order, lags, args.origin_mode)
    tensor.to_csv(args.out)
    print(f"wrote {args.out} ({tensor.n_samples} trajectories)")
    return 0


def _cmd_spectrum(args) -> int:
    tensor = tensor_from_csv(args.tensor, order=args.order, dt_eff=args.dt,
                             kind="cumulant")
    axes = None
    if args.points:
        axes = tuple(
            np.linspace(0.0, np.pi / args.dt, args.points)
            for _ in range(args.order - 1)
        )
    spec = polyspectrum(tensor, window=args.window, axes=axes)
    spec.to_csv(args.out)
    print(f"wrote {args.out} (imag ratio {spec.imag_ratio:.2e})")
    return 0


def _cmd_oracle(args) -> int:
    params = json.loads(args.params)
    points = json.loads(args.points)
    print(json.dumps(engine.oracle_query(args.kind, params, points), indent=1))
    return 0


def _cmd_plan(args) -> int:
    print(json.dumps(
        engine.plan(args.order, args.delta, args.eps, args.tau, args.variance),
        indent=1,
    ))
    return 0


def _cmd_reproduce(args) -> int:
    seed, workers = _apply_overrides(args)
    reports = engine.reproduce(
        args.figure,
        scale=args.scale,
        seed=1 if seed is None else seed,
        out_dir=args.out or "rimspec-out",
        workers=workers or 1,
    )
    print(json.dumps({
        label: {"wall_time_s": round(r.wall_time_s, 3), "files": r.files}
        for label, r in reports.items()
    }, indent=1))
    return 0


COMMANDS = {
    "simulate": _cmd_simulate,
    "estimate": _cmd_estimate,
    "spectrum": _cmd_spectrum,
    "oracle": _cmd_oracle,
    "plan": _cmd_plan,
    "reproduce": _cmd_reproduce,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
