"""Shared helpers: fast batched record generation mirroring the engine's seeding."""

from __future__ import annotations

import numpy as np
import pytest

from rimspec.noise import sample_batch, substream
from rimspec.protocol import IDEAL, OutcomeRecord, record_batch


def batch_records(params, cfg, n, seed, model=IDEAL, mode="conditional", dphi=None):
    """Generate n OutcomeRecords with per-trajectory substreams (noise: (0,i), meas: (1,i))."""
    rim = cfg if dphi is None else _with_schedule(cfg, dphi)
    noise_seeds = [substream(seed, 0, i) for i in range(n)]
    beta = sample_batch(params, rim.n_cycles, rim.dt_eff, noise_seeds,
                        rim.tau, rim.subsamples)
    if rim.subsamples == 1:
        phases = beta * rim.tau
    else:
        phases = beta.sum(axis=2) * (rim.tau / rim.subsamples)
    meas_seeds = [substream(seed, 1, i) for i in range(n)]
    values = record_batch(phases, rim, model, mode, meas_seeds)
    return [
        OutcomeRecord(values=values[i], mode=mode, model=model, tau=rim.tau,
                      dt_eff=rim.dt_eff, dphi=rim.dphi, seed=i)
        for i in range(n)
    ]


def _with_schedule(cfg, dphi):
    from dataclasses import replace

    return replace(cfg, dphi=dphi)


def zscore(estimate, exact, std_error):
    return (np.asarray(estimate) - np.asarray(exact)) / np.asarray(std_error)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260809)
