"""Monte Carlo sweep over wire currents and comparison with measured flip fractions."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import model
from .collapse import FlipStatistics, branch_many, statistics_from_up_count
from .config import RunConfig
from .majorana_ode import IntegrationError, integrate_many, raise_for_status
from .sampling import sample_block

log = logging.getLogger(__name__)

CHUNK = 250


class SweepError(RuntimeError):
    def __init__(self, current, sample_index, cause):
        super().__init__(f"integration failed at I={current} A, sample {sample_index}: {cause}")
        self.current = current
        self.sample_index = sample_index
        self.cause = cause


class DatasetMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class SweepPoint:
    current: float
    stats: FlipStatistics
    k0: float
    skipped: tuple = ()
    # (start, n_up, n_ok) per chunk of samples, in sample order
    chunk_tallies: tuple = ()


@dataclass(frozen=True)
class SweepResult:
    points: tuple
    config: RunConfig
    r_squared: float | None = None

    @property
    def currents(self):
        return np.array([p.current for p in self.points])

    @property
    def fractions(self):
        return np.array([p.stats.fraction for p in self.points])

    @property
    def std_errs(self):
        return np.array([p.stats.std_err for p in self.points])


@dataclass(frozen=True)
class ExperimentDataset:
    currents: tuple
    fractions: tuple
    comments: tuple = field(default=())

    def __post_init__(self):
        c = np.asarray(self.currents, dtype=float)
        y = np.asarray(self.fractions, dtype=float)
        if c.shape != y.shape or c.ndim != 1 or c.size == 0:
            raise ValueError("dataset needs matching, non-empty current and fraction columns")
        if np.any(c <= 0) or np.any(np.diff(c) <= 0):
            raise ValueError("dataset currents must be positive and strictly increasing")
        if np.any((y < 0) | (y > 1)):
            raise ValueError("dataset fractions must lie in [0, 1]")


@dataclass
class _Chunk:
    current_index: int
    start: int
    count: int


def _current_constants(config, current):
    G = model.gradient_from_current(current, config.B_r, config.constants)
    return (
        model.adiabaticity_k0(G, config.velocity, config.z_a, config.constants),
        model.larmor_wn(G, config.velocity, config.constants),
        G,
    )


def run_chunk(config, current_index, start, count):
    """(n_up, n_ok, skipped) for samples start..start+count-1 at one current."""
    return _run_chunk(config, _Chunk(current_index, start, count), None)


def _run_chunk(config, chunk, derived_by_current):
    ci = chunk.current_index
    current = config.currents[ci]
    if derived_by_current is None:
        k0, w_n, G = _current_constants(config, current)
    else:
        k0, w_n, G = derived_by_current[ci]
    theta, phi = sample_block(config.seed, ci, chunk.start, chunk.count, config.distribution)
    k1 = config.constants.gamma_e_mag * (model.nuclear_field(config.constants) * np.sin(theta)) ** 2 / (G * config.velocity)
    mags, status, reached = integrate_many(k0, k1, w_n, phi, config.ode_params(k0, 0.0, w_n, 0.0))
    bad = np.flatnonzero(status != 0)
    if bad.size and config.on_error == "abort":
        i = int(bad[0])
        try:
            raise_for_status(status[i], reached[i])
        except IntegrationError as exc:
            raise SweepError(current, chunk.start + i, exc) from exc
    ok = status == 0
    theta_ef = 2.0 * np.arcsin(np.minimum(mags[ok], 1.0))
    n_up = int(np.count_nonzero(branch_many(theta_ef, theta[ok])))
    skipped = tuple(int(chunk.start + i) for i in bad)
    return n_up, int(np.count_nonzero(ok)), skipped


def run_sweep(config: RunConfig, threads=1, dataset=None, progress=None) -> SweepResult:
    """Flip fraction at every configured current.

    Samples are processed in fixed chunks whose results are reduced by index,
    so the outcome depends only on the config, not on ``threads``.
    """
    derived_by_current = [_current_constants(config, c) for c in config.currents]
    chunks = [
        _Chunk(ci, start, min(CHUNK, config.n_samples - start))
        for ci in range(len(config.currents))
        for start in range(0, config.n_samples, CHUNK)
    ]
    results = [None] * len(chunks)
    done = 0

    def record(i, res):
        nonlocal done
        results[i] = res
        done += 1
        if progress is not None:
            progress(done, len(chunks))

    if threads <= 1:
        for i, ch in enumerate(chunks):
            record(i, _run_chunk(config, ch, derived_by_current))
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(_run_chunk, config, ch, derived_by_current) for ch in chunks]
            for i, fut in enumerate(futures):
                record(i, fut.result())

    points = []
    for ci, current in enumerate(config.currents):
        mine = [r for ch, r in zip(chunks, results) if ch.current_index == ci]
        starts = [ch.start for ch in chunks if ch.current_index == ci]
        n_up = sum(r[0] for r in mine)
        n_ok = sum(r[1] for r in mine)
        skipped = tuple(s for r in mine for s in r[2])
        if skipped:
            log.warning("I=%g A: skipped %d failed integrations", current, len(skipped))
        if n_ok == 0:
            raise SweepError(current, skipped[0], "every integration failed")
        points.append(SweepPoint(
            current=current,
            stats=statistics_from_up_count(n_up, n_ok, config.flip_convention),
            k0=derived_by_current[ci][0],
            skipped=skipped,
            chunk_tallies=tuple((s, r[0], r[1]) for s, r in zip(starts, mine)),
        ))
    result = SweepResult(points=tuple(points), config=config)
    if dataset is not None:
        result = SweepResult(points=result.points, config=config, r_squared=r_squared(result, dataset))
    return result


def coefficient_of_determination(observed, predicted):
    """1 - SS_res / SS_tot with SS_tot about the mean of ``observed``; may be negative."""
    y = np.asarray(observed, dtype=float)
    yhat = np.asarray(predicted, dtype=float)
    ss_res = float(np.sum((y - yhat) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        raise ValueError("observed values are constant; R^2 is undefined")
    return 1.0 - ss_res / ss_tot


def r_squared(result: SweepResult, data: ExperimentDataset):
    model_currents = result.currents
    data_currents = np.asarray(data.currents, dtype=float)
    if model_currents.shape != data_currents.shape or not np.allclose(model_currents, data_currents, rtol=1e-12, atol=0):
        raise DatasetMismatchError(
            f"model currents {model_currents.tolist()} do not match dataset currents {data_currents.tolist()}"
        )
    return coefficient_of_determination(data.fractions, result.fractions)


def binomial_consistent(a: FlipStatistics, b: FlipStatistics, n_sigma=3.0):
    """True when two flip fractions agree within n_sigma combined standard errors."""
    combined = math.hypot(a.std_err, b.std_err)
    return abs(a.fraction - b.fraction) <= n_sigma * combined
