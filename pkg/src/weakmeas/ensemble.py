"""Ensembles of stochastic realizations with deterministic seeding.

Trajectories are independent and keyed by (master seed, trajectory index),
so results do not depend on scheduling.  Work is dispatched in fixed-size
chunks and partial sums are combined in chunk order, which keeps the
floating-point reduction identical for any worker count.

Two averaging conventions are computed side by side: the mean of the
per-realization metric values (``metrics_mean``, with standard errors) and
the metrics of the averaged states (``metrics_of_mean``).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import metrics as _metrics
from .dynamics import SimConfig, TrajectoryRecord, _bloch, _ideal_bloch, \
    _trajectory_bloch, bloch_to_state
from .metrics import MetricSeries
from .qstate import DensityMatrix

CHUNK_SIZE = 32  # fixed so the reduction order is worker-independent

_METRIC_NAMES = ("confidence_fid", "backaction_fid", "confidence_re",
                 "backaction_re", "epitome_re")


@dataclass(frozen=True)
class EnsembleResult:
    """Averages over n stochastic realizations of one scenario."""

    n_realizations: int
    times: np.ndarray
    bloch_mean_R: np.ndarray
    bloch_mean_E: np.ndarray
    bloch_ideal: np.ndarray
    p_l_real: np.ndarray
    p_l_real_stderr: np.ndarray
    p_l_est: np.ndarray
    p_l_est_stderr: np.ndarray
    metrics_mean: MetricSeries
    metrics_of_mean: MetricSeries
    first_records: tuple[TrajectoryRecord, ...]

    @cached_property
    def mean_rho_R(self) -> tuple[DensityMatrix, ...]:
        return tuple(bloch_to_state(v) for v in self.bloch_mean_R)

    @cached_property
    def mean_rho_E(self) -> tuple[DensityMatrix, ...]:
        return tuple(bloch_to_state(v) for v in self.bloch_mean_E)


def _finite_accumulate(acc_sum, acc_sq, acc_inf, values):
    finite = np.isfinite(values)
    v = np.where(finite, values, 0.0)
    acc_sum += v
    acc_sq += v * v
    acc_inf += ~finite


def _chunk_worker(cfg: SimConfig, r0: np.ndarray, e0: np.ndarray,
                  bloch_i: np.ndarray, start: int, stop: int) -> dict:
    n_out = cfg.n_out
    out = {
        "sum_bR": np.zeros((n_out, 3)),
        "sum_bE": np.zeros((n_out, 3)),
        "sum_plR": np.zeros(n_out), "sq_plR": np.zeros(n_out),
        "sum_plE": np.zeros(n_out), "sq_plE": np.zeros(n_out),
        "first": None,
    }
    for name in _METRIC_NAMES:
        out[f"sum_{name}"] = np.zeros(n_out)
        out[f"sq_{name}"] = np.zeros(n_out)
        out[f"inf_{name}"] = np.zeros(n_out, dtype=np.int64)
    for idx in range(start, stop):
        bloch_r, dy, bloch_e = _trajectory_bloch(cfg, r0, e0, stream=idx)
        if idx == 0:
            out["first"] = TrajectoryRecord(times=cfg.times(), bloch_R=bloch_r,
                                            dy=dy, bloch_E=bloch_e,
                                            bloch_I=bloch_i)
        out["sum_bR"] += bloch_r
        out["sum_bE"] += bloch_e
        pl_r = 0.5 * (1.0 + bloch_r[:, 2])
        pl_e = 0.5 * (1.0 + bloch_e[:, 2])
        out["sum_plR"] += pl_r
        out["sq_plR"] += pl_r * pl_r
        out["sum_plE"] += pl_e
        out["sq_plE"] += pl_e * pl_e
        series = _metrics.series_from_bloch(cfg.times(), bloch_r, bloch_e, bloch_i)
        for name in _METRIC_NAMES:
            _finite_accumulate(out[f"sum_{name}"], out[f"sq_{name}"],
                               out[f"inf_{name}"], getattr(series, name))
    return out


def _mean_stderr(total, total_sq, n):
    mean = total / n
    if n > 1:
        var = np.clip((total_sq - n * mean * mean) / (n - 1), 0.0, None)
        stderr = np.sqrt(var / n)
    else:
        stderr = np.zeros_like(mean)
    return mean, stderr


def _masked_mean_stderr(total, total_sq, inf_count, n):
    mean, stderr = _mean_stderr(total, total_sq, n)
    bad = inf_count > 0
    mean = np.where(bad, np.inf, mean)
    stderr = np.where(bad, np.inf, stderr)
    return mean, stderr


def run_ensemble(cfg: SimConfig, n: int, rho0_R: DensityMatrix,
                 rho0_E: DensityMatrix, workers: int = 1) -> EnsembleResult:
    """Average n realizations; deterministic for fixed (cfg.seed, n).

    Trajectory index i uses the Wiener stream (cfg.seed, i), so an n=1
    ensemble reproduces ``run_trajectory`` exactly and results never depend
    on the worker count.
    """
    if n < 1:
        raise ValueError("ensemble size must be at least 1")
    r0 = _bloch(rho0_R)
    e0 = _bloch(rho0_E)
    times = cfg.times()
    bloch_i = _ideal_bloch(cfg, r0, times)

    spans = [(s, min(s + CHUNK_SIZE, n)) for s in range(0, n, CHUNK_SIZE)]
    if workers > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(
                lambda span: _chunk_worker(cfg, r0, e0, bloch_i, *span), spans))
    else:
        parts = [_chunk_worker(cfg, r0, e0, bloch_i, *span) for span in spans]

    total = parts[0]
    for part in parts[1:]:
        for key, val in part.items():
            if key == "first":
                continue
            total[key] = total[key] + val

    mean_bR = total["sum_bR"] / n
    mean_bE = total["sum_bE"] / n
    pl_r, pl_r_err = _mean_stderr(total["sum_plR"], total["sq_plR"], n)
    pl_e, pl_e_err = _mean_stderr(total["sum_plE"], total["sq_plE"], n)

    mm = {}
    for name in _METRIC_NAMES:
        mm[name], mm[name + "_stderr"] = _masked_mean_stderr(
            total[f"sum_{name}"], total[f"sq_{name}"], total[f"inf_{name}"], n)
    metrics_mean = MetricSeries(times=times, **mm)
    metrics_of_mean = _metrics.series_from_bloch(times, mean_bR, mean_bE, bloch_i)

    return EnsembleResult(
        n_realizations=n,
        times=times,
        bloch_mean_R=mean_bR,
        bloch_mean_E=mean_bE,
        bloch_ideal=bloch_i,
        p_l_real=pl_r, p_l_real_stderr=pl_r_err,
        p_l_est=pl_e, p_l_est_stderr=pl_e_err,
        metrics_mean=metrics_mean,
        metrics_of_mean=metrics_of_mean,
        first_records=(parts[0]["first"],) if parts[0]["first"] is not None else (),
    )


def averaged_metrics(result: EnsembleResult) -> MetricSeries:
    """Per-realization metrics averaged across the ensemble (with stderr)."""
    return result.metrics_mean
