"""Confidence, backaction, and epitome between co-evolved state series.

The three quantities are distances between pairs drawn from the estimator
state, the conditioned system state, and the ideal (unmeasured) state:

* confidence:  estimator vs system
* backaction:  ideal vs system
* epitome:     ideal vs estimator

Two distance choices are supported: ``1 - fidelity`` and the (asymmetric)
relative entropy with the orderings fixed as S(system||estimator),
S(ideal||system), S(ideal||estimator).  Raw values are returned here; the
plotting convention of showing ``1 - C`` for the fidelity variant belongs
to the output layer.

Entropy entries can be +infinity (support violation); series carry them as
``math.inf`` plus an explicit boolean mask.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .qstate import (EIG_FLOOR, SUPPORT_TOL, DensityMatrix, fidelity,
                     relative_entropy)

FIDELITY = "fidelity"
RELATIVE_ENTROPY = "relative_entropy"
_MEASURES = (FIDELITY, RELATIVE_ENTROPY)


def _distance(sigma: DensityMatrix, rho: DensityMatrix, measure: str) -> float:
    if measure == FIDELITY:
        return 1.0 - fidelity(sigma, rho)
    if measure == RELATIVE_ENTROPY:
        return relative_entropy(sigma, rho)
    raise ValueError(f"unknown measure {measure!r}; expected one of {_MEASURES}")


def confidence(rho_E: DensityMatrix, rho_R: DensityMatrix,
               measure: str = RELATIVE_ENTROPY) -> float:
    """Distance from the estimator to the conditioned system state.

    Entropy ordering: S(rho_R || rho_E).
    """
    return _distance(rho_R, rho_E, measure)


def backaction(rho_I: DensityMatrix, rho_R: DensityMatrix,
               measure: str = RELATIVE_ENTROPY) -> float:
    """Distance from the ideal state to the conditioned system state.

    Entropy ordering: S(rho_I || rho_R); the reverse would diverge for a
    pure ideal state.
    """
    return _distance(rho_I, rho_R, measure)


def epitome(rho_I: DensityMatrix, rho_E: DensityMatrix,
            measure: str = RELATIVE_ENTROPY) -> float:
    """Distance from the ideal state to the estimator: overall accuracy.

    Entropy ordering: S(rho_I || rho_E).
    """
    return _distance(rho_I, rho_E, measure)


@dataclass(frozen=True)
class MetricSeries:
    """Per-time metric values (nats for the entropy entries).

    ``*_stderr`` fields are populated for ensemble averages only.  The
    ``inf_mask`` flags entries where any entropy-based metric is infinite.
    """

    times: np.ndarray
    confidence_fid: np.ndarray
    backaction_fid: np.ndarray
    confidence_re: np.ndarray
    backaction_re: np.ndarray
    epitome_re: np.ndarray
    confidence_fid_stderr: np.ndarray | None = None
    backaction_fid_stderr: np.ndarray | None = None
    confidence_re_stderr: np.ndarray | None = None
    backaction_re_stderr: np.ndarray | None = None
    epitome_re_stderr: np.ndarray | None = None

    def __post_init__(self):
        n = len(self.times)
        for name in ("confidence_fid", "backaction_fid", "confidence_re",
                     "backaction_re", "epitome_re"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"series length mismatch in {name}")

    @property
    def inf_mask(self) -> np.ndarray:
        return (np.isinf(self.confidence_re) | np.isinf(self.backaction_re)
                | np.isinf(self.epitome_re))


# -- vectorized Bloch-coordinate implementations ------------------------------
#
# Closed forms for qubits, used on long series; they implement the same
# clamping and support policy as the matrix route in qstate and are held to
# agreement with it by tests.

def fidelity_bloch(r1: np.ndarray, r2: np.ndarray) -> np.ndarray:
    """Uhlmann fidelity between qubit states given as (..., 3) Bloch arrays."""
    r1 = np.asarray(r1, dtype=np.float64)
    r2 = np.asarray(r2, dtype=np.float64)
    n1 = np.minimum((r1 * r1).sum(axis=-1), 1.0)
    n2 = np.minimum((r2 * r2).sum(axis=-1), 1.0)
    dot = (r1 * r2).sum(axis=-1)
    f = 0.5 * (1.0 + dot + np.sqrt((1.0 - n1) * (1.0 - n2)))
    return np.clip(f, 0.0, 1.0)


def relative_entropy_bloch(rs: np.ndarray, rr: np.ndarray) -> np.ndarray:
    """S(sigma||rho) for qubit Bloch arrays rs (sigma) and rr (rho), in nats.

    Entries become ``inf`` where sigma has weight above the support
    tolerance on a clamped eigenvector of rho.
    """
    rs = np.atleast_2d(np.asarray(rs, dtype=np.float64))
    rr = np.atleast_2d(np.asarray(rr, dtype=np.float64))
    len_s = np.minimum(np.sqrt((rs * rs).sum(axis=-1)), 1.0)
    len_r = np.sqrt((rr * rr).sum(axis=-1))
    unit_r = np.where(len_r[:, None] > 0.0, rr / np.maximum(len_r, 1e-300)[:, None],
                      np.array([0.0, 0.0, 1.0]))
    len_r = np.minimum(len_r, 1.0)

    # entropy of sigma with sub-floor eigenvalues contributing zero
    q_hi = 0.5 * (1.0 + len_s)
    q_lo = 0.5 * (1.0 - len_s)
    ent_s = np.zeros_like(q_hi)
    for q in (q_hi, q_lo):
        keep = q > EIG_FLOOR
        ent_s[keep] -= q[keep] * np.log(q[keep])

    # -Tr sigma ln rho with the clamping and support policy
    proj = (unit_r * rs).sum(axis=-1)
    w_hi = 0.5 * (1.0 + proj)
    w_lo = 0.5 * (1.0 - proj)
    p_hi = 0.5 * (1.0 + len_r)
    p_lo = 0.5 * (1.0 - len_r)
    out = np.zeros_like(p_hi)
    inf = np.zeros(p_hi.shape, dtype=bool)
    for p, w in ((p_hi, w_hi), (p_lo, w_lo)):
        clamped = p <= EIG_FLOOR
        inf |= clamped & (w > SUPPORT_TOL)
        logp = np.log(np.where(clamped, EIG_FLOOR, p))
        out -= np.clip(w, 0.0, None) * logp
    result = np.maximum(out - ent_s, 0.0)
    result[inf] = math.inf
    return result


def series_from_bloch(times: np.ndarray, bloch_R: np.ndarray,
                      bloch_E: np.ndarray, bloch_I: np.ndarray) -> MetricSeries:
    """Metric series for one realization from Bloch-coordinate series."""
    return MetricSeries(
        times=times,
        confidence_fid=1.0 - fidelity_bloch(bloch_E, bloch_R),
        backaction_fid=1.0 - fidelity_bloch(bloch_I, bloch_R),
        confidence_re=relative_entropy_bloch(bloch_R, bloch_E),
        backaction_re=relative_entropy_bloch(bloch_I, bloch_R),
        epitome_re=relative_entropy_bloch(bloch_I, bloch_E),
    )


def series_from_states(times: np.ndarray, rho_R, rho_E, rho_I) -> MetricSeries:
    """Reference route through the matrix-based distance operations."""
    n = len(times)
    c_f = np.empty(n)
    b_f = np.empty(n)
    c_re = np.empty(n)
    b_re = np.empty(n)
    e_re = np.empty(n)
    for k in range(n):
        c_f[k] = confidence(rho_E[k], rho_R[k], FIDELITY)
        b_f[k] = backaction(rho_I[k], rho_R[k], FIDELITY)
        c_re[k] = confidence(rho_E[k], rho_R[k], RELATIVE_ENTROPY)
        b_re[k] = backaction(rho_I[k], rho_R[k], RELATIVE_ENTROPY)
        e_re[k] = epitome(rho_I[k], rho_E[k], RELATIVE_ENTROPY)
    return MetricSeries(times=times, confidence_fid=c_f, backaction_fid=b_f,
                        confidence_re=c_re, backaction_re=b_re, epitome_re=e_re)
