"""Goal-programming search over measurement scenarios (time, strength).

A scenario is a point (t, kappa).  For each kappa the nonstochastic
estimator route supplies entropy-based confidence and backaction curves;
the goal program scores every grid point by how much the two exceed their
admissible targets:

    objective = eta1 * max(C - delta_C, 0) + eta2 * max(B - delta_B, 0)

Grid evaluation is the method: points with objective exactly zero form the
best-set of scenarios satisfying both goals.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import TWO_PI, SimConfig, _bloch, _ideal_bloch, run_ensemble_filter
from .metrics import relative_entropy_bloch
from .qstate import DensityMatrix, left_state, maximally_mixed


@dataclass(frozen=True)
class GoalConfig:
    """Weights, admissible targets (nats), and the scenario grids.

    t_grid is in Rabi periods of the bare qubit; kappa_grid in units of the
    Rabi amplitude.
    """

    eta1: float
    eta2: float
    delta_c: float
    delta_b: float
    t_grid: np.ndarray
    kappa_grid: np.ndarray

    def __post_init__(self):
        for name in ("eta1", "eta2", "delta_c", "delta_b"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        for name in ("t_grid", "kappa_grid"):
            g = np.asarray(getattr(self, name), dtype=np.float64)
            if g.size == 0:
                raise ValueError(f"{name} must be nonempty")
            if g.size > 1 and not np.all(np.diff(g) > 0.0):
                raise ValueError(f"{name} must be strictly increasing")
            object.__setattr__(self, name, g)
        if np.any(self.kappa_grid < 0.0):
            raise ValueError("kappa_grid entries must be nonnegative")


def default_goal_config(eta1: float = 1.0, eta2: float = 1.0,
                        delta_c: float = 0.1, delta_b: float = 0.1,
                        t_points: int = 100, kappa_points: int = 100,
                        t_max_periods: float = 15.0,
                        kappa_min: float = 0.0005,
                        kappa_max: float = 0.02) -> GoalConfig:
    return GoalConfig(
        eta1=eta1, eta2=eta2, delta_c=delta_c, delta_b=delta_b,
        t_grid=np.linspace(0.0, t_max_periods, t_points),
        kappa_grid=np.linspace(kappa_min, kappa_max, kappa_points),
    )


def deviations(value: float, target: float) -> tuple[float, float]:
    """Split value - target into nonnegative over/under deviations.

    At most one of the pair is nonzero.
    """
    if target < 0.0:
        raise ValueError("target must be nonnegative")
    return max(value - target, 0.0), max(target - value, 0.0)


def objective(c: float, b: float, gcfg: GoalConfig) -> float:
    """Weighted sum of the over-target deviations of confidence and backaction."""
    d1p, _ = deviations(c, gcfg.delta_c)
    d2p, _ = deviations(b, gcfg.delta_b)
    return gcfg.eta1 * d1p + gcfg.eta2 * d2p


@dataclass(frozen=True)
class SurfaceGrid:
    """Entropy-metric surfaces over the (t, kappa) grid, kappa-major.

    crossing_index[j] is the first t-grid index at which confidence drops
    to or below backaction in column j (-1 when no crossing occurs in the
    window; ties resolve toward smaller t).
    """

    t_grid: np.ndarray       # Rabi periods
    kappa_grid: np.ndarray
    confidence: np.ndarray   # shape (n_kappa, n_t)
    backaction: np.ndarray
    epitome: np.ndarray
    crossing_index: np.ndarray

    def crossing_times(self) -> np.ndarray:
        """Crossing time per column in Rabi periods (nan where absent)."""
        out = np.full(len(self.kappa_grid), np.nan)
        ok = self.crossing_index >= 0
        out[ok] = self.t_grid[self.crossing_index[ok]]
        return out


def surfaces(gcfg_t_grid: np.ndarray, kappa_grid: np.ndarray,
             cfg_template: SimConfig,
             rho0_R: DensityMatrix | None = None,
             rho0_E: DensityMatrix | None = None) -> SurfaceGrid:
    """Evaluate C, B, E over the grid via the nonstochastic estimator route.

    One deterministic co-integration per kappa column; states are linearly
    interpolated onto the requested times.  The template must span the
    largest requested time.
    """
    rho0_R = left_state() if rho0_R is None else rho0_R
    rho0_E = maximally_mixed(2) if rho0_E is None else rho0_E
    t_grid = np.asarray(gcfg_t_grid, dtype=np.float64)
    kappa_grid = np.asarray(kappa_grid, dtype=np.float64)
    period = TWO_PI / cfg_template.omega
    t_abs = t_grid * period
    if t_abs[-1] > cfg_template.horizon * (1 + 1e-9):
        raise ValueError("t_grid extends beyond the configured horizon")

    n_t, n_k = len(t_grid), len(kappa_grid)
    conf = np.empty((n_k, n_t))
    back = np.empty((n_k, n_t))
    epit = np.empty((n_k, n_t))
    cross = np.full(n_k, -1, dtype=np.int64)
    bloch_i = _ideal_bloch(cfg_template, _bloch(rho0_R), t_abs)

    for j, kappa in enumerate(kappa_grid):
        cfg = cfg_template.with_kappa(float(kappa))
        times, bloch_r, bloch_e = run_ensemble_filter(cfg, rho0_R, rho0_E)
        br = np.stack([np.interp(t_abs, times, bloch_r[:, i]) for i in range(3)], axis=1)
        be = np.stack([np.interp(t_abs, times, bloch_e[:, i]) for i in range(3)], axis=1)
        conf[j] = relative_entropy_bloch(br, be)
        back[j] = relative_entropy_bloch(bloch_i, br)
        epit[j] = relative_entropy_bloch(bloch_i, be)
        flips = np.nonzero(conf[j] <= back[j])[0]
        flips = flips[flips > 0]  # both start from their t=0 anchors
        if flips.size:
            cross[j] = int(flips[0])
    return SurfaceGrid(t_grid=t_grid, kappa_grid=kappa_grid, confidence=conf,
                       backaction=back, epitome=epit, crossing_index=cross)


@dataclass(frozen=True)
class GoalResult:
    """Objective and deviation grids plus the zero-objective best-set."""

    config: GoalConfig
    surfaces: SurfaceGrid
    objective: np.ndarray  # (n_kappa, n_t)
    d1_plus: np.ndarray
    d1_minus: np.ndarray
    d2_plus: np.ndarray
    d2_minus: np.ndarray

    @property
    def best_mask(self) -> np.ndarray:
        return self.objective == 0.0

    def best_cells(self) -> list[tuple[float, float]]:
        """(t_periods, kappa) pairs with objective zero, t-major order."""
        ks, ts = np.nonzero(self.best_mask)
        order = np.lexsort((self.config.kappa_grid[ks], self.config.t_grid[ts]))
        return [(float(self.config.t_grid[ts[i]]), float(self.config.kappa_grid[ks[i]]))
                for i in order]

    def best_bounding_box(self) -> dict | None:
        cells = self.best_cells()
        if not cells:
            return None
        t_vals = [c[0] for c in cells]
        k_vals = [c[1] for c in cells]
        return {"n_best": len(cells), "t_min": min(t_vals), "t_max": max(t_vals),
                "kappa_min": min(k_vals), "kappa_max": max(k_vals)}


def sweep(gcfg: GoalConfig, cfg_template: SimConfig) -> GoalResult:
    """Score every scenario on the grid; objective zero marks the best-set."""
    surf = surfaces(gcfg.t_grid, gcfg.kappa_grid, cfg_template)
    d1p = np.maximum(surf.confidence - gcfg.delta_c, 0.0)
    d1m = np.maximum(gcfg.delta_c - surf.confidence, 0.0)
    d2p = np.maximum(surf.backaction - gcfg.delta_b, 0.0)
    d2m = np.maximum(gcfg.delta_b - surf.backaction, 0.0)
    obj = gcfg.eta1 * d1p + gcfg.eta2 * d2p
    return GoalResult(config=gcfg, surfaces=surf, objective=obj,
                      d1_plus=d1p, d1_minus=d1m, d2_plus=d2p, d2_minus=d2m)
