"""Time evolution of the monitored qubit and its estimator.

Four evolutions are provided:

* ``run_ideal``      - closed-form unitary evolution (no measurement),
* ``run_lindblad``   - deterministic ensemble-mean evolution,
* ``run_trajectory`` - one stochastic record: the conditioned system state,
  the record increments, and the estimator driven by that record,
* ``run_ensemble_filter`` - the nonstochastic estimator forced by
  ensemble-mean expectation values instead of a single record.

Scheme.  Each step splits into an exact Rabi rotation and a normalized
Gaussian-measurement (Kraus) update ``exp[sqrt(2 kappa) sigma_z u]`` with
``u`` the record increment; its Ito expansion is the selective master
equation with dissipator ``2 kappa D[sigma_z]`` and noise
``sqrt(2 kappa) H[sigma_z]``.  The split form conserves trace exactly and
keeps pure states pure (unit-efficiency monitoring), which a plain
Euler-Maruyama step does not.

The estimator consumes the record through the innovation
``dy - sqrt(8 kappa) <sigma_z>_E dt``; combined with its own predicted
drift this collapses to conditioning on ``dy`` itself, so system and
estimator apply the same update map and coincide exactly once they meet.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

from . import _kernels
from .qstate import SIGMA_Z, DensityMatrix, BlochVector, StateValidityError

TWO_PI = 2.0 * math.pi
OMEGA_DT_LIMIT = 0.01  # stability guard on the step size
LINDBLAD_SUBSTEPS = 10


class PositivityViolationError(StateValidityError):
    """The nonstochastic estimator left the state space (known caveat)."""


@dataclass(frozen=True)
class SimConfig:
    """Complete description of one measurement scenario.

    dt and n_steps define the integration grid; record_stride decimates the
    stored output.  kappa is the measurement strength in units of omega.
    """

    dt: float
    n_steps: int
    omega: float = 1.0
    epsilon: float = 0.0
    kappa: float = 0.005
    record_stride: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if self.kappa < 0.0:
            raise ValueError("kappa must be nonnegative")
        if self.n_steps < 1:
            raise ValueError("n_steps must be at least 1")
        if self.record_stride < 1:
            raise ValueError("record_stride must be at least 1")
        if self.omega * self.dt > OMEGA_DT_LIMIT * (1 + 1e-12):
            raise ValueError(
                f"omega*dt = {self.omega * self.dt} exceeds the stability guard "
                f"{OMEGA_DT_LIMIT}")

    @classmethod
    def from_periods(cls, periods: float, steps_per_period: int = 10000, *,
                     omega: float = 1.0, epsilon: float = 0.0,
                     kappa: float = 0.005, seed: int = 0,
                     points: int = 1000) -> "SimConfig":
        """Configure a run of ``periods`` Rabi periods of the bare qubit."""
        if omega <= 0.0:
            raise ValueError("from_periods requires omega > 0")
        dt = TWO_PI / omega / steps_per_period
        n_steps = int(round(periods * steps_per_period))
        stride = max(1, n_steps // points)
        return cls(dt=dt, n_steps=n_steps, omega=omega, epsilon=epsilon,
                   kappa=kappa, record_stride=stride, seed=seed)

    @property
    def horizon(self) -> float:
        return self.n_steps * self.dt

    @property
    def n_out(self) -> int:
        return self.n_steps // self.record_stride + 1

    def times(self) -> np.ndarray:
        return np.arange(self.n_out) * (self.record_stride * self.dt)

    def with_kappa(self, kappa: float) -> "SimConfig":
        return replace(self, kappa=kappa)


@dataclass(frozen=True)
class WienerStream:
    """Counter-based Wiener increments, keyed by (seed, stream index).

    Identical (seed, stream) always reproduces identical increments,
    independent of execution order or thread count.
    """

    seed: int
    stream: int = 0

    def _generator(self) -> np.random.Generator:
        key = (self.seed & 0xFFFFFFFFFFFFFFFF, self.stream & 0xFFFFFFFFFFFFFFFF)
        return np.random.Generator(np.random.Philox(key=key))

    def increments(self, n_steps: int, dt: float) -> np.ndarray:
        """n_steps increments with mean 0 and variance dt."""
        return self._generator().standard_normal(n_steps) * math.sqrt(dt)


def hamiltonian(cfg: SimConfig) -> np.ndarray:
    """H = omega sigma_x / 2 + epsilon sigma_z."""
    return np.array(
        [[cfg.epsilon, cfg.omega / 2.0], [cfg.omega / 2.0, -cfg.epsilon]],
        dtype=np.complex128)


def dissipator(a: np.ndarray, rho: DensityMatrix | np.ndarray) -> np.ndarray:
    """D[a] rho = a rho a^dag - (a^dag a rho + rho a^dag a) / 2."""
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    ad = a.conj().T
    ada = ad @ a
    return a @ m @ ad - 0.5 * (ada @ m + m @ ada)


def meas_superop(a: np.ndarray, rho: DensityMatrix | np.ndarray) -> np.ndarray:
    """H[a] rho = a rho + rho a^dag - Tr(a rho + rho a^dag) rho."""
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    s = a @ m + m @ a.conj().T
    return s - s.trace() * m


def _rotation_axis_angle(cfg: SimConfig, dt: float) -> tuple[np.ndarray, float]:
    wx, wz = cfg.omega, 2.0 * cfg.epsilon
    wn = math.hypot(wx, wz)
    if wn == 0.0:
        return np.array([1.0, 0.0, 0.0]), 0.0
    return np.array([wx / wn, 0.0, wz / wn]), wn * dt


def rotation_matrix(cfg: SimConfig, dt: float) -> np.ndarray:
    """Bloch rotation over dt generated by the qubit Hamiltonian."""
    axis, angle = _rotation_axis_angle(cfg, dt)
    k = np.array([
        [0.0, -axis[2], axis[1]],
        [axis[2], 0.0, -axis[0]],
        [-axis[1], axis[0], 0.0],
    ])
    return np.eye(3) + math.sin(angle) * k + (1.0 - math.cos(angle)) * (k @ k)


def _unitary(cfg: SimConfig, dt: float) -> np.ndarray:
    h = hamiltonian(cfg)
    lam = math.hypot(cfg.omega / 2.0, cfg.epsilon)
    if lam == 0.0:
        return np.eye(2, dtype=np.complex128)
    return math.cos(lam * dt) * np.eye(2) - 1j * math.sin(lam * dt) * (h / lam)


def _measurement_map(rho: np.ndarray, kappa: float, u: float) -> np.ndarray:
    """Normalized conditioning map exp[sqrt(2 kappa) sigma_z u] applied to rho."""
    if kappa == 0.0:
        return rho
    g = math.exp(math.sqrt(2.0 * kappa) * u)
    m = np.array([[g, 0.0], [0.0, 1.0 / g]], dtype=np.complex128)
    out = m @ rho @ m
    return out / out.trace().real


def record_increment(rho_R: DensityMatrix, cfg: SimConfig, dW: float) -> float:
    """dy = sqrt(8 kappa) <sigma_z> dt + dW for the current system state."""
    z = rho_R.expectation(SIGMA_Z)
    return math.sqrt(8.0 * cfg.kappa) * z * cfg.dt + dW


def step_sme(rho: DensityMatrix, cfg: SimConfig, dW: float) -> DensityMatrix:
    """One conditioned step of the selective master equation.

    The record increment generated by this state and dW conditions the
    state; the Rabi rotation is applied exactly.  Hermitization and trace
    renormalization follow as numerical hygiene.
    """
    dy = record_increment(rho, cfg, dW)
    m = _measurement_map(rho.matrix, cfg.kappa, dy)
    u = _unitary(cfg, cfg.dt)
    return DensityMatrix.from_array(u @ m @ u.conj().T)


def step_filter(rho_E: DensityMatrix, cfg: SimConfig, dy: float) -> DensityMatrix:
    """One estimator step driven by the measured record increment dy.

    Written with the innovation ``dy - sqrt(8 kappa) <sigma_z>_E dt``, the
    estimator's own predicted drift cancels and the update conditions on dy
    directly, with the same map as the system step.
    """
    m = _measurement_map(rho_E.matrix, cfg.kappa, dy)
    u = _unitary(cfg, cfg.dt)
    return DensityMatrix.from_array(u @ m @ u.conj().T)


def step_ensemble_filter(rho_E: DensityMatrix, sz_R_mean: float,
                         cfg: SimConfig) -> DensityMatrix:
    """One step of the nonstochastic estimator forced by ensemble means.

    Dephasing is applied exactly, the forcing term
    ``sqrt(2 kappa) H[sigma_z] rho * sqrt(8 kappa) (<sz>_mean - <sz>_E)``
    explicitly, then the exact rotation.  Positivity is not guaranteed;
    a negative eigenvalue beyond tolerance raises
    :class:`PositivityViolationError`.
    """
    m = rho_E.matrix.copy()
    decay = math.exp(-4.0 * cfg.kappa * cfg.dt)
    forced = m * np.array([[1.0, decay], [decay, 1.0]])
    f = 4.0 * cfg.kappa * (sz_R_mean - rho_E.expectation(SIGMA_Z))
    forced = forced + cfg.dt * f * meas_superop(SIGMA_Z, m)
    u = _unitary(cfg, cfg.dt)
    out = u @ forced @ u.conj().T
    try:
        return DensityMatrix.from_array(out)
    except StateValidityError as exc:
        raise PositivityViolationError(
            f"nonstochastic estimator left the state space: {exc}") from exc


def _bloch(rho: DensityMatrix) -> np.ndarray:
    b = BlochVector.from_density_matrix(rho)
    return np.array([b.x, b.y, b.z])


def bloch_to_state(vec: np.ndarray) -> DensityMatrix:
    """Build a validated state from Bloch components, clipping rounding spill."""
    x, y, z = (float(v) for v in vec)
    r2 = x * x + y * y + z * z
    if r2 > 1.0:
        # integrator rounding can overshoot the ball by ~1e-15
        s = 1.0 / math.sqrt(r2)
        x, y, z = x * s, y * s, z * s
    return BlochVector(x, y, z).to_density_matrix()


def _ideal_bloch(cfg: SimConfig, r0: np.ndarray, times: np.ndarray) -> np.ndarray:
    """Closed-form rotation of r0 to each requested time."""
    axis, _ = _rotation_axis_angle(cfg, 1.0)
    wn = math.hypot(cfg.omega, 2.0 * cfg.epsilon)
    k = np.array([
        [0.0, -axis[2], axis[1]],
        [axis[2], 0.0, -axis[0]],
        [-axis[1], axis[0], 0.0],
    ])
    k2 = k @ k
    out = np.empty((len(times), 3))
    for i, t in enumerate(times):
        ang = wn * t
        rot = np.eye(3) + math.sin(ang) * k + (1.0 - math.cos(ang)) * k2
        out[i] = rot @ r0
    return out


@dataclass(frozen=True)
class TrajectoryRecord:
    """Time-indexed output of one stochastic realization.

    Bloch components are the primary storage; the density-matrix views are
    built (and validated) on first access.  ``dy[k]`` is the record
    increment consumed by the step that produced output k (``dy[0] = 0``).
    """

    times: np.ndarray
    bloch_R: np.ndarray
    dy: np.ndarray
    bloch_E: np.ndarray | None = None
    bloch_I: np.ndarray | None = None

    @cached_property
    def rho_R(self) -> tuple[DensityMatrix, ...]:
        return tuple(bloch_to_state(v) for v in self.bloch_R)

    @cached_property
    def rho_E(self) -> tuple[DensityMatrix, ...] | None:
        if self.bloch_E is None:
            return None
        return tuple(bloch_to_state(v) for v in self.bloch_E)

    @cached_property
    def rho_I(self) -> tuple[DensityMatrix, ...] | None:
        if self.bloch_I is None:
            return None
        return tuple(bloch_to_state(v) for v in self.bloch_I)


def run_ideal(cfg: SimConfig, rho0: DensityMatrix) -> tuple[np.ndarray, list[DensityMatrix]]:
    """Unitary evolution of rho0 at the output times; purity is conserved."""
    times = cfg.times()
    series = _ideal_bloch(cfg, _bloch(rho0), times)
    return times, [bloch_to_state(v) for v in series]


def _lindblad_bloch(cfg: SimConfig, r0: np.ndarray,
                    substeps: int = LINDBLAD_SUBSTEPS) -> np.ndarray:
    h = cfg.dt / substeps
    rot = rotation_matrix(cfg, h)
    decay = math.exp(-4.0 * cfg.kappa * h)
    out = np.empty((cfg.n_out, 3))
    _kernels.lindblad_kernel(np.asarray(r0, dtype=np.float64), cfg.n_steps,
                             substeps, decay, rot, cfg.record_stride, out)
    return out


def run_lindblad(cfg: SimConfig, rho0: DensityMatrix) -> tuple[np.ndarray, list[DensityMatrix]]:
    """Deterministic ensemble-mean evolution (dephasing rate 4 kappa)."""
    series = _lindblad_bloch(cfg, _bloch(rho0))
    return cfg.times(), [bloch_to_state(v) for v in series]


def _trajectory_bloch(cfg: SimConfig, r0_R: np.ndarray, r0_E: np.ndarray | None,
                      stream: int) -> tuple[np.ndarray, np.ndarray, np.ndarray | None]:
    """Raw kernel run for one realization; returns (bloch_R, dy, bloch_E)."""
    dw = WienerStream(cfg.seed, stream).increments(cfg.n_steps, cfg.dt)
    rot = rotation_matrix(cfg, cfg.dt)
    n_out = cfg.n_out
    out_r = np.empty((n_out, 3))
    out_e = np.empty((n_out, 3))
    out_dy = np.empty(n_out)
    e0 = np.zeros(3) if r0_E is None else np.asarray(r0_E, dtype=np.float64)
    _kernels.trajectory_kernel(np.asarray(r0_R, dtype=np.float64), e0, dw,
                               cfg.dt, cfg.kappa, rot, cfg.record_stride,
                               out_r, out_e, out_dy, r0_E is not None)
    return out_r, out_dy, (out_e if r0_E is not None else None)


def run_trajectory(cfg: SimConfig, rho0_R: DensityMatrix,
                   rho0_E: DensityMatrix | None = None,
                   stream: int = 0) -> TrajectoryRecord:
    """Generate one measurement record and co-evolve system and estimator.

    The system generates the record; the estimator consumes the same
    record step-locked.  The ideal series is evaluated in closed form at
    the output times.  Fully deterministic given (cfg.seed, stream).
    """
    r0 = _bloch(rho0_R)
    e0 = None if rho0_E is None else _bloch(rho0_E)
    bloch_r, dy, bloch_e = _trajectory_bloch(cfg, r0, e0, stream)
    times = cfg.times()
    bloch_i = _ideal_bloch(cfg, r0, times)
    return TrajectoryRecord(times=times, bloch_R=bloch_r, dy=dy,
                            bloch_E=bloch_e, bloch_I=bloch_i)


def run_ensemble_filter(cfg: SimConfig, rho0_R: DensityMatrix,
                        rho0_E: DensityMatrix,
                        substeps: int = LINDBLAD_SUBSTEPS,
                        ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Co-integrate the ensemble mean and the nonstochastic estimator.

    Returns (times, bloch_mean, bloch_estimator).  Raises
    :class:`PositivityViolationError` if the estimator's smallest
    eigenvalue drops below tolerance anywhere along the run.
    """
    h = cfg.dt / substeps
    rot = rotation_matrix(cfg, h)
    decay = math.exp(-4.0 * cfg.kappa * h)
    out_r = np.empty((cfg.n_out, 3))
    out_e = np.empty((cfg.n_out, 3))
    min_eig = _kernels.ensemble_filter_kernel(
        _bloch(rho0_R), _bloch(rho0_E), cfg.n_steps, substeps, h, decay,
        4.0 * cfg.kappa, rot, cfg.record_stride, out_r, out_e)
    if min_eig < -1e-9:
        raise PositivityViolationError(
            f"nonstochastic estimator reached eigenvalue {min_eig:.3e}")
    return cfg.times(), out_r, out_e
