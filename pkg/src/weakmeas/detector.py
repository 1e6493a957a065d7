"""Effective point-contact detector model.

Maps the physical detector parameters (channel transparency, its charge-state
modulation, bias voltage, temperature) to the quantities the dynamics needs:
shot-noise floor J(0), current contrast dI, and the measurement strength
kappa = dI^2 / (16 J(0)).

Reduced units are used throughout: hbar = e = k_B = 1, and the qubit Rabi
amplitude sets the frequency scale.  Energies (bias, temperature) and rates
are all carried in these units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

# |dI|/I0 at or below this ratio counts as weakly responding.  The regime
# condition is an order-of-magnitude statement; the threshold is surfaced in
# the diagnostic rather than silently enforced anywhere.
WEAK_RESPONSE_RATIO = 0.1


class DetectorParameterError(ValueError):
    """Raised for parameter sets outside the model's validity."""


@dataclass(frozen=True)
class QpcParams:
    """Physical parameters of a single-channel point-contact detector.

    transparency:        channel transparency D in (0, 1)
    delta_transparency:  charge-state modulation dD, 0 < |dD| < min(D, 1-D)
    bias_voltage:        bias energy e*V (> 0)
    temperature:         thermal energy k_B*T (>= 0)
    klitzing_constant:   resistance quantum h/e^2 (defaults to 1 in reduced units)
    """

    transparency: float
    delta_transparency: float
    bias_voltage: float
    temperature: float = 0.0
    klitzing_constant: float = 1.0

    def __post_init__(self):
        d, dd = self.transparency, self.delta_transparency
        if not 0.0 < d < 1.0:
            raise DetectorParameterError(f"transparency {d} outside (0, 1)")
        if dd == 0.0 or abs(dd) >= min(d, 1.0 - d):
            raise DetectorParameterError(
                f"delta_transparency {dd} must satisfy 0 < |dD| < min(D, 1-D)")
        if self.bias_voltage <= 0.0:
            raise DetectorParameterError("bias_voltage must be positive")
        if self.temperature < 0.0:
            raise DetectorParameterError("temperature must be nonnegative")
        if self.klitzing_constant <= 0.0:
            raise DetectorParameterError("klitzing_constant must be positive")


@dataclass(frozen=True)
class DetectorModel:
    """Derived detector quantities feeding the dynamics through kappa."""

    kappa: float
    delta_current: float
    noise_floor: float
    mean_current: float

    def __post_init__(self):
        expected = self.delta_current ** 2 / (16.0 * self.noise_floor)
        if not math.isclose(self.kappa, expected, rel_tol=1e-12, abs_tol=0.0):
            raise DetectorParameterError(
                f"kappa {self.kappa} violates dI^2/(16 J0) = {expected}")


def noise_spectral_density(omega: float, p: QpcParams) -> float:
    """Shot-noise spectral density of the detector current at frequency omega.

    J(w) = (4/R_K) D(1-D) (eV - w) / [1 - exp(-(eV - w)/T)], valid in the
    shot-noise regime eV > w.  The T -> 0 limit (4/R_K) D(1-D)(eV - w) is
    taken exactly at T = 0.
    """
    x = p.bias_voltage - omega
    if x <= 0.0:
        raise DetectorParameterError(
            f"shot-noise regime requires eV > hbar*omega (eV - w = {x})")
    d = p.transparency
    prefactor = 4.0 / p.klitzing_constant * d * (1.0 - d)
    if p.temperature == 0.0:
        return prefactor * x
    return prefactor * x / (1.0 - math.exp(-x / p.temperature))


def currents(p: QpcParams) -> tuple[float, float, float, float]:
    """Detector currents for the two charge states.

    Returns (I_L, I_R, dI, I0) with I_{L,R} = (D +/- dD) e^2 V / (pi hbar),
    dI = I_L - I_R and I0 the average current.
    """
    scale = p.bias_voltage / math.pi  # e^2 V / (pi hbar) in reduced units
    i_left = (p.transparency + p.delta_transparency) * scale
    i_right = (p.transparency - p.delta_transparency) * scale
    return i_left, i_right, i_left - i_right, 0.5 * (i_left + i_right)


def measurement_strength(delta_current: float, noise_floor: float) -> float:
    """kappa = dI^2 / (16 J(0))."""
    if noise_floor <= 0.0:
        raise DetectorParameterError("noise floor must be positive")
    return delta_current ** 2 / (16.0 * noise_floor)


def detector_from_qpc(p: QpcParams) -> DetectorModel:
    """Assemble the full detector model from physical parameters."""
    j0 = noise_spectral_density(0.0, p)
    _, _, di, i0 = currents(p)
    return DetectorModel(
        kappa=measurement_strength(di, j0),
        delta_current=di,
        noise_floor=j0,
        mean_current=i0,
    )


@dataclass(frozen=True)
class WeakResponseReport:
    """Diagnostic for the weakly-responding (linear) detector regime."""

    contrast_ratio: float      # |dI| / I0
    electrons_to_resolve: float  # N = (I0 / dI)^2, inf when dI = 0
    weakly_responding: bool
    threshold: float = WEAK_RESPONSE_RATIO


def weak_response_check(model: DetectorModel) -> WeakResponseReport:
    """Check |dI| << I0 and report the electron count N = (I0/dI)^2."""
    if model.mean_current == 0.0:
        raise DetectorParameterError("mean current is zero; ratio undefined")
    if model.delta_current == 0.0:
        return WeakResponseReport(0.0, math.inf, True)
    ratio = abs(model.delta_current) / model.mean_current
    n = (model.mean_current / model.delta_current) ** 2
    return WeakResponseReport(ratio, n, ratio <= WEAK_RESPONSE_RATIO)
