import math

import numpy as np
import pytest

from weakmeas.detector import (DetectorModel, DetectorParameterError,
                               QpcParams, currents, detector_from_qpc,
                               measurement_strength, noise_spectral_density,
                               weak_response_check)


def params(**kw):
    base = dict(transparency=0.5, delta_transparency=0.05, bias_voltage=1.0,
                temperature=0.0, klitzing_constant=1.0)
    base.update(kw)
    return QpcParams(**base)


class TestParams:
    def test_transparency_bounds(self):
        with pytest.raises(DetectorParameterError):
            params(transparency=0.0)
        with pytest.raises(DetectorParameterError):
            params(transparency=1.0)

    def test_delta_window(self):
        with pytest.raises(DetectorParameterError):
            params(delta_transparency=0.0)
        with pytest.raises(DetectorParameterError):
            params(transparency=0.9, delta_transparency=0.2)

    def test_bias_and_temperature(self):
        with pytest.raises(DetectorParameterError):
            params(bias_voltage=0.0)
        with pytest.raises(DetectorParameterError):
            params(temperature=-1.0)


class TestNoiseDensity:
    def test_vanishes_with_channel_factor(self):
        # D(1-D) -> 0 at the transparency extremes
        p = params(transparency=1e-12, delta_transparency=1e-13)
        assert noise_spectral_density(0.0, p) <= 1e-10
        p = params(transparency=1 - 1e-12, delta_transparency=1e-13)
        assert noise_spectral_density(0.0, p) <= 1e-10

    def test_zero_temperature_value(self):
        assert noise_spectral_density(0.0, params()) == pytest.approx(1.0, abs=1e-15)

    def test_finite_temperature_ratio(self):
        # direct evaluation at two temperatures
        t = 0.25
        cold = noise_spectral_density(0.0, params())
        warm = noise_spectral_density(0.0, params(temperature=t))
        expected = 1.0 / (1.0 - math.exp(-1.0 / t))
        assert warm / cold == pytest.approx(expected, rel=1e-12)

    def test_regime_violation(self):
        with pytest.raises(DetectorParameterError):
            noise_spectral_density(2.0, params(bias_voltage=1.0))

    def test_monotone_in_temperature(self):
        temps = [0.0, 0.01, 0.1, 0.5, 1.0, 5.0]
        vals = [noise_spectral_density(0.0, params(temperature=t)) for t in temps]
        assert all(b >= a for a, b in zip(vals, vals[1:]))

    def test_continuous_low_temperature_limit(self):
        cold = noise_spectral_density(0.0, params(temperature=1e-6))
        zero = noise_spectral_density(0.0, params())
        assert abs(cold - zero) <= 1e-8


class TestCurrents:
    def test_reference_values(self):
        # units chosen so e^2 V / (pi hbar) = 1
        p = params(bias_voltage=math.pi)
        i_l, i_r, di, i0 = currents(p)
        assert i_l == pytest.approx(0.55, abs=1e-12)
        assert i_r == pytest.approx(0.45, abs=1e-12)
        assert di == pytest.approx(0.10, abs=1e-12)
        assert i0 == pytest.approx(0.5, abs=1e-12)

    def test_sign_flip(self):
        p = params(bias_voltage=math.pi)
        q = params(bias_voltage=math.pi, delta_transparency=-0.05)
        _, _, di_p, i0_p = currents(p)
        _, _, di_q, i0_q = currents(q)
        assert di_q == -di_p
        assert i0_q == i0_p


class TestMeasurementStrength:
    def test_arithmetic(self):
        assert measurement_strength(4.0, 1.0) == pytest.approx(1.0)
        assert measurement_strength(0.0, 1.0) == 0.0

    def test_noise_floor_guard(self):
        with pytest.raises(DetectorParameterError):
            measurement_strength(1.0, 0.0)

    def test_inversion(self):
        # contrast needed for a target strength, cross-checked against the
        # record drift coefficient
        j0 = 2.7
        di = math.sqrt(0.08 * j0)
        kappa = measurement_strength(di, j0)
        assert kappa == pytest.approx(0.005, rel=1e-12)
        assert math.sqrt(8 * kappa) == pytest.approx(0.2, rel=1e-12)
        assert di / math.sqrt(2 * j0) == pytest.approx(0.2, rel=1e-12)


class TestDetectorModel:
    def test_identity_enforced(self):
        with pytest.raises(DetectorParameterError):
            DetectorModel(kappa=1.0, delta_current=1.0, noise_floor=1.0,
                          mean_current=1.0)

    def test_identity_from_random_parameters(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            d = rng.uniform(0.1, 0.9)
            dd = rng.uniform(0.01, 1.0) * min(d, 1 - d) * 0.9
            p = params(transparency=d, delta_transparency=dd,
                       bias_voltage=rng.uniform(0.5, 3.0),
                       temperature=rng.uniform(0.0, 0.2))
            model = detector_from_qpc(p)
            lhs = math.sqrt(8 * model.kappa)
            rhs = model.delta_current / math.sqrt(2 * model.noise_floor)
            assert lhs == pytest.approx(rhs, rel=1e-12)


class TestWeakResponse:
    def test_not_weak_at_reference_point(self):
        model = detector_from_qpc(params(bias_voltage=math.pi))
        report = weak_response_check(model)
        assert report.contrast_ratio == pytest.approx(0.2, abs=1e-12)
        assert report.electrons_to_resolve == pytest.approx(25.0, abs=1e-9)
        assert not report.weakly_responding

    def test_zero_contrast(self):
        model = DetectorModel(kappa=0.0, delta_current=0.0, noise_floor=1.0,
                              mean_current=0.5)
        report = weak_response_check(model)
        assert report.electrons_to_resolve == math.inf
        assert report.weakly_responding

    def test_weak_regime(self):
        p = params(transparency=0.5, delta_transparency=0.0125,
                   bias_voltage=math.pi)
        report = weak_response_check(detector_from_qpc(p))
        assert report.contrast_ratio == pytest.approx(0.05, abs=1e-12)
        assert report.electrons_to_resolve == pytest.approx(400.0, abs=1e-6)
        assert report.weakly_responding

    def test_zero_mean_current(self):
        model = DetectorModel(kappa=0.0, delta_current=0.0, noise_floor=1.0,
                              mean_current=0.0)
        with pytest.raises(DetectorParameterError):
            weak_response_check(model)
