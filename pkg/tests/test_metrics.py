import math

import numpy as np
import pytest

from weakmeas import metrics
from weakmeas.dynamics import SimConfig, run_trajectory
from weakmeas.ensemble import run_ensemble
from weakmeas.metrics import (FIDELITY, RELATIVE_ENTROPY, backaction,
                              confidence, epitome, fidelity_bloch,
                              relative_entropy_bloch, series_from_bloch,
                              series_from_states)
from weakmeas.qstate import (BlochVector, left_state, maximally_mixed,
                             random_qubit_state)

LN2 = math.log(2.0)


class TestPointwise:
    def test_zero_when_states_coincide(self, rng):
        rho = random_qubit_state(rng)
        assert confidence(rho, rho, FIDELITY) == pytest.approx(0.0, abs=1e-9)
        assert confidence(rho, rho, RELATIVE_ENTROPY) == pytest.approx(0.0, abs=1e-9)

    def test_standard_start_values(self):
        c_fid = confidence(maximally_mixed(2), left_state(), FIDELITY)
        c_re = confidence(maximally_mixed(2), left_state(), RELATIVE_ENTROPY)
        assert c_fid == pytest.approx(0.5, abs=1e-12)
        assert 1.0 - c_fid == pytest.approx(0.5, abs=1e-12)
        assert c_re == pytest.approx(LN2, abs=1e-12)

    def test_confidence_ordering(self):
        # estimator-is-mixed direction must stay finite even when the
        # system is pure; the reverse ordering diverges
        assert math.isfinite(confidence(maximally_mixed(2), left_state(),
                                        RELATIVE_ENTROPY))
        assert confidence(left_state(), maximally_mixed(2),
                          RELATIVE_ENTROPY) == math.inf

    def test_backaction_zero_at_start(self):
        assert backaction(left_state(), left_state(), FIDELITY) == 0.0
        assert backaction(left_state(), left_state(), RELATIVE_ENTROPY) == 0.0

    def test_epitome_start_values(self):
        assert epitome(left_state(), maximally_mixed(2),
                       RELATIVE_ENTROPY) == pytest.approx(LN2, abs=1e-12)
        assert epitome(left_state(), maximally_mixed(2),
                       FIDELITY) == pytest.approx(0.5, abs=1e-12)

    def test_unknown_measure(self):
        with pytest.raises(ValueError):
            confidence(left_state(), left_state(), "trace_distance")

    def test_nonnegative_and_rank_consistent(self, rng):
        for _ in range(50):
            a, b = random_qubit_state(rng), random_qubit_state(rng)
            c_f = confidence(a, b, FIDELITY)
            c_r = confidence(a, b, RELATIVE_ENTROPY)
            assert c_f >= 0.0 and c_r >= 0.0
            # both zero together, both positive together
            assert (c_f <= 1e-9) == (c_r <= 1e-9)


class TestBlochRoutes:
    def test_fidelity_matches_matrix_route(self, rng):
        for _ in range(100):
            a, b = random_qubit_state(rng), random_qubit_state(rng)
            fast = fidelity_bloch(_vec(a), _vec(b))
            slow = 1.0 - confidence(a, b, FIDELITY)
            assert abs(float(fast) - slow) <= 1e-10

    def test_relative_entropy_matches_matrix_route(self, rng):
        for _ in range(100):
            a, b = random_qubit_state(rng), random_qubit_state(rng)
            fast = float(relative_entropy_bloch(_vec(a)[None, :], _vec(b)[None, :])[0])
            slow = confidence(b, a, RELATIVE_ENTROPY)
            if math.isinf(slow):
                assert math.isinf(fast)
            else:
                assert abs(fast - slow) <= 1e-10

    def test_support_violation_positions_match(self):
        pure = np.array([0.0, 0.0, 1.0])
        mixed = np.array([0.0, 0.0, 0.0])
        vals = relative_entropy_bloch(np.stack([mixed, pure]),
                                      np.stack([pure, mixed]))
        assert math.isinf(vals[0])       # mixed relative to pure diverges
        assert vals[1] == pytest.approx(LN2, abs=1e-12)

    def test_series_routes_agree(self):
        cfg = SimConfig.from_periods(2, 2000, kappa=0.01, seed=41, points=60)
        rec = run_trajectory(cfg, left_state(), maximally_mixed(2))
        fast = series_from_bloch(rec.times, rec.bloch_R, rec.bloch_E, rec.bloch_I)
        slow = series_from_states(rec.times, rec.rho_R, rec.rho_E, rec.rho_I)
        # the matrix square-root route loses half its digits near pure
        # states, so the fidelity agreement band is wider
        for name, tol in (("confidence_fid", 1e-7), ("backaction_fid", 1e-7),
                          ("confidence_re", 1e-9), ("backaction_re", 1e-9),
                          ("epitome_re", 1e-9)):
            a, b = getattr(fast, name), getattr(slow, name)
            both_inf = np.isinf(a) & np.isinf(b)
            assert np.array_equal(np.isinf(a), np.isinf(b))
            assert np.abs(a[~both_inf] - b[~both_inf]).max() <= tol


def _vec(rho):
    b = BlochVector.from_density_matrix(rho)
    return np.array([b.x, b.y, b.z])


class TestSeries:
    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            metrics.MetricSeries(times=np.zeros(3), confidence_fid=np.zeros(2),
                                 backaction_fid=np.zeros(3),
                                 confidence_re=np.zeros(3),
                                 backaction_re=np.zeros(3),
                                 epitome_re=np.zeros(3))

    def test_inf_mask(self):
        ser = metrics.MetricSeries(
            times=np.arange(2.0), confidence_fid=np.zeros(2),
            backaction_fid=np.zeros(2), confidence_re=np.array([0.0, math.inf]),
            backaction_re=np.zeros(2), epitome_re=np.zeros(2))
        assert list(ser.inf_mask) == [False, True]

    def test_kappa_zero_backaction_null(self):
        cfg = SimConfig.from_periods(3, 2000, kappa=0.0, seed=8, points=100)
        rec = run_trajectory(cfg, left_state(), maximally_mixed(2))
        ser = series_from_bloch(rec.times, rec.bloch_R, rec.bloch_E, rec.bloch_I)
        assert np.abs(ser.backaction_fid).max() <= 1e-8
        assert np.abs(ser.backaction_re).max() <= 1e-8


class TestEnsembleBehavior:
    def test_entropy_confidence_decreases_period_averaged(self):
        periods = 10
        cfg = SimConfig.from_periods(periods, 2000, kappa=0.005, seed=6,
                                     points=500)
        res = run_ensemble(cfg, 100, left_state(), maximally_mixed(2))
        c = res.metrics_mean.confidence_re
        per = (len(c) - 1) // periods
        averages = [c[i * per:(i + 1) * per].mean() for i in range(periods)]
        # monotone decrease after the first period
        assert all(b < a for a, b in zip(averages[1:], averages[2:]))
        assert averages[-1] < averages[0]

    def test_backaction_oscillates_at_node_frequency(self):
        # the ensemble backaction is modulated by the node passages, where
        # the ideal and system states nearly coincide; two poles per Rabi
        # period put the dominant detrended component at 2 cycles/period
        periods = 6
        cfg = SimConfig.from_periods(periods, 2000, kappa=0.005, seed=12,
                                     points=600)
        res = run_ensemble(cfg, 150, left_state(), maximally_mixed(2))
        b = res.metrics_mean.backaction_fid
        t = res.times / (2.0 * math.pi)
        resid = b - np.polyval(np.polyfit(t, b, 2), t)
        spec = np.abs(np.fft.rfft(resid))
        freqs = np.fft.rfftfreq(len(resid), d=t[1] - t[0])
        dominant = freqs[1:][np.argmax(spec[1:])]
        assert dominant == pytest.approx(2.0, abs=0.2)
