"""Threshold calibration: empirical Pfa curves and their inversion."""

import numpy as np
import pytest

from widesense import (
    CalibrationConfig,
    CalibrationCurve,
    DegenerateCalibrationWarning,
    DomainError,
    load_curve,
    pfa_at,
    save_curve,
    simulate_h0,
    threshold_for,
)


def synthetic_curve(values, detector="mp_edge"):
    config = CalibrationConfig(
        trials=len(values), target_pfa=0.1, master_seed=1,
        k_receivers=7, n_samples=100, sigma2=1.0,
    )
    return CalibrationCurve(np.sort(np.asarray(values, float)), detector, config)


class TestSimulateH0:
    def test_shape_and_finiteness(self):
        config = CalibrationConfig(100, 0.1, 5, 7, 100, 1.0)
        curve = simulate_h0(config, "mp_edge")
        assert curve.count == 100
        assert np.all(np.isfinite(curve.h0_statistics))
        assert np.all(curve.h0_statistics > 0)
        assert np.all(np.diff(curve.h0_statistics) >= 0)

    def test_deterministic(self):
        config = CalibrationConfig(200, 0.1, 6, 7, 100, 1.0)
        a = simulate_h0(config, "energy")
        b = simulate_h0(config, "energy")
        assert np.array_equal(a.h0_statistics, b.h0_statistics)

    def test_median_bracket(self):
        config = CalibrationConfig(2000, 0.1, 7, 7, 100, 1.0)
        curve = simulate_h0(config, "mp_edge")
        assert 0.6 < np.median(curve.h0_statistics) < 1.1

    def test_estimated_mode_runs(self):
        config = CalibrationConfig(100, 0.1, 8, 7, 100, 1.0, sigma2_mode="estimated")
        curve = simulate_h0(config, "mp_edge")
        assert np.all(np.isfinite(curve.h0_statistics))

    def test_rejects_unknown_detector(self):
        config = CalibrationConfig(100, 0.1, 5, 7, 100, 1.0)
        with pytest.raises(DomainError):
            simulate_h0(config, "matched_filter")

    def test_config_validation(self):
        with pytest.raises(DomainError):
            CalibrationConfig(50, 0.1, 5, 7, 100, 1.0)
        with pytest.raises(DomainError):
            CalibrationConfig(100, 1.0, 5, 7, 100, 1.0)
        with pytest.raises(DomainError):
            CalibrationConfig(100, 0.1, 5, 7, 100, 1.0, sigma2_mode="guess")


class TestPfaAt:
    def test_extremes(self):
        curve = synthetic_curve(np.linspace(1, 2, 100))
        assert pfa_at(curve, 0.5) == 1.0
        assert pfa_at(curve, 3.0) == 0.0

    def test_median_of_odd_sample(self):
        values = np.arange(1, 102, dtype=float)  # 101 values, median 51
        curve = synthetic_curve(values)
        # 50 of 101 strictly exceed the median
        assert pfa_at(curve, 51.0) == pytest.approx(50 / 101, abs=1e-12)

    def test_nonincreasing(self):
        rng = np.random.default_rng(0)
        curve = synthetic_curve(rng.exponential(size=500))
        alphas = np.linspace(-1, 5, 200)
        vals = [pfa_at(curve, a) for a in alphas]
        assert np.all(np.diff(vals) <= 0)


class TestThresholdFor:
    def test_evenly_spaced_hand_value(self):
        # 100 values 0.01..1.00: the 90% quantile sits near 0.90
        curve = synthetic_curve(np.arange(1, 101) / 100)
        alpha = threshold_for(curve, 0.10)
        assert abs(alpha - 0.90) <= 0.01

    def test_target_near_one_goes_below_min(self):
        curve = synthetic_curve(np.linspace(1, 2, 100))
        alpha = threshold_for(curve, 0.999)
        assert alpha <= curve.h0_statistics[1]

    def test_target_half_is_median(self):
        curve = synthetic_curve(np.linspace(0, 1, 101))
        assert threshold_for(curve, 0.5) == pytest.approx(0.5, abs=0.01)

    def test_round_trip_guarantee(self):
        rng = np.random.default_rng(1)
        curve = synthetic_curve(rng.gamma(3.0, size=1000))
        for p in (0.01, 0.05, 0.1, 0.5):
            alpha = threshold_for(curve, p)
            assert abs(pfa_at(curve, alpha) - p) <= 1 / curve.count + 1e-12

    def test_degenerate_curve_warns(self):
        curve = synthetic_curve(np.full(100, 2.5))
        with pytest.warns(DegenerateCalibrationWarning):
            alpha = threshold_for(curve, 0.1)
        assert alpha == 2.5

    def test_rejects_bad_target(self):
        curve = synthetic_curve(np.linspace(0, 1, 100))
        for bad in (0.0, 1.0, -0.5, 2.0):
            with pytest.raises(DomainError):
                threshold_for(curve, bad)


class TestPersistence:
    def test_bit_exact_round_trip(self, tmp_path):
        config = CalibrationConfig(150, 0.1, 11, 7, 100, 1.0)
        curve = simulate_h0(config, "agm")
        path = tmp_path / "curve.csv"
        save_curve(curve, path)
        again = load_curve(path)
        assert np.array_equal(again.h0_statistics, curve.h0_statistics)
        assert again.detector == curve.detector
        assert again.config == curve.config
        for p in (0.05, 0.2):
            assert threshold_for(again, p) == threshold_for(curve, p)

    def test_rejects_wrong_header(self, tmp_path):
        path = tmp_path / "c.csv"
        path.write_text("a,b\n1,2\n")
        (tmp_path / "c.json").write_text(
            '{"detector": "mp_edge", "config": {"trials": 100, "target_pfa": 0.1,'
            ' "master_seed": 1, "k_receivers": 7, "n_samples": 100, "sigma2": 1.0,'
            ' "sigma2_mode": "oracle"}}'
        )
        with pytest.raises(DomainError):
            load_curve(path)


@pytest.mark.slow
class TestHeldOutValidation:
    def test_calibrated_threshold_generalizes(self):
        from widesense.montecarlo import simulate_detector_statistics

        config = CalibrationConfig(10_000, 0.1, 21, 7, 100, 1.0)
        curve = simulate_h0(config, "mp_edge")
        alpha = threshold_for(curve, 0.1)
        fresh = simulate_detector_statistics(7, 100, 1.0, 10_000, 21, 0x41)
        pfa = np.mean(fresh.mp_edge > alpha)
        assert abs(pfa - 0.1) <= 0.02
