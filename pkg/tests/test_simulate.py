"""Scene generation, receiver frames and PSD estimation."""

import json

import numpy as np
import pytest

from widesense import (
    DomainError,
    ReceiverArray,
    SpectrumScene,
    Subband,
    estimate_psd,
    generate_narrowband_frame,
    generate_wideband_signal,
)


def two_band_scene(occupied_power, noise_sigma2=1.0, lo=0.5, hi=0.625):
    subbands = []
    if lo > 0:
        subbands.append(Subband(0.0, lo, False, 0.0))
    subbands.append(Subband(lo, hi, occupied_power > 0, occupied_power))
    if hi < 1.0:
        subbands.append(Subband(hi, 1.0, False, 0.0))
    return SpectrumScene(1.0, tuple(subbands), noise_sigma2)


class TestNarrowbandFrame:
    def test_vanishing_noise_gives_near_zero_matrix(self):
        array = ReceiverArray(np.ones(3, complex), 1e-30)
        frame = generate_narrowband_frame(array, 16, False, 7)
        assert np.max(np.abs(frame.entries)) < 1e-10

    def test_noise_energy_expectation(self):
        # squared Frobenius norm of the scaled frame has mean K * sigma2
        array = ReceiverArray(np.zeros(7, complex), 1.0)
        total = 0.0
        n_seeds = 1000
        for seed in range(n_seeds):
            frame = generate_narrowband_frame(array, 100, False, seed)
            total += np.sum(np.abs(frame.entries) ** 2)
        assert total / n_seeds == pytest.approx(7.0, rel=0.05)

    def test_occupied_diagonal_power(self):
        # (1,1) entry of Y Y^H approaches |h_1|^2 + sigma2
        gains = np.zeros(3, complex)
        gains[0] = 1.0
        array = ReceiverArray(gains, 1.0)
        frame = generate_narrowband_frame(array, 100_000, True, 11)
        r00 = np.sum(np.abs(frame.entries[0]) ** 2)
        assert r00 == pytest.approx(2.0, rel=0.05)

    def test_deterministic(self):
        array = ReceiverArray(np.ones(4, complex), 0.5)
        a = generate_narrowband_frame(array, 64, True, 123)
        b = generate_narrowband_frame(array, 64, True, 123)
        assert np.array_equal(a.entries, b.entries)

    def test_zero_gains_matches_idle_moments(self):
        array = ReceiverArray(np.zeros(5, complex), 1.0)
        occ = [generate_narrowband_frame(array, 200, True, s).entries for s in range(200)]
        idle = [
            generate_narrowband_frame(array, 200, False, 10_000 + s).entries
            for s in range(200)
        ]
        occ_pow = np.mean([np.mean(np.abs(f) ** 2) for f in occ])
        idle_pow = np.mean([np.mean(np.abs(f) ** 2) for f in idle])
        occ_mean = np.mean([np.mean(f) for f in occ])
        assert occ_pow == pytest.approx(idle_pow, rel=0.05)
        assert abs(occ_mean) < 5e-4

    def test_rank_one_eigenstructure_at_large_n(self):
        # top eigenvalue -> sum |h|^2 + sigma2, the rest -> sigma2
        rng = np.random.default_rng(17)
        tops, rests = [], []
        for seed in range(20):
            h = rng.standard_normal(4) + 1j * rng.standard_normal(4)
            array = ReceiverArray(h, 1.0)
            frame = generate_narrowband_frame(array, 100_000, True, seed)
            eigs = np.linalg.eigvalsh(frame.entries @ frame.entries.conj().T)
            tops.append(eigs[-1] / (np.sum(np.abs(h) ** 2) + 1.0))
            rests.append(np.mean(eigs[:-1]))
        assert np.mean(tops) == pytest.approx(1.0, rel=0.1)
        assert np.mean(rests) == pytest.approx(1.0, rel=0.1)

    def test_rejects_empty_frame(self):
        array = ReceiverArray(np.ones(2, complex), 1.0)
        with pytest.raises(DomainError):
            generate_narrowband_frame(array, 0, False, 1)


class TestSceneValidation:
    def test_roundtrip_json(self, tmp_path):
        scene = two_band_scene(2.0)
        path = tmp_path / "scene.json"
        path.write_text(json.dumps(scene.to_dict()))
        again = SpectrumScene.from_json(path)
        assert again == scene

    def test_rejects_gap(self):
        with pytest.raises(DomainError):
            SpectrumScene(
                1.0,
                (Subband(0.0, 0.4, False, 0.0), Subband(0.5, 1.0, False, 0.0)),
                1.0,
            )

    def test_rejects_all_occupied(self):
        with pytest.raises(DomainError):
            SpectrumScene(1.0, (Subband(0.0, 1.0, True, 1.0),), 1.0)

    def test_rejects_idle_with_power(self):
        with pytest.raises(DomainError):
            SpectrumScene(1.0, (Subband(0.0, 1.0, False, 1.0),), 1.0)

    def test_rejects_zero_width(self):
        with pytest.raises(DomainError):
            SpectrumScene(
                1.0,
                (Subband(0.0, 0.0, False, 0.0), Subband(0.0, 1.0, False, 0.0)),
                1.0,
            )


class TestWidebandSignal:
    def test_idle_scene_is_white_noise(self):
        scene = SpectrumScene(
            1.0, (Subband(0.0, 0.5, False, 0.0), Subband(0.5, 1.0, False, 0.0)), 1.0
        )
        sig = generate_wideband_signal(scene, 2**16, 3)
        assert np.var(sig) == pytest.approx(1.0, rel=0.03)

    def test_total_power_parseval(self):
        # occupied band of width 1/8 at PSD level p adds p/8 total power
        scene = two_band_scene(4.0)
        powers = [
            np.mean(np.abs(generate_wideband_signal(scene, 2**16, s)) ** 2)
            for s in range(10)
        ]
        assert np.mean(powers) == pytest.approx(1.0 + 4.0 / 8.0, rel=0.03)

    def test_energy_concentrates_in_band(self):
        # near-zero noise floor: out-of-band PSD at least 40 dB down,
        # excluding a 3-bin guard for window leakage at the band edges
        scene = two_band_scene(1.0, noise_sigma2=1e-30, lo=0.25, hi=0.375)
        sig = generate_wideband_signal(scene, 2**16, 5)
        psd = estimate_psd(sig, 256, 0.5)
        b0, b1 = 64, 96
        inband = psd.power[b0:b1].mean()
        mask = np.ones(256, bool)
        mask[b0 - 3 : b1 + 3] = False
        assert psd.power[mask].max() < inband * 1e-4

    def test_deterministic(self):
        scene = two_band_scene(2.0)
        a = generate_wideband_signal(scene, 4096, 77)
        b = generate_wideband_signal(scene, 4096, 77)
        assert np.array_equal(a, b)

    def test_rejects_short_record(self):
        scene = two_band_scene(1.0)
        with pytest.raises(DomainError):
            generate_wideband_signal(scene, 8, 1)


class TestEstimatePsd:
    def test_white_noise_is_flat(self):
        rng = np.random.default_rng(1)
        sig = (rng.standard_normal(2**16) + 1j * rng.standard_normal(2**16)) / np.sqrt(2)
        psd = estimate_psd(sig, 256, 0.5)
        assert psd.power.max() / psd.power.min() < 2.0
        assert psd.power.mean() == pytest.approx(1.0, rel=0.05)

    def test_pure_tone_peaks_at_its_bin(self):
        n = 2**14
        sig = np.exp(2j * np.pi * (32 / 256) * np.arange(n))
        psd = estimate_psd(sig, 256, 0.5)
        assert np.argmax(psd.power) == 32

    def test_zero_signal(self):
        psd = estimate_psd(np.zeros(1024, complex), 128, 0.5)
        assert np.all(psd.power == 0.0)

    def test_frequency_grid(self):
        psd = estimate_psd(np.zeros(1024, complex), 128, 0.25)
        assert len(psd.freqs) == 128
        assert psd.freqs[0] == 0.0
        assert psd.freqs[-1] == pytest.approx(127 / 128)

    def test_rejects_bad_parameters(self):
        sig = np.zeros(100, complex)
        with pytest.raises(DomainError):
            estimate_psd(sig, 200, 0.5)
        with pytest.raises(DomainError):
            estimate_psd(sig, 50, 1.0)
