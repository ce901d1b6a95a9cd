"""Acceptance gate: one test per criterion, one printed PASS/FAIL line each.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines and timings.
"""

import time

import numpy as np
import pytest

from widesense import (
    SampleCovariance,
    UsagePrior,
    hermitian_eigenvalues,
    simulate_h0,
    threshold_for,
)
from widesense.calibration import CalibrationConfig
from widesense.cli import main as cli_main
from widesense.montecarlo import simulate_detector_statistics
from widesense.noise import SubbandEnergies, estimate_m, estimate_m_uniform
from widesense.harness import run_mp_check, run_noise_error, run_roc, spec_from_dict
from widesense.seeding import STREAM_EVAL_H0, STREAM_EVAL_H1

from _oracles import oracle_estimate_m

MASTER_SEED = 20_260_810


def report(criterion, ok, detail, elapsed, budget):
    status = "PASS" if ok else "FAIL"
    print(
        f"[acceptance] criterion {criterion}: {status} ({detail}; "
        f"{elapsed:.1f}s of {budget:.0f}s budget)"
    )
    assert ok, f"criterion {criterion}: {detail}"
    assert elapsed < budget, f"criterion {criterion} exceeded {budget:.0f}s budget"


@pytest.mark.acceptance
def test_criterion_1_mp_law_fidelity():
    t0 = time.perf_counter()
    spec = spec_from_dict(
        {"experiment": "mp-check", "K": [50], "N": [500], "trials": 100,
         "master_seed": MASTER_SEED}
    )
    table = run_mp_check(spec)
    ks = np.array([row[3] for row in table.rows])
    frac = np.array([row[4] for row in table.rows])
    elapsed = time.perf_counter() - t0
    ok = ks.mean() < 0.07 and frac.mean() >= 0.99
    report(
        1, ok,
        f"mean ks={ks.mean():.4f} (<0.07), in-support={frac.mean():.4f} (>=0.99)",
        elapsed, 30.0,
    )


@pytest.mark.acceptance
def test_criterion_2_idle_count_oracle_equivalence():
    t0 = time.perf_counter()
    rng = np.random.default_rng(MASTER_SEED + 1)
    mismatches = 0
    for _ in range(1000):
        k = int(rng.integers(2, 9))
        l_samples = int(rng.integers(1, 5))
        energies = rng.gamma(2.0, 1.0, size=k) * l_samples
        if rng.random() < 0.5:
            pmf = np.full(k, 1.0 / k)
            got = estimate_m_uniform(SubbandEnergies(energies, l_samples))
        else:
            pmf = rng.dirichlet(np.ones(k))
            got = estimate_m(SubbandEnergies(energies, l_samples), UsagePrior.table(pmf))
        mismatches += got != oracle_estimate_m(energies, l_samples, pmf)
    elapsed = time.perf_counter() - t0
    report(2, mismatches == 0, f"{mismatches} mismatches in 1000 instances", elapsed, 30.0)


@pytest.mark.acceptance
def test_criterion_3_noise_estimation_accuracy():
    t0 = time.perf_counter()
    # default scene: 32 subbands, 28 idle, occupied at -5 dB; 4096 samples
    # give L = 128 bins per subband at the native count
    base = {"trials": 100, "snr_db": [-5.0], "record_samples": 4096,
            "master_seed": MASTER_SEED + 2, "subband_counts": [4, 32]}
    adaptive = run_noise_error(
        spec_from_dict({"experiment": "noise-error-adaptive", **base}), "adaptive"
    )
    equal = run_noise_error(
        spec_from_dict({"experiment": "noise-error-equal", **base}), "equal"
    )
    rel_ad = np.array([r[4] for r in adaptive.rows if r[5] == "ok"])
    med_ad = float(np.median(rel_ad))
    med4 = float(np.median([r[4] for r in equal.rows if r[1] == 4]))
    med32 = float(np.median([r[4] for r in equal.rows if r[1] == 32]))
    elapsed = time.perf_counter() - t0
    ok = (
        len(rel_ad) == 100
        and med_ad <= 0.10
        and med4 > med32
    )
    report(
        3, ok,
        f"adaptive median={med_ad:.4f} (<=0.10), equal k=4 median={med4:.4f} > "
        f"k=32 median={med32:.4f}",
        elapsed, 120.0,
    )


@pytest.mark.acceptance
def test_criterion_4_calibration_round_trip():
    t0 = time.perf_counter()
    config = CalibrationConfig(
        trials=10_000, target_pfa=0.1, master_seed=MASTER_SEED + 3,
        k_receivers=7, n_samples=100, sigma2=1.0, sigma2_mode="oracle",
    )
    curve = simulate_h0(config, "mp_edge")
    alpha = threshold_for(curve, 0.1)
    held_out = simulate_detector_statistics(
        7, 100, 1.0, 10_000, MASTER_SEED + 3, (STREAM_EVAL_H0,)
    )
    pfa = float(np.mean(held_out.mp_edge > alpha))
    elapsed = time.perf_counter() - t0
    ok = abs(pfa - 0.1) <= 0.02
    report(4, ok, f"held-out pfa={pfa:.4f} vs target 0.1 (+/-0.02)", elapsed, 120.0)


@pytest.mark.acceptance
def test_criterion_5_detector_ordering():
    t0 = time.perf_counter()
    spec = spec_from_dict(
        {"experiment": "roc", "K": 7, "N": 100, "trials": 10_000,
         "calib_trials": 10_000, "snr_db": [-10.0],
         "target_pfa": [0.01, 0.02, 0.05, 0.1, 0.2, 0.5],
         "master_seed": MASTER_SEED + 4}
    )
    table = run_roc(spec)
    pd = {
        (row[0], row[1]): row[3] for row in table.rows
    }
    mp_pds = [pd[("mp_edge", p)] for p in spec.target_pfa]
    monotone = all(b >= a for a, b in zip(mp_pds, mp_pds[1:]))
    ordering = pd[("mp_edge", 0.05)] >= pd[("agm", 0.05)] - 0.02
    elapsed = time.perf_counter() - t0
    ok = monotone and ordering
    report(
        5, ok,
        f"Pd(mp_edge)={pd[('mp_edge', 0.05)]:.4f} >= Pd(agm)-0.02="
        f"{pd[('agm', 0.05)] - 0.02:.4f} at pfa=0.05, ROC monotone={monotone}",
        elapsed, 300.0,
    )


@pytest.mark.acceptance
def test_criterion_6_pd_vs_snr_monotone():
    t0 = time.perf_counter()
    trials = 10_000
    config = CalibrationConfig(
        trials=trials, target_pfa=0.1, master_seed=MASTER_SEED + 5,
        k_receivers=7, n_samples=100, sigma2=1.0,
    )
    alpha = threshold_for(simulate_h0(config, "mp_edge"), 0.1)
    snr_grid = list(range(-20, 1, 2)) + [10]
    pds = []
    for idx, snr in enumerate(snr_grid):
        h1 = simulate_detector_statistics(
            7, 100, 1.0, trials, MASTER_SEED + 5, (STREAM_EVAL_H1, idx),
            occupied=True, snr_db=float(snr),
        )
        pds.append(float(np.mean(h1.mp_edge > alpha)))
    # adjacent steps may dip only within twice the binomial standard error
    monotone = True
    for a, b in zip(pds[:-1], pds[1:]):
        se = np.sqrt(max(a * (1 - a), 1e-12) / trials)
        if b < a - 2 * se:
            monotone = False
    high_snr_ok = pds[-1] >= 0.99
    elapsed = time.perf_counter() - t0
    ok = monotone and high_snr_ok
    report(
        6, ok,
        f"monotone={monotone}, Pd(+10dB)={pds[-1]:.4f} (>=0.99), "
        f"grid Pd={['%.3f' % p for p in pds]}",
        elapsed, 300.0,
    )


@pytest.mark.acceptance
def test_criterion_7_rank_one_closed_form():
    t0 = time.perf_counter()
    rng = np.random.default_rng(MASTER_SEED + 6)
    worst = 0.0
    for _ in range(100):
        k = int(rng.integers(2, 10))
        h = rng.standard_normal(k) + 1j * rng.standard_normal(k)
        sigma2 = float(rng.uniform(0.1, 4.0))
        r = np.outer(h, h.conj()) + sigma2 * np.eye(k)
        spec = hermitian_eigenvalues(SampleCovariance(r))
        expected = np.concatenate([[np.sum(np.abs(h) ** 2) + sigma2], np.full(k - 1, sigma2)])
        worst = max(worst, float(np.max(np.abs(spec.values - expected) / expected)))
    elapsed = time.perf_counter() - t0
    report(7, worst <= 1e-8, f"worst relative eigenvalue error={worst:.2e} (<=1e-8)", elapsed, 30.0)


@pytest.mark.acceptance
def test_criterion_8_cli_determinism(tmp_path):
    import json

    t0 = time.perf_counter()
    configs = {
        "mp-check": {"K": [7], "N": [100], "trials": 10},
        "noise-error-equal": {"trials": 5, "subband_counts": [4, 8], "snr_db": [-5.0]},
        "noise-error-adaptive": {"trials": 5, "snr_db": [-5.0]},
        "pfa-curve": {"calib_trials": 200, "detector": "mp_edge"},
        "roc": {"trials": 200, "calib_trials": 200, "snr_db": [-10.0],
                "target_pfa": [0.1]},
        "pd-vs-snr": {"trials": 200, "calib_trials": 200, "snr_db": [-10.0, 0.0],
                      "target_pfa": [0.1]},
    }
    failures = []
    for experiment, extra in configs.items():
        out = tmp_path / f"{experiment}.csv"
        cfg_path = tmp_path / f"cfg-{experiment}.json"
        cfg_path.write_text(
            json.dumps({"master_seed": 55, "out": str(out), **extra})
        )
        code = cli_main([experiment, "--config", str(cfg_path)])
        if code != 0:
            failures.append(f"{experiment}: exit {code}")
            continue
        first = out.read_bytes()
        sidecar = out.with_suffix(".json")
        first_sidecar = sidecar.read_bytes() if sidecar.exists() else None
        code = cli_main([experiment, "--config", str(cfg_path)])
        if code != 0:
            failures.append(f"{experiment}: re-run exit {code}")
            continue
        if out.read_bytes() != first:
            failures.append(f"{experiment}: CSV bytes differ between runs")
        if first_sidecar is not None and sidecar.read_bytes() != first_sidecar:
            failures.append(f"{experiment}: sidecar bytes differ between runs")
    elapsed = time.perf_counter() - t0
    report(
        8, not failures,
        "all 6 experiments byte-identical on re-run" if not failures else "; ".join(failures),
        elapsed, 300.0,
    )
