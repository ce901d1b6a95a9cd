"""Monte Carlo threshold calibration for the detector statistics.

The idle-hypothesis distribution of a statistic is simulated once, stored
as a sorted sample, and inverted empirically: the threshold for a target
false-alarm probability p is the (1 - p) interpolated quantile. Curves can
be persisted to CSV (with a JSON config sidecar) and reloaded bit-exactly.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import asdict, dataclass

import numpy as np

from .detectors import DETECTOR_KINDS
from .errors import DegenerateCalibrationWarning, DomainError
from .montecarlo import simulate_detector_statistics
from .seeding import STREAM_CALIBRATION


@dataclass(frozen=True)
class CalibrationConfig:
    trials: int
    target_pfa: float
    master_seed: int
    k_receivers: int
    n_samples: int
    sigma2: float
    sigma2_mode: str = "oracle"

    def __post_init__(self):
        if self.trials < 100:
            raise DomainError("calibration needs at least 100 trials")
        if not (0.0 < self.target_pfa < 1.0):
            raise DomainError("target_pfa must lie strictly between 0 and 1")
        if self.sigma2_mode not in ("oracle", "estimated"):
            raise DomainError(f"unknown sigma2_mode: {self.sigma2_mode!r}")


@dataclass(frozen=True)
class CalibrationCurve:
    """Sorted idle-hypothesis statistics defining the Pfa-vs-threshold curve."""

    h0_statistics: np.ndarray
    detector: str
    config: CalibrationConfig

    def __post_init__(self):
        stats = np.asarray(self.h0_statistics, dtype=float)
        if len(stats) < 100:
            raise DomainError("calibration curve needs at least 100 samples")
        if not np.all(np.isfinite(stats)):
            raise DomainError("calibration statistics must be finite")
        if np.any(np.diff(stats) < 0.0):
            raise DomainError("calibration statistics must be sorted ascending")
        stats.setflags(write=False)
        object.__setattr__(self, "h0_statistics", stats)

    @property
    def count(self) -> int:
        return len(self.h0_statistics)


def simulate_h0(config: CalibrationConfig, detector: str) -> CalibrationCurve:
    """Simulate noise-only frames and collect the chosen statistic, sorted."""
    if detector not in DETECTOR_KINDS:
        raise DomainError(f"unknown detector kind: {detector!r}")
    stats = simulate_detector_statistics(
        config.k_receivers,
        config.n_samples,
        config.sigma2,
        config.trials,
        config.master_seed,
        STREAM_CALIBRATION,
        occupied=False,
        sigma2_mode=config.sigma2_mode,
    )
    return CalibrationCurve(np.sort(stats.by_kind(detector)), detector, config)


def pfa_at(curve: CalibrationCurve, alpha: float) -> float:
    """Empirical false-alarm probability: fraction of H0 statistics > alpha."""
    above = curve.count - np.searchsorted(curve.h0_statistics, alpha, side="right")
    return float(above) / curve.count


def threshold_for(curve: CalibrationCurve, target_pfa: float) -> float:
    """Threshold whose empirical Pfa matches the target within 1/count.

    The (1 - target) quantile of the H0 sample, linearly interpolated
    between bracketing order statistics. A degenerate curve (all samples
    identical) returns that value and emits DegenerateCalibrationWarning.
    """
    if not (0.0 < target_pfa < 1.0):
        raise DomainError("target_pfa must lie strictly between 0 and 1")
    stats = curve.h0_statistics
    if stats[0] == stats[-1]:
        warnings.warn(
            "calibration curve is degenerate (all statistics equal)",
            DegenerateCalibrationWarning,
        )
        return float(stats[0])
    return float(np.quantile(stats, 1.0 - target_pfa, method="linear"))


def save_curve(curve: CalibrationCurve, csv_path) -> None:
    """Persist a curve as trial,statistic CSV plus a JSON config sidecar."""
    csv_path = str(csv_path)
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["trial", "statistic"])
        for i, value in enumerate(curve.h0_statistics):
            writer.writerow([i, repr(float(value))])
    sidecar = {
        "detector": curve.detector,
        "config": asdict(curve.config),
    }
    with open(_sidecar_path(csv_path), "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_curve(csv_path) -> CalibrationCurve:
    """Reload a persisted curve; statistics round-trip bit-exactly."""
    csv_path = str(csv_path)
    with open(_sidecar_path(csv_path)) as fh:
        sidecar = json.load(fh)
    config = CalibrationConfig(**sidecar["config"])
    with open(csv_path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["trial", "statistic"]:
            raise DomainError(f"unexpected calibration CSV header: {header}")
        values = np.array([float(row[1]) for row in reader])
    return CalibrationCurve(values, sidecar["detector"], config)


def _sidecar_path(csv_path: str) -> str:
    base = csv_path[:-4] if csv_path.endswith(".csv") else csv_path
    return base + ".json"
