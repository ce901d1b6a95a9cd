"""Experiment harness: wires the library into reproducible CSV experiments.

Every experiment is a pure function of its resolved configuration and the
master seed; output files embed a config hash so stale results cannot be
silently overwritten with different settings.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import __version__, backends
from .calibration import (
    CalibrationConfig,
    CalibrationCurve,
    save_curve,
    simulate_h0,
    threshold_for,
)
from .errors import ConfigError, DegeneratePartitionError, DomainError
from .montecarlo import simulate_detector_statistics
from .noise import UsagePrior, estimate_m, estimate_m_uniform, estimate_noise_scenario3
from .noise import noise_variance as pooled_noise_variance
from .noise import subband_energies
from .rmt import MarchenkoPasturLaw, build_esd, ks_distance
from .seeding import (
    STREAM_CALIBRATION,
    STREAM_EVAL_H0,
    STREAM_EVAL_H1,
    STREAM_MP_CHECK,
    STREAM_SCENE,
    derive_seed,
)
from .simulate import ReceiverArray, SpectrumScene, Subband, generate_narrowband_frame

EXPERIMENTS = (
    "mp-check",
    "noise-error-equal",
    "noise-error-adaptive",
    "pfa-curve",
    "roc",
    "pd-vs-snr",
)

_DETECTORS = ("mp_edge", "energy", "agm")

_SPEC_DEFAULTS = {
    "K": 7,
    "N": 100,
    "trials": 10_000,
    "calib_trials": 10_000,
    "snr_db": [float(s) for s in range(-20, 1, 2)],
    "subband_counts": [4, 8, 16, 32, 64],
    "target_pfa": [0.01, 0.02, 0.05, 0.1, 0.2, 0.5],
    "master_seed": 24_617,
    "sigma2": 1.0,
    "sigma2_mode": "oracle",
    "detector": "mp_edge",
    "record_samples": 4096,
    "scene_file": None,
    "prior": None,
    "out": None,
}


@dataclass(frozen=True)
class ExperimentSpec:
    experiment: str
    k_receivers: list[int]
    n_samples: list[int]
    trials: int
    calib_trials: int
    snr_db: list[float]
    subband_counts: list[int]
    target_pfa: list[float]
    master_seed: int
    sigma2: float
    sigma2_mode: str
    detector: str
    record_samples: int
    scene_file: str | None
    prior: dict | None
    out: str | None

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment: {self.experiment!r}")
        if self.trials < 1 or self.calib_trials < 1:
            raise ConfigError("trials and calib_trials must be >= 1")
        if len(self.k_receivers) != len(self.n_samples):
            raise ConfigError("K and N lists must have equal length")
        if any(k < 1 for k in self.k_receivers) or any(n < 1 for n in self.n_samples):
            raise ConfigError("K and N must be >= 1")
        if not all(math.isfinite(s) for s in self.snr_db):
            raise ConfigError("snr_db values must be finite")
        if any(not (0.0 < p < 1.0) for p in self.target_pfa):
            raise ConfigError("target_pfa values must lie strictly in (0, 1)")
        if not (self.sigma2 > 0.0):
            raise ConfigError("sigma2 must be positive")
        if self.sigma2_mode not in ("oracle", "estimated"):
            raise ConfigError(f"unknown sigma2_mode: {self.sigma2_mode!r}")
        if self.detector not in _DETECTORS:
            raise ConfigError(f"unknown detector: {self.detector!r}")
        if self.record_samples < 16:
            raise ConfigError("record_samples must be >= 16")

    @property
    def k_single(self) -> int:
        return self.k_receivers[0]

    @property
    def n_single(self) -> int:
        return self.n_samples[0]

    def resolved_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "K": list(self.k_receivers),
            "N": list(self.n_samples),
            "trials": self.trials,
            "calib_trials": self.calib_trials,
            "snr_db": list(self.snr_db),
            "subband_counts": list(self.subband_counts),
            "target_pfa": list(self.target_pfa),
            "master_seed": self.master_seed,
            "sigma2": self.sigma2,
            "sigma2_mode": self.sigma2_mode,
            "detector": self.detector,
            "record_samples": self.record_samples,
            "scene_file": self.scene_file,
            "prior": self.prior,
        }

    def config_hash(self) -> str:
        canon = json.dumps(self.resolved_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()


def spec_from_dict(raw: dict, experiment: str | None = None) -> ExperimentSpec:
    """Build a spec from a config mapping, rejecting unknown keys."""
    allowed = set(_SPEC_DEFAULTS) | {"experiment"}
    unknown = set(raw) - allowed
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    merged = dict(_SPEC_DEFAULTS)
    merged.update({k: v for k, v in raw.items() if v is not None})
    exp = experiment or raw.get("experiment")
    if exp is None:
        raise ConfigError("no experiment named in config or on the command line")
    if "experiment" in raw and experiment and raw["experiment"] != experiment:
        raise ConfigError(
            f"config names experiment {raw['experiment']!r} but {experiment!r} was requested"
        )
    k = merged["K"]
    n = merged["N"]
    k_list = [int(v) for v in (k if isinstance(k, (list, tuple)) else [k])]
    n_list = [int(v) for v in (n if isinstance(n, (list, tuple)) else [n])]
    try:
        return ExperimentSpec(
            experiment=str(exp),
            k_receivers=k_list,
            n_samples=n_list,
            trials=int(merged["trials"]),
            calib_trials=int(merged["calib_trials"]),
            snr_db=[float(s) for s in merged["snr_db"]],
            subband_counts=[int(c) for c in merged["subband_counts"]],
            target_pfa=[float(p) for p in merged["target_pfa"]],
            master_seed=int(merged["master_seed"]),
            sigma2=float(merged["sigma2"]),
            sigma2_mode=str(merged["sigma2_mode"]),
            detector=str(merged["detector"]),
            record_samples=int(merged["record_samples"]),
            scene_file=merged["scene_file"],
            prior=merged["prior"],
            out=merged["out"],
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"malformed config value: {exc}") from exc


@dataclass
class ResultTable:
    columns: list[str]
    rows: list[tuple]
    provenance: dict = field(default_factory=dict)


def _format_cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _existing_hash(path: str) -> str | None:
    try:
        with open(path) as fh:
            for line in fh:
                if line.startswith("# config_hash="):
                    return line.strip().split("=", 1)[1]
                if not line.startswith("#"):
                    break
    except OSError:
        return None
    return None


def write_csv(table: ResultTable, path: str, force: bool = False) -> None:
    """Write a table with provenance comment lines and an overwrite guard."""
    new_hash = table.provenance.get("config_hash", "")
    if os.path.exists(path) and not force:
        old = _existing_hash(path)
        if old is not None and old != new_hash:
            raise ConfigError(
                f"{path} holds results for config hash {old[:12]}..., "
                "pass force=True/--force to overwrite"
            )
    lines = [f"# {key}={table.provenance[key]}" for key in sorted(table.provenance)]
    lines.append(",".join(table.columns))
    for row in table.rows:
        lines.append(",".join(_format_cell(v) for v in row))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def _provenance(spec: ExperimentSpec) -> dict:
    return {
        "config_hash": spec.config_hash(),
        "master_seed": spec.master_seed,
        "version": __version__,
    }


def default_scene(noise_sigma2: float = 1.0, snr_db: float = -5.0) -> SpectrumScene:
    """32-slot scene with four occupied slots spread one per quarter band.

    Every quarter of the band contains one occupied slot, so coarse
    equal-width analysis finds no clean subband while fine analysis finds
    many; 28 of 32 slots stay idle.
    """
    power = 10.0 ** (snr_db / 10.0) * noise_sigma2
    occupied = {4, 12, 20, 28}
    subbands = tuple(
        Subband(
            i / 32.0,
            (i + 1) / 32.0,
            i in occupied,
            power if i in occupied else 0.0,
        )
        for i in range(32)
    )
    return SpectrumScene(1.0, subbands, noise_sigma2)


def _load_scene(spec: ExperimentSpec) -> SpectrumScene:
    if spec.scene_file is not None:
        return SpectrumScene.from_json(spec.scene_file)
    return default_scene(noise_sigma2=spec.sigma2, snr_db=spec.snr_db[0])


def run_mp_check(spec: ExperimentSpec) -> ResultTable:
    """Per (K, N) pair: KS distance of noise eigenvalues to the MP law."""
    rows = []
    for pair_idx, (k, n) in enumerate(zip(spec.k_receivers, spec.n_samples)):
        law = MarchenkoPasturLaw(spec.sigma2, k / n)
        lo = law.a - 0.05 * law.b
        hi = law.b + 0.05 * law.b
        array = ReceiverArray(np.zeros(k, dtype=complex), spec.sigma2)
        chunk = max(1, (1 << 25) // (k * n))  # cap frame stacks near 0.5 GiB
        for start in range(0, spec.trials, chunk):
            stop = min(start + chunk, spec.trials)
            stack = np.empty((stop - start, k, n), dtype=np.complex128)
            for i, trial in enumerate(range(start, stop)):
                seed = derive_seed(spec.master_seed, STREAM_MP_CHECK, pair_idx, trial)
                stack[i] = generate_narrowband_frame(array, n, False, seed).entries
            eigs = backends.batch_cov_eigvals(stack)
            for i, trial in enumerate(range(start, stop)):
                esd = build_esd(eigs[i])
                ks = ks_distance(esd, law)
                frac = float(np.mean((eigs[i] >= lo) & (eigs[i] <= hi)))
                rows.append((k, n, trial, ks, frac))
    return ResultTable(["K", "N", "trial", "ks", "in_support_frac"], rows, _provenance(spec))


def _scene_prior(spec: ExperimentSpec, k: int) -> UsagePrior | None:
    if spec.prior is None:
        return None
    return UsagePrior.from_dict(spec.prior, k)


def run_noise_error(spec: ExperimentSpec, mode: str) -> ResultTable:
    """Relative noise-variance error per trial, equal-width or adaptive."""
    if mode not in ("equal", "adaptive"):
        raise ConfigError(f"unknown noise-error mode: {mode!r}")
    scene = _load_scene(spec)
    true_sigma2 = scene.noise_sigma2
    # rows are emitted grid-point-major (subband count, then trial) so the
    # output is independent of how trials are scheduled
    per_k: dict[int, list] = {k: [] for k in spec.subband_counts}
    adaptive_rows = []
    for trial in range(spec.trials):
        seed = derive_seed(spec.master_seed, STREAM_SCENE, trial)
        signal = _wideband_record(scene, spec.record_samples, seed)
        if mode == "equal":
            for k in spec.subband_counts:
                per_k[k].append(
                    _noise_error_row("equal", k, trial, signal, true_sigma2, spec)
                )
        else:
            try:
                estimate = estimate_noise_scenario3(signal, prior=spec.prior)
                k = estimate.m_hat + len(estimate.occupied_variances)
                rel = abs(estimate.sigma2_hat - true_sigma2) / true_sigma2
                adaptive_rows.append(
                    ("adaptive", k, trial, estimate.sigma2_hat, rel, "ok")
                )
            except (DomainError, DegeneratePartitionError):
                adaptive_rows.append(("adaptive", 0, trial, math.nan, math.nan, "failed"))
    if mode == "equal":
        rows = [row for k in spec.subband_counts for row in per_k[k]]
    else:
        rows = adaptive_rows
    return ResultTable(
        ["mode", "k", "trial", "sigma2_hat", "rel_error", "status"],
        rows,
        _provenance(spec),
    )


def _wideband_record(scene: SpectrumScene, n_total: int, seed: int) -> np.ndarray:
    from .simulate import generate_wideband_signal

    return generate_wideband_signal(scene, n_total, seed)


def _noise_error_row(mode, k, trial, signal, true_sigma2, spec):
    try:
        usable = len(signal) - (len(signal) % k)
        energies = subband_energies(signal[:usable], k)
        prior = _scene_prior(spec, k)
        if prior is not None:
            m_hat = estimate_m(energies, prior)
            scenario = "known_prior"
        else:
            m_hat = estimate_m_uniform(energies)
            scenario = "known_count"
        estimate = pooled_noise_variance(energies, m_hat, scenario)
        rel = abs(estimate.sigma2_hat - true_sigma2) / true_sigma2
        return (mode, k, trial, estimate.sigma2_hat, rel, "ok")
    except DomainError:
        return (mode, k, trial, math.nan, math.nan, "failed")


def _calibration_curves(spec: ExperimentSpec) -> dict[str, CalibrationCurve]:
    """One H0 calibration pass shared by all detectors."""
    stats = simulate_detector_statistics(
        spec.k_single,
        spec.n_single,
        spec.sigma2,
        spec.calib_trials,
        spec.master_seed,
        (STREAM_CALIBRATION,),
        occupied=False,
        sigma2_mode=spec.sigma2_mode,
    )
    config = CalibrationConfig(
        trials=spec.calib_trials,
        target_pfa=spec.target_pfa[0],
        master_seed=spec.master_seed,
        k_receivers=spec.k_single,
        n_samples=spec.n_single,
        sigma2=spec.sigma2,
        sigma2_mode=spec.sigma2_mode,
    )
    return {
        kind: CalibrationCurve(np.sort(stats.by_kind(kind)), kind, config)
        for kind in _DETECTORS
    }


def run_roc(spec: ExperimentSpec) -> ResultTable:
    """Pd versus target Pfa for every detector at one SNR."""
    snr_db = spec.snr_db[0]
    curves = _calibration_curves(spec)
    eval_h0 = simulate_detector_statistics(
        spec.k_single, spec.n_single, spec.sigma2, spec.trials,
        spec.master_seed, (STREAM_EVAL_H0,), occupied=False,
        sigma2_mode=spec.sigma2_mode,
    )
    eval_h1 = simulate_detector_statistics(
        spec.k_single, spec.n_single, spec.sigma2, spec.trials,
        spec.master_seed, (STREAM_EVAL_H1,), occupied=True, snr_db=snr_db,
        sigma2_mode=spec.sigma2_mode,
    )
    rows = []
    for kind in _DETECTORS:
        h0 = eval_h0.by_kind(kind)
        h1 = eval_h1.by_kind(kind)
        for target in spec.target_pfa:
            alpha = threshold_for(curves[kind], target)
            rows.append(
                (
                    kind,
                    target,
                    float(np.mean(h0 > alpha)),
                    float(np.mean(h1 > alpha)),
                    spec.trials,
                )
            )
    return ResultTable(
        ["detector", "target_pfa", "empirical_pfa", "pd", "trials"],
        rows,
        _provenance(spec),
    )


def run_pd_vs_snr(spec: ExperimentSpec) -> ResultTable:
    """Pd over an SNR grid at one calibrated threshold per detector."""
    target = spec.target_pfa[0]
    curves = _calibration_curves(spec)
    alphas = {kind: threshold_for(curves[kind], target) for kind in _DETECTORS}
    eval_h0 = simulate_detector_statistics(
        spec.k_single, spec.n_single, spec.sigma2, spec.trials,
        spec.master_seed, (STREAM_EVAL_H0,), occupied=False,
        sigma2_mode=spec.sigma2_mode,
    )
    empirical_pfa = {
        kind: float(np.mean(eval_h0.by_kind(kind) > alphas[kind]))
        for kind in _DETECTORS
    }
    rows = []
    for snr_idx, snr_db in enumerate(spec.snr_db):
        eval_h1 = simulate_detector_statistics(
            spec.k_single, spec.n_single, spec.sigma2, spec.trials,
            spec.master_seed, (STREAM_EVAL_H1, snr_idx), occupied=True,
            snr_db=snr_db, sigma2_mode=spec.sigma2_mode,
        )
        for kind in _DETECTORS:
            pd = float(np.mean(eval_h1.by_kind(kind) > alphas[kind]))
            rows.append((kind, snr_db, pd, empirical_pfa[kind]))
    return ResultTable(
        ["detector", "snr_db", "pd", "empirical_pfa"], rows, _provenance(spec)
    )


def run_pfa_curve(spec: ExperimentSpec, out_path: str, force: bool = False) -> None:
    """Simulate and persist one detector's H0 calibration curve."""
    config = CalibrationConfig(
        trials=spec.calib_trials,
        target_pfa=spec.target_pfa[0],
        master_seed=spec.master_seed,
        k_receivers=spec.k_single,
        n_samples=spec.n_single,
        sigma2=spec.sigma2,
        sigma2_mode=spec.sigma2_mode,
    )
    sidecar_path = (out_path[:-4] if out_path.endswith(".csv") else out_path) + ".json"
    if os.path.exists(sidecar_path) and not force:
        try:
            with open(sidecar_path) as fh:
                old = json.load(fh).get("config_hash")
        except (OSError, json.JSONDecodeError):
            old = None
        if old is not None and old != spec.config_hash():
            raise ConfigError(
                f"{out_path} holds a curve for config hash {old[:12]}..., "
                "pass --force to overwrite"
            )
    curve = simulate_h0(config, spec.detector)
    save_curve(curve, out_path)
    with open(sidecar_path) as fh:
        sidecar = json.load(fh)
    sidecar.update(_provenance(spec))
    with open(sidecar_path, "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")


def run_experiment(spec: ExperimentSpec, out_path: str, force: bool = False) -> None:
    """Dispatch an experiment and write its output file(s)."""
    if spec.experiment == "pfa-curve":
        run_pfa_curve(spec, out_path, force=force)
        return
    if spec.experiment == "mp-check":
        table = run_mp_check(spec)
    elif spec.experiment == "noise-error-equal":
        table = run_noise_error(spec, "equal")
    elif spec.experiment == "noise-error-adaptive":
        table = run_noise_error(spec, "adaptive")
    elif spec.experiment == "roc":
        table = run_roc(spec)
    elif spec.experiment == "pd-vs-snr":
        table = run_pd_vs_snr(spec)
    else:  # pragma: no cover - guarded in ExperimentSpec
        raise ConfigError(f"unknown experiment: {spec.experiment!r}")
    write_csv(table, out_path, force=force)
