"""Shared Monte Carlo trial machinery for calibration and experiments.

Each trial derives its own seed from (master_seed, stream_tag, index), so
trial order and chunking never affect results. Frames are generated per
trial with numpy, then handed to the active backend in chunks for the
covariance-eigenvalue step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import backends
from .errors import NumericalError
from .noise import estimate_m_uniform, noise_variance, subband_energies
from .rmt import mp_support
from .seeding import STREAM_GAINS, STREAM_SIGMA_RECORD, derive_seed, make_rng
from .simulate import ReceiverArray, complex_normal, generate_narrowband_frame

CHUNK_TRIALS = 2048

# Companion noise record used when sigma2 is estimated rather than known:
# one wideband noise capture per trial, split into equal subbands.
SIGMA_RECORD_SAMPLES = 4096
SIGMA_RECORD_SUBBANDS = 16


@dataclass(frozen=True)
class TrialStatistics:
    """Per-trial detector statistics under one hypothesis."""

    mp_edge: np.ndarray
    energy: np.ndarray
    agm: np.ndarray
    sigma2_used: np.ndarray

    def by_kind(self, kind: str) -> np.ndarray:
        return getattr(self, kind)


def _draw_gains(
    rng: np.random.Generator, k_receivers: int, sigma2: float, snr_db: float
) -> np.ndarray:
    """Random complex gains rescaled to hit the target average SNR exactly."""
    h = complex_normal(rng, k_receivers, 1.0)
    snr_lin = 10.0 ** (snr_db / 10.0)
    h *= np.sqrt(snr_lin * k_receivers * sigma2 / np.sum(np.abs(h) ** 2))
    return h


def _estimate_sigma2(
    master_seed: int, stream: tuple[int, ...], trial: int, sigma2: float
) -> float:
    """Blind noise estimate from a companion white-noise record."""
    rng = make_rng(derive_seed(master_seed, STREAM_SIGMA_RECORD, *stream, trial))
    record = complex_normal(rng, SIGMA_RECORD_SAMPLES, sigma2)
    energies = subband_energies(record, SIGMA_RECORD_SUBBANDS)
    return noise_variance(energies, estimate_m_uniform(energies)).sigma2_hat


def simulate_detector_statistics(
    k_receivers: int,
    n_samples: int,
    sigma2: float,
    trials: int,
    master_seed: int,
    stream: int | tuple[int, ...],
    occupied: bool = False,
    snr_db: float = 0.0,
    sigma2_mode: str = "oracle",
) -> TrialStatistics:
    """Run `trials` independent frames and return all three statistics.

    Under the occupied hypothesis, channel gains are redrawn per trial
    (stream STREAM_GAINS) and rescaled to the exact target SNR. In
    sigma2_mode="estimated" the noise variance fed to the normalized
    statistics comes from a per-trial companion noise record instead of
    the true value.
    """
    stream_t = stream if isinstance(stream, tuple) else (stream,)
    mp_vals = np.empty(trials)
    en_vals = np.empty(trials)
    agm_vals = np.empty(trials)
    s2_vals = np.empty(trials)
    _, edge_unit = mp_support(1.0, k_receivers / n_samples)
    idle_array = ReceiverArray(np.zeros(k_receivers, dtype=complex), sigma2)

    for start in range(0, trials, CHUNK_TRIALS):
        stop = min(start + CHUNK_TRIALS, trials)
        count = stop - start
        stack = np.empty((count, k_receivers, n_samples), dtype=np.complex128)
        for i, trial in enumerate(range(start, stop)):
            if occupied:
                gains_rng = make_rng(
                    derive_seed(master_seed, STREAM_GAINS, *stream_t, trial)
                )
                array = ReceiverArray(
                    _draw_gains(gains_rng, k_receivers, sigma2, snr_db), sigma2
                )
            else:
                array = idle_array
            frame_seed = derive_seed(master_seed, *stream_t, trial)
            stack[i] = generate_narrowband_frame(
                array, n_samples, occupied, frame_seed
            ).entries
            if sigma2_mode == "estimated":
                s2_vals[trial] = _estimate_sigma2(master_seed, stream_t, trial, sigma2)
            else:
                s2_vals[trial] = sigma2
        eigs = backends.batch_cov_eigvals(stack)
        if np.any(eigs[:, 0] <= 0.0):
            raise NumericalError(
                "rank-deficient sample covariance in Monte Carlo loop (K > N?)"
            )
        s2 = s2_vals[start:stop]
        traces = np.sum(np.abs(stack) ** 2, axis=(1, 2))
        mp_vals[start:stop] = eigs[:, -1] / (s2 * edge_unit)
        en_vals[start:stop] = traces / (k_receivers * s2)
        agm_vals[start:stop] = np.mean(eigs, axis=1) / np.exp(
            np.mean(np.log(eigs), axis=1)
        )
    return TrialStatistics(mp_vals, en_vals, agm_vals, s2_vals)
