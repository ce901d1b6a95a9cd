"""Synthetic scenes, receiver frames and PSD estimation.

All generators are pure functions of their arguments plus an explicit
64-bit seed; nothing touches global RNG state. Complex Gaussian draws use
independent real and imaginary parts of variance var/2 each, drawn in a
fixed order (documented per generator), so outputs are bit-reproducible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .seeding import make_rng


def complex_normal(rng: np.random.Generator, shape, variance: float) -> np.ndarray:
    """Circularly symmetric complex Gaussian draws with E|z|^2 = variance."""
    scale = np.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


@dataclass(frozen=True)
class ReceiverArray:
    """K cooperative receivers: complex channel gains and a common noise variance."""

    gains: np.ndarray
    sigma2: float

    def __post_init__(self):
        gains = np.asarray(self.gains, dtype=complex)
        if gains.ndim != 1 or len(gains) < 1:
            raise DomainError("gains must be a non-empty 1-d sequence")
        if not (self.sigma2 > 0.0):
            raise DomainError(f"sigma2 must be positive, got {self.sigma2}")
        gains.setflags(write=False)
        object.__setattr__(self, "gains", gains)

    @property
    def k_receivers(self) -> int:
        return len(self.gains)

    @property
    def snr(self) -> float:
        """Average per-receiver SNR: (sum |h_i|^2 / K) / sigma2."""
        return float(np.mean(np.abs(self.gains) ** 2) / self.sigma2)


@dataclass(frozen=True)
class SampleMatrix:
    """K x N receiver snapshot, already scaled by 1/sqrt(N)."""

    entries: np.ndarray
    k_receivers: int
    n_samples: int

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=complex)
        if entries.shape != (self.k_receivers, self.n_samples):
            raise DomainError(
                f"entries shape {entries.shape} does not match "
                f"({self.k_receivers}, {self.n_samples})"
            )
        if self.k_receivers < 1 or self.n_samples < 1:
            raise DomainError("sample matrix needs at least one receiver and sample")
        if not np.all(np.isfinite(entries.view(float))):
            raise DomainError("sample matrix contains non-finite entries")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)


def generate_narrowband_frame(
    array: ReceiverArray, n_samples: int, occupied: bool, seed: int
) -> SampleMatrix:
    """One cooperative snapshot of a single narrowband channel.

    Occupied: y_i(n) = h_i s(n) + z_i(n) with s unit-variance complex
    Gaussian shared across receivers; idle: noise only. The result carries
    the 1/sqrt(N) scaling. Draw order: s (if occupied), then the K x N
    noise block.
    """
    if n_samples < 1:
        raise DomainError("n_samples must be >= 1")
    rng = make_rng(seed)
    k = array.k_receivers
    if occupied:
        s = complex_normal(rng, n_samples, 1.0)
        y = np.outer(array.gains, s) + complex_normal(rng, (k, n_samples), array.sigma2)
    else:
        y = complex_normal(rng, (k, n_samples), array.sigma2)
    return SampleMatrix(y / np.sqrt(n_samples), k, n_samples)


@dataclass(frozen=True)
class Subband:
    start: float
    end: float
    occupied: bool
    power: float


@dataclass(frozen=True)
class SpectrumScene:
    """A wideband scene: contiguous subbands tiling [0, total_bandwidth].

    `power` is the flat in-band PSD level of the primary signal, in the
    same units as `noise_sigma2` (white noise of variance v has PSD level
    v across the full normalized band).
    """

    total_bandwidth: float
    subbands: tuple[Subband, ...]
    noise_sigma2: float

    def __post_init__(self):
        if not (0.0 < self.total_bandwidth <= 1.0):
            raise DomainError("total_bandwidth must lie in (0, 1]")
        if not (self.noise_sigma2 > 0.0):
            raise DomainError("noise_sigma2 must be positive")
        subbands = tuple(self.subbands)
        if not subbands:
            raise DomainError("scene needs at least one subband")
        edge = 0.0
        for sb in subbands:
            if abs(sb.start - edge) > 1e-9:
                raise DomainError("subbands must be contiguous and ordered from 0")
            if sb.end <= sb.start:
                raise DomainError("subband widths must be positive")
            if sb.occupied and not (sb.power > 0.0):
                raise DomainError("occupied subbands need positive power")
            if not sb.occupied and sb.power != 0.0:
                raise DomainError("idle subbands must have zero power")
            edge = sb.end
        if abs(edge - self.total_bandwidth) > 1e-9:
            raise DomainError("subbands must tile [0, total_bandwidth]")
        if all(sb.occupied for sb in subbands):
            raise DomainError("scene must contain at least one idle subband")
        object.__setattr__(self, "subbands", subbands)

    @classmethod
    def from_json(cls, path) -> "SpectrumScene":
        with open(path) as fh:
            raw = json.load(fh)
        return cls.from_dict(raw)

    @classmethod
    def from_dict(cls, raw: dict) -> "SpectrumScene":
        try:
            subbands = tuple(
                Subband(
                    float(sb["start"]),
                    float(sb["end"]),
                    bool(sb["occupied"]),
                    float(sb["power"]),
                )
                for sb in raw["subbands"]
            )
            return cls(float(raw["total_bandwidth"]), subbands, float(raw["noise_sigma2"]))
        except (KeyError, TypeError) as exc:
            raise DomainError(f"malformed scene description: {exc}") from exc

    def to_dict(self) -> dict:
        return {
            "total_bandwidth": self.total_bandwidth,
            "subbands": [
                {"start": sb.start, "end": sb.end, "occupied": sb.occupied, "power": sb.power}
                for sb in self.subbands
            ],
            "noise_sigma2": self.noise_sigma2,
        }


def generate_wideband_signal(scene: SpectrumScene, n_total: int, seed: int) -> np.ndarray:
    """Complex baseband time series for a scene.

    White Gaussian noise of variance noise_sigma2 plus, per occupied
    subband, a band-limited Gaussian component synthesized by frequency
    masking: i.i.d. unit complex Gaussian spectrum on the in-band DFT
    bins, zero elsewhere, inverse transformed and scaled so the in-band
    PSD level equals the subband power. Draw order: noise first, then
    occupied subbands in scene order.
    """
    if n_total < 4 * len(scene.subbands):
        raise DomainError("n_total must be at least 4x the number of subbands")
    rng = make_rng(seed)
    signal = complex_normal(rng, n_total, scene.noise_sigma2)
    for sb in scene.subbands:
        if not sb.occupied:
            continue
        b0 = int(round(sb.start * n_total))
        b1 = int(round(sb.end * n_total))
        if b1 <= b0:
            raise DomainError(
                f"subband [{sb.start}, {sb.end}) maps to zero DFT bins at n={n_total}"
            )
        spectrum = np.zeros(n_total, dtype=complex)
        spectrum[b0:b1] = complex_normal(rng, b1 - b0, 1.0)
        # ifft scaling: sqrt(power * n) makes the in-band PSD level = power
        signal = signal + np.fft.ifft(spectrum) * np.sqrt(sb.power * n_total)
    return signal


@dataclass(frozen=True)
class PsdEstimate:
    """Averaged periodogram over [0, 1) cycles/sample."""

    freqs: np.ndarray
    power: np.ndarray
    segment_length: int
    overlap: float

    def __post_init__(self):
        freqs = np.asarray(self.freqs, dtype=float)
        power = np.asarray(self.power, dtype=float)
        if freqs.shape != power.shape or freqs.ndim != 1:
            raise DomainError("freqs and power must be matching 1-d arrays")
        if np.any(power < 0.0):
            raise DomainError("PSD values must be nonnegative")
        freqs.setflags(write=False)
        power.setflags(write=False)
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "power", power)


def estimate_psd(signal: np.ndarray, segment_length: int, overlap: float) -> PsdEstimate:
    """Welch-style averaged periodogram with a periodic Hann window.

    Scaling is chosen so white noise of variance v gives a flat estimate
    at level v: each segment contributes |FFT(w x)|^2 / sum(w^2). Output
    covers the full band as `segment_length` bins at frequencies
    j/segment_length, j = 0..segment_length-1.
    """
    signal = np.asarray(signal)
    if segment_length < 1 or segment_length > len(signal):
        raise DomainError("segment_length must be in [1, len(signal)]")
    if not (0.0 <= overlap < 1.0):
        raise DomainError("overlap must lie in [0, 1)")
    hop = max(1, int(segment_length * (1.0 - overlap)))
    window = 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(segment_length) / segment_length)
    wnorm = np.sum(window**2)
    n_segments = (len(signal) - segment_length) // hop + 1
    acc = np.zeros(segment_length)
    for i in range(n_segments):
        seg = signal[i * hop : i * hop + segment_length]
        acc += np.abs(np.fft.fft(window * seg)) ** 2
    power = acc / (n_segments * wnorm)
    freqs = np.arange(segment_length) / segment_length
    return PsdEstimate(freqs, power, segment_length, overlap)
