"""Sample covariance, eigen-spectrum and detection statistics.

All statistics share a "large means occupied" orientation so a single
threshold rule serves every detector: decide occupied iff T > alpha
(strictly; equality stays idle).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericalError
from .rmt import mp_support
from .simulate import SampleMatrix

H0 = "H0"
H1 = "H1"

DETECTOR_KINDS = ("mp_edge", "energy", "agm")


@dataclass(frozen=True)
class SampleCovariance:
    """K x K Hermitian matrix R = Y Y^H built from a scaled sample matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DomainError("covariance must be square")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def k(self) -> int:
        return self.matrix.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)


def sample_covariance(y: SampleMatrix) -> SampleCovariance:
    """R = Y Y^H, re-symmetrized to kill roundoff asymmetry."""
    entries = y.entries
    if not np.all(np.isfinite(entries.view(float))):
        raise DomainError("sample matrix contains non-finite entries")
    r = entries @ entries.conj().T
    r = (r + r.conj().T) / 2.0
    return SampleCovariance(r)


@dataclass(frozen=True)
class EigenSpectrum:
    """All eigenvalues of a sample covariance, sorted descending.

    residual_bound is the largest ||R v - lambda v|| over the computed
    eigenpairs and must not exceed 1e-8 * trace(R).
    """

    values: np.ndarray
    residual_bound: float

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def k(self) -> int:
        return len(self.values)


def hermitian_eigenvalues(r: SampleCovariance) -> EigenSpectrum:
    """Eigenvalues of R with an audited residual bound.

    Raises NumericalError if the solver does not converge or the residual
    contract (1e-8 relative to the trace) is not met.
    """
    if r.k > 10_000:
        raise DomainError("dense eigensolve is limited to K <= 10000")
    try:
        w, v = np.linalg.eigh(r.matrix)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition failed: {exc}") from exc
    residual = float(np.max(np.linalg.norm(r.matrix @ v - v * w, axis=0)))
    scale = abs(r.trace)
    if scale > 0.0 and residual > 1e-8 * scale:
        raise NumericalError(
            f"eigen residual {residual:.3e} exceeds 1e-8 * trace = {1e-8 * scale:.3e}"
        )
    return EigenSpectrum(w[::-1].copy(), residual)


def mp_edge_statistic(
    spectrum: EigenSpectrum, sigma2_hat: float, k_receivers: int, n_samples: int
) -> float:
    """Largest eigenvalue over the Marchenko-Pastur upper edge.

    The normalizer is b = sigma2_hat (1 + sqrt(K/N))^2, the upper support
    edge of the noise-only eigenvalue bulk, so values near or below one
    indicate noise and values above one indicate a primary signal.
    """
    if not (sigma2_hat > 0.0):
        raise DomainError("sigma2_hat must be positive")
    if k_receivers < 1 or n_samples < 1:
        raise DomainError("K and N must be >= 1")
    _, edge = mp_support(sigma2_hat, k_receivers / n_samples)
    return float(spectrum.values[0] / edge)


def energy_statistic(y: SampleMatrix, sigma2_hat: float) -> float:
    """Average per-receiver power over the noise estimate: trace(YY^H)/(K sigma2)."""
    if not (sigma2_hat > 0.0):
        raise DomainError("sigma2_hat must be positive")
    total = float(np.sum(np.abs(y.entries) ** 2))
    return total / (y.k_receivers * sigma2_hat)


def agm_statistic(spectrum: EigenSpectrum) -> float:
    """Arithmetic over geometric mean of the eigenvalues (>= 1 by AM-GM).

    Oriented so larger values indicate signal. Requires a strictly
    positive spectrum; rank-deficient covariances should be ridged by the
    caller (e.g. add 1e-12 * trace / K) before calling.
    """
    vals = spectrum.values
    if np.any(vals <= 0.0):
        raise DomainError("agm statistic needs strictly positive eigenvalues")
    arithmetic = float(np.mean(vals))
    geometric = math.exp(float(np.mean(np.log(vals))))
    return arithmetic / geometric


def decide(value: float, threshold: float) -> str:
    """H1 iff the statistic strictly exceeds the threshold."""
    if not (math.isfinite(value) and math.isfinite(threshold)):
        raise DomainError("statistic and threshold must be finite")
    return H1 if value > threshold else H0


@dataclass(frozen=True)
class DetectorStatistic:
    """A statistic value with its threshold and the resulting decision."""

    value: float
    kind: str
    threshold: float
    decision: str

    def __post_init__(self):
        if self.kind not in DETECTOR_KINDS:
            raise DomainError(f"unknown detector kind: {self.kind!r}")
        if self.decision != decide(self.value, self.threshold):
            raise DomainError("decision is inconsistent with value and threshold")
        if self.kind == "agm" and self.value < 1.0 - 1e-12:
            raise DomainError("agm statistic cannot fall below 1")

    @classmethod
    def evaluate(cls, value: float, kind: str, threshold: float) -> "DetectorStatistic":
        return cls(value, kind, threshold, decide(value, threshold))
