"""Noise-variance estimation over wideband subbands.

Three levels of prior knowledge are covered: a known usage prior over the
number of idle subbands, a known subband count with no usage information,
and a fully blind mode that first segments the band from a PSD estimate.

The idle-count estimate minimizes, over M in {1..k},

    J(M) = M L log( S_M / (M L) ) + L sum_{r>M} log( E_r / L )
           + (k - M + 1)/2 * log(k L)  - log P(M)

with E_1 <= ... <= E_k the sorted per-subband energies, S_M their prefix
sum and L the samples per subband. The first two terms are the profile
log-likelihood of "M pooled noise subbands, the rest individually
occupied"; they alone are nondecreasing in M (pooling never fits better),
so a model-order term is required for the minimizer to track the true
idle count. The (k - M + 1)/2 * log(kL) penalty is the MDL charge for the
k - M + 1 free variance parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import gaussian_filter1d

from .errors import DegeneratePartitionError, DomainError
from .simulate import PsdEstimate, estimate_psd

# Fixed segmentation constants (blind mode): dyadic smoothing scales
# 2^1..2^n bins, threshold mean + 2 std of the edge product, and a merge
# radius of twice the largest kernel width.
EDGE_THRESHOLD_STDS = 2.0
DEFAULT_SEGMENT_LENGTH = 256
DEFAULT_OVERLAP = 0.5
DEFAULT_N_SCALES = 3


@dataclass(frozen=True)
class SubbandEnergies:
    """Per-subband energies ||x_k||^2 with their ascending sort order."""

    energies: np.ndarray
    samples_per_subband: int
    sort_permutation: np.ndarray = field(init=False)

    def __post_init__(self):
        energies = np.asarray(self.energies, dtype=float)
        if energies.ndim != 1 or len(energies) < 1:
            raise DomainError("energies must be a non-empty 1-d sequence")
        if self.samples_per_subband < 1:
            raise DomainError("samples_per_subband must be >= 1")
        if np.any(energies < 0.0) or not np.all(np.isfinite(energies)):
            raise DomainError("energies must be finite and nonnegative")
        perm = np.argsort(energies, kind="stable")
        asc = energies[perm]
        asc.setflags(write=False)
        perm.setflags(write=False)
        object.__setattr__(self, "energies", asc)
        object.__setattr__(self, "sort_permutation", perm)

    @property
    def k(self) -> int:
        return len(self.energies)

    @property
    def l_samples(self) -> int:
        return self.samples_per_subband


@dataclass(frozen=True)
class UsagePrior:
    """Prior over the number of idle subbands M in {1..k}."""

    kind: str
    pmf: np.ndarray
    shape: int | None = None
    rate: float | None = None

    def __post_init__(self):
        pmf = np.asarray(self.pmf, dtype=float)
        if pmf.ndim != 1 or len(pmf) < 1:
            raise DomainError("pmf must be a non-empty 1-d sequence")
        if np.any(pmf < 0.0):
            raise DomainError("pmf entries must be nonnegative")
        total = pmf.sum()
        if abs(total - 1.0) > 1e-9:
            raise DomainError(f"pmf must sum to 1, got {total}")
        pmf.setflags(write=False)
        object.__setattr__(self, "pmf", pmf)

    @classmethod
    def uniform(cls, k: int) -> "UsagePrior":
        return cls("uniform", np.full(k, 1.0 / k))

    @classmethod
    def table(cls, pmf) -> "UsagePrior":
        return cls("table", np.asarray(pmf, dtype=float))

    @classmethod
    def erlang(cls, k: int, shape: int, rate: float) -> "UsagePrior":
        """Erlang density evaluated at M = 1..k, renormalized."""
        if shape < 1 or int(shape) != shape:
            raise DomainError("erlang shape must be a positive integer")
        if not (rate > 0.0):
            raise DomainError("erlang rate must be positive")
        m = np.arange(1, k + 1, dtype=float)
        log_pdf = shape * math.log(rate) + (shape - 1) * np.log(m) - rate * m
        log_pdf -= math.lgamma(shape)
        pmf = np.exp(log_pdf - log_pdf.max())
        pmf /= pmf.sum()
        return cls("erlang", pmf, shape=int(shape), rate=float(rate))

    @classmethod
    def from_dict(cls, raw: dict, k: int) -> "UsagePrior":
        kind = raw.get("kind")
        if kind == "uniform":
            return cls.uniform(k)
        if kind == "table":
            pmf = raw.get("pmf")
            if pmf is None or len(pmf) != k:
                raise DomainError(f"table prior needs a pmf of length {k}")
            return cls.table(pmf)
        if kind == "erlang":
            return cls.erlang(k, int(raw["shape"]), float(raw["rate"]))
        raise DomainError(f"unknown prior kind: {kind!r}")


@dataclass(frozen=True)
class NoiseEstimate:
    """Estimated noise variance, idle count and occupied per-subband variances."""

    sigma2_hat: float
    m_hat: int
    occupied_variances: np.ndarray
    scenario: str

    def __post_init__(self):
        occ = np.asarray(self.occupied_variances, dtype=float)
        occ.setflags(write=False)
        object.__setattr__(self, "occupied_variances", occ)


def subband_energies(
    signal: np.ndarray, k: int, partition: "SubbandPartition | None" = None
) -> SubbandEnergies:
    """Group DFT bin energies into subbands.

    The DFT is normalized by 1/sqrt(n) so white noise of variance v yields
    E[energy] = L v per subband. Equal-width mode splits the bins into k
    contiguous blocks of L = n/k (n must be divisible by k); partitioned
    mode groups bins between boundary pairs and subsamples larger groups
    to the smallest group size by keeping their first L bins.
    """
    signal = np.asarray(signal)
    n = len(signal)
    if k < 1:
        raise DomainError("k must be >= 1")
    bin_energy = np.abs(np.fft.fft(signal) / np.sqrt(n)) ** 2
    if partition is None:
        if n % k != 0:
            raise DomainError(f"signal length {n} is not divisible by k={k}")
        l_bins = n // k
        energies = bin_energy.reshape(k, l_bins).sum(axis=1)
        return SubbandEnergies(energies, l_bins)
    edges = np.asarray(partition.boundaries, dtype=float)
    total = edges[-1]
    idx = np.round(edges / total * n).astype(int)
    groups = [np.arange(idx[i], idx[i + 1]) for i in range(len(idx) - 1)]
    if any(len(g) == 0 for g in groups):
        raise DomainError("a partition segment contains no DFT bins")
    l_bins = min(len(g) for g in groups)
    energies = np.array([bin_energy[g[:l_bins]].sum() for g in groups])
    return SubbandEnergies(energies, l_bins)


def _objective(energies: SubbandEnergies) -> np.ndarray:
    """J(M) without the prior term, for M = 1..k (ascending energies)."""
    e = energies.energies
    l = energies.l_samples
    k = energies.k
    if np.any(e == 0.0):
        raise DomainError("zero subband energy: log-likelihood undefined")
    prefix = np.cumsum(e)
    log_e = np.log(e / l)
    suffix = np.concatenate([np.cumsum(log_e[::-1])[::-1], [0.0]])
    out = np.empty(k)
    for m in range(1, k + 1):
        pooled = prefix[m - 1] / (m * l)
        penalty = 0.5 * (k - m + 1) * math.log(k * l)
        out[m - 1] = m * l * math.log(pooled) + l * suffix[m] + penalty
    return out


def estimate_m(energies: SubbandEnergies, prior: UsagePrior) -> int:
    """Most likely number of idle subbands under a usage prior.

    Candidates with zero prior mass are excluded; exact ties resolve to
    the smallest M.
    """
    if len(prior.pmf) != energies.k:
        raise DomainError(
            f"prior length {len(prior.pmf)} does not match k={energies.k}"
        )
    base = _objective(energies)
    best_m = 0
    best_j = math.inf
    for m in range(1, energies.k + 1):
        p = prior.pmf[m - 1]
        if p <= 0.0:
            continue
        j = base[m - 1] - math.log(p)
        if j < best_j:
            best_j = j
            best_m = m
    if best_m == 0:
        raise DomainError("prior assigns zero mass to every candidate count")
    return best_m


def estimate_m_uniform(energies: SubbandEnergies) -> int:
    """Idle-count estimate with no usage information (uniform prior)."""
    return estimate_m(energies, UsagePrior.uniform(energies.k))


def noise_variance(
    energies: SubbandEnergies, m_hat: int, scenario: str = "known_count"
) -> NoiseEstimate:
    """Pooled noise variance over the m_hat smallest-energy subbands."""
    if not (1 <= m_hat <= energies.k):
        raise DomainError(f"m_hat must lie in [1, {energies.k}], got {m_hat}")
    e = energies.energies
    l = energies.l_samples
    sigma2_hat = float(e[:m_hat].sum() / (m_hat * l))
    occupied = e[m_hat:] / l
    return NoiseEstimate(sigma2_hat, int(m_hat), occupied, scenario)


def min_energy_noise(energies: SubbandEnergies) -> float:
    """Per-sample power of the minimum-energy subband.

    A quick noise proxy when the subband count is known; biased low, since
    it is the minimum of k fluctuating energies.
    """
    return float(energies.energies[0] / energies.l_samples)


@dataclass(frozen=True)
class SubbandPartition:
    """Strictly increasing boundary frequencies including both band edges."""

    boundaries: np.ndarray
    inferred_count: int = field(init=False)

    def __post_init__(self):
        edges = np.asarray(self.boundaries, dtype=float)
        if edges.ndim != 1 or len(edges) < 2:
            raise DegeneratePartitionError("partition needs at least 2 boundaries")
        if np.any(np.diff(edges) <= 0.0):
            raise DegeneratePartitionError("boundaries must be strictly increasing")
        edges.setflags(write=False)
        object.__setattr__(self, "boundaries", edges)
        total = float(edges[-1] - edges[0])
        object.__setattr__(self, "inferred_count", _count_from_min_width(edges, total))

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.boundaries)


def _count_from_min_width(edges: np.ndarray, total_bandwidth: float) -> int:
    min_width = float(np.min(np.diff(edges)))
    # tiny epsilon guards float quotients like 1/0.1 landing just under 10
    return max(2, int(math.floor(total_bandwidth / min_width + 1e-9)))


def infer_subband_count(partition: SubbandPartition, total_bandwidth: float) -> int:
    """Subband count from the narrowest detected segment: floor(total/min width)."""
    return _count_from_min_width(partition.boundaries, total_bandwidth)


def detect_boundaries(psd: PsdEstimate, n_scales: int) -> SubbandPartition:
    """Segment a PSD with a multiscale smoothed-derivative edge product.

    The log PSD is smoothed with Gaussian kernels of width 2^1..2^n bins
    (circularly, the grid covers the full band); absolute first
    differences of the smoothed curves are multiplied pointwise across
    scales. Local maxima of this product above mean + 2 std become
    boundaries, maxima closer than twice the largest kernel width are
    merged (strongest wins), and the band edges are always included.
    """
    if len(psd.power) < 16:
        raise DomainError("PSD must have at least 16 bins")
    if n_scales < 1:
        raise DomainError("n_scales must be >= 1")
    m = len(psd.power)
    floor = np.max(psd.power) * 1e-300 if np.max(psd.power) > 0.0 else 1e-300
    log_psd = np.log(np.maximum(psd.power, floor))
    product = np.ones(m - 1)
    for j in range(1, n_scales + 1):
        smoothed = gaussian_filter1d(log_psd, sigma=2.0**j, mode="wrap")
        product *= np.abs(np.diff(smoothed))
    threshold = product.mean() + EDGE_THRESHOLD_STDS * product.std()
    interior = [
        i
        for i in range(1, m - 2)
        if product[i] > threshold
        and product[i] >= product[i - 1]
        and product[i] >= product[i + 1]
    ]
    merge_dist = 2 * 2**n_scales
    kept: list[int] = []
    for i in sorted(interior, key=lambda i: -product[i]):
        if all(abs(i - j) >= merge_dist for j in kept):
            kept.append(i)
    total = 1.0  # PSD grid spans the full normalized band
    # difference i sits at the edge between bins i and i+1
    freqs = sorted((i + 1) / m * total for i in kept)
    return SubbandPartition(np.array([0.0] + freqs + [total]))


def estimate_noise_scenario3(
    signal: np.ndarray,
    segment_length: int = DEFAULT_SEGMENT_LENGTH,
    overlap: float = DEFAULT_OVERLAP,
    n_scales: int = DEFAULT_N_SCALES,
    prior: UsagePrior | dict | None = None,
) -> NoiseEstimate:
    """Blind noise estimate: segment the band, infer k, then pool.

    Composes estimate_psd -> detect_boundaries -> infer_subband_count ->
    subband_energies (equal-width at the inferred k; the signal is
    truncated to a multiple of k samples since the inferred count need
    not divide the record length) -> idle-count estimate -> pooling.
    """
    signal = np.asarray(signal)
    psd = estimate_psd(signal, segment_length, overlap)
    partition = detect_boundaries(psd, n_scales)
    k = infer_subband_count(partition, float(partition.boundaries[-1]))
    usable = len(signal) - (len(signal) % k)
    if usable < k:
        raise DomainError("signal too short for the inferred subband count")
    energies = subband_energies(signal[:usable], k)
    if prior is None:
        m_hat = estimate_m_uniform(energies)
    else:
        if isinstance(prior, dict):
            prior = UsagePrior.from_dict(prior, k)
        m_hat = estimate_m(energies, prior)
    result = noise_variance(energies, m_hat)
    return NoiseEstimate(
        result.sigma2_hat, result.m_hat, result.occupied_variances, "unknown_count"
    )
