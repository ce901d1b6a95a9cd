"""Marchenko-Pastur law utilities and empirical spectral distributions.

For a K x N matrix of i.i.d. zero-mean complex entries with per-entry
variance sigma2/N, the eigenvalues of the K x K Gram matrix concentrate,
as K/N -> s, on the Marchenko-Pastur distribution: an absolutely
continuous part

    f(t) = sqrt((t - a)^+ (b - t)^+) / (2 pi s sigma2 t),   a <= t <= b,

with support edges a = sigma2 (1 - sqrt(s))^2 and b = sigma2 (1 + sqrt(s))^2,
plus a point mass of (1 - 1/s)^+ at zero when s > 1. The atom is exposed
separately (`mp_atom_mass`) so quadrature never touches a delta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .errors import DomainError

# Eigenvalues below -CLAMP_EPS indicate a broken eigensolve; above it they
# are treated as roundoff and clamped to zero.
CLAMP_EPS = 1e-9

_QUAD_EPSABS = 1e-10
_QUAD_LIMIT = 200


def mp_support(sigma2: float, ratio_s: float) -> tuple[float, float]:
    """Support edges (a, b) of the Marchenko-Pastur law."""
    if not (sigma2 > 0.0):
        raise DomainError(f"sigma2 must be positive, got {sigma2}")
    if not (ratio_s > 0.0):
        raise DomainError(f"ratio_s must be positive, got {ratio_s}")
    root = math.sqrt(ratio_s)
    return sigma2 * (1.0 - root) ** 2, sigma2 * (1.0 + root) ** 2


@dataclass(frozen=True)
class MarchenkoPasturLaw:
    """Marchenko-Pastur law for noise variance `sigma2` and ratio `ratio_s` = K/N."""

    sigma2: float
    ratio_s: float
    a: float = field(init=False)
    b: float = field(init=False)

    def __post_init__(self):
        a, b = mp_support(self.sigma2, self.ratio_s)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)


def mp_atom_mass(law: MarchenkoPasturLaw) -> float:
    """Point mass at zero: max(0, 1 - 1/ratio_s)."""
    return max(0.0, 1.0 - 1.0 / law.ratio_s)


def mp_density(law: MarchenkoPasturLaw, t: float) -> float:
    """Continuous part of the MP density at t >= 0 (zero outside (a, b))."""
    if t < 0.0:
        raise DomainError(f"density argument must be nonnegative, got {t}")
    if t <= law.a or t >= law.b or t == 0.0:
        return 0.0
    num = math.sqrt((t - law.a) * (law.b - t))
    return num / (2.0 * math.pi * law.ratio_s * law.sigma2 * t)


def _edge_free_integrand(law: MarchenkoPasturLaw):
    """Continuous-part integrand after the substitution t = a + (b-a) sin^2(theta).

    The substitution absorbs the inverse-square-root edge behaviour, so the
    integrand is smooth on [0, pi/2]:

        f(t) dt = (b-a)^2 u (1-u) / (pi s sigma2 t) dtheta,  u = sin^2(theta).
    """
    a, b = law.a, law.b
    width = b - a
    coeff = width * width / (math.pi * law.ratio_s * law.sigma2)

    def g(theta: float) -> float:
        u = math.sin(theta) ** 2
        den = a + width * u
        if den == 0.0:
            # only reachable when a == 0 and u == 0; take the u -> 0 limit
            return coeff * (1.0 - u) / width
        return coeff * u * (1.0 - u) / den

    return g


def mp_cdf(law: MarchenkoPasturLaw, t: float) -> float:
    """CDF of the MP law at t >= 0: atom mass plus integrated density."""
    if t < 0.0:
        raise DomainError(f"cdf argument must be nonnegative, got {t}")
    atom = mp_atom_mass(law)
    if t <= law.a:
        return atom
    hi = min(t, law.b)
    theta_hi = math.asin(math.sqrt(min(1.0, (hi - law.a) / (law.b - law.a))))
    val, _ = quad(
        _edge_free_integrand(law), 0.0, theta_hi, epsabs=_QUAD_EPSABS, limit=_QUAD_LIMIT
    )
    return min(1.0, atom + val)


def _mp_cdf_many(law: MarchenkoPasturLaw, ts: np.ndarray) -> np.ndarray:
    """CDF at many points, integrating each theta-segment once."""
    ts = np.asarray(ts, dtype=float)
    order = np.argsort(ts, kind="stable")
    atom = mp_atom_mass(law)
    g = _edge_free_integrand(law)
    width = law.b - law.a
    out = np.empty(ts.shape, dtype=float)
    theta_prev = 0.0
    acc = 0.0
    for idx in order:
        t = ts[idx]
        if t < 0.0:
            raise DomainError(f"cdf argument must be nonnegative, got {t}")
        if t <= law.a:
            out[idx] = atom
            continue
        hi = min(t, law.b)
        theta = math.asin(math.sqrt(min(1.0, (hi - law.a) / width)))
        if theta > theta_prev:
            seg, _ = quad(g, theta_prev, theta, epsabs=_QUAD_EPSABS, limit=_QUAD_LIMIT)
            acc += seg
            theta_prev = theta
        out[idx] = min(1.0, atom + acc)
    return out


@dataclass(frozen=True)
class EmpiricalSpectralDistribution:
    """Step CDF of a finite eigenvalue set (sorted ascending, clamped at zero)."""

    eigenvalues: np.ndarray

    @property
    def count(self) -> int:
        return len(self.eigenvalues)

    def cdf(self, t: float) -> float:
        """Fraction of eigenvalues <= t."""
        return np.searchsorted(self.eigenvalues, t, side="right") / self.count


def build_esd(eigenvalues) -> EmpiricalSpectralDistribution:
    """Sort, validate and clamp an eigenvalue list into an ESD.

    Values in [-CLAMP_EPS, 0) are eigensolver roundoff and are clamped to
    zero; anything more negative raises (the eigensolve is broken).
    """
    vals = np.asarray(eigenvalues, dtype=float)
    if vals.ndim != 1 or len(vals) == 0:
        raise DomainError("eigenvalue list must be non-empty and 1-d")
    if np.any(vals < -CLAMP_EPS):
        raise DomainError(
            f"eigenvalue below -{CLAMP_EPS:g} indicates a broken eigensolve"
        )
    vals = np.sort(vals)
    vals[vals < 0.0] = 0.0
    vals.setflags(write=False)
    return EmpiricalSpectralDistribution(vals)


def ks_distance(esd: EmpiricalSpectralDistribution, law: MarchenkoPasturLaw) -> float:
    """Kolmogorov-Smirnov distance between an ESD and an MP law.

    The supremum of |F_emp - F_law| over the real line is attained at an
    eigenvalue jump, approached from either side, so both sides of every
    jump are checked. The law is continuous except for its atom at zero.
    """
    lam = esd.eigenvalues
    n = esd.count
    f_law = _mp_cdf_many(law, lam)
    # left limit of the law differs from its value only at the atom
    f_law_left = np.where(lam == 0.0, f_law - mp_atom_mass(law), f_law)
    hi = np.arange(1, n + 1) / n
    lo = np.arange(0, n) / n
    d = max(np.max(np.abs(hi - f_law)), np.max(np.abs(lo - f_law_left)))
    return float(min(1.0, d))
