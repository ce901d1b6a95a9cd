"""Numba-compiled hot kernels.

The Monte Carlo experiments spend nearly all their time turning stacks of
receiver frames into covariance eigenvalues. These kernels fuse the
Gram-matrix build with a cyclic Jacobi eigensolver for complex Hermitian
matrices, avoiding the intermediate covariance stack entirely.

Importing this module requires numba; `backends` guards the import and
falls back to vectorized numpy when numba is unavailable or disabled.
"""

import numpy as np
from numba import njit

_MAX_SWEEPS = 30
_SWEEP_TOL = 1e-14  # off-diagonal Frobenius mass relative to total


@njit(cache=True)
def _jacobi_inplace(a):
    """Diagonalize a Hermitian matrix in place by cyclic Jacobi rotations.

    Each (p, q) rotation factors the off-diagonal phase out first so the
    2x2 sub-problem is real symmetric, then applies the classic
    Rutishauser rotation. Returns the number of sweeps used, or -1 if the
    off-diagonal mass failed to vanish within the sweep budget.
    """
    k = a.shape[0]
    fro = 0.0
    for i in range(k):
        for j in range(k):
            fro += abs(a[i, j]) ** 2
    thresh = (_SWEEP_TOL * _SWEEP_TOL) * fro
    for sweep in range(_MAX_SWEEPS):
        off = 0.0
        for p in range(k - 1):
            for q in range(p + 1, k):
                off += abs(a[p, q]) ** 2
        if off <= thresh:
            return sweep
        for p in range(k - 1):
            for q in range(p + 1, k):
                g = a[p, q]
                ag = abs(g)
                if ag == 0.0:
                    continue
                w = g / ag
                tau = (a[q, q].real - a[p, p].real) / (2.0 * ag)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                wc = np.conj(w)
                for i in range(k):
                    aip = a[i, p]
                    aiq = a[i, q]
                    a[i, p] = c * aip - s * wc * aiq
                    a[i, q] = s * aip + c * wc * aiq
                for j in range(k):
                    apj = a[p, j]
                    aqj = a[q, j]
                    a[p, j] = c * apj - s * w * aqj
                    a[q, j] = s * apj + c * w * aqj
                a[p, q] = 0.0
                a[q, p] = 0.0
    # one final convergence check after the last sweep
    off = 0.0
    for p in range(k - 1):
        for q in range(p + 1, k):
            off += abs(a[p, q]) ** 2
    if off <= thresh:
        return _MAX_SWEEPS
    return -1


@njit(cache=True)
def batch_cov_eigvals(frames):
    """Ascending eigenvalues of Y @ Y^H for a (trials, K, N) complex stack.

    Returns (eigs, ok) where eigs is (trials, K) float64 sorted ascending
    per trial and ok is False if any Jacobi solve failed to converge.
    """
    trials, k, n = frames.shape
    out = np.empty((trials, k))
    ok = True
    for t in range(trials):
        r = np.empty((k, k), np.complex128)
        y = frames[t]
        for i in range(k):
            for j in range(i, k):
                acc = 0.0 + 0.0j
                for m in range(n):
                    acc += y[i, m] * np.conj(y[j, m])
                r[i, j] = acc
                r[j, i] = np.conj(acc)
        if _jacobi_inplace(r) < 0:
            ok = False
        ev = np.empty(k)
        for i in range(k):
            ev[i] = r[i, i].real
        out[t] = np.sort(ev)
    return out, ok


@njit(cache=True)
def batch_eigvalsh(mats):
    """Ascending eigenvalues of a (trials, K, K) Hermitian stack via Jacobi."""
    trials, k = mats.shape[0], mats.shape[1]
    out = np.empty((trials, k))
    ok = True
    for t in range(trials):
        r = mats[t].copy()
        if _jacobi_inplace(r) < 0:
            ok = False
        ev = np.empty(k)
        for i in range(k):
            ev[i] = r[i, i].real
        out[t] = np.sort(ev)
    return out, ok
