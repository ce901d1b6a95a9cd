"""Backend selection for the Monte Carlo hot path.

Two implementations of the frame -> covariance-eigenvalue step exist:

* ``numba``: fused Gram build + cyclic Jacobi kernels from `_kernels`,
  compiled with ``@njit`` (the default when numba imports cleanly).
* ``numpy``: batched matmul + ``np.linalg.eigvalsh``.

The environment variable ``WIDESENSE_BACKEND`` picks one of
``auto`` (default), ``numba`` or ``numpy``. Both paths consume identical
random streams, so results agree to floating-point roundoff; re-runs under
a fixed backend are bit-identical. ``benchmarks/bench_backends.py``
compares their throughput.
"""

from __future__ import annotations

import os

import numpy as np

from .errors import ConfigError, NumericalError

BACKEND_ENV = "WIDESENSE_BACKEND"

try:
    from . import _kernels

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - exercised only without numba
    _kernels = None
    NUMBA_AVAILABLE = False


def active_backend() -> str:
    """Resolve the backend name from the environment ('numba' or 'numpy')."""
    choice = os.environ.get(BACKEND_ENV, "auto").strip().lower()
    if choice in ("", "auto"):
        return "numba" if NUMBA_AVAILABLE else "numpy"
    if choice == "numpy":
        return "numpy"
    if choice == "numba":
        if not NUMBA_AVAILABLE:
            raise ConfigError(
                f"{BACKEND_ENV}=numba requested but numba is not importable"
            )
        return "numba"
    raise ConfigError(f"unknown {BACKEND_ENV} value: {choice!r}")


def _cov_eigvals_numpy(frames: np.ndarray) -> np.ndarray:
    gram = frames @ frames.conj().transpose(0, 2, 1)
    gram = (gram + gram.conj().transpose(0, 2, 1)) / 2.0
    return np.linalg.eigvalsh(gram)


def batch_cov_eigvals(frames: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of Y @ Y^H per trial for a (T, K, N) stack."""
    frames = np.ascontiguousarray(frames, dtype=np.complex128)
    if active_backend() == "numba":
        eigs, ok = _kernels.batch_cov_eigvals(frames)
        if not ok:
            raise NumericalError("Jacobi eigensolver failed to converge")
        return eigs
    return _cov_eigvals_numpy(frames)


def batch_eigvalsh(mats: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues for a (T, K, K) Hermitian stack."""
    mats = np.ascontiguousarray(mats, dtype=np.complex128)
    if active_backend() == "numba":
        eigs, ok = _kernels.batch_eigvalsh(mats)
        if not ok:
            raise NumericalError("Jacobi eigensolver failed to converge")
        return eigs
    return np.linalg.eigvalsh(mats)
