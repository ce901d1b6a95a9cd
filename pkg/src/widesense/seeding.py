"""Deterministic per-trial seed derivation.

Every stochastic routine takes an explicit 64-bit seed. Trial seeds are
derived from a master seed with a splitmix64 chain:

    state = master_seed
    for v in (stream_tag, index_0, index_1, ...):
        state = splitmix64(state XOR v)

so trials can run concurrently, in any order, and still reproduce
bit-identical results. Stream tags keep calibration, evaluation and
noise-estimation draws on disjoint streams.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1

# Stream tags (arbitrary but fixed; part of the reproducibility contract).
STREAM_CALIBRATION = 0x01
STREAM_EVAL_H0 = 0x02
STREAM_EVAL_H1 = 0x03
STREAM_GAINS = 0x04
STREAM_SIGMA_RECORD = 0x05
STREAM_SCENE = 0x06
STREAM_MP_CHECK = 0x07


def splitmix64(x: int) -> int:
    """One splitmix64 step: a bijective 64-bit finalizer with good avalanche."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK
    return (x ^ (x >> 31)) & _MASK


def derive_seed(master_seed: int, *indices: int) -> int:
    """Mix a master seed with stream/trial indices into a fresh 64-bit seed."""
    state = master_seed & _MASK
    for v in indices:
        state = splitmix64(state ^ (v & _MASK))
    return state


def make_rng(seed: int) -> np.random.Generator:
    """PCG64 generator for a derived seed."""
    return np.random.default_rng(seed & _MASK)
