"""Pure-Python / numpy implementation of the sampling hot kernel.

Counter-based RNG: every draw is a pure function of (key, counter), where the
key is derived from (seed, stream).  The compiled Cython kernel implements the
identical bit-level transform; results must match exactly so that outputs are
byte-identical whichever backend is active.

The transform is the splitmix64 finalizer applied to ``key + (ctr+1)*GOLDEN``.
"""

from __future__ import annotations

import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN = 0x9E3779B97F4A7C15

_U = np.uint64
_GOLDEN_U = _U(GOLDEN)
_INV53 = 2.0 ** -53


def _finalize_int(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def stream_key(seed: int, stream: int) -> int:
    """Derive the 64-bit per-stream key from a seed and a stream lane."""
    z = _finalize_int((seed & MASK64) ^ 0x6A09E667F3BCC909)
    return _finalize_int((z + (stream & MASK64) * GOLDEN) & MASK64)


def uniform(key: int, counter: int) -> float:
    """Single uniform draw in [0, 1); exact scalar twin of fill_uniforms."""
    z = _finalize_int((key + ((counter + 1) & MASK64) * GOLDEN) & MASK64)
    return (z >> 11) * _INV53


def _finalize_np(z):
    z = (z ^ (z >> _U(30))) * _U(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> _U(27))) * _U(0x94D049BB133111EB)
    return z ^ (z >> _U(31))


def fill_uniforms(key: int, counters) -> np.ndarray:
    """Uniform [0,1) draws for an array of uint64 counters."""
    ctr = np.asarray(counters, dtype=np.uint64)
    z = _U(key) + (ctr + _U(1)) * _GOLDEN_U
    return (_finalize_np(z) >> _U(11)).astype(np.float64) * _INV53


def sample_indices(key: int, counters, cdf) -> np.ndarray:
    """Inverse-CDF sampling: index of the first cdf entry strictly above the draw."""
    u = fill_uniforms(key, counters)
    cdf = np.asarray(cdf, dtype=np.float64)
    idx = np.searchsorted(cdf, u, side="right")
    return np.minimum(idx, len(cdf) - 1).astype(np.int64)
