"""Counter-based uniform random streams.

Every variate in this package is produced by inverse-transform sampling from
uniforms that are a pure function of ``(seed, stream, counter)``.  There is no
sequential generator state, so any draw can be recomputed in isolation: batch
generation over many streams, threaded generation, and one-at-a-time
generation all yield bit-identical values.

The mixer is the SplitMix64 finalizer applied to a per-(seed, stream) key
plus a Weyl-sequence counter increment.  All arithmetic is modulo 2**64 via
numpy uint64 arrays, which is platform independent.
"""

from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_STREAM_SALT = np.uint64(0x8FB2C98F1A67BD3B)

# Shift amounts pre-cast so numpy does not try to promote to int64.
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)

_INV_2_53 = 1.0 / 9007199254740992.0  # 2**-53


def _mix64(z: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer (bijective on uint64)."""
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    return z ^ (z >> _S31)


def stream_key(seed: int, stream: int = 0) -> np.uint64:
    """Derive the 64-bit key for one (seed, stream) substream.

    Distinct streams of the same seed are decorrelated by hashing, so a batch
    over streams 0..n-1 equals n independent sequential runs.
    """
    s = np.asarray([int(seed) & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)
    t = np.asarray([int(stream) & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)
    k = _mix64(s * _GOLDEN + _STREAM_SALT)
    return _mix64(k ^ (t * _MIX1 + _GOLDEN))[0]


def stream_keys(seed: int, streams) -> np.ndarray:
    """Vectorized :func:`stream_key` for an array of stream indices."""
    s = np.asarray([int(seed) & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)
    t = np.asarray(streams, dtype=np.uint64)
    k = _mix64(s * _GOLDEN + _STREAM_SALT)
    return _mix64(k ^ (t * _MIX1 + _GOLDEN))


def uniforms(key: np.uint64, counters) -> np.ndarray:
    """Uniform(0, 1) variates at the given counters of a substream.

    Returns floats in the open interval (0, 1); the endpoints are excluded so
    quantile transforms of unbounded families stay finite.
    """
    c = np.asarray(counters, dtype=np.uint64)
    z = _mix64(np.asarray(key, dtype=np.uint64) + c * _GOLDEN)
    return ((z >> _S11).astype(np.float64) + 0.5) * _INV_2_53


def uniforms_at(seed: int, stream: int, counters) -> np.ndarray:
    """Convenience wrapper: uniforms for (seed, stream) at ``counters``."""
    return uniforms(stream_key(seed, stream), counters)


def uniforms_many(keys: np.ndarray, counters: np.ndarray) -> np.ndarray:
    """Elementwise uniforms: value ``i`` uses ``keys[i]`` at ``counters[i]``."""
    z = _mix64(np.asarray(keys, dtype=np.uint64) + np.asarray(counters, dtype=np.uint64) * _GOLDEN)
    return ((z >> _S11).astype(np.float64) + 0.5) * _INV_2_53
