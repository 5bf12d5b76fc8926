"""Counter-based uniform generator shared by the numpy and numba backends.

A draw is a pure function of ``(seed, stream, counter)``: the stream key is
derived from the seed with the SplitMix64 finalizer, and the counter walks a
Weyl sequence from that key. Any shard of a sample loop can therefore
regenerate its own variates without coordination, and both backends see the
same numbers.
"""

from __future__ import annotations

import numpy as np

from ._accel import USE_NUMBA, njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0  # 2**-53
_MASK = 0xFFFFFFFFFFFFFFFF


def _mix64_np(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def stream_key(seed: int, stream: int) -> int:
    """64-bit key for ``(seed, stream)``."""
    if seed < 0 or stream < 0:
        raise ValueError("seed and stream must be non-negative")
    with np.errstate(over="ignore"):
        s = _mix64_np(np.array([seed & _MASK], dtype=np.uint64))
        k = _mix64_np(s + np.uint64(stream & _MASK) * _GOLDEN)
    return int(k[0])


def uniforms(seed: int, stream: int, start: int, n: int) -> np.ndarray:
    """``n`` doubles in [0, 1) for counters ``start .. start + n - 1``."""
    key = np.uint64(stream_key(seed, stream))
    counters = np.arange(start, start + n, dtype=np.uint64)
    with np.errstate(over="ignore"):
        x = _mix64_np(key + (counters + np.uint64(1)) * _GOLDEN)
    return (x >> _S11).astype(np.float64) * _INV53


def uniform_pairs(seed: int, stream: int, n: int, offset: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Pairs ``(u1, u2)`` for draws ``offset .. offset + n - 1`` (counters 2i, 2i+1)."""
    u = uniforms(seed, stream, 2 * offset, 2 * n)
    return u[0::2].copy(), u[1::2].copy()


@njit
def mix64(z):
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@njit
def uniform_at(key, counter):
    """Scalar draw for a precomputed stream key (uint64) and counter (int)."""
    x = mix64(key + (np.uint64(counter) + np.uint64(1)) * np.uint64(0x9E3779B97F4A7C15))
    return np.float64(x >> np.uint64(11)) * (1.0 / 9007199254740992.0)


@njit
def key_for(seed_key, stream):
    """Stream key from the mixed seed (``mix64(seed)``) and a stream index."""
    return mix64(seed_key + np.uint64(stream) * np.uint64(0x9E3779B97F4A7C15))


if not USE_NUMBA:
    # plain-Python fallbacks: uint64 wraparound is intended, silence numpy's warning
    def _quiet(fn):
        def wrapped(*args):
            with np.errstate(over="ignore"):
                return fn(*args)

        wrapped.__name__, wrapped.__doc__ = fn.__name__, fn.__doc__
        return wrapped

    mix64, uniform_at, key_for = _quiet(mix64), _quiet(uniform_at), _quiet(key_for)


def seed_key(seed: int) -> np.uint64:
    """``mix64(seed)``; pass to :func:`key_for` inside kernels."""
    if seed < 0:
        raise ValueError("seed must be non-negative")
    with np.errstate(over="ignore"):
        return _mix64_np(np.array([seed & _MASK], dtype=np.uint64))[0]


def keys_for(seed: int, streams: np.ndarray) -> np.ndarray:
    """Vectorized :func:`key_for` over an array of stream indices."""
    sk = seed_key(seed)
    with np.errstate(over="ignore"):
        return _mix64_np(sk + np.asarray(streams, dtype=np.uint64) * _GOLDEN)


def uniforms_keyed(keys: np.ndarray, counters) -> np.ndarray:
    """Vectorized :func:`uniform_at`; ``keys`` and ``counters`` broadcast."""
    c = np.asarray(counters, dtype=np.uint64)
    with np.errstate(over="ignore"):
        x = _mix64_np(keys + (c + np.uint64(1)) * _GOLDEN)
    return (x >> _S11).astype(np.float64) * _INV53
