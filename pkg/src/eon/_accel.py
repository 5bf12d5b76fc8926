"""Backend selection for the hot loops.

Kernels in :mod:`eon.kernels` are decorated with :func:`njit`. When numba is
importable and ``EON_DISABLE_NUMBA`` is unset (or ``0``), they are compiled;
otherwise the decorator is a no-op and the drivers route work through the
vectorized numpy implementations instead.
"""

from __future__ import annotations

import os

_FLAG = os.environ.get("EON_DISABLE_NUMBA", "0").strip().lower()

try:
    import numba
except ImportError:  # pragma: no cover - numba is a hard dependency in CI
    numba = None

if numba is not None and "NUMBA_THREADING_LAYER" not in os.environ:
    numba.config.THREADING_LAYER = "workqueue"

USE_NUMBA = numba is not None and _FLAG in ("", "0", "false", "no", "off")

BACKENDS = ("numba", "numpy")


def njit(*args, **kwargs):
    """``numba.njit(cache=True, ...)`` or an identity decorator."""
    if USE_NUMBA:
        kwargs.setdefault("cache", True)
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda fn: fn


if USE_NUMBA:
    prange = numba.prange
else:
    prange = range


def resolve_backend(backend: str | None) -> str:
    """Map ``None`` to the default backend and validate explicit choices."""
    if backend is None:
        return "numba" if USE_NUMBA else "numpy"
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}; expected one of {BACKENDS}")
    if backend == "numba" and not USE_NUMBA:
        raise RuntimeError("numba backend requested but disabled (EON_DISABLE_NUMBA) or not installed")
    return backend


def set_threads(n: int) -> None:
    """Cap numba worker threads; ``0`` leaves numba's default."""
    if n < 0:
        raise ValueError("thread count must be >= 0")
    if USE_NUMBA and n > 0:
        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))


def threads_from_env() -> int:
    raw = os.environ.get("EON_THREADS", "0")
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"EON_THREADS must be an integer, got {raw!r}") from None
