"""Micro-benchmarks: nanoseconds per BRDF evaluation and per sample
(sampling includes evaluating the BRDF in the sampled direction).

Inputs are random roughness, albedo and directions drawn up front; each
timed loop folds its results into a sum so the work cannot be elided. The
numba rows time compiled scalar loops, the numpy rows time whole-array calls,
so the two columns show what each backend costs per element.
"""

from __future__ import annotations

import math
import statistics
import time
from dataclasses import dataclass

import numpy as np

from . import kernels
from ._accel import USE_NUMBA
from .brdf import INV_PI, _eval_fon_hat, _eval_qon_hat, eon_lobes, rho_ms
from .sampling import sample_strategy

# (label, model id, exact)
EVAL_CASES = (
    ("lambert", kernels.LAMBERT, False),
    ("qon", kernels.QON, False),
    ("fon", kernels.FON, False),
    ("eon-approx", kernels.EON, False),
    ("eon-exact", kernels.EON, True),
)

# (label, model id, exact, strategy)
SAMPLE_CASES = (
    ("lambert", kernels.LAMBERT, False, "cosine"),
    ("fon", kernels.FON, False, "cosine"),
    ("qon", kernels.QON, False, "cosine"),
    ("eon-approx", kernels.EON, False, "cosine"),
    ("eon-approx", kernels.EON, False, "cltc-mis"),
    ("eon-exact", kernels.EON, True, "cosine"),
    ("eon-exact", kernels.EON, True, "cltc-mis"),
)


@dataclass(frozen=True)
class BenchRow:
    model: str
    op: str  # "eval" or "sample:<strategy>"
    backend: str
    ns_per_op: float


@dataclass
class BenchInputs:
    params: np.ndarray
    sigmas: np.ndarray
    rhos: np.ndarray
    wi: np.ndarray
    wo: np.ndarray
    us: np.ndarray


def make_inputs(n: int, seed: int = 0) -> BenchInputs:
    gen = np.random.default_rng(seed)

    def hemi(k):
        z = gen.uniform(0.01, 1.0, k)
        phi = gen.uniform(0.0, 2.0 * math.pi, k)
        s = np.sqrt(1.0 - z * z)
        return np.ascontiguousarray(np.stack([s * np.cos(phi), s * np.sin(phi), z], -1))

    return BenchInputs(
        params=gen.uniform(0.0, 1.0, n),
        sigmas=gen.uniform(0.0, 0.5 * math.pi, n),
        rhos=gen.uniform(0.0, 1.0, n),
        wi=hemi(n),
        wo=hemi(n),
        us=gen.uniform(0.0, 1.0, (n, 2)),
    )


def _time(fn, reps: int) -> float:
    fn()  # warm-up (and JIT compile)
    samples = []
    for _ in range(reps):
        t0 = time.perf_counter_ns()
        fn()
        samples.append(time.perf_counter_ns() - t0)
    return statistics.median(samples)


def _np_eval(model, exact, p, rhos, wi, wo):
    if model == kernels.LAMBERT:
        return rhos * INV_PI
    if model == kernels.QON:
        return rhos * _eval_qon_hat(p, wi, wo)
    if model == kernels.FON:
        return rhos * _eval_fon_hat(p, wi, wo)
    f_ss, shape, avg = eon_lobes(p, wi, wo, exact)
    return rhos * f_ss + rho_ms(rhos, avg) * shape


MODEL_SET = ("lambert", "qon", "fon", "eon")


def _wanted(label: str, models) -> bool:
    return label.split("-")[0] in models


def run(n: int = 1_000_000, seed: int = 0, reps: int = 7, backends=("numba", "numpy"),
        models=MODEL_SET, sampling: bool = True) -> list[BenchRow]:
    """Time every case whose model family is in ``models``; ``eon`` covers both flavors."""
    if reps < 5:
        raise ValueError("use at least 5 repetitions")
    if n < 1:
        raise ValueError("n must be >= 1")
    unknown = set(models) - set(MODEL_SET)
    if unknown:
        raise ValueError(f"unknown benchmark models {sorted(unknown)}; expected a subset of {MODEL_SET}")
    inp = make_inputs(n, seed)
    rows: list[BenchRow] = []
    sink = 0.0
    for backend in backends:
        if backend == "numba" and not USE_NUMBA:
            continue
        for label, mid, exact in EVAL_CASES:
            if not _wanted(label, models):
                continue
            p = inp.sigmas if mid == kernels.QON else inp.params
            if backend == "numba":
                def fn(mid=mid, exact=exact, p=p):
                    nonlocal sink
                    sink += kernels.bench_eval_loop(mid, exact, p, inp.rhos, inp.wi, inp.wo)
            else:
                def fn(mid=mid, exact=exact, p=p):
                    nonlocal sink
                    sink += float(_np_eval(mid, exact, p, inp.rhos, inp.wi, inp.wo).sum())
            rows.append(BenchRow(label, "eval", backend, _time(fn, reps) / n))
        for label, mid, exact, strategy in SAMPLE_CASES:
            if not (sampling and _wanted(label, models)):
                continue
            p = inp.sigmas if mid == kernels.QON else inp.params
            sid = kernels.STRATEGY_IDS[strategy]
            if backend == "numba":
                def fn(mid=mid, exact=exact, sid=sid, p=p):
                    nonlocal sink
                    sink += kernels.bench_sample_loop(mid, exact, sid, p, inp.rhos, inp.wo, inp.us)
            else:
                def fn(mid=mid, exact=exact, strategy=strategy, p=p):
                    nonlocal sink
                    s = sample_strategy(strategy, inp.wo, p, inp.us[:, 0], inp.us[:, 1])
                    f = _np_eval(mid, exact, p, inp.rhos, s.wi, inp.wo)
                    sink += float((f * s.wi[:, 2] / s.pdf).sum())
            rows.append(BenchRow(label, f"sample:{strategy}", backend, _time(fn, reps) / n))
    if not math.isfinite(sink):
        raise FloatingPointError("benchmark accumulator is not finite")
    return rows


def lookup(rows, model: str, op: str, backend: str = "numba") -> float:
    for row in rows:
        if (row.model, row.op, row.backend) == (model, op, backend):
            return row.ns_per_op
    raise KeyError((model, op, backend))


def format_table(rows) -> str:
    backends = sorted({r.backend for r in rows}, key=["numba", "numpy"].index)
    keys = list(dict.fromkeys((r.model, r.op) for r in rows))
    head = f"{'model':<12} {'op':<16}" + "".join(f" {b + ' ns/op':>14}" for b in backends)
    lines = [head, "-" * len(head)]
    for model, op in keys:
        cells = []
        for b in backends:
            try:
                cells.append(f" {lookup(rows, model, op, b):>14.2f}")
            except KeyError:
                cells.append(f" {'-':>14}")
        lines.append(f"{model:<12} {op:<16}" + "".join(cells))
    return "\n".join(lines)
