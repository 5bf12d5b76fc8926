"""Acceptance criteria, one test each.

Every test prints a single ``PASS``/``FAIL`` line with the measured quantity,
its tolerance and the runtime against the runtime budget. Run with
``pytest tests/test_acceptance.py -v`` (lines go to the terminal report) or
directly with ``python3 tests/test_acceptance.py``.
"""

from __future__ import annotations

import math
import sys
import time

import numpy as np
import pytest

from eon import _accel, bench, brdf, render, sampling, validation
from eon.brdf import FonRoughness, QonRoughness
from eon.validation import QuadratureSpec, direction_from_mu

PI = math.pi
GRID11 = np.linspace(0.0, 1.0, 11)
MU5 = (0.02, 0.25, 0.5, 0.75, 1.0)
R5 = (0.0, 0.25, 0.5, 0.75, 1.0)
BACKEND = "numba" if _accel.USE_NUMBA else "numpy"

_reporter = None


def _emit(line: str) -> None:
    if _reporter is not None:
        _reporter.write_line(line)
    else:
        print(line)


@pytest.fixture(autouse=True)
def _terminal(request):
    global _reporter
    _reporter = request.config.pluginmanager.get_plugin("terminalreporter")
    yield
    _reporter = None


def check(number: int, title: str, budget_s: float):
    """Decorator: time the body, which returns ``(passed, detail)``, print one line, assert."""

    def wrap(fn):
        def run():
            t0 = time.perf_counter()
            ok, detail = fn()
            dt = time.perf_counter() - t0
            ok = bool(ok) and dt < budget_s
            _emit(f"[{'PASS' if ok else 'FAIL'}] {number:2d} {title}: {detail}; {dt:.1f}s (budget {budget_s:g}s)")
            assert ok, detail

        run.__name__ = fn.__name__
        run.__doc__ = fn.__doc__
        return run

    return wrap


@check(1, "white furnace, analytic EON albedo", 1)
def test_01_analytic_energy_preservation():
    worst = 0.0
    for r in GRID11:
        for mu in GRID11:
            e = float(brdf.eon_directional_albedo(1.0, FonRoughness(r), direction_from_mu(mu), exact=True))
            worst = max(worst, abs(e - 1.0))
    return worst < 1e-6, f"max |E - 1| = {worst:.2e} over 11x11 (r, mu) (tol 1e-6)"


@check(2, "white furnace, quadrature of EON", 10)
def test_02_quadrature_energy_preservation():
    worst = 0.0
    for r in GRID11:
        m = brdf.make_model("eon", r)
        for mu in GRID11:
            worst = max(worst, abs(validation.albedo_numeric(m, direction_from_mu(mu)) - 1.0))
    return worst < 2e-3, f"max |integral - 1| = {worst:.2e} over 11x11 (r, mu) (tol 2e-3)"


@check(3, "FON albedo fit accuracy", 1)
def test_03_albedo_fit():
    mu, r = np.meshgrid(np.linspace(0, 1, 1001), np.linspace(0, 1, 101))
    ex = brdf._fon_albedo_exact(mu, r)
    ap = brdf._fon_albedo_approx(mu, r)
    worst = float(np.max(np.abs(ap - ex) / ex))
    return worst < 1e-3, f"max relative gap = {worst:.2e} on 1001x101 (mu, r) (tol 1e-3)"


@check(4, "analytic albedos vs quadrature", 30)
def test_04_albedos_vs_oracle():
    worst = {}
    for sigma in np.linspace(0, PI / 2, 9):
        m = brdf.make_model("qon", sigma)
        for mu in np.linspace(0, 1, 9):
            got = validation.albedo_numeric(m, direction_from_mu(mu))
            want = float(brdf.qon_directional_albedo(QonRoughness(sigma), mu))
            worst["qon E"] = max(worst.get("qon E", 0.0), abs(got - want) / want)
    for r in np.linspace(0, 1, 9):
        m = brdf.make_model("fon", r)
        for mu in np.linspace(0, 1, 9):
            got = validation.albedo_numeric(m, direction_from_mu(mu))
            want = float(brdf.fon_albedo_exact(mu, FonRoughness(r)))
            worst["fon E"] = max(worst.get("fon E", 0.0), abs(got - want) / want)
    q = QuadratureSpec(48, 96)
    for sigma in np.linspace(0, PI / 2, 5):
        m = brdf.make_model("qon", sigma)
        want = float(brdf.qon_average_albedo(QonRoughness(sigma)))
        worst["qon <E>"] = max(worst.get("qon <E>", 0.0), abs(validation.average_albedo_numeric(m, q) - want) / want)
    for r in np.linspace(0, 1, 5):
        m = brdf.make_model("fon", r)
        want = float(brdf.fon_average_albedo(FonRoughness(r)))
        worst["fon <E>"] = max(worst.get("fon <E>", 0.0), abs(validation.average_albedo_numeric(m, q) - want) / want)
    ok = all(v < 1e-3 for v in worst.values())
    return ok, "max relative gap " + ", ".join(f"{k} {v:.1e}" for k, v in worst.items()) + " (tol 1e-3)"


@check(5, "FON energy loss at r = 1", 1)
def test_05_fon_energy_loss():
    v = float(brdf.fon_average_albedo(FonRoughness(1.0)))
    return 0.80 <= v <= 0.86, f"<E_F>(1) = {v:.6f} (range [0.80, 0.86])"


@check(6, "sampler pdf normalization and chi-square", 120)
def test_06_sampler_correctness():
    worst_norm = 0.0
    for mu in MU5:
        wo = direction_from_mu(mu)
        for r in R5:
            total = validation.integrate_hemisphere(lambda wi: sampling._pdf_eon(wo, wi, r), QuadratureSpec(64, 128))
            worst_norm = max(worst_norm, abs(total - 1.0))
    passed, lowest = 0, 1.0
    for k, (mu, r) in enumerate((mu, r) for mu in MU5 for r in R5):
        rep = validation.chi2_sampler_test(r, mu, 1_000_000, seed=100 + k, backend=BACKEND)
        passed += rep.passed
        lowest = min(lowest, rep.p_value)
    ok = worst_norm < 1e-3 and passed >= 23
    return ok, (f"max |integral pdf - 1| = {worst_norm:.1e} (tol 1e-3); chi2 passed {passed}/25 at p > 0.01 "
                f"(need 23), lowest p = {lowest:.3f}")


@check(7, "CLTC hemisphere confinement", 30)
def test_07_confinement():
    below = 0
    for k, (mu, r) in enumerate((mu, r) for mu in MU5 for r in R5):
        smp = validation.eon_samples(r, mu, 1_000_000, seed=200 + k, backend=BACKEND, strategy="cltc")
        below += int(np.sum(smp[:, 2] < 0.0))
    return below == 0, f"{below} below-horizon samples in 25 x 1e6 draws (mu in {MU5}, r in {R5})"


@check(8, "variance reduction of CLTC+MIS", 60)
def test_08_variance():
    grazing = math.cos(math.radians(88.0))
    cos_g = validation.weight_stats("cosine", 1.0, grazing, 1_000_000, seed=1, exact=True, backend=BACKEND)
    mis_g = validation.weight_stats("cltc-mis", 1.0, grazing, 1_000_000, seed=1, exact=True, backend=BACKEND)
    cos_n = validation.weight_stats("cosine", 1.0, 1.0, 1_000_000, seed=2, exact=True, backend=BACKEND)
    mis_n = validation.weight_stats("cltc-mis", 1.0, 1.0, 1_000_000, seed=2, exact=True, backend=BACKEND)
    ratio = cos_g.variance / mis_g.variance
    normal = mis_n.variance / cos_n.variance
    return ratio >= 10 and normal <= 1.5, (f"var(cosine)/var(MIS) at 88 deg = {ratio:.1f} (need >= 10); "
                                           f"var(MIS)/var(cosine) at 0 deg = {normal:.2f} (need <= 1.5)")


@check(9, "unbiased MIS albedo estimate", 60)
def test_09_unbiased():
    worst, k = 0.0, 0
    for mu in (0.05, 0.5, 1.0):
        for r in (0.3, 0.7, 1.0):
            ws = validation.weight_stats("cltc-mis", r, mu, 1_000_000, seed=300 + k, exact=True, backend=BACKEND)
            target = float(brdf.eon_directional_albedo(1.0, FonRoughness(r), direction_from_mu(mu)))
            worst = max(worst, abs(ws.mean - target) / ws.stderr)
            k += 1
    return worst < 3.0, f"max |mean - E| / stderr = {worst:.2f} over 9 (mu, r) with 1e6 draws each (tol 3)"


@check(10, "furnace render", 300)
def test_10_furnace_render():
    cam = render.Camera(64, 64)
    eon_scene = render.Scene(render.Material(brdf.make_model("eon", 1.0), (1.0, 1.0, 1.0), "cltc-mis"))
    qon_scene = render.Scene(render.Material(brdf.make_model("qon", PI / 2), (1.0, 1.0, 1.0), "cosine"))
    d_eon = render.furnace_deviation(render.render(eon_scene, cam, 256, 50, seed=1, backend=BACKEND), eon_scene, cam)
    d_qon = render.furnace_deviation(render.render(qon_scene, cam, 256, 50, seed=1, backend=BACKEND), qon_scene, cam)
    return d_eon < 0.01 and d_qon > 0.2, (f"EON r=1 deviation {d_eon:.4f} (need < 0.01); "
                                          f"QON sigma=pi/2 deviation {d_qon:.3f} (need > 0.2)")


@pytest.mark.skipif(not _accel.USE_NUMBA, reason="orderings are defined for the compiled per-call kernels")
@check(11, "benchmark orderings", 120)
def test_11_bench_orderings():
    rows = bench.run(n=1_000_000, seed=0, reps=9, backends=(BACKEND,))
    t = {m: bench.lookup(rows, m, "eval", BACKEND) for m in ("lambert", "qon", "fon", "eon-approx", "eon-exact")}
    cos = bench.lookup(rows, "eon-approx", "sample:cosine", BACKEND)
    cltc = bench.lookup(rows, "eon-approx", "sample:cltc-mis", BACKEND)
    similar = 0.5 <= t["fon"] / t["qon"] <= 2.0
    ordered = t["lambert"] < min(t["fon"], t["qon"]) and max(t["fon"], t["qon"]) < t["eon-approx"] < t["eon-exact"]
    ratio = t["eon-exact"] / t["eon-approx"]
    samp = cltc / cos
    ok = similar and ordered and ratio >= 2 and samp <= 4
    detail = (f"{BACKEND} ns/op lambert {t['lambert']:.1f}, fon {t['fon']:.1f}, qon {t['qon']:.1f}, "
              f"eon-approx {t['eon-approx']:.1f}, eon-exact {t['eon-exact']:.1f}; exact/approx {ratio:.2f} "
              f"(need >= 2); cltc/cosine sampling {samp:.2f} (need <= 4)")
    return ok, detail


@check(12, "property suites", 60)
def test_12_properties():
    gen = np.random.default_rng(2024)
    n = 10_000
    z = gen.uniform(0, 1, (2, n))
    phi = gen.uniform(0, 2 * PI, (2, n))
    s = np.sqrt(1 - z * z)
    wi = np.stack([s[0] * np.cos(phi[0]), s[0] * np.sin(phi[0]), z[0]], -1)
    wo = np.stack([s[1] * np.cos(phi[1]), s[1] * np.sin(phi[1]), z[1]], -1)
    rho = gen.uniform(0, 1, 3)
    recip, neg, lam = 0.0, 0, 0.0
    for name, top in (("lambert", 0.0), ("qon", PI / 2), ("qon-footnote", PI / 2), ("fon", 1.0), ("eon", 1.0)):
        for exact in (True, False):
            for p in np.linspace(0, top, 5):
                m = brdf.make_model(name, p, exact)
                a, b = m.eval(rho, wi, wo), m.eval(rho, wo, wi)
                recip = max(recip, float(np.max(np.abs(a - b) / np.maximum(np.abs(a), 1e-300))))
                neg += int(np.sum(a < 0))
            m0 = brdf.make_model(name, 0.0, exact)
            lam = max(lam, float(np.max(np.abs(m0.eval(rho, wi, wo) - rho / PI) / (rho / PI))))
    w0 = validation.eon_weights("cltc-mis", 0.0, 0.37, 100_000, seed=5, backend=BACKEND)
    degen = float(np.max(np.abs(w0 - 1.0)))
    cons = 0.0
    for r in (0.0, 0.5, 1.0):
        for mu in (0.02, 0.5, 1.0):
            w = direction_from_mu(mu, 0.8)
            u1, u2 = gen.uniform(0, 1, 10_000), gen.uniform(0, 1, 10_000)
            smp = sampling.sample_eon(w, FonRoughness(r), u1, u2)
            pdf = sampling.pdf_eon(w, smp.wi, FonRoughness(r))
            cons = max(cons, float(np.max(np.abs(pdf - smp.pdf) / smp.pdf)))
    ok = recip <= 1e-12 and neg == 0 and lam <= 1e-12 and degen <= 1e-12 and cons <= 1e-9
    return ok, (f"reciprocity {recip:.1e} (tol 1e-12), negatives {neg}, Lambert limit {lam:.1e} (tol 1e-12), "
                f"r=0 weight |w-1| {degen:.1e} (tol 1e-12), sample/pdf {cons:.1e} (tol 1e-9)")


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted(globals().items()):
        if name == "test_11_bench_orderings" and not _accel.USE_NUMBA:
            print("[SKIP] 11 benchmark orderings: numba disabled; orderings are defined for compiled kernels")
            continue
        if name.startswith("test_") and callable(fn):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
