"""``eon`` command-line front end.

Every subcommand validates its flags before doing any work, reports a bad
value as a single ``eon: error: ...`` line with exit status 2, and writes
output files atomically (temp file + rename), so a failed run leaves nothing
behind.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import bench as bench_mod
from . import render as render_mod
from . import validation
from ._accel import BACKENDS, set_threads, threads_from_env
from .brdf import MODEL_NAMES, DomainError, make_model

SAMPLERS = ("cosine", "uniform", "cltc", "cltc-mis")
EXIT_USAGE = 2
EXIT_FAILED_CHECK = 1


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(EXIT_USAGE, f"eon: error: {message}\n")


# --- flag validation --------------------------------------------------------------


def _in_range(name, value, lo, hi):
    if not (lo <= value <= hi):
        raise CliError(f"{name} must lie in [{lo:g}, {hi:g}], got {value:g}")
    return value


def _roughness(args) -> float:
    model = args.model
    sigma, r = getattr(args, "sigma", None), getattr(args, "r", None)
    if model == "lambert":
        if sigma is not None or r is not None:
            raise CliError("lambert takes no roughness; drop --sigma/--r")
        return 0.0
    if model in ("qon", "qon-footnote"):
        if r is not None:
            raise CliError(f"{model} is parameterized by --sigma (radians), not --r")
        if sigma is None:
            raise CliError(f"{model} needs --sigma")
        return _in_range("--sigma", sigma, 0.0, 0.5 * math.pi)
    if sigma is not None:
        raise CliError(f"{model} is parameterized by --r in [0, 1], not --sigma")
    if r is None:
        raise CliError(f"{model} needs --r")
    return _in_range("--r", r, 0.0, 1.0)


def _rho(args):
    for c in args.rho:
        _in_range("--rho", c, 0.0, 1.0)
    return np.asarray(args.rho, dtype=float)


def _direction(name, values, strict=False):
    w = np.asarray(values, dtype=float)
    n = float(np.linalg.norm(w))
    if not n > 0.0 or not math.isfinite(n):
        raise CliError(f"{name} must be a non-zero finite vector")
    w = w / n
    if w[2] < 0.0 or (strict and w[2] <= 0.0):
        raise CliError(f"{name} must point into the upper hemisphere (z {'>' if strict else '>='} 0)")
    return w


def _positive(name, value):
    if value < 1:
        raise CliError(f"{name} must be >= 1, got {value}")
    return value


def _out_path(path) -> Path:
    p = Path(path)
    if not p.parent.exists():
        raise CliError(f"output directory {str(p.parent)!r} does not exist")
    return p


def _atomic_write(path: Path, writer) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    os.close(fd)
    try:
        writer(tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(v) -> str:
    return f"{v:.9g}"


# --- subcommands ------------------------------------------------------------------


def cmd_eval(args) -> int:
    rough = _roughness(args)
    rho = _rho(args)
    wi = _direction("--wi", args.wi)
    wo = _direction("--wo", args.wo)
    model = make_model(args.model, rough, args.exact)
    value = np.broadcast_to(model.eval(rho, wi, wo), (3,))
    print(" ".join(_fmt(v) for v in value))
    return 0


def cmd_albedo(args) -> int:
    rough = _roughness(args)
    rho = _rho(args)
    out = _out_path(args.out)
    if args.mu is not None:
        mus = [_in_range("--mu", args.mu, 0.0, 1.0)]
    else:
        _positive("--grid", args.grid)
        mus = [0.5] if args.grid == 1 else list(np.linspace(0.0, 1.0, args.grid))
    model = make_model(args.model, rough, args.exact)
    rho_arg = float(rho[0]) if np.all(rho == rho[0]) else rho
    rows = validation.albedo_rows(model, mus, rho_arg)
    _atomic_write(out, lambda p: validation.write_csv(p, validation.ALBEDO_COLUMNS, rows))
    print(f"wrote {len(rows)} rows to {out}")
    return 0


def cmd_stats(args) -> int:
    r = _in_range("--r", args.r if args.r is not None else 1.0, 0.0, 1.0)
    if args.n < 10_000:
        raise CliError(f"--n must be >= 10000 for weight statistics, got {args.n}")
    for th in args.theta:
        _in_range("--theta", th, 0.0, 89.9)
    out = _out_path(args.out)
    strategies = args.sampler or list(SAMPLERS)
    rows = validation.stats_rows(r, args.theta, args.n, args.seed, strategies, args.exact, args.backend)
    _atomic_write(out, lambda p: validation.write_csv(p, validation.STATS_COLUMNS, rows))
    print(f"wrote {len(rows)} rows to {out}")
    return 0


def cmd_chi2(args) -> int:
    r = _in_range("--r", args.r if args.r is not None else 1.0, 0.0, 1.0)
    mu = _in_range("--mu", args.mu if args.mu is not None else 0.5, 0.0, 1.0)
    if mu == 0.0:
        raise CliError("--mu must be > 0 for sampling (the view cannot lie on the horizon)")
    _positive("--n", args.n)
    rep = validation.chi2_sampler_test(r, mu, args.n, tuple(args.bins), args.seed, args.backend)
    verdict = "pass" if rep.passed else "FAIL"
    print(f"chi2 {rep.statistic:.6g} dof {rep.dof} p {rep.p_value:.6g} pooled {rep.pooled_cells} {verdict}")
    return 0 if rep.passed else EXIT_FAILED_CHECK


def cmd_furnace(args) -> int:
    rough = _roughness(args)
    rho = _rho(args)
    _positive("--spp", args.spp)
    if args.bounces < 0:
        raise CliError(f"--bounces must be >= 0, got {args.bounces}")
    _positive("--size", args.size)
    out = _out_path(args.out)
    model = make_model(args.model, rough, args.exact)
    scene = render_mod.Scene(render_mod.Material(model, tuple(rho), args.sampler))
    camera = render_mod.Camera(args.size, args.size)
    image = render_mod.render(scene, camera, args.spp, args.bounces, args.seed, args.backend)
    _atomic_write(out, lambda p: render_mod.write_image(image, p, out.suffix.lstrip(".") or "ppm"))
    mask = render_mod.sphere_mask(scene, camera, 2.0 * camera.extent / args.size)
    mean = float(np.mean(image.pixels[mask]))
    dev = render_mod.furnace_deviation(image, scene, camera)
    print(f"sphere_mean {mean:.6f} background {np.mean(scene.environment):.6f} deviation {dev:.6f}")
    return 0


def cmd_bench(args) -> int:
    _positive("--n", args.n)
    if args.reps < 5:
        raise CliError(f"--reps must be >= 5, got {args.reps}")
    backends = [args.backend] if args.backend else list(BACKENDS)
    rows = bench_mod.run(args.n, args.seed, args.reps, backends, tuple(args.models))
    print(bench_mod.format_table(rows))
    return 0


# --- parser ---------------------------------------------------------------------


def _add_model(p, default=None):
    p.add_argument("--model", choices=MODEL_NAMES, required=default is None, default=default)
    p.add_argument("--sigma", type=float, help="QON roughness angle in radians, [0, pi/2]")
    p.add_argument("--r", type=float, help="FON/EON roughness in [0, 1]")
    p.add_argument("--rho", type=float, nargs=3, metavar=("R", "G", "B"), default=[1.0, 1.0, 1.0])


def _add_exact(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--exact", dest="exact", action="store_true", default=True,
                   help="closed-form FON albedo inside EON (default)")
    g.add_argument("--approx", dest="exact", action="store_false", help="polynomial albedo fit inside EON")


def _add_backend(p):
    p.add_argument("--backend", choices=BACKENDS, default=None,
                   help="kernel backend (default: numba unless EON_DISABLE_NUMBA is set)")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="eon", description="Energy-preserving Oren-Nayar BRDFs: evaluation, albedo "
                 "tables, sampler statistics, furnace renders and benchmarks.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("eval", help="print the BRDF value per channel")
    _add_model(p)
    _add_exact(p)
    p.add_argument("--wi", type=float, nargs=3, default=[0.0, 0.0, 1.0], metavar=("X", "Y", "Z"))
    p.add_argument("--wo", type=float, nargs=3, default=[0.0, 0.0, 1.0], metavar=("X", "Y", "Z"))
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("albedo", help="CSV of analytic vs quadrature directional albedo over mu")
    _add_model(p)
    _add_exact(p)
    p.add_argument("--grid", type=int, default=11, help="number of mu values in [0, 1]")
    p.add_argument("--mu", type=float, help="single mu instead of a grid")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_albedo)

    p = sub.add_parser("stats", help="CSV of EON throughput-weight statistics per strategy and angle")
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--theta", type=float, nargs="+", default=[float(t) for t in range(0, 90, 2)],
                   help="view zenith angles in degrees")
    p.add_argument("--sampler", choices=SAMPLERS, nargs="+", help="strategies (default: all)")
    p.add_argument("--n", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    _add_exact(p)
    _add_backend(p)
    p.set_defaults(fn=cmd_stats)

    p = sub.add_parser("chi2", help="chi-square test of the EON sampler against its pdf")
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--mu", type=float, default=0.5)
    p.add_argument("--n", type=int, default=1_000_000)
    p.add_argument("--bins", type=int, nargs=2, default=[32, 64], metavar=("NMU", "NPHI"))
    p.add_argument("--seed", type=int, default=0)
    _add_backend(p)
    p.set_defaults(fn=cmd_chi2)

    p = sub.add_parser("furnace", help="render a sphere in a white furnace and report its deviation")
    _add_model(p)
    _add_exact(p)
    p.add_argument("--sampler", choices=SAMPLERS, default="cosine")
    p.add_argument("--spp", type=int, default=256)
    p.add_argument("--bounces", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--size", type=int, default=64, help="image width and height in pixels")
    p.add_argument("--out", required=True, help=".ppm (or .png with Pillow)")
    _add_backend(p)
    p.set_defaults(fn=cmd_furnace)

    p = sub.add_parser("bench", help="ns/op for evaluation and sampling")
    p.add_argument("--models", nargs="+", choices=bench_mod.MODEL_SET, default=list(bench_mod.MODEL_SET))
    p.add_argument("--n", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reps", type=int, default=7)
    _add_backend(p)
    p.set_defaults(fn=cmd_bench)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        set_threads(threads_from_env())
        return args.fn(args)
    except (CliError, DomainError, ValueError, TypeError, RuntimeError) as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"eon: error: {msg}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
