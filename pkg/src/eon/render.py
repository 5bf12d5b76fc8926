"""A small deterministic path tracer: one analytic sphere, an orthographic
camera, and either a uniform environment or a directional light.

Enough to run furnace tests and lit-sphere comparisons of the BRDFs and their
samplers; not a general renderer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels, rng
from ._accel import resolve_backend
from .brdf import Model, _check_rho
from .sampling import STRATEGIES, sample_strategy

GAMMA = 2.2


@dataclass(frozen=True, eq=False)
class Material:
    model: Model
    rho: tuple[float, float, float] = (1.0, 1.0, 1.0)
    sampler: str = "cosine"

    def __post_init__(self):
        _check_rho(self.rho)
        if np.shape(self.rho) != (3,):
            raise ValueError("material rho must be an RGB triple")
        if self.sampler not in STRATEGIES:
            raise ValueError(f"unknown sampler {self.sampler!r}")
        if self.sampler in ("ltc", "cltc", "cltc-mis") and self.model.name not in ("fon", "eon"):
            raise ValueError(f"sampler {self.sampler!r} is fitted to EON; use it with fon/eon only")


@dataclass(frozen=True, eq=False)
class Scene:
    """Sphere plus lighting. ``environment`` is uniform radiance seen by escaping
    rays; ``light_direction`` points toward a directional light of radiance
    ``light_radiance`` (zero disables it)."""

    material: Material
    center: tuple[float, float, float] = (0.0, 0.0, 0.0)
    radius: float = 1.0
    environment: tuple[float, float, float] = (1.0, 1.0, 1.0)
    light_direction: tuple[float, float, float] = (0.0, 0.0, 1.0)
    light_radiance: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if not self.radius > 0.0:
            raise ValueError("sphere radius must be positive")
        if min(self.environment) < 0.0 or min(self.light_radiance) < 0.0:
            raise ValueError("radiance must be non-negative")
        n = math.sqrt(sum(c * c for c in self.light_direction))
        if not n > 0.0:
            raise ValueError("light direction must be non-zero")


@dataclass(frozen=True)
class Camera:
    """Orthographic camera on the +z axis looking down -z; the image spans
    ``[-extent, extent]`` in x and y."""

    width: int = 64
    height: int = 64
    extent: float = 1.25

    def __post_init__(self):
        if self.width < 1 or self.height < 1 or not self.extent > 0.0:
            raise ValueError("camera needs positive size and extent")


@dataclass
class Image:
    width: int
    height: int
    pixels: np.ndarray = field(repr=False)  # (height, width, 3) linear RGB

    def __post_init__(self):
        if self.pixels.shape != (self.height, self.width, 3):
            raise ValueError("pixel buffer shape mismatch")


def _light_dir(scene: Scene) -> np.ndarray:
    d = np.asarray(scene.light_direction, dtype=float)
    return d / np.linalg.norm(d)


def render(scene: Scene, camera: Camera = Camera(), spp: int = 16, bounces: int = 50, seed: int = 0,
           backend: str | None = None) -> Image:
    if spp < 1:
        raise ValueError("spp must be >= 1")
    if bounces < 0:
        raise ValueError("bounces must be >= 0")
    mat = scene.material
    if resolve_backend(backend) == "numpy":
        pixels = _render_numpy(scene, camera, spp, bounces, seed)
    else:
        pixels = np.zeros((camera.height, camera.width, 3))
        kernels.render_loop(
            camera.width, camera.height, float(camera.extent), spp, bounces, rng.seed_key(seed),
            kernels.MODEL_IDS[mat.model.name], mat.model.roughness_value, mat.model.exact,
            np.asarray(mat.rho, dtype=float), kernels.STRATEGY_IDS[mat.sampler],
            np.asarray(scene.environment, dtype=float), _light_dir(scene),
            np.asarray(scene.light_radiance, dtype=float),
            np.array([*scene.center, scene.radius], dtype=float), pixels,
        )
    if not np.all(np.isfinite(pixels)):
        raise FloatingPointError("render produced non-finite radiance")
    return Image(camera.width, camera.height, pixels)


def _hit_sphere(o, d, center, radius, tmin=1e-9):
    p = o - center
    b = np.einsum("ij,ij->i", p, d)
    c = np.einsum("ij,ij->i", p, p) - radius * radius
    disc = b * b - c
    sq = np.sqrt(np.maximum(disc, 0.0))
    t1 = -b - sq
    t2 = -b + sq
    t = np.where(t1 > tmin, t1, np.where(t2 > tmin, t2, -1.0))
    return np.where(disc < 0.0, -1.0, t)


def _frame(n):
    sign = np.where(n[:, 2] >= 0.0, 1.0, -1.0)
    a = -1.0 / (sign + n[:, 2])
    b = n[:, 0] * n[:, 1] * a
    t = np.stack([1.0 + sign * n[:, 0] ** 2 * a, sign * b, -sign * n[:, 0]], -1)
    bt = np.stack([b, sign + n[:, 1] ** 2 * a, -n[:, 1]], -1)
    return t, bt


def _render_numpy(scene: Scene, camera: Camera, spp: int, bounces: int, seed: int) -> np.ndarray:
    """Wavefront version of ``kernels.render_loop`` with identical RNG use."""
    w, h = camera.width, camera.height
    mat = scene.material
    rho = np.asarray(mat.rho, dtype=float)
    env = np.asarray(scene.environment, dtype=float)
    lrad = np.asarray(scene.light_radiance, dtype=float)
    ldir = _light_dir(scene)
    center = np.asarray(scene.center, dtype=float)
    radius = float(scene.radius)
    r = mat.model.roughness_value
    per_sample = 2 + 2 * bounces

    pix = np.repeat(np.arange(w * h), spp)
    smp = np.tile(np.arange(spp), w * h)
    keys = rng.keys_for(seed, pix)
    base = smp.astype(np.int64) * per_sample
    jj, ii = np.divmod(pix, w)
    jx = rng.uniforms_keyed(keys, base)
    jy = rng.uniforms_keyed(keys, base + 1)
    n_paths = pix.size
    o = np.stack(
        [
            (2.0 * (ii + jx) / w - 1.0) * camera.extent,
            (1.0 - 2.0 * (jj + jy) / h) * camera.extent,
            np.full(n_paths, center[2] + 2.0 * radius + 1.0),
        ],
        -1,
    )
    d = np.tile([0.0, 0.0, -1.0], (n_paths, 1))
    thr = np.ones((n_paths, 3))
    acc = np.zeros((n_paths, 3))
    alive = np.arange(n_paths)
    for bounce in range(bounces + 1):
        if alive.size == 0:
            break
        t = _hit_sphere(o[alive], d[alive], center, radius)
        miss = t < 0.0
        acc[alive[miss]] += thr[alive[miss]] * env
        alive, t = alive[~miss], t[~miss]
        if bounce == bounces or alive.size == 0:
            break
        hit = o[alive] + t[:, None] * d[alive]
        n = (hit - center) / radius
        tv, bv = _frame(n)
        dd = d[alive]
        wo = -np.stack([np.einsum("ij,ij->i", dd, tv), np.einsum("ij,ij->i", dd, bv),
                        np.einsum("ij,ij->i", dd, n)], -1)
        front = wo[:, 2] > 0.0
        alive, hit, n, tv, bv, wo = alive[front], hit[front], n[front], tv[front], bv[front], wo[front]
        if np.any(lrad > 0.0) and alive.size:
            lz = n @ ldir
            lit = lz > 0.0
            if np.any(lit):
                so = hit[lit] + n[lit] * 1e-9
                unocc = _hit_sphere(so, np.broadcast_to(ldir, so.shape), center, radius) < 0.0
                idx = np.flatnonzero(lit)[unocc]
                wl = np.stack([tv[idx] @ ldir, bv[idx] @ ldir, lz[idx]], -1)
                f = mat.model.eval_unchecked(rho, wl, wo[idx])
                acc[alive[idx]] += thr[alive[idx]] * f * lz[idx, None] * lrad
        k = keys[alive]
        b0 = base[alive] + 2 + 2 * bounce
        u1 = rng.uniforms_keyed(k, b0)
        u2 = rng.uniforms_keyed(k, b0 + 1)
        s = sample_strategy(mat.sampler, wo, r, u1, u2)
        ok = (s.wi[:, 2] > 0.0) & (s.pdf > 0.0)
        alive, hit, n, tv, bv, wo = alive[ok], hit[ok], n[ok], tv[ok], bv[ok], wo[ok]
        wi, pdf = s.wi[ok], s.pdf[ok]
        f = mat.model.eval_unchecked(rho, wi, wo)
        thr[alive] *= f * (wi[:, 2] / pdf)[:, None]
        d[alive] = wi[:, :1] * tv + wi[:, 1:2] * bv + wi[:, 2:3] * n
        o[alive] = hit + n * 1e-9
    pixels = acc.reshape(h * w, spp, 3).sum(axis=1) / spp
    return pixels.reshape(h, w, 3)


def sphere_mask(scene: Scene, camera: Camera, margin: float = 0.0) -> np.ndarray:
    """Pixels whose centre ray hits the sphere at least ``margin`` inside the rim."""
    xs = (2.0 * (np.arange(camera.width) + 0.5) / camera.width - 1.0) * camera.extent
    ys = (1.0 - 2.0 * (np.arange(camera.height) + 0.5) / camera.height) * camera.extent
    dx = xs[None, :] - scene.center[0]
    dy = ys[:, None] - scene.center[1]
    return np.hypot(dx, dy) < scene.radius - margin


def furnace_deviation(image: Image, scene: Scene, camera: Camera) -> float:
    """``|mean sphere pixel - background| / background`` on channel means.

    Sphere pixels are those whose full footprint lies inside the silhouette,
    so edge pixels mixing in background do not dilute the statistic.
    """
    pix_size = 2.0 * camera.extent / min(camera.width, camera.height)
    mask = sphere_mask(scene, camera, margin=pix_size)
    bg = float(np.mean(scene.environment))
    sphere = float(np.mean(image.pixels[mask]))
    return abs(sphere - bg) / bg


# --- image output -----------------------------------------------------------------


def encode_srgb8(linear: np.ndarray) -> np.ndarray:
    """Linear [0, 1] -> 8-bit with a 2.2 gamma curve (values clipped)."""
    v = np.clip(np.asarray(linear, dtype=float), 0.0, 1.0) ** (1.0 / GAMMA)
    return np.rint(v * 255.0).astype(np.uint8)


def decode_srgb8(values: np.ndarray) -> np.ndarray:
    return (np.asarray(values, dtype=float) / 255.0) ** GAMMA


def write_image(image: Image, path, format: str | None = None) -> None:
    """Write ``image`` as binary PPM (``P6``) or, when Pillow is present, PNG.

    PPM layout: ``b"P6\\n<width> <height>\\n255\\n"`` followed by
    ``height * width`` RGB byte triples, rows top to bottom.
    """
    path = Path(path)
    fmt = (format or path.suffix.lstrip(".") or "ppm").lower()
    data = encode_srgb8(image.pixels)
    if fmt == "ppm":
        header = f"P6\n{image.width} {image.height}\n255\n".encode("ascii")
        path.write_bytes(header + data.tobytes())
    elif fmt == "png":
        try:
            from PIL import Image as PILImage
        except ImportError as exc:
            raise RuntimeError("PNG output needs Pillow; write .ppm instead") from exc
        PILImage.fromarray(data, "RGB").save(path)
    else:
        raise ValueError(f"unsupported image format {fmt!r}")


def read_ppm(path) -> Image:
    """Read a P6 file written by :func:`write_image` (decoded back to linear)."""
    raw = Path(path).read_bytes()
    parts = raw.split(b"\n", 3)
    if parts[0] != b"P6" or parts[2] != b"255":
        raise ValueError("not an 8-bit P6 file")
    w, h = (int(v) for v in parts[1].split())
    data = np.frombuffer(parts[3], dtype=np.uint8)
    if data.size != w * h * 3:
        raise ValueError("truncated PPM payload")
    return Image(w, h, decode_srgb8(data.reshape(h, w, 3)))
