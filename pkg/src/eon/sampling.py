"""Importance sampling for EON: the fitted LTC lobe, clipped-LTC (CLTC)
sampling confined to the upper hemisphere, and the one-sample MIS mixture
of CLTC with a uniform hemispherical lobe.

Samplers never own a generator: callers pass uniform variates ``u1, u2`` in
[0, 1). All functions broadcast over leading axes.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .brdf import FonRoughness, _r_of, check_direction

INV_PI = 1.0 / math.pi
INV_2PI = 0.5 / math.pi


class LtcCoeffs(NamedTuple):
    """Entries of ``M = [[a, 0, b], [0, c, 0], [d, 0, 1]]``."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray

    @property
    def det(self):
        return self.c * (self.a - self.b * self.d)

    def matrix(self) -> np.ndarray:
        a, b, c, d = (np.asarray(v, dtype=float) for v in self)
        zero = np.zeros(np.broadcast(a, b, c, d).shape)
        one = zero + 1.0
        rows = [
            np.stack([a + zero, zero, b + zero], -1),
            np.stack([zero, c + zero, zero], -1),
            np.stack([d + zero, zero, one], -1),
        ]
        return np.stack(rows, -2)


class DirectionalSample(NamedTuple):
    wi: np.ndarray
    pdf: np.ndarray


def _check_u(u1, u2):
    u1 = np.asarray(u1, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    if not (np.all((u1 >= 0.0) & (u1 <= 1.0)) and np.all((u2 >= 0.0) & (u2 <= 1.0))):
        raise ValueError("random variates must lie in [0, 1]")
    return u1, u2


def _ltc_coeffs(mu, r):
    mu = np.asarray(mu, dtype=float)
    r = np.asarray(r, dtype=float)
    a = 1.0 + r * (0.303392 + (-0.518982 + 0.111709 * mu) * mu + (-0.276266 + 0.335918 * mu) * r)
    b = r * (-1.16407 + 1.15859 * mu + (0.150815 - 0.150105 * mu) * r) / (mu * mu * mu - 1.43545)
    c = 1.0 + (0.20013 + (-0.506373 + 0.261777 * mu) * mu) * r
    d = ((0.540852 + (-1.01625 + 0.475392 * mu) * mu) * r) / (-1.0743 + mu * (0.0725628 + mu))
    return LtcCoeffs(a, b, c, d)


def ltc_coeffs(mu, r: FonRoughness) -> LtcCoeffs:
    mu = np.asarray(mu, dtype=float)
    if not np.all((mu > 0.0) & (mu <= 1.0)):
        raise ValueError("ltc_coeffs needs mu in (0, 1]")
    return _ltc_coeffs(mu, _r_of(r))


def orthonormal_basis_ltc(w):
    """Columns ``X, Y`` of the frame where ``w`` has zero azimuth (Z is +z)."""
    w = np.asarray(w, dtype=float)
    len2 = w[..., 0] ** 2 + w[..., 1] ** 2
    ok = len2 > 0.0
    inv = np.where(ok, 1.0 / np.sqrt(np.where(ok, len2, 1.0)), 0.0)
    xx = np.where(ok, w[..., 0] * inv, 1.0)
    xy = np.where(ok, w[..., 1] * inv, 0.0)
    return xx, xy


def _to_local(xx, xy, v):
    return np.stack([xx * v[..., 0] - xy * v[..., 1], xy * v[..., 0] + xx * v[..., 1], v[..., 2]], -1)


def _to_ltc(xx, xy, v):
    return np.stack([xx * v[..., 0] + xy * v[..., 1], -xy * v[..., 0] + xx * v[..., 1], v[..., 2]], -1)


def _clip_factor(d):
    return 0.5 * (1.0 + 1.0 / np.sqrt(d * d + 1.0))


def _cltc_sample(wo, r, u1, u2):
    a, b, c, d = _ltc_coeffs(wo[..., 2], r)
    rad = np.sqrt(u1)
    phi = 2.0 * math.pi * u2
    x = rad * np.cos(phi)
    y = rad * np.sin(phi)
    s = _clip_factor(d)
    x = -((1.0 - s) * np.sqrt(1.0 - y * y) + s * x)
    # Keep the full half-disc on the side the clipping plane leaves intact.
    x = np.where(d > 0.0, -x, x)
    wh = np.stack([x, y, np.sqrt(np.maximum(1.0 - (x * x + y * y), 0.0))], -1)
    pdf_wh = wh[..., 2] / (math.pi * s)
    wi = np.stack([a * wh[..., 0] + b * wh[..., 2], c * wh[..., 1], d * wh[..., 0] + wh[..., 2]], -1)
    length = np.sqrt(np.einsum("...i,...i->...", wi, wi))
    det = c * (a - b * d)
    pdf = pdf_wh * length ** 3 / det
    wi = wi / length[..., None]
    # the rim of the clipped disc maps onto the horizon; keep rounding above it
    wi[..., 2] = np.maximum(wi[..., 2], 0.0)
    xx, xy = orthonormal_basis_ltc(wo)
    return DirectionalSample(_to_local(xx, xy, wi), pdf)


def _cltc_pdf(wo, wi, r):
    xx, xy = orthonormal_basis_ltc(wo)
    v = _to_ltc(xx, xy, wi)
    a, b, c, d = _ltc_coeffs(wo[..., 2], r)
    det = c * (a - b * d)
    hx = c * (v[..., 0] - b * v[..., 2])
    hy = (a - b * d) * v[..., 1]
    hz = -c * (d * v[..., 0] - a * v[..., 2])
    len2 = hx * hx + hy * hy + hz * hz
    s = _clip_factor(d)
    return det * det / (len2 * len2) * np.maximum(hz, 0.0) / (math.pi * s)


def cltc_sample(wo, r: FonRoughness, u1, u2) -> DirectionalSample:
    """Draw ``wi`` from the clipped LTC lobe fitted to EON for view ``wo``."""
    wo = check_direction(wo, "wo", strict_upper=True)
    u1, u2 = _check_u(u1, u2)
    return _cltc_sample(wo, _r_of(r), u1, u2)


def cltc_pdf(wo, wi, r: FonRoughness):
    wo = check_direction(wo, "wo", strict_upper=True)
    wi = np.asarray(wi, dtype=float)
    return _cltc_pdf(wo, wi, _r_of(r))


def uniform_lobe_sample(u1, u2) -> np.ndarray:
    """Uniform direction on the upper hemisphere (density 1 / 2pi)."""
    u1 = np.asarray(u1, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    sin_t = np.sqrt(np.maximum(0.0, 1.0 - u1 * u1))
    phi = 2.0 * math.pi * u2
    return np.stack([sin_t * np.cos(phi), sin_t * np.sin(phi), u1], -1)


def cosine_sample(u1, u2) -> DirectionalSample:
    """Cosine-weighted hemisphere sample by lifting a uniform disc point."""
    u1 = np.asarray(u1, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    rad = np.sqrt(u1)
    phi = 2.0 * math.pi * u2
    z = np.sqrt(np.maximum(0.0, 1.0 - u1))
    wi = np.stack([rad * np.cos(phi), rad * np.sin(phi), z], -1)
    return DirectionalSample(wi, z * INV_PI)


def uniform_probability(mu, r):
    """Probability of picking the uniform lobe in the EON MIS mixture."""
    mu = np.asarray(mu, dtype=float)
    return np.power(r, 0.1) * (0.162925 + mu * (-0.372058 + (0.538233 - 0.290822 * mu) * mu))


def _sample_eon(wo, r, u1, u2):
    p_u = uniform_probability(wo[..., 2], r)
    p_c = 1.0 - p_u
    pick_u = u1 < p_u
    # Reuse u1 after the branch choice so each branch sees a full [0, 1) variate.
    uu = np.where(pick_u, u1 / np.where(pick_u, p_u, 1.0), (u1 - p_u) / p_c)
    uu = np.clip(uu, 0.0, 1.0)
    wi_u = uniform_lobe_sample(uu, u2)
    cl = _cltc_sample(wo, r, uu, u2)
    wi = np.where(pick_u[..., None], wi_u, cl.wi)
    pdf_c = np.where(pick_u, _cltc_pdf(wo, wi_u, r), cl.pdf)
    return DirectionalSample(wi, p_u * INV_2PI + p_c * pdf_c)


def _pdf_eon(wo, wi, r):
    p_u = uniform_probability(wo[..., 2], r)
    pdf = p_u * INV_2PI + (1.0 - p_u) * _cltc_pdf(wo, wi, r)
    return np.where(wi[..., 2] < 0.0, 0.0, pdf)


def sample_eon(wo, r: FonRoughness, u1, u2) -> DirectionalSample:
    """One-sample MIS of the uniform lobe and CLTC; ``pdf`` is the mixture density."""
    wo = check_direction(wo, "wo", strict_upper=True)
    u1, u2 = _check_u(u1, u2)
    return _sample_eon(wo, _r_of(r), u1, u2)


def pdf_eon(wo, wi, r: FonRoughness):
    wo = check_direction(wo, "wo", strict_upper=True)
    return _pdf_eon(wo, np.asarray(wi, dtype=float), _r_of(r))


def _ltc_general_sample(wo, r, u1, u2):
    """Unclipped LTC lobe; samples may fall below the horizon (diagnostics)."""
    a, b, c, d = _ltc_coeffs(wo[..., 2], r)
    h = cosine_sample(u1, u2).wi
    v = np.stack([a * h[..., 0] + b * h[..., 2], c * h[..., 1], d * h[..., 0] + h[..., 2]], -1)
    length = np.sqrt(np.einsum("...i,...i->...", v, v))
    pdf = h[..., 2] * INV_PI * length ** 3 / (c * (a - b * d))
    xx, xy = orthonormal_basis_ltc(wo)
    return DirectionalSample(_to_local(xx, xy, v / length[..., None]), pdf)


def sample_strategy(strategy: str, wo, r, u1, u2) -> DirectionalSample:
    """Vectorized draw for a named strategy on validated inputs.

    ``r`` is a plain float/array here; ``cosine`` and ``uniform`` ignore it.
    """
    if strategy == "cosine":
        return cosine_sample(u1, u2)
    if strategy == "uniform":
        wi = uniform_lobe_sample(u1, u2)
        return DirectionalSample(wi, np.full(wi.shape[:-1], INV_2PI))
    if strategy == "ltc":
        return _ltc_general_sample(wo, r, u1, u2)
    if strategy == "cltc":
        return _cltc_sample(wo, r, u1, u2)
    if strategy == "cltc-mis":
        return _sample_eon(wo, r, u1, u2)
    raise ValueError(f"unknown sampling strategy {strategy!r}")


STRATEGIES = ("cosine", "uniform", "ltc", "cltc", "cltc-mis")
