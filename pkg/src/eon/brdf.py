"""Rough diffuse BRDFs: Lambert, qualitative Oren-Nayar (QON), Fujii
Oren-Nayar (FON) and the energy-preserving EON model, with their analytic
directional and average albedos.

Directions are float arrays whose last axis is ``(x, y, z)`` in the local
shading frame (z along the normal); all functions broadcast over leading
axes. ``rho`` is either a scalar or an RGB triple; RGB inputs add a trailing
axis of length 3 to the result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

INV_PI = 1.0 / math.pi
EPS = 1.0e-7

FON_CONSTANT1 = 0.5 - 2.0 / (3.0 * math.pi)
FON_CONSTANT2 = 2.0 / 3.0 - 28.0 / (15.0 * math.pi)
QON_AVERAGE_CONSTANT = 2.0 / 3.0 - 64.0 / (45.0 * math.pi)
FON_G_COEFFS = (0.0571085289, 0.491881867, -0.332181442, 0.0714429953)

MODEL_NAMES = ("lambert", "qon", "qon-footnote", "fon", "eon")


class DomainError(ValueError):
    """An argument lies outside the domain a model is defined on."""


@dataclass(frozen=True, eq=False)
class QonRoughness:
    """QON roughness: the microfacet slope angle ``sigma`` in radians, in [0, pi/2]."""

    sigma: float | np.ndarray

    def __post_init__(self):
        s = np.asarray(self.sigma, dtype=float)
        if not np.all((s >= 0.0) & (s <= 0.5 * math.pi)):
            raise DomainError(f"QON sigma must lie in [0, pi/2], got {self.sigma!r}")


@dataclass(frozen=True, eq=False)
class FonRoughness:
    """FON/EON roughness: an interpolation weight ``r`` in [0, 1]."""

    r: float | np.ndarray

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float)
        if not np.all((r >= 0.0) & (r <= 1.0)):
            raise DomainError(f"FON roughness r must lie in [0, 1], got {self.r!r}")


class QonCoeffs(NamedTuple):
    a_q: float | np.ndarray
    b_q: float | np.ndarray


class FonCoeffs(NamedTuple):
    a_f: float | np.ndarray
    b_f: float | np.ndarray


def _sigma_of(sigma) -> np.ndarray:
    if not isinstance(sigma, QonRoughness):
        raise TypeError(f"expected QonRoughness, got {type(sigma).__name__}")
    return np.asarray(sigma.sigma, dtype=float)


def _r_of(r) -> np.ndarray:
    if not isinstance(r, FonRoughness):
        raise TypeError(f"expected FonRoughness, got {type(r).__name__}")
    return np.asarray(r.r, dtype=float)


def check_direction(w, name: str = "direction", *, strict_upper: bool = False) -> np.ndarray:
    """Validate unit length (1e-6) and upper-hemisphere membership."""
    w = np.asarray(w, dtype=float)
    if w.shape[-1:] != (3,):
        raise ValueError(f"{name} must have a trailing axis of length 3, got shape {w.shape}")
    z = w[..., 2]
    if strict_upper:
        if np.any(~(z > 0.0)):
            raise DomainError(f"{name} must have z > 0")
    elif np.any(~(z >= 0.0)):
        raise DomainError(f"{name} lies below the horizon (z < 0)")
    norm2 = np.einsum("...i,...i->...", w, w)
    if np.any(np.abs(norm2 - 1.0) > 2.0e-6):
        raise DomainError(f"{name} is not unit length")
    return w


def _check_mu(mu) -> np.ndarray:
    mu = np.asarray(mu, dtype=float)
    if not np.all((mu >= 0.0) & (mu <= 1.0)):
        raise DomainError("cosine mu must lie in [0, 1]")
    return mu


def _check_rho(rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=float)
    if rho.ndim > 1 or (rho.ndim == 1 and rho.shape[0] != 3):
        raise ValueError(f"rho must be a scalar or an RGB triple, got shape {rho.shape}")
    if not np.all((rho >= 0.0) & (rho <= 1.0)):
        raise DomainError(f"rho channels must lie in [0, 1], got {rho!r}")
    return rho


def _chan(x, rho: np.ndarray):
    """Give a per-direction quantity a channel axis when ``rho`` is RGB."""
    x = np.asarray(x, dtype=float)
    return x[..., None] if rho.ndim else x


def s_term(wi: np.ndarray, wo: np.ndarray) -> np.ndarray:
    """``wi . wo - (N . wi)(N . wo)``, i.e. cos(dphi) sin(theta_i) sin(theta_o)."""
    return wi[..., 0] * wo[..., 0] + wi[..., 1] * wo[..., 1]


# --- coefficients -----------------------------------------------------------


def qon_coeffs(sigma: QonRoughness, footnote_variant: bool = False) -> QonCoeffs:
    s2 = _sigma_of(sigma) ** 2
    c = 0.57 if footnote_variant else 0.33
    return QonCoeffs(1.0 - 0.5 * s2 / (s2 + c), 0.45 * s2 / (s2 + 0.09))


def fon_coeffs(r: FonRoughness) -> FonCoeffs:
    r = _r_of(r)
    a = 1.0 / (1.0 + FON_CONSTANT1 * r)
    return FonCoeffs(a, r * a)


# --- albedo building blocks (unchecked) --------------------------------------


def qon_g(mu):
    """Integral of the QON g-term over projected solid angle, as a function of
    the outgoing cosine. Written without tan() so mu = 0 yields the pi/2
    limit directly."""
    mu = np.asarray(mu, dtype=float)
    si = np.sqrt(np.maximum(0.0, 1.0 - mu * mu))
    theta = np.arccos(np.minimum(mu, 1.0))
    # tan(theta) (1 - sin^3 theta) == si * mu * (1 + si + si^2) / (1 + si)
    return si * (theta - si * mu) + (2.0 / 3.0) * si * mu * (1.0 + si + si * si) / (1.0 + si)


def fon_g(mu):
    mu = np.asarray(mu, dtype=float)
    return qon_g(mu) - (2.0 / 3.0) * np.sqrt(np.maximum(0.0, 1.0 - mu * mu))


def _fon_albedo_exact(mu, r):
    a = 1.0 / (1.0 + FON_CONSTANT1 * r)
    return a + (r * a * INV_PI) * fon_g(mu)


def _fon_albedo_approx(mu, r):
    m = 1.0 - np.asarray(mu, dtype=float)
    g1, g2, g3, g4 = FON_G_COEFFS
    g_over_pi = m * (g1 + m * (g2 + m * (g3 + m * g4)))
    return (1.0 + r * g_over_pi) / (1.0 + FON_CONSTANT1 * r)


def _fon_average(r):
    return (1.0 + FON_CONSTANT2 * r) / (1.0 + FON_CONSTANT1 * r)


def rho_ms(rho, avg):
    """Multiple-scattering energy factor ``rho^2 <E> / (1 - rho (1 - <E>))``."""
    return rho * rho * avg / (1.0 - rho * (1.0 - avg))


# --- BRDF kernels on validated arrays -----------------------------------------


def _eval_qon_hat(sigma, wi, wo, footnote=False):
    s2 = sigma * sigma
    a = 1.0 - 0.5 * s2 / (s2 + (0.57 if footnote else 0.33))
    b = 0.45 * s2 / (s2 + 0.09)
    s = s_term(wi, wo)
    t = np.maximum(np.maximum(wi[..., 2], wo[..., 2]), EPS)
    g = np.where(s > 0.0, s / t, 0.0)
    return INV_PI * (a + b * g)


def _fon_sovert(wi, wo):
    s = s_term(wi, wo)
    t = np.maximum(np.maximum(wi[..., 2], wo[..., 2]), EPS)
    return np.where(s > 0.0, s / t, s)


def _eval_fon_hat(r, wi, wo):
    return INV_PI * (1.0 + r * _fon_sovert(wi, wo)) / (1.0 + FON_CONSTANT1 * r)


def eon_lobes(r, wi, wo, exact=True):
    """Split EON into ``(f_ss, f_ms_shape, <E_F>)`` at unit albedo.

    The full BRDF for albedo ``rho`` is ``rho * f_ss + rho_ms(rho, <E_F>) *
    f_ms_shape``.
    """
    f_ss = _eval_fon_hat(r, wi, wo)
    albedo = _fon_albedo_exact if exact else _fon_albedo_approx
    e_o = albedo(wo[..., 2], r)
    e_i = albedo(wi[..., 2], r)
    avg = _fon_average(r)
    shape = (
        INV_PI
        * np.maximum(0.0, 1.0 - e_o)
        * np.maximum(0.0, 1.0 - e_i)
        / np.maximum(EPS, 1.0 - avg)
    )
    return f_ss, shape, np.broadcast_to(avg, np.shape(shape))


def _tint_eon(rho, f_ss, shape, avg):
    return _chan(f_ss, rho) * rho + _chan(shape, rho) * rho_ms(rho, _chan(avg, rho))


# --- public evaluation ------------------------------------------------------


def eval_lambert(rho) -> np.ndarray:
    return _check_rho(rho) * INV_PI


def eval_qon(rho, sigma: QonRoughness, wi, wo, footnote_variant: bool = False):
    rho = _check_rho(rho)
    sig = _sigma_of(sigma)
    wi = check_direction(wi, "wi")
    wo = check_direction(wo, "wo")
    return _chan(_eval_qon_hat(sig, wi, wo, footnote_variant), rho) * rho


def eval_fon(rho, r: FonRoughness, wi, wo):
    rho = _check_rho(rho)
    rr = _r_of(r)
    wi = check_direction(wi, "wi")
    wo = check_direction(wo, "wo")
    return _chan(_eval_fon_hat(rr, wi, wo), rho) * rho


def eval_eon(rho, r: FonRoughness, wi, wo, exact: bool = True):
    """EON BRDF: FON single scattering plus the reciprocal multi-scatter lobe."""
    rho = _check_rho(rho)
    rr = _r_of(r)
    wi = check_direction(wi, "wi")
    wo = check_direction(wo, "wo")
    return _tint_eon(rho, *eon_lobes(rr, wi, wo, exact))


# --- albedos ----------------------------------------------------------------


def qon_directional_albedo(sigma: QonRoughness, mu_o, footnote_variant: bool = False):
    """Albedo at unit ``rho``; at ``mu_o = 0`` this is ``A + B/2``."""
    a, b = qon_coeffs(sigma, footnote_variant)
    return a + b * INV_PI * qon_g(_check_mu(mu_o))


def qon_average_albedo(sigma: QonRoughness, footnote_variant: bool = False):
    a, b = qon_coeffs(sigma, footnote_variant)
    return a + QON_AVERAGE_CONSTANT * b


def fon_albedo_exact(mu, r: FonRoughness):
    return _fon_albedo_exact(_check_mu(mu), _r_of(r))


def fon_albedo_approx(mu, r: FonRoughness):
    """Quartic fit in ``1 - mu``; within 0.1% of :func:`fon_albedo_exact`."""
    return _fon_albedo_approx(_check_mu(mu), _r_of(r))


def fon_average_albedo(r: FonRoughness):
    return _fon_average(_r_of(r))


def eon_directional_albedo(rho, r: FonRoughness, wi, exact: bool = True):
    rho = _check_rho(rho)
    rr = _r_of(r)
    wi = check_direction(wi, "wi")
    albedo = _fon_albedo_exact if exact else _fon_albedo_approx
    e_f = _chan(albedo(wi[..., 2], rr), rho)
    avg = _chan(_fon_average(rr), rho)
    return rho * e_f + rho_ms(rho, avg) * (1.0 - e_f)


def eon_average_albedo(rho, r: FonRoughness):
    rho = _check_rho(rho)
    avg = _chan(_fon_average(_r_of(r)), rho)
    return rho * avg + rho_ms(rho, avg) * (1.0 - avg)


# --- model handles ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Model:
    """A named BRDF with its roughness bound; used by the numeric oracles,
    the renderer and the CLI.

    ``roughness`` must be a :class:`QonRoughness` for ``qon``/``qon-footnote``,
    a :class:`FonRoughness` for ``fon``/``eon``, and ``None`` for Lambert.
    """

    name: str
    roughness: QonRoughness | FonRoughness | None = None
    exact: bool = True

    def __post_init__(self):
        if self.name not in MODEL_NAMES:
            raise ValueError(f"unknown model {self.name!r}; expected one of {MODEL_NAMES}")
        want = {"lambert": type(None), "qon": QonRoughness, "qon-footnote": QonRoughness,
                "fon": FonRoughness, "eon": FonRoughness}[self.name]
        if not isinstance(self.roughness, want):
            raise TypeError(
                f"model {self.name!r} needs roughness of type {want.__name__}, "
                f"got {type(self.roughness).__name__}"
            )

    @property
    def roughness_value(self) -> float:
        if self.roughness is None:
            return 0.0
        if isinstance(self.roughness, QonRoughness):
            return float(self.roughness.sigma)
        return float(self.roughness.r)

    def eval(self, rho, wi, wo):
        if self.name == "lambert":
            rho = _check_rho(rho)
            check_direction(wi, "wi")
            check_direction(wo, "wo")
            shape = np.broadcast_shapes(np.shape(wi)[:-1], np.shape(wo)[:-1])
            return _chan(np.full(shape, INV_PI), rho) * rho
        if self.name in ("qon", "qon-footnote"):
            return eval_qon(rho, self.roughness, wi, wo, self.name == "qon-footnote")
        if self.name == "fon":
            return eval_fon(rho, self.roughness, wi, wo)
        return eval_eon(rho, self.roughness, wi, wo, self.exact)

    def eval_unchecked(self, rho, wi, wo):
        """Like :meth:`eval` but skips argument validation (hot paths)."""
        rho = np.asarray(rho, dtype=float)
        if self.name == "lambert":
            shape = np.broadcast_shapes(np.shape(wi)[:-1], np.shape(wo)[:-1])
            return _chan(np.full(shape, INV_PI), rho) * rho
        p = self.roughness_value
        if self.name in ("qon", "qon-footnote"):
            return _chan(_eval_qon_hat(p, wi, wo, self.name == "qon-footnote"), rho) * rho
        if self.name == "fon":
            return _chan(_eval_fon_hat(p, wi, wo), rho) * rho
        return _tint_eon(rho, *eon_lobes(p, wi, wo, self.exact))

    def albedo(self, rho, mu):
        """Analytic directional albedo for outgoing cosine ``mu``."""
        rho = _check_rho(rho)
        mu = _check_mu(mu)
        if self.name == "lambert":
            return _chan(np.ones_like(mu), rho) * rho
        if self.name in ("qon", "qon-footnote"):
            e = qon_directional_albedo(self.roughness, mu, self.name == "qon-footnote")
            return _chan(e, rho) * rho
        if self.name == "fon":
            e = _fon_albedo_exact(mu, self.roughness_value)
            return _chan(e, rho) * rho
        w = np.stack([np.sqrt(1.0 - mu * mu), np.zeros_like(mu), mu], axis=-1)
        return eon_directional_albedo(rho, self.roughness, w, self.exact)

    def average_albedo(self, rho):
        rho = _check_rho(rho)
        if self.name == "lambert":
            return rho * 1.0
        if self.name in ("qon", "qon-footnote"):
            return rho * qon_average_albedo(self.roughness, self.name == "qon-footnote")
        if self.name == "fon":
            return rho * fon_average_albedo(self.roughness)
        return eon_average_albedo(rho, self.roughness)


def make_model(name: str, roughness: float = 0.0, exact: bool = True) -> Model:
    """Build a :class:`Model`, wrapping ``roughness`` in the type ``name`` uses."""
    if name == "lambert":
        return Model(name, None, exact)
    if name in ("qon", "qon-footnote"):
        return Model(name, QonRoughness(roughness), exact)
    return Model(name, FonRoughness(roughness), exact)
