"""Independent numerical checks for the analytic BRDF and sampling code:
hemispherical quadrature, throughput-weight statistics, a chi-square test of
sampler against density, and a single-point furnace estimator.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np
from scipy import stats as sps

from . import kernels, rng
from ._accel import resolve_backend
from .brdf import Model, _check_rho, _chan, check_direction, eon_lobes, rho_ms
from .sampling import STRATEGIES, _pdf_eon, sample_strategy

CHUNK = 1 << 18


@dataclass(frozen=True)
class QuadratureSpec:
    """Product rule over the hemisphere: Gauss-Legendre in cos(theta),
    periodic trapezoid in phi.

    With ``split`` the cosine interval is cut at the outgoing cosine and the
    azimuth grid is anchored on the outgoing azimuth, so the kinks of the
    Oren-Nayar integrands (``theta_i = theta_o`` and ``s = 0``) fall on panel
    boundaries or nodes. ``n_phi`` must be a multiple of 4 for the latter.
    """

    n_theta: int = 64
    n_phi: int = 128
    split: bool = True

    def __post_init__(self):
        if self.n_theta < 2 or self.n_phi < 4:
            raise ValueError("quadrature needs n_theta >= 2 and n_phi >= 4")

    def refined(self, factor: int = 2) -> "QuadratureSpec":
        return QuadratureSpec(self.n_theta * factor, self.n_phi * factor, self.split)


DEFAULT_QUADRATURE = QuadratureSpec()


def _gauss01(n: int, lo: float = 0.0, hi: float = 1.0):
    x, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (hi - lo)
    return lo + half * (x + 1.0), half * w


def hemisphere_nodes(q: QuadratureSpec, mu_split: float | None = None, phi0: float = 0.0):
    """Directions and weights (in solid angle) of the product rule."""
    if q.split and mu_split is not None and 0.0 < mu_split < 1.0:
        n_lo = max(q.n_theta // 2, 1)
        m1, w1 = _gauss01(n_lo, 0.0, mu_split)
        m2, w2 = _gauss01(q.n_theta - n_lo, mu_split, 1.0)
        mu, wmu = np.concatenate([m1, m2]), np.concatenate([w1, w2])
    else:
        mu, wmu = _gauss01(q.n_theta)
    phi = phi0 + 2.0 * math.pi * np.arange(q.n_phi) / q.n_phi
    sin_t = np.sqrt(np.maximum(0.0, 1.0 - mu * mu))
    dirs = np.stack(
        [
            sin_t[:, None] * np.cos(phi)[None, :],
            sin_t[:, None] * np.sin(phi)[None, :],
            np.broadcast_to(mu[:, None], (mu.size, phi.size)),
        ],
        -1,
    )
    weights = wmu[:, None] * np.full(phi.size, 2.0 * math.pi / q.n_phi)[None, :]
    return dirs, weights


def integrate_hemisphere(fn: Callable[[np.ndarray], np.ndarray], q: QuadratureSpec = DEFAULT_QUADRATURE,
                         mu_split: float | None = None, phi0: float = 0.0):
    """Integral of ``fn(w)`` over the upper hemisphere with respect to solid angle."""
    dirs, weights = hemisphere_nodes(q, mu_split, phi0)
    vals = np.asarray(fn(dirs), dtype=float)
    if vals.ndim == weights.ndim + 1:
        return np.einsum("ij,ijc->c", weights, vals)
    return float(np.sum(weights * vals))


def albedo_numeric(model: Model, wo, q: QuadratureSpec = DEFAULT_QUADRATURE, rho=1.0):
    """Cosine-weighted integral of ``model`` over incident directions."""
    wo = check_direction(np.asarray(wo, dtype=float), "wo")
    rho = _check_rho(rho)
    phi0 = math.atan2(wo[1], wo[0])
    return integrate_hemisphere(
        lambda wi: model.eval_unchecked(rho, wi, wo) * _chan(wi[..., 2], rho),
        q, mu_split=float(wo[2]), phi0=phi0,
    )


def average_albedo_numeric(model: Model, q: QuadratureSpec = DEFAULT_QUADRATURE, rho=1.0):
    """Cosine-weighted average of :func:`albedo_numeric` over outgoing directions."""
    mu, w = _gauss01(q.n_theta)
    total = 0.0
    for m, wm in zip(mu, w):
        wo = np.array([math.sqrt(1.0 - m * m), 0.0, m])
        total = total + 2.0 * m * wm * albedo_numeric(model, wo, q, rho)
    return total


def direction_from_mu(mu: float, phi: float = 0.0) -> np.ndarray:
    s = math.sqrt(max(0.0, 1.0 - mu * mu))
    return np.array([s * math.cos(phi), s * math.sin(phi), mu])


# --- sampler statistics -------------------------------------------------------


@dataclass(frozen=True)
class WeightStats:
    """Statistics of the throughput weight ``f cos / pdf`` over ``n`` draws."""

    variance: float
    max: float
    mean: float
    n: int

    @property
    def stderr(self) -> float:
        return math.sqrt(self.variance / self.n)


def _eon_weights_numpy(strategy, r, mu_o, exact, n, seed, stream):
    wo = direction_from_mu(mu_o)
    out = np.empty(n)
    for start in range(0, n, CHUNK):
        m = min(CHUNK, n - start)
        u1, u2 = rng.uniform_pairs(seed, stream, m, start)
        smp = sample_strategy(strategy, wo, r, u1, u2)
        wi = smp.wi
        ok = (wi[..., 2] > 0.0) & (smp.pdf > 0.0)
        f_ss, shape, avg = eon_lobes(r, wi, wo, exact)
        f = f_ss + rho_ms(1.0, avg) * shape
        with np.errstate(divide="ignore", invalid="ignore"):
            w = np.where(ok, f * wi[..., 2] / np.where(ok, smp.pdf, 1.0), 0.0)
        out[start:start + m] = w
    return out


def eon_weights(strategy: str, r: float, mu_o: float, n: int, seed: int, exact: bool = False,
                backend: str | None = None, stream: int = 0) -> np.ndarray:
    """Per-draw throughput weights of EON at unit albedo for one strategy."""
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
    if not (0.0 < mu_o <= 1.0):
        raise ValueError("mu_o must lie in (0, 1]")
    if not (0.0 <= r <= 1.0):
        raise ValueError("r must lie in [0, 1]")
    if resolve_backend(backend) == "numpy":
        return _eon_weights_numpy(strategy, r, mu_o, exact, n, seed, stream)
    out = np.empty(n)
    key = np.uint64(rng.stream_key(seed, stream))
    kernels.weights_loop(kernels.STRATEGY_IDS[strategy], float(r), float(mu_o), bool(exact), n, key, out)
    return out


def weight_stats(strategy: str, r: float, mu_o: float, n: int = 1_000_000, seed: int = 0,
                 exact: bool = False, backend: str | None = None, stream: int = 0) -> WeightStats:
    if n < 10_000:
        raise ValueError("weight_stats needs n >= 1e4")
    w = eon_weights(strategy, r, mu_o, n, seed, exact, backend, stream)
    return WeightStats(float(np.var(w)), float(np.max(w)), float(np.mean(w)), n)


# --- chi-square ---------------------------------------------------------------


@dataclass(frozen=True)
class Chi2Report:
    statistic: float
    dof: int
    p_value: float
    bins: tuple[int, int]
    n: int
    pooled_cells: int

    @property
    def passed(self) -> bool:
        return self.p_value > 0.01


def eon_samples(r: float, mu_o: float, n: int, seed: int, backend: str | None = None,
                stream: int = 0, strategy: str = "cltc-mis") -> np.ndarray:
    """``(n, 4)`` array of sampled ``(x, y, z, pdf)`` for view ``mu_o``."""
    if resolve_backend(backend) == "numpy":
        wo = direction_from_mu(mu_o)
        out = np.empty((n, 4))
        for start in range(0, n, CHUNK):
            m = min(CHUNK, n - start)
            u1, u2 = rng.uniform_pairs(seed, stream, m, start)
            smp = sample_strategy(strategy, wo, r, u1, u2)
            out[start:start + m, :3] = smp.wi
            out[start:start + m, 3] = smp.pdf
        return out
    out = np.empty((n, 4))
    key = np.uint64(rng.stream_key(seed, stream))
    kernels.eon_samples_loop(kernels.STRATEGY_IDS[strategy], float(r), float(mu_o), n, key, out)
    return out


def cell_probabilities(pdf: Callable[[np.ndarray], np.ndarray], bins=(32, 64), sub: int = 6,
                       grazing_rows: int = 4, grazing_factor: int = 4) -> np.ndarray:
    """Integrate ``pdf`` over each (cos theta, phi) cell by refined midpoint sums.

    The lowest ``grazing_rows`` rows in cos(theta) get ``grazing_factor`` times
    more subdivisions in cos(theta), since densities are steepest there.
    """
    n_mu, n_phi = bins
    sub_phi = sub
    probs = np.empty((n_mu, n_phi))
    dphi = 2.0 * math.pi / n_phi
    phi_mid = -math.pi + (np.arange(n_phi * sub_phi) + 0.5) * (dphi / sub_phi)
    for row in range(n_mu):
        sub_mu = sub * grazing_factor if row < grazing_rows else sub
        lo = row / n_mu
        dmu = 1.0 / n_mu
        mu_mid = lo + (np.arange(sub_mu) + 0.5) * (dmu / sub_mu)
        sin_t = np.sqrt(1.0 - mu_mid * mu_mid)
        dirs = np.stack(
            [
                sin_t[:, None] * np.cos(phi_mid)[None, :],
                sin_t[:, None] * np.sin(phi_mid)[None, :],
                np.broadcast_to(mu_mid[:, None], (sub_mu, phi_mid.size)),
            ],
            -1,
        )
        vals = pdf(dirs) * (dmu / sub_mu) * (dphi / sub_phi)
        probs[row] = vals.reshape(sub_mu, n_phi, sub_phi).sum(axis=(0, 2))
    return probs


def chi2_sampler_test(r: float, mu_o: float, n: int = 1_000_000, bins=(32, 64), seed: int = 0,
                      backend: str | None = None, pdf: Callable | None = None,
                      min_expected: float = 5.0) -> Chi2Report:
    """Pearson test of :func:`eon.sampling.sample_eon` draws against a density.

    ``pdf(wi)`` defaults to :func:`eon.sampling.pdf_eon` for the same view;
    pass a perturbed density to check that the test has power.
    """
    wo = direction_from_mu(mu_o)
    if pdf is None:
        def pdf(wi):
            return _pdf_eon(wo, wi, r)
    smp = eon_samples(r, mu_o, n, seed, backend)
    mu = np.clip(smp[:, 2], 0.0, 1.0 - 1e-16)
    phi = np.arctan2(smp[:, 1], smp[:, 0])
    observed, _, _ = np.histogram2d(mu, phi, bins=bins, range=[[0.0, 1.0], [-math.pi, math.pi]])
    expected = n * cell_probabilities(pdf, bins)
    observed = observed.ravel()
    expected = expected.ravel()
    small = expected < min_expected
    obs = observed[~small]
    exp = expected[~small]
    pooled = int(small.sum())
    if pooled:
        obs = np.append(obs, observed[small].sum())
        exp = np.append(exp, expected[small].sum())
    stat = float(np.sum((obs - exp) ** 2 / exp))
    dof = int(obs.size - 1)
    return Chi2Report(stat, dof, float(sps.chi2.sf(stat, dof)), tuple(bins), n, pooled)


# --- furnace ------------------------------------------------------------------


def furnace_test(model: Model, rho=1.0, bounces: int = 50, spp: int = 100_000, seed: int = 0,
                 sampler: str = "cosine", mu_o: float | None = None,
                 backend: str | None = None):
    """Radiance leaving one shading point under a unit uniform environment.

    Camera directions are drawn with the projected-area (cosine) density of a
    sphere's pixels unless ``mu_o`` pins them. A lone planar point never
    occludes its own scattered rays, so every path escapes after its first
    scattering event and the bounce cap only matters for ``bounces = 0``
    (which returns 0).
    """
    if bounces < 0 or spp < 1:
        raise ValueError("need bounces >= 0 and spp >= 1")
    rho = _check_rho(rho)
    if sampler in ("ltc", "cltc", "cltc-mis") and model.name not in ("fon", "eon"):
        raise ValueError(f"sampler {sampler!r} needs a FON/EON model")
    if bounces == 0:
        return rho * 0.0
    resolve_backend(backend)
    r = model.roughness_value
    est = 0.0
    for start in range(0, spp, CHUNK):
        m = min(CHUNK, spp - start)
        if mu_o is None:
            c1, c2 = rng.uniform_pairs(seed, 1, m, start)
            wo = sample_strategy("cosine", None, r, c1, c2).wi
            # azimuth is irrelevant for isotropic models; keep wo in the xz-plane
            wo = np.stack([np.sqrt(1.0 - wo[:, 2] ** 2), np.zeros(m), wo[:, 2]], -1)
            wo[:, 2] = np.maximum(wo[:, 2], 1e-12)
        else:
            wo = np.broadcast_to(direction_from_mu(mu_o), (m, 3))
        u1, u2 = rng.uniform_pairs(seed, 0, m, start)
        smp = sample_strategy(sampler, wo, r, u1, u2)
        ok = (smp.wi[:, 2] > 0.0) & (smp.pdf > 0.0)
        f = model.eval_unchecked(rho, smp.wi, wo)
        cos = _chan(smp.wi[:, 2], rho)
        pdf = _chan(np.where(ok, smp.pdf, 1.0), rho)
        w = np.where(_chan(ok, rho), f * cos / pdf, 0.0)
        est = est + w.sum(axis=0)
    return est / spp


def furnace_oracle(model: Model, rho=1.0, bounces: int = 50):
    """Expected :func:`furnace_test` value with cosine-distributed views.

    For geometry that never re-hits itself the bounce series stops after one
    term, leaving the average albedo (0 when ``bounces = 0``).
    """
    if bounces == 0:
        return _check_rho(rho) * 0.0
    return model.average_albedo(rho)


# --- CSV ------------------------------------------------------------------------

ALBEDO_COLUMNS = ("model", "r_or_sigma", "mu", "quantity", "value", "numeric")
STATS_COLUMNS = ("strategy", "r", "theta_deg", "variance", "max", "mean")


def albedo_rows(model: Model, mus: Iterable[float], rho=1.0, q: QuadratureSpec = DEFAULT_QUADRATURE):
    """Rows of :data:`ALBEDO_COLUMNS`: analytic albedo in ``value``, quadrature in ``numeric``."""
    rho = _check_rho(rho)
    gray = rho.ndim == 0 or bool(np.all(rho == rho.flat[0]))
    rows = []
    for mu in mus:
        analytic = np.atleast_1d(model.albedo(rho, mu))
        numeric = np.atleast_1d(albedo_numeric(model, direction_from_mu(mu), q, rho))
        if gray:
            rows.append((model.name, model.roughness_value, float(mu), "directional_albedo",
                         float(analytic[0]), float(numeric[0])))
        else:
            for ch, tag in enumerate("rgb"):
                rows.append((model.name, model.roughness_value, float(mu), f"directional_albedo_{tag}",
                             float(analytic[ch]), float(numeric[ch])))
    return rows


def stats_rows(r: float, thetas_deg: Iterable[float], n: int, seed: int,
               strategies=("cosine", "uniform", "cltc", "cltc-mis"), exact: bool = False,
               backend: str | None = None):
    rows = []
    for strategy in strategies:
        for th in thetas_deg:
            ws = weight_stats(strategy, r, math.cos(math.radians(th)), n, seed, exact, backend)
            rows.append((strategy, r, float(th), ws.variance, ws.max, ws.mean))
    return rows


def write_csv(path, columns, rows) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(columns)
        for row in rows:
            out.writerow([f"{v:.10g}" if isinstance(v, float) else v for v in row])
