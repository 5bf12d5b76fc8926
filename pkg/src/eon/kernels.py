"""Scalar kernels for the hot loops (sampler statistics, chi-square
histograms, path tracing, micro-benchmarks).

These mirror :mod:`eon.brdf` and :mod:`eon.sampling` one sample at a time
using only ``math`` so numba can compile them. With numba disabled they are
plain Python and the drivers use the vectorized numpy path instead.
"""

from __future__ import annotations

import math

import numpy as np

from ._accel import njit, prange
from .rng import key_for, uniform_at

PI = math.pi
INV_PI = 1.0 / math.pi
INV_2PI = 0.5 / math.pi
EPS = 1.0e-7
C1 = 0.5 - 2.0 / (3.0 * math.pi)
C2 = 2.0 / 3.0 - 28.0 / (15.0 * math.pi)

# model ids
LAMBERT = 0
QON = 1
QON_FOOTNOTE = 2
FON = 3
EON = 4

MODEL_IDS = {"lambert": LAMBERT, "qon": QON, "qon-footnote": QON_FOOTNOTE, "fon": FON, "eon": EON}

# sampling strategy ids
COSINE = 0
UNIFORM = 1
LTC = 2
CLTC = 3
CLTC_MIS = 4

STRATEGY_IDS = {"cosine": COSINE, "uniform": UNIFORM, "ltc": LTC, "cltc": CLTC, "cltc-mis": CLTC_MIS}


@njit
def fon_albedo_exact(mu, r):
    si = math.sqrt(max(0.0, 1.0 - mu * mu))
    g = si * (math.acos(min(mu, 1.0)) - si * mu) + (2.0 / 3.0) * (
        si * mu * (1.0 + si + si * si) / (1.0 + si) - si
    )
    af = 1.0 / (1.0 + C1 * r)
    return af + r * af * INV_PI * g


@njit
def fon_albedo_approx(mu, r):
    m = 1.0 - mu
    g_over_pi = m * (0.0571085289 + m * (0.491881867 + m * (-0.332181442 + m * 0.0714429953)))
    return (1.0 + r * g_over_pi) / (1.0 + C1 * r)


@njit
def rho_ms(rho, avg):
    return rho * rho * avg / (1.0 - rho * (1.0 - avg))


@njit
def brdf_lobes(model, p, exact, wix, wiy, wiz, wox, woy, woz):
    """Return ``(f_ss, f_ms_shape, avg)`` at unit albedo; see ``eon.brdf.eon_lobes``."""
    if model == LAMBERT:
        return INV_PI, 0.0, 1.0
    s = wix * wox + wiy * woy
    t = max(max(wiz, woz), EPS)
    if model == QON or model == QON_FOOTNOTE:
        s2 = p * p
        a = 1.0 - 0.5 * s2 / (s2 + (0.57 if model == QON_FOOTNOTE else 0.33))
        b = 0.45 * s2 / (s2 + 0.09)
        g = s / t if s > 0.0 else 0.0
        return INV_PI * (a + b * g), 0.0, 1.0
    sovert = s / t if s > 0.0 else s
    af = 1.0 / (1.0 + C1 * p)
    f_ss = INV_PI * af * (1.0 + p * sovert)
    if model == FON:
        return f_ss, 0.0, 1.0
    if exact:
        e_o = fon_albedo_exact(woz, p)
        e_i = fon_albedo_exact(wiz, p)
    else:
        e_o = fon_albedo_approx(woz, p)
        e_i = fon_albedo_approx(wiz, p)
    avg = af * (1.0 + C2 * p)
    shape = INV_PI * max(0.0, 1.0 - e_o) * max(0.0, 1.0 - e_i) / max(EPS, 1.0 - avg)
    return f_ss, shape, avg


@njit
def eval_gray(model, p, exact, rho, wix, wiy, wiz, wox, woy, woz):
    f_ss, shape, avg = brdf_lobes(model, p, exact, wix, wiy, wiz, wox, woy, woz)
    if shape == 0.0:
        return rho * f_ss
    return rho * f_ss + rho_ms(rho, avg) * shape


@njit
def ltc_coeffs(mu, r):
    a = 1.0 + r * (0.303392 + (-0.518982 + 0.111709 * mu) * mu + (-0.276266 + 0.335918 * mu) * r)
    b = r * (-1.16407 + 1.15859 * mu + (0.150815 - 0.150105 * mu) * r) / (mu * mu * mu - 1.43545)
    c = 1.0 + (0.20013 + (-0.506373 + 0.261777 * mu) * mu) * r
    d = ((0.540852 + (-1.01625 + 0.475392 * mu) * mu) * r) / (-1.0743 + mu * (0.0725628 + mu))
    return a, b, c, d


@njit
def basis_ltc(wox, woy):
    len2 = wox * wox + woy * woy
    if len2 > 0.0:
        inv = 1.0 / math.sqrt(len2)
        return wox * inv, woy * inv
    return 1.0, 0.0


@njit
def cltc_sample(wox, woy, woz, r, u1, u2):
    a, b, c, d = ltc_coeffs(woz, r)
    rad = math.sqrt(u1)
    phi = 2.0 * PI * u2
    x = rad * math.cos(phi)
    y = rad * math.sin(phi)
    vz = 1.0 / math.sqrt(d * d + 1.0)
    s = 0.5 * (1.0 + vz)
    x = -((1.0 - s) * math.sqrt(1.0 - y * y) + s * x)
    if d > 0.0:
        x = -x
    hz = math.sqrt(max(1.0 - (x * x + y * y), 0.0))
    pdf_wh = hz / (PI * s)
    vx = a * x + b * hz
    vy = c * y
    vzz = d * x + hz
    length = math.sqrt(vx * vx + vy * vy + vzz * vzz)
    det = c * (a - b * d)
    pdf = pdf_wh * length * length * length / det
    xx, xy = basis_ltc(wox, woy)
    inv = 1.0 / length
    vx *= inv
    vy *= inv
    # the rim of the clipped disc maps onto the horizon; keep rounding above it
    vzz = max(vzz * inv, 0.0)
    return xx * vx - xy * vy, xy * vx + xx * vy, vzz, pdf


@njit
def cltc_pdf(wox, woy, woz, wix, wiy, wiz, r):
    xx, xy = basis_ltc(wox, woy)
    vx = xx * wix + xy * wiy
    vy = -xy * wix + xx * wiy
    vz = wiz
    a, b, c, d = ltc_coeffs(woz, r)
    det = c * (a - b * d)
    hx = c * (vx - b * vz)
    hy = (a - b * d) * vy
    hz = -c * (d * vx - a * vz)
    len2 = hx * hx + hy * hy + hz * hz
    s = 0.5 * (1.0 + 1.0 / math.sqrt(d * d + 1.0))
    return det * det / (len2 * len2) * max(hz, 0.0) / (PI * s)


@njit
def ltc_general_sample(wox, woy, woz, r, u1, u2):
    """Unclipped LTC: may land below the horizon (diagnostic only)."""
    a, b, c, d = ltc_coeffs(woz, r)
    rad = math.sqrt(u1)
    phi = 2.0 * PI * u2
    x = rad * math.cos(phi)
    y = rad * math.sin(phi)
    hz = math.sqrt(max(0.0, 1.0 - u1))
    vx = a * x + b * hz
    vy = c * y
    vzz = d * x + hz
    length = math.sqrt(vx * vx + vy * vy + vzz * vzz)
    det = c * (a - b * d)
    pdf = hz * INV_PI * length * length * length / det
    xx, xy = basis_ltc(wox, woy)
    inv = 1.0 / length
    vx *= inv
    vy *= inv
    vzz *= inv
    return xx * vx - xy * vy, xy * vx + xx * vy, vzz, pdf


@njit
def uniform_lobe_sample(u1, u2):
    sin_t = math.sqrt(max(0.0, 1.0 - u1 * u1))
    phi = 2.0 * PI * u2
    return sin_t * math.cos(phi), sin_t * math.sin(phi), u1


@njit
def cosine_sample(u1, u2):
    rad = math.sqrt(u1)
    phi = 2.0 * PI * u2
    z = math.sqrt(max(0.0, 1.0 - u1))
    return rad * math.cos(phi), rad * math.sin(phi), z, z * INV_PI


@njit
def uniform_probability(mu, r):
    return r ** 0.1 * (0.162925 + mu * (-0.372058 + (0.538233 - 0.290822 * mu) * mu))


@njit
def sample_eon(wox, woy, woz, r, u1, u2):
    p_u = uniform_probability(woz, r)
    p_c = 1.0 - p_u
    if u1 < p_u:
        u1 = u1 / p_u
        x, y, z = uniform_lobe_sample(u1, u2)
        pdf_c = cltc_pdf(wox, woy, woz, x, y, z, r)
    else:
        u1 = (u1 - p_u) / p_c
        x, y, z, pdf_c = cltc_sample(wox, woy, woz, r, u1, u2)
    return x, y, z, p_u * INV_2PI + p_c * pdf_c


@njit
def pdf_eon(wox, woy, woz, wix, wiy, wiz, r):
    if wiz < 0.0:
        return 0.0
    p_u = uniform_probability(woz, r)
    return p_u * INV_2PI + (1.0 - p_u) * cltc_pdf(wox, woy, woz, wix, wiy, wiz, r)


@njit
def sample_strategy(strategy, wox, woy, woz, r, u1, u2):
    """Draw ``(x, y, z, pdf)``; ``r`` is only used by the LTC-family strategies."""
    if strategy == COSINE:
        return cosine_sample(u1, u2)
    if strategy == UNIFORM:
        x, y, z = uniform_lobe_sample(u1, u2)
        return x, y, z, INV_2PI
    if strategy == LTC:
        return ltc_general_sample(wox, woy, woz, r, u1, u2)
    if strategy == CLTC:
        return cltc_sample(wox, woy, woz, r, u1, u2)
    return sample_eon(wox, woy, woz, r, u1, u2)


# --- loop drivers -----------------------------------------------------------


@njit
def weights_loop(strategy, r, mu_o, exact, n, key, out):
    """Throughput weights ``f cos / pdf`` of EON at unit albedo, one per draw."""
    wox = math.sqrt(max(0.0, 1.0 - mu_o * mu_o))
    woy = 0.0
    woz = mu_o
    for i in range(n):
        u1 = uniform_at(key, 2 * i)
        u2 = uniform_at(key, 2 * i + 1)
        x, y, z, pdf = sample_strategy(strategy, wox, woy, woz, r, u1, u2)
        if z <= 0.0 or pdf <= 0.0:
            out[i] = 0.0
            continue
        f = eval_gray(EON, r, exact, 1.0, x, y, z, wox, woy, woz)
        out[i] = f * z / pdf


@njit
def eon_samples_loop(strategy, r, mu_o, n, key, out):
    """Write sampled directions (rows x, y, z, pdf) into ``out`` of shape (n, 4)."""
    wox = math.sqrt(max(0.0, 1.0 - mu_o * mu_o))
    for i in range(n):
        u1 = uniform_at(key, 2 * i)
        u2 = uniform_at(key, 2 * i + 1)
        x, y, z, pdf = sample_strategy(strategy, wox, 0.0, mu_o, r, u1, u2)
        out[i, 0] = x
        out[i, 1] = y
        out[i, 2] = z
        out[i, 3] = pdf


# --- path tracing -----------------------------------------------------------


@njit
def hit_sphere(ox, oy, oz, dx, dy, dz, cx, cy, cz, radius, tmin):
    """Nearest ``t > tmin`` along a unit-direction ray, or -1."""
    px = ox - cx
    py = oy - cy
    pz = oz - cz
    b = px * dx + py * dy + pz * dz
    c = px * px + py * py + pz * pz - radius * radius
    disc = b * b - c
    if disc < 0.0:
        return -1.0
    sq = math.sqrt(disc)
    t = -b - sq
    if t > tmin:
        return t
    t = -b + sq
    if t > tmin:
        return t
    return -1.0


@njit
def frame(nx, ny, nz):
    """Tangent ``t``, bitangent ``b`` completing the normal to a right-handed basis."""
    sign = 1.0 if nz >= 0.0 else -1.0
    a = -1.0 / (sign + nz)
    b = nx * ny * a
    return (1.0 + sign * nx * nx * a, sign * b, -sign * nx), (b, sign + ny * ny * a, -ny)


@njit
def _path_eval(model, p, exact, rho, wix, wiy, wiz, wox, woy, woz, out):
    f_ss, shape, avg = brdf_lobes(model, p, exact, wix, wiy, wiz, wox, woy, woz)
    for ch in range(3):
        out[ch] = rho[ch] * f_ss
        if shape != 0.0:
            out[ch] += rho_ms(rho[ch], avg) * shape


@njit(parallel=True)
def render_loop(width, height, extent, spp, bounces, seed_key, model, p, exact, rho,
                strategy, env, light_dir, light_rad, sphere, image):
    """Orthographic render of one sphere, camera looking down -z.

    Each pixel owns RNG stream ``pixel index``; draw counters are laid out
    per sample so results do not depend on how pixels are scheduled.
    """
    cx, cy, cz, radius = sphere[0], sphere[1], sphere[2], sphere[3]
    per_sample = 2 + 2 * bounces
    npix = width * height
    for pix in prange(npix):
        j = pix // width
        i = pix - j * width
        key = key_for(seed_key, pix)
        acc0 = 0.0
        acc1 = 0.0
        acc2 = 0.0
        f = np.empty(3)
        for smp in range(spp):
            base = smp * per_sample
            jx = uniform_at(key, base)
            jy = uniform_at(key, base + 1)
            sx = (2.0 * (i + jx) / width - 1.0) * extent
            sy = (1.0 - 2.0 * (j + jy) / height) * extent
            ox, oy, oz = sx, sy, cz + 2.0 * radius + 1.0
            dx, dy, dz = 0.0, 0.0, -1.0
            t0 = 1.0
            t1 = 1.0
            t2 = 1.0
            for bounce in range(bounces + 1):
                t = hit_sphere(ox, oy, oz, dx, dy, dz, cx, cy, cz, radius, 1e-9)
                if t < 0.0:
                    acc0 += t0 * env[0]
                    acc1 += t1 * env[1]
                    acc2 += t2 * env[2]
                    break
                if bounce == bounces:
                    break
                hx = ox + t * dx
                hy = oy + t * dy
                hz = oz + t * dz
                nx = (hx - cx) / radius
                ny = (hy - cy) / radius
                nz = (hz - cz) / radius
                tv, bv = frame(nx, ny, nz)
                wox = -(dx * tv[0] + dy * tv[1] + dz * tv[2])
                woy = -(dx * bv[0] + dy * bv[1] + dz * bv[2])
                woz = -(dx * nx + dy * ny + dz * nz)
                if woz <= 0.0:
                    break
                if light_rad[0] > 0.0 or light_rad[1] > 0.0 or light_rad[2] > 0.0:
                    lz = light_dir[0] * nx + light_dir[1] * ny + light_dir[2] * nz
                    if lz > 0.0:
                        sox = hx + nx * 1e-9
                        soy = hy + ny * 1e-9
                        soz = hz + nz * 1e-9
                        if hit_sphere(sox, soy, soz, light_dir[0], light_dir[1], light_dir[2],
                                      cx, cy, cz, radius, 1e-9) < 0.0:
                            lx = light_dir[0] * tv[0] + light_dir[1] * tv[1] + light_dir[2] * tv[2]
                            ly = light_dir[0] * bv[0] + light_dir[1] * bv[1] + light_dir[2] * bv[2]
                            _path_eval(model, p, exact, rho, lx, ly, lz, wox, woy, woz, f)
                            acc0 += t0 * f[0] * lz * light_rad[0]
                            acc1 += t1 * f[1] * lz * light_rad[1]
                            acc2 += t2 * f[2] * lz * light_rad[2]
                u1 = uniform_at(key, base + 2 + 2 * bounce)
                u2 = uniform_at(key, base + 3 + 2 * bounce)
                x, y, z, pdf = sample_strategy(strategy, wox, woy, woz, p, u1, u2)
                if z <= 0.0 or pdf <= 0.0:
                    break
                _path_eval(model, p, exact, rho, x, y, z, wox, woy, woz, f)
                t0 *= f[0] * z / pdf
                t1 *= f[1] * z / pdf
                t2 *= f[2] * z / pdf
                dx = x * tv[0] + y * bv[0] + z * nx
                dy = x * tv[1] + y * bv[1] + z * ny
                dz = x * tv[2] + y * bv[2] + z * nz
                ox = hx + nx * 1e-9
                oy = hy + ny * 1e-9
                oz = hz + nz * 1e-9
        image[j, i, 0] = acc0 / spp
        image[j, i, 1] = acc1 / spp
        image[j, i, 2] = acc2 / spp


# --- benchmark loops ----------------------------------------------------------


@njit
def bench_eval_loop(model, exact, params, rhos, wi, wo):
    """Sum of BRDF values over precomputed random inputs (the sum is the DCE guard)."""
    acc = 0.0
    for k in range(params.shape[0]):
        acc += eval_gray(model, params[k], exact, rhos[k],
                         wi[k, 0], wi[k, 1], wi[k, 2], wo[k, 0], wo[k, 1], wo[k, 2])
    return acc


@njit
def bench_sample_loop(model, exact, strategy, params, rhos, wo, us):
    """Sample + evaluate in the sampled direction, summing throughput weights."""
    acc = 0.0
    for k in range(params.shape[0]):
        x, y, z, pdf = sample_strategy(strategy, wo[k, 0], wo[k, 1], wo[k, 2], params[k], us[k, 0], us[k, 1])
        if pdf > 0.0:
            f = eval_gray(model, params[k], exact, rhos[k], x, y, z, wo[k, 0], wo[k, 1], wo[k, 2])
            acc += f * z / pdf
    return acc
