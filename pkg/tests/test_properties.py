import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import hemisphere_dirs
from eon import brdf, sampling

PI = math.pi
ROUGH = {"qon": PI / 2, "qon-footnote": PI / 2, "fon": 1.0, "eon": 1.0}

unit = st.floats(0.0, 1.0, allow_nan=False)
angle = st.floats(0.0, 2 * PI, allow_nan=False)


def from_mu(mu, phi):
    s = math.sqrt(max(0.0, 1.0 - mu * mu))
    return np.array([s * math.cos(phi), s * math.sin(phi), mu])


@pytest.mark.parametrize("name", list(ROUGH))
@pytest.mark.parametrize("exact", [True, False])
def test_reciprocity_bulk(gen, name, exact):
    n = 10_000
    wi, wo = hemisphere_dirs(gen, n), hemisphere_dirs(gen, n)
    p = gen.uniform(0.0, ROUGH[name], n)
    rho = gen.uniform(0.0, 1.0, 3)
    for k in range(0, n, 1000):
        m = brdf.make_model(name, float(p[k]), exact)
        a = m.eval(rho, wi[k:k + 1000], wo[k:k + 1000])
        b = m.eval(rho, wo[k:k + 1000], wi[k:k + 1000])
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-15)
        assert np.all(a >= 0.0)


@settings(max_examples=300, deadline=None)
@given(st.sampled_from(list(ROUGH)), unit, unit, angle, unit, angle, st.floats(0.0, 1.0), st.booleans())
def test_reciprocity_and_positivity(name, t, mi, pi_, mo, po, rho, exact):
    m = brdf.make_model(name, t * ROUGH[name], exact)
    wi, wo = from_mu(mi, pi_), from_mu(mo, po)
    a = float(m.eval(rho, wi, wo))
    assert a >= 0.0 and math.isfinite(a)
    assert a == pytest.approx(float(m.eval(rho, wo, wi)), rel=1e-12, abs=1e-15)


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(["lambert", *ROUGH]), unit, angle, unit, angle, unit, st.booleans())
def test_lambert_limit(name, mi, pi_, mo, po, rho, exact):
    m = brdf.make_model(name, 0.0, exact)
    assert float(m.eval(rho, from_mu(mi, pi_), from_mu(mo, po))) == pytest.approx(rho / PI, rel=1e-12, abs=1e-300)


@settings(max_examples=300, deadline=None)
@given(st.floats(1e-3, 1.0), angle, unit, st.floats(0.0, 1.0, exclude_max=True), st.floats(0.0, 1.0, exclude_max=True))
def test_sample_pdf_consistency(mu, phi, r, u1, u2):
    wo = from_mu(mu, phi)
    s = sampling.sample_eon(wo, brdf.FonRoughness(r), u1, u2)
    assert s.wi[2] >= 0.0
    assert np.linalg.norm(s.wi) == pytest.approx(1.0, abs=1e-12)
    assert float(s.pdf) > 0.0
    assert float(sampling.pdf_eon(wo, s.wi, brdf.FonRoughness(r))) == pytest.approx(float(s.pdf), rel=1e-9)
    c = sampling.cltc_sample(wo, brdf.FonRoughness(r), u1, u2)
    assert c.wi[2] >= 0.0
    assert float(sampling.cltc_pdf(wo, c.wi, brdf.FonRoughness(r))) == pytest.approx(float(c.pdf), rel=1e-9)


@settings(max_examples=100, deadline=None)
@given(st.floats(1e-3, 1.0), angle, st.floats(0.0, 1.0, exclude_max=True), st.floats(0.0, 1.0, exclude_max=True))
def test_zero_roughness_weight_is_one(mu, phi, u1, u2):
    wo = from_mu(mu, phi)
    s = sampling.sample_eon(wo, brdf.FonRoughness(0.0), u1, u2)
    if s.wi[2] > 0.0:
        w = float(brdf.eval_eon(1.0, brdf.FonRoughness(0.0), s.wi, wo)) * s.wi[2] / float(s.pdf)
        assert w == pytest.approx(1.0, rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(unit, unit, st.floats(0.0, 1.0))
def test_eon_albedo_bounded_by_rho_one(mu, r, rho):
    e = float(brdf.eon_directional_albedo(rho, brdf.FonRoughness(r), from_mu(mu, 0.0)))
    assert 0.0 <= e <= 1.0 + 1e-12
    assert e >= rho * float(brdf.fon_albedo_exact(mu, brdf.FonRoughness(r))) - 1e-12
