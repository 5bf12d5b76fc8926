import math

import numpy as np
import pytest

from conftest import dir_at, hemisphere_dirs
from eon import brdf, rng, sampling
from eon.brdf import FonRoughness
from eon.validation import QuadratureSpec, direction_from_mu, integrate_hemisphere

PI = math.pi


def draws(n, seed=7):
    return rng.uniform_pairs(seed, 0, n)


class TestLtcCoeffs:
    def test_zero_roughness_identity(self):
        for mu in (0.01, 0.4, 1.0):
            assert tuple(float(v) for v in sampling.ltc_coeffs(mu, FonRoughness(0.0))) == (1.0, 0.0, 1.0, 0.0)

    def test_hand_substitution_mu1_r1(self):
        a = 1 + (0.303392 - 0.518982 + 0.111709 - 0.276266 + 0.335918)
        b = (-1.16407 + 1.15859 + 0.150815 - 0.150105) / (1 - 1.43545)
        c = 1 + (0.20013 - 0.506373 + 0.261777)
        d = (0.540852 - 1.01625 + 0.475392) / (-1.0743 + 0.0725628 + 1)
        got = sampling.ltc_coeffs(1.0, FonRoughness(1.0))
        np.testing.assert_allclose([float(v) for v in got], [a, b, c, d], rtol=1e-10)

    def test_determinant_positive(self):
        mu, r = np.meshgrid(np.linspace(1 / 32, 1, 32), np.linspace(0, 1, 32))
        assert np.all(sampling._ltc_coeffs(mu, r).det > 0)

    def test_d_changes_sign_near_normal(self):
        # the fitted d is slightly positive at normal view, which is why the
        # clipping side must follow sign(d)
        assert float(sampling.ltc_coeffs(1.0, FonRoughness(1.0)).d) > 0
        assert float(sampling.ltc_coeffs(0.9, FonRoughness(1.0)).d) < 0

    def test_mu_domain(self):
        with pytest.raises(ValueError):
            sampling.ltc_coeffs(0.0, FonRoughness(0.5))


def _m(mu, r):
    return sampling._ltc_coeffs(mu, r).matrix()


class TestLtcGeometry:
    def test_norm_identity(self, gen):
        for mu, r in [(0.2, 1.0), (0.7, 0.5), (1.0, 1.0)]:
            m = _m(mu, r)
            minv = np.linalg.inv(m)
            wh = hemisphere_dirs(gen, 50)
            v = wh @ m.T
            wi = v / np.linalg.norm(v, axis=-1, keepdims=True)
            np.testing.assert_allclose(np.linalg.norm(v, axis=-1), 1.0 / np.linalg.norm(wi @ minv.T, axis=-1),
                                       rtol=1e-12)

    @pytest.mark.parametrize("mu,r", [(0.15, 1.0), (0.6, 0.7), (0.95, 0.3)])
    def test_finite_difference_jacobian(self, gen, mu, r):
        m = _m(mu, r)
        minv = np.linalg.inv(m)

        def to_h(wi):
            v = minv @ wi
            return v / np.linalg.norm(v)

        def sph(t, p):
            return np.array([math.sin(t) * math.cos(p), math.sin(t) * math.sin(p), math.cos(t)])

        h = 1e-5
        for _ in range(100):
            t, p = gen.uniform(0.05, 1.4), gen.uniform(0, 2 * PI)
            wi = sph(t, p)
            dt = (to_h(sph(t + h, p)) - to_h(sph(t - h, p))) / (2 * h)
            dp = (to_h(sph(t, p + h)) - to_h(sph(t, p - h))) / (2 * h)
            numeric = np.linalg.norm(np.cross(dt, dp)) / math.sin(t)
            analytic = abs(np.linalg.det(minv)) / np.linalg.norm(minv @ wi) ** 3
            assert numeric == pytest.approx(analytic, rel=1e-4)


class TestCltc:
    def test_zero_roughness_is_cosine(self):
        u1, u2 = draws(10_000)
        s = sampling.cltc_sample(direction_from_mu(0.3), FonRoughness(0.0), u1, u2)
        np.testing.assert_allclose(s.pdf, s.wi[:, 2] / PI, rtol=1e-14)
        np.testing.assert_allclose(sampling.cltc_pdf(direction_from_mu(0.3), s.wi, FonRoughness(0.0)),
                                   s.wi[:, 2] / PI, rtol=1e-14)

    @pytest.mark.parametrize("mu,r", [(0.02, 1.0), (0.3, 0.6), (1.0, 1.0), (0.99999, 1.0)])
    def test_confined_to_hemisphere(self, mu, r):
        u1, u2 = draws(1_000_000, seed=3)
        s = sampling.cltc_sample(direction_from_mu(mu), FonRoughness(r), u1, u2)
        assert int(np.sum(s.wi[:, 2] < 0.0)) == 0

    @pytest.mark.parametrize("mu,r", [(0.05, 1.0), (0.5, 0.5), (1.0, 1.0)])
    def test_pdf_matches_sample(self, mu, r):
        u1, u2 = draws(20_000)
        wo = dir_at(math.acos(mu), 0.7)
        s = sampling.cltc_sample(wo, FonRoughness(r), u1, u2)
        np.testing.assert_allclose(sampling.cltc_pdf(wo, s.wi, FonRoughness(r)), s.pdf, rtol=1e-9)

    @pytest.mark.parametrize("mu,r", [(0.05, 1.0), (0.5, 0.5), (0.9, 1.0), (1.0, 1.0)])
    def test_pdf_normalized(self, mu, r):
        wo = direction_from_mu(mu)
        total = integrate_hemisphere(lambda wi: sampling._cltc_pdf(wo, wi, r), QuadratureSpec(64, 128))
        assert total == pytest.approx(1.0, abs=1e-3)

    def test_pole_fallback_basis(self):
        xx, xy = sampling.orthonormal_basis_ltc(np.array([0.0, 0.0, 1.0]))
        assert (float(xx), float(xy)) == (1.0, 0.0)

    def test_rejects_horizon_view(self):
        with pytest.raises(brdf.DomainError):
            sampling.cltc_sample([1.0, 0.0, 0.0], FonRoughness(0.5), 0.3, 0.3)

    def test_rejects_bad_variates(self):
        with pytest.raises(ValueError):
            sampling.cltc_sample([0.0, 0.0, 1.0], FonRoughness(0.5), 1.5, 0.3)

    def test_azimuth_follows_view(self):
        # rotating wo about the normal rotates the samples with it
        u1, u2 = draws(100)
        r = FonRoughness(0.8)
        a = sampling.cltc_sample(dir_at(1.0, 0.0), r, u1, u2).wi
        b = sampling.cltc_sample(dir_at(1.0, PI / 2), r, u1, u2).wi
        np.testing.assert_allclose(b[:, 0], -a[:, 1], atol=1e-14)
        np.testing.assert_allclose(b[:, 1], a[:, 0], atol=1e-14)


class TestSimpleLobes:
    def test_uniform_lobe_mean_z(self):
        u1, u2 = draws(1_000_000)
        z = sampling.uniform_lobe_sample(u1, u2)[:, 2]
        assert z.mean() == pytest.approx(0.5, abs=3 * math.sqrt(1 / 12 / z.size))

    def test_cosine_mean_z(self):
        u1, u2 = draws(1_000_000)
        s = sampling.cosine_sample(u1, u2)
        assert s.wi[:, 2].mean() == pytest.approx(2 / 3, abs=3e-3)
        np.testing.assert_allclose(np.linalg.norm(s.wi, axis=-1), 1.0, rtol=1e-12)


class TestMis:
    def test_uniform_probability(self):
        assert float(sampling.uniform_probability(0.5, 0.0)) == 0.0
        p = 0.162925 + 0.3 * (-0.372058 + (0.538233 - 0.290822 * 0.3) * 0.3)
        assert float(sampling.uniform_probability(0.3, 0.5)) == pytest.approx(0.5 ** 0.1 * p, rel=1e-14)
        mu, r = np.meshgrid(np.linspace(0, 1, 51), np.linspace(0, 1, 51))
        pu = sampling.uniform_probability(mu, r)
        assert np.all((pu >= 0) & (pu < 1))

    def test_zero_roughness_weight_is_one(self):
        u1, u2 = draws(100_000)
        wo = dir_at(1.2, 0.3)
        s = sampling.sample_eon(wo, FonRoughness(0.0), u1, u2)
        f = brdf.eval_eon(1.0, FonRoughness(0.0), s.wi, wo)
        np.testing.assert_allclose(f * s.wi[:, 2] / s.pdf, 1.0, rtol=1e-12)

    @pytest.mark.parametrize("mu,r", [(0.03, 1.0), (0.5, 0.4), (1.0, 1.0)])
    def test_pdf_matches_sample(self, mu, r):
        u1, u2 = draws(50_000)
        wo = dir_at(math.acos(mu), 2.0)
        s = sampling.sample_eon(wo, FonRoughness(r), u1, u2)
        np.testing.assert_allclose(sampling.pdf_eon(wo, s.wi, FonRoughness(r)), s.pdf, rtol=1e-9)
        assert np.all(s.wi[:, 2] >= 0.0)

    @pytest.mark.parametrize("mu,r", [(0.05, 1.0), (0.5, 0.5), (1.0, 1.0)])
    def test_pdf_normalized(self, mu, r):
        wo = direction_from_mu(mu)
        total = integrate_hemisphere(lambda wi: sampling._pdf_eon(wo, wi, r), QuadratureSpec(64, 128))
        assert total == pytest.approx(1.0, abs=1e-3)

    def test_below_horizon_pdf_zero(self):
        wo = direction_from_mu(0.5)
        assert float(sampling.pdf_eon(wo, [0.0, 0.6, -0.8], FonRoughness(0.5))) == 0.0

    def test_branch_remap(self):
        wo = direction_from_mu(0.2)
        r = 1.0
        pu = float(sampling.uniform_probability(0.2, r))
        u1 = np.array([0.5 * pu, pu + 0.5 * (1 - pu)])
        u2 = np.array([0.3, 0.3])
        s = sampling.sample_eon(wo, FonRoughness(r), u1, u2)
        np.testing.assert_allclose(s.wi[0], sampling.uniform_lobe_sample(0.5, 0.3), rtol=1e-12)
        np.testing.assert_allclose(s.wi[1], sampling._cltc_sample(wo, r, 0.5, 0.3).wi, rtol=1e-12)

    def test_general_ltc_leaks_below_horizon(self):
        u1, u2 = draws(100_000)
        s = sampling.sample_strategy("ltc", direction_from_mu(0.05), 1.0, u1, u2)
        assert np.sum(s.wi[:, 2] < 0) > 0

    def test_unknown_strategy(self):
        with pytest.raises(ValueError):
            sampling.sample_strategy("ggx", direction_from_mu(0.5), 0.5, 0.1, 0.1)
