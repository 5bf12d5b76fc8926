import math

import numpy as np
import pytest


def hemisphere_dirs(gen, n, zmin=0.0):
    z = gen.uniform(zmin, 1.0, n)
    phi = gen.uniform(0.0, 2.0 * math.pi, n)
    s = np.sqrt(1.0 - z * z)
    return np.stack([s * np.cos(phi), s * np.sin(phi), z], -1)


def dir_at(theta, phi=0.0):
    return np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)])


@pytest.fixture
def gen():
    return np.random.default_rng(12345)
