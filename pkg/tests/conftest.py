import numpy as np
import pytest

from tensormonopole.model import Family, ModelSpec


@pytest.fixture
def spec0():
    return ModelSpec(Family.CONTINUUM_4D, 0.0)


@pytest.fixture
def spec1():
    return ModelSpec(Family.CONTINUUM_4D, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_shell(rng, n, lo=0.5, hi=2.0, dim=4):
    """Random momenta with lo <= |k| <= hi (uniform direction)."""
    k = rng.normal(size=(n, dim))
    k /= np.linalg.norm(k, axis=1)[:, None]
    return k * rng.uniform(lo, hi, n)[:, None]
