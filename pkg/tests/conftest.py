import numpy as np
import pytest
from hypothesis import settings

from weaksub.regression import R2Function, RegressionInstance, normalize

settings.register_profile("ci", max_examples=60, deadline=None)
settings.load_profile("ci")


def random_r2(d, n=None, seed=0, corr=0.0):
    """Normalized Gaussian regression instance; ``corr`` mixes in a shared factor."""
    gen = np.random.default_rng(seed)
    n = n or 3 * d
    X = gen.standard_normal((n, d))
    if corr:
        X = X + corr * gen.standard_normal((n, 1))
    y = X @ gen.standard_normal(d) + 0.5 * gen.standard_normal(n)
    return normalize(RegressionInstance(X, y))


@pytest.fixture
def orthonormal():
    """3x3 identity design with y = (0.8, 0.6, 0)."""
    return RegressionInstance(np.eye(3), np.array([0.8, 0.6, 0.0]))


@pytest.fixture
def orthonormal_f(orthonormal):
    return R2Function(orthonormal)
