import numpy as np
import pytest

from kepreg import StandardizedDesign


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def make_design(rng, n, p, b=None, sigma=0.1):
    """Small random regression instance, standardized."""
    X = rng.standard_normal((n, p))
    if b is None:
        b = np.zeros(p)
    y = X @ b + sigma * rng.standard_normal(n)
    return StandardizedDesign.from_raw(X, y)


def single_column_design(z, n=64, seed=0):
    """A p=1 design whose standardized column satisfies x'y = z exactly."""
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n)
    x = x - x.mean()
    x = x / np.linalg.norm(x)
    y = z * x
    return StandardizedDesign.from_raw(x[:, None], y)
