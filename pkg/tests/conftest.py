import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_hermitian(rng, d):
    X = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return 0.5 * (X + X.conj().T)


def random_antisymmetric(rng, d):
    X = rng.standard_normal((d, d))
    return X - X.T
