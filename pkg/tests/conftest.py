# tests/conftest.py - v0.1.0
import numpy as np
import pytest

from lie.algebra import EXACT, NUMERIC, LieElement
from lie.splitting import LOWER_TRIANGULAR, QR_SKEW
from utils.helpers import random_rational


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture(params=[LOWER_TRIANGULAR, QR_SKEW])
def kind(request):
    return request.param


@pytest.fixture
def random_numeric(rng):
    """factory(dim, norm=None) -> numeric LieElement with entries in [-1, 1]."""
    def factory(dim, norm=None):
        a = LieElement(rng.uniform(-1.0, 1.0, size=(dim, dim)), NUMERIC)
        return a if norm is None else a * (norm / a.frobenius_norm())
    return factory


@pytest.fixture
def random_exact(rng):
    """factory(dim) -> exact LieElement with small rational entries."""
    def factory(dim):
        return LieElement([[random_rational(rng) for _ in range(dim)] for _ in range(dim)], EXACT)
    return factory
