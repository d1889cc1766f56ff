import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from epkit.composite import SubsystemSpec
from epkit.models import toy_composite, toy_hamiltonian

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", deadline=None, max_examples=500,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def jordan2():
    """2x2 Jordan block at zero."""
    return toy_hamiltonian(0.0)


@pytest.fixture
def composite4():
    """Kronecker sum of two 2x2 Jordan blocks (a third-order EP plus a lone state)."""
    return toy_composite(0.0)


@pytest.fixture
def jordan2_pair(jordan2):
    return [SubsystemSpec(jordan2, 0.0, label="A"), SubsystemSpec(jordan2, 0.0, label="B")]


def cmat(rng, m, n=None):
    n = m if n is None else n
    return rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))
