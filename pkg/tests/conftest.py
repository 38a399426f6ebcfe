import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from hs2.field import PeriodicField, grid

settings.register_profile("default", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def x256():
    return grid(256)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def trig(kind, k, n=256, amp=1.0):
    f = np.sin if kind == "sin" else np.cos
    return PeriodicField(amp * f(2 * np.pi * k * grid(n)))
