"""
Shared pytest fixtures
"""
import math

import numpy as np
import pytest

from config.settings import settings
from controllers.zoo import ZooController

PENTAGON_M = 1.0 / math.cos(math.pi / 5)


@pytest.fixture(scope="session")
def pentagon():
    return ZooController.regular_polygon(5)


@pytest.fixture(scope="session")
def square():
    return ZooController.hypercube(2)


@pytest.fixture(scope="session")
def bit():
    return ZooController.simplex(2)


@pytest.fixture(scope="session")
def trit():
    return ZooController.simplex(3)


@pytest.fixture(scope="session")
def triangle_prism():
    return ZooController.prism(ZooController.regular_polygon(3))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def restore_settings():
    """Undo changes a test makes to the global settings object."""
    saved = dict(vars(settings))
    yield settings
    for key in list(vars(settings)):
        if key not in saved:
            delattr(settings, key)
    for key, value in saved.items():
        setattr(settings, key, value)
