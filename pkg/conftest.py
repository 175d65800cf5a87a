import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from geometry.hyperbolic_model import ModelSpace  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def complex_h2():
    return ModelSpace("complex", 2)


@pytest.fixture
def real_h2():
    return ModelSpace("real", 2)


@pytest.fixture
def real_h3():
    return ModelSpace("real", 3)


@pytest.fixture(params=["real-h2", "real-h3", "complex-h2"])
def model(request):
    return ModelSpace.from_name(request.param)
