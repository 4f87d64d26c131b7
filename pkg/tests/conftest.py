import os

import numpy as np
import pytest
from hypothesis import settings

from deadneuron.arrangement import CoorientedArrangement
from deadneuron.network import NetworkParams

settings.register_profile("repro", derandomize=True, deadline=None)
settings.register_profile("stress", max_examples=400, deadline=None)
settings.load_profile(os.environ.get("DEADNEURON_HYPOTHESIS", "repro"))

TRIANGLE_W = [[1.0, 0.0], [0.0, 1.0], [-1.0, -1.0]]
TRIANGLE_B = [-1.0, -1.0, 3.0]


@pytest.fixture
def triangle():
    """Lines x=1, y=1, x+y=3 cooriented so the bounded triangle is all positive."""
    return CoorientedArrangement.from_arrays(TRIANGLE_W, TRIANGLE_B)


def make_params(W1, b1, w, b):
    return NetworkParams((np.asarray(W1, float), np.atleast_2d(np.asarray(w, float))),
                         (np.asarray(b1, float), np.atleast_1d(np.asarray(b, float))))


@pytest.fixture
def c0_params():
    return make_params(TRIANGLE_W, TRIANGLE_B, [-2.0, -2.0, -2.0], 1.0)
