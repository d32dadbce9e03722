import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from pfab.systems import make_system

settings.register_profile("pfab", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("pfab")

KINDS = ("s1", "s2", "r19", "r20")


@pytest.fixture(params=KINDS)
def system(request):
    return make_system(request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


# interior sample points per Sigma-interval, away from the edges
INTERIOR = {
    "s1": {"pos": [0.05, 0.7, 3.0, 25.0], "neg": [-1.2, -2.5, -9.0, -40.0]},
    "s2": {"main": [0.05, 0.35, 0.7, 0.95]},
    "r19": {"main": [0.02, 0.05, 0.4, 3.0]},
    "r20": {"main": [0.02, 0.05, 0.4, 3.0]},
}


def interior_points(kind):
    return [h for hs in INTERIOR[kind].values() for h in hs]
