import math

import numpy as np
import pytest

from anosovlab import gallery as ga
from anosovlab import groups as gr
from anosovlab.flowspace import FlowPoint, make_point

GOLDEN_RATIO = (1.0 + math.sqrt(5.0)) / 2.0


@pytest.fixture(scope="session")
def schottky():
    """Reference stretch-3 pair with certificate."""
    return ga.schottky_sl2(3.0)


@pytest.fixture(scope="session")
def sym3(schottky):
    """Irreducible SL(3) lift of the reference pair."""
    return ga.symmetric_power(schottky.gens, 3)


@pytest.fixture(scope="session")
def barbot(schottky):
    """Reducible block-triangular negative control."""
    return ga.barbot_block(schottky.gens)


@pytest.fixture(scope="session")
def zeta_pair():
    """Long-period asymmetric pair for counting/zeta surrogates."""
    c0 = 5.5
    g1 = np.diag([math.exp(c0), math.exp(-c0)])
    c, s = math.cos(math.pi / 4), math.sin(math.pi / 4)
    rot = np.array([[c, -s], [s, c]])
    g2 = rot @ np.diag([math.exp(c0 * GOLDEN_RATIO), math.exp(-c0 * GOLDEN_RATIO)]) @ rot.T
    return gr.generator_set(["a", "b"], [g1, g2])


def random_flow_point(rng, d) -> FlowPoint:
    while True:
        v = rng.normal(size=d)
        alpha = rng.normal(size=d)
        if float(alpha @ v) > 0.1:
            return make_point(v, alpha)


@pytest.fixture
def rng():
    return np.random.default_rng(20240809)
