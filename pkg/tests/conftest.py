import numpy as np
import pytest

from mpgfrft.graphs import build_random_sensor_graph, shift_operator
from mpgfrft.spectral import gft_basis


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_basis():
    """Spectral basis of a 10-node random sensor graph (symmetric adjacency)."""
    g = build_random_sensor_graph(10, seed=3)
    return gft_basis(shift_operator(g, "adjacency"))


@pytest.fixture
def medium_basis():
    g = build_random_sensor_graph(24, seed=9)
    return gft_basis(shift_operator(g, "adjacency"))
