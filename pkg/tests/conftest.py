import numpy as np
import pytest
from hypothesis import settings

from spectral_bai.core import BanditInstance, WeightedGraph, laplacian_from_graph

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

REF_MEANS = (0.9, 0.5, 0.6)


@pytest.fixture
def ref_mu():
    return BanditInstance(REF_MEANS)


@pytest.fixture
def ref_graph():
    # one edge between the second and third arm
    return WeightedGraph(3, ((1, 2, 1.0),))


@pytest.fixture
def ref_lap(ref_graph):
    return laplacian_from_graph(ref_graph)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
