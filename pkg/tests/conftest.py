import os
import sys

import networkx as nx
import numpy as np
import pytest

SCRIPTS_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "scripts")
DATA_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "data")
sys.path.insert(0, SCRIPTS_DIR)

from lattice_graphs import Graph  # noqa: E402


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: full-size lattice Monte Carlo runs (tens of seconds)")


def make_graph(n, edges):
    return Graph.from_edges(n, edges)


def random_small_graph(rng: np.random.Generator, max_vertices: int) -> Graph:
    """G(n, q) with n in [1, max_vertices] and q in [0.1, 0.7]"""
    n = int(rng.integers(1, max_vertices + 1))
    q = float(rng.uniform(0.1, 0.7))
    g = nx.gnp_random_graph(n, q, seed=int(rng.integers(0, 2 ** 31)))
    return Graph.from_edges(n, list(g.edges()))


def to_networkx(graph: Graph) -> nx.Graph:
    g = nx.Graph()
    g.add_nodes_from(range(graph.num_vertices))
    g.add_edges_from(graph.edges())
    return g


@pytest.fixture
def c4():
    # a=0, b=1, c=2, d=3 around the cycle
    return make_graph(4, [(0, 1), (1, 2), (2, 3), (3, 0)])


@pytest.fixture
def p3():
    return make_graph(3, [(0, 1), (1, 2)])


@pytest.fixture
def two_k2():
    return make_graph(4, [(0, 1), (2, 3)])


@pytest.fixture
def k2():
    return make_graph(2, [(0, 1)])


@pytest.fixture
def single_vertex():
    return make_graph(1, [])


@pytest.fixture
def edgeless():
    return make_graph(50, [])


@pytest.fixture
def data_dir():
    return DATA_DIR
