#!/usr/bin/env python3
"""
Vertex reveal process and site percolation.

Component counts come from a union-find pass (union by size, path halving):
revealing vertices in permutation order and unioning each new vertex with its
already-revealed neighbors yields the whole trajectory C~_1..C~_N in one pass.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from lattice_graphs import Graph, ParameterError

logger = logging.getLogger(__name__)

try:
    from numba import njit
except ImportError:
    logger.warning("numba not available, union-find kernels run interpreted")

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda func: func


@njit(cache=True, nogil=True)
def _find(x, parent):
    while x != parent[x]:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


@njit(cache=True, nogil=True)
def _union(x, y, parent, size):
    root_x = _find(x, parent)
    root_y = _find(y, parent)
    if root_x == root_y:
        return False
    if size[root_x] < size[root_y]:
        root_x, root_y = root_y, root_x
    parent[root_y] = root_x
    size[root_x] += size[root_y]
    return True


@njit(cache=True, nogil=True)
def _trajectory_kernel(indptr, indices, order, limit):
    n = indptr.shape[0] - 1
    parent = np.arange(n)
    size = np.ones(n, dtype=np.int64)
    active = np.zeros(n, dtype=np.bool_)
    counts = np.empty(limit, dtype=np.int64)
    components = 0
    for t in range(limit):
        v = order[t]
        active[v] = True
        components += 1
        for k in range(indptr[v], indptr[v + 1]):
            u = indices[k]
            if active[u] and _union(v, u, parent, size):
                components -= 1
        counts[t] = components
    return counts


@njit(cache=True, nogil=True)
def _components_kernel(indptr, indices, occ):
    n = indptr.shape[0] - 1
    parent = np.arange(n)
    size = np.ones(n, dtype=np.int64)
    components = 0
    for v in range(n):
        if not occ[v]:
            continue
        components += 1
        for k in range(indptr[v], indptr[v + 1]):
            u = indices[k]
            if u < v and occ[u] and _union(v, u, parent, size):
                components -= 1
    return components


@dataclass(frozen=True)
class CoupledSample:
    """One arrival-time draw seen both as a reveal order and as a percolation family"""

    graph: Graph
    omega: np.ndarray
    permutation: np.ndarray

    def occupancy(self, p: float) -> np.ndarray:
        """Open set {i : omega_i <= p}"""
        return self.omega <= p

    def prefix_trajectory(self, t: int) -> np.ndarray:
        return trajectory(self.graph, self.permutation, limit=t)

    def prefix_occupancy(self, t: int) -> np.ndarray:
        return prefix_occupancy(self.graph.num_vertices, self.permutation, t)


def sample_permutation(n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform permutation of 0..n-1 (Fisher-Yates via Generator.permutation)"""
    if n < 1:
        raise ParameterError(f"Permutation length must be >= 1, got {n}")
    return rng.permutation(n)


def _check_permutation(graph: Graph, perm: Sequence[int]) -> np.ndarray:
    order = np.asarray(perm, dtype=np.int64)
    if order.shape != (graph.num_vertices,):
        raise ParameterError(f"Permutation length {order.size} does not match N={graph.num_vertices}")
    if order.min() < 0 or order.max() >= graph.num_vertices:
        raise ParameterError(f"Permutation entries must lie in [0, {graph.num_vertices})")
    if not np.all(np.bincount(order, minlength=graph.num_vertices) == 1):
        raise ParameterError("Permutation must list every vertex exactly once")
    return order


def trajectory(graph: Graph, perm: Sequence[int], limit: Optional[int] = None) -> np.ndarray:
    """Component counts after each reveal; entry t-1 is C~_t"""
    order = _check_permutation(graph, perm)
    if limit is None:
        limit = graph.num_vertices
    if not 0 <= limit <= graph.num_vertices:
        raise ParameterError(f"Trajectory limit {limit} outside [0, {graph.num_vertices}]")
    return _trajectory_kernel(graph.indptr, graph.indices, order, limit)


def count_components(graph: Graph, occ: np.ndarray) -> int:
    """Number of connected components of the subgraph induced by the open vertices"""
    occ = np.asarray(occ, dtype=np.bool_)
    if occ.shape != (graph.num_vertices,):
        raise ParameterError(f"Occupancy length {occ.shape} does not match N={graph.num_vertices}")
    return int(_components_kernel(graph.indptr, graph.indices, occ))


def percolation_sample(graph: Graph, p: float, rng: np.random.Generator):
    """Open every vertex independently with probability p; return (occupancy, C_p)"""
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"Probability p must lie in [0, 1], got {p}")
    occ = rng.random(graph.num_vertices) < p
    return occ, count_components(graph, occ)


def arrival_order(omega: np.ndarray) -> np.ndarray:
    """Vertices sorted by arrival time, ties broken by vertex index"""
    return np.argsort(omega, kind="stable")


def coupled_views(graph: Graph, rng: np.random.Generator) -> CoupledSample:
    omega = rng.random(graph.num_vertices)
    return CoupledSample(graph, omega, arrival_order(omega))


def prefix_occupancy(n: int, perm: Sequence[int], t: int) -> np.ndarray:
    occ = np.zeros(n, dtype=bool)
    occ[np.asarray(perm[:t], dtype=np.int64)] = True
    return occ


def trajectory_frame(counts: np.ndarray) -> pd.DataFrame:
    return pd.DataFrame({"t": np.arange(1, len(counts) + 1), "count": counts})


def occupancy_bits(occ: np.ndarray) -> str:
    return "".join("1" if flag else "0" for flag in np.asarray(occ, dtype=bool))
