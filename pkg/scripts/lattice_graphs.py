#!/usr/bin/env python3
"""
Lattice graph generation and occupancy pattern counts.

Builds the square, triangular and hexagonal lattices used by the reveal
game, stores their elementary faces ("cells") at generation time, and
reads/writes the Graph JSON format.

Vertex indexing is 0-based and row-major throughout:
  square / triangular: vertex (r, c) -> r * n + c
  hexagonal (brick wall): vertices sorted by (row, column) of the brick grid,
    N(r, c) = (r + 1)(2c + 2) - 2
"""

import json
import logging
import os
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

logger = logging.getLogger(__name__)

LATTICE_KINDS = ("square", "triangular", "hexagonal")

Cells = Tuple[Tuple[int, ...], ...]


class ParameterError(ValueError):
    """Raised for out-of-range sizes, probabilities and trial counts."""


class GraphFormatError(ValueError):
    """Raised when a graph file does not match the Graph JSON schema."""


@dataclass(frozen=True)
class LatticeSpec:
    kind: str
    n: Optional[int] = None
    rows: Optional[int] = None
    cols: Optional[int] = None

    def validate(self) -> None:
        if self.kind not in LATTICE_KINDS:
            raise ParameterError(f"Unknown lattice kind: {self.kind!r}")
        if self.kind == "hexagonal":
            if self.rows is None or self.cols is None or self.rows < 1 or self.cols < 1:
                raise ParameterError(
                    f"Hexagonal lattice needs rows >= 1 and cols >= 1, got rows={self.rows} cols={self.cols}"
                )
        elif self.n is None or self.n < 2:
            raise ParameterError(f"{self.kind} lattice needs side n >= 2, got n={self.n}")

    def params(self) -> Dict[str, int]:
        if self.kind == "hexagonal":
            return {"rows": self.rows, "cols": self.cols}
        return {"n": self.n}


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable simple undirected graph in CSR form."""

    num_vertices: int
    indptr: np.ndarray
    indices: np.ndarray
    kind: str = "custom"
    params: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_edges(cls, num_vertices: int, edges: Iterable[Sequence[int]],
                   kind: str = "custom", params: Optional[Dict[str, Any]] = None) -> "Graph":
        """Build a graph from an edge list, rejecting loops, duplicates and bad indices"""
        if num_vertices < 1:
            raise ParameterError(f"Graph needs at least one vertex, got {num_vertices}")

        neighbors: List[set] = [set() for _ in range(num_vertices)]
        for position, edge in enumerate(edges):
            u, v = int(edge[0]), int(edge[1])
            if not (0 <= u < num_vertices and 0 <= v < num_vertices):
                raise ParameterError(f"Edge {position} ({u}, {v}) out of range for N={num_vertices}")
            if u == v:
                raise ParameterError(f"Edge {position} is a self-loop on vertex {u}")
            if v in neighbors[u]:
                raise ParameterError(f"Edge {position} ({u}, {v}) is a duplicate")
            neighbors[u].add(v)
            neighbors[v].add(u)

        degrees = np.fromiter((len(adj) for adj in neighbors), dtype=np.int64, count=num_vertices)
        indptr = np.zeros(num_vertices + 1, dtype=np.int64)
        np.cumsum(degrees, out=indptr[1:])
        indices = np.fromiter(
            (u for adj in neighbors for u in sorted(adj)), dtype=np.int64, count=int(indptr[-1])
        )
        indptr.setflags(write=False)
        indices.setflags(write=False)
        return cls(num_vertices, indptr, indices, kind, dict(params or {}))

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def edge_count(self) -> int:
        return int(self.indptr[-1]) // 2

    @property
    def max_degree(self) -> int:
        return int(self.degrees.max()) if self.num_vertices else 0

    @property
    def adjacency(self) -> Tuple[Tuple[int, ...], ...]:
        return tuple(self.neighbors(v) for v in range(self.num_vertices))

    def neighbors(self, v: int) -> Tuple[int, ...]:
        return tuple(int(u) for u in self.indices[self.indptr[v]:self.indptr[v + 1]])

    def edges(self) -> List[Tuple[int, int]]:
        """Edges with u < v, sorted lexicographically"""
        return [(u, w) for u in range(self.num_vertices) for w in self.neighbors(u) if u < w]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (self.num_vertices == other.num_vertices
                and np.array_equal(self.indptr, other.indptr)
                and np.array_equal(self.indices, other.indices))

    __hash__ = None


@dataclass(frozen=True)
class PatternCounts:
    isolated_vertices: int
    isolated_edges: int
    empty_cells: int
    open_vertices: int
    open_edges: int


def _square_cells(n: int) -> Cells:
    return tuple(
        (r * n + c, r * n + c + 1, (r + 1) * n + c + 1, (r + 1) * n + c)
        for r in range(n - 1) for c in range(n - 1)
    )


def _triangular_cells(n: int) -> Cells:
    # every unit square is split by the (r, c)-(r+1, c+1) diagonal
    cells = []
    for r in range(n - 1):
        for c in range(n - 1):
            a, b, d, e = r * n + c, r * n + c + 1, (r + 1) * n + c + 1, (r + 1) * n + c
            cells.append((a, b, d))
            cells.append((a, d, e))
    return tuple(cells)


def _hexagonal_cells(rows: int, cols: int) -> Tuple[int, Cells]:
    """Brick-wall hexagons; band i holds bricks starting at columns i%2, i%2+2, ..."""
    bricks = []
    for i in range(rows):
        for k in range(cols):
            j = i % 2 + 2 * k
            bricks.append(((i, j), (i, j + 1), (i, j + 2), (i + 1, j + 2), (i + 1, j + 1), (i + 1, j)))

    points = sorted({point for brick in bricks for point in brick})
    index = {point: position for position, point in enumerate(points)}
    cells = tuple(tuple(index[point] for point in brick) for brick in bricks)
    return len(points), cells


def _cell_edges(cells: Cells) -> List[Tuple[int, int]]:
    edges = set()
    for cell in cells:
        for position, u in enumerate(cell):
            v = cell[(position + 1) % len(cell)]
            edges.add((min(u, v), max(u, v)))
    return sorted(edges)


def gen_lattice(spec: LatticeSpec) -> Tuple[Graph, Cells]:
    """Generate a lattice graph and its elementary faces"""
    spec.validate()

    if spec.kind == "hexagonal":
        num_vertices, cells = _hexagonal_cells(spec.rows, spec.cols)
        edges = _cell_edges(cells)
    else:
        n = spec.n
        num_vertices = n * n
        edges = [(r * n + c, r * n + c + 1) for r in range(n) for c in range(n - 1)]
        edges += [(r * n + c, (r + 1) * n + c) for r in range(n - 1) for c in range(n)]
        if spec.kind == "triangular":
            edges += [(r * n + c, (r + 1) * n + c + 1) for r in range(n - 1) for c in range(n - 1)]
            cells = _triangular_cells(n)
        else:
            cells = _square_cells(n)

    graph = Graph.from_edges(num_vertices, edges, kind=spec.kind, params=spec.params())
    logger.debug(f"Generated {spec.kind} lattice {spec.params()}: N={graph.num_vertices}, "
                 f"E={graph.edge_count}, cells={len(cells)}")
    return graph, cells


def graph_stats(graph: Graph) -> Tuple[int, Dict[int, int]]:
    """Maximum degree and degree histogram"""
    values, counts = np.unique(graph.degrees, return_counts=True)
    histogram = {int(d): int(c) for d, c in zip(values, counts)}
    return graph.max_degree, histogram


def _check_occupancy(graph: Graph, occ: np.ndarray) -> np.ndarray:
    occ = np.asarray(occ, dtype=bool)
    if occ.shape != (graph.num_vertices,):
        raise ParameterError(f"Occupancy length {occ.shape} does not match N={graph.num_vertices}")
    return occ


def count_patterns(graph: Graph, cells: Cells, occ: np.ndarray) -> PatternCounts:
    """Isolated vertices/edges, fully open cells and open vertex/edge totals of G_p"""
    occ = _check_occupancy(graph, occ)

    sources = np.repeat(np.arange(graph.num_vertices), graph.degrees)
    open_neighbors = np.bincount(
        sources, weights=occ[graph.indices].astype(np.float64), minlength=graph.num_vertices
    ).astype(np.int64)

    isolated_vertices = int(np.count_nonzero(occ & (open_neighbors == 0)))

    forward = sources < graph.indices
    u, v = sources[forward], graph.indices[forward]
    open_edge = occ[u] & occ[v]
    isolated_edges = int(np.count_nonzero(open_edge & (open_neighbors[u] == 1) & (open_neighbors[v] == 1)))

    if cells:
        if len({len(cell) for cell in cells}) != 1:
            raise ParameterError("Cells must all have the same number of vertices")
        cell_array = np.asarray(cells, dtype=np.int64)
        empty_cells = int(np.count_nonzero(occ[cell_array].all(axis=1)))
    else:
        empty_cells = 0

    return PatternCounts(
        isolated_vertices=isolated_vertices,
        isolated_edges=isolated_edges,
        empty_cells=empty_cells,
        open_vertices=int(np.count_nonzero(occ)),
        open_edges=int(np.count_nonzero(open_edge)),
    )


def euler_lower_bound(counts: PatternCounts) -> int:
    """V_p - E_p + empty cells; never exceeds C_p on the lattice embeddings"""
    return counts.open_vertices - counts.open_edges + counts.empty_cells


def graph_to_dict(graph: Graph, cells: Cells = ()) -> Dict[str, Any]:
    return {
        "kind": graph.kind,
        "params": dict(graph.params),
        "n_vertices": graph.num_vertices,
        "edges": [[u, v] for u, v in graph.edges()],
        "cells": [list(cell) for cell in cells],
    }


def save_graph(graph: Graph, cells: Cells, path: str) -> None:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, 'w', newline='\n') as f:
        json.dump(graph_to_dict(graph, cells), f, indent=2)
        f.write("\n")
    logger.info(f"Saved {graph.kind} graph with {graph.num_vertices} vertices to {path}")


def graph_from_dict(data: Any) -> Tuple[Graph, Cells]:
    """Validate a Graph JSON object; errors name the offending JSON path"""
    if not isinstance(data, dict):
        raise GraphFormatError("$: expected an object")

    for key in ("n_vertices", "edges"):
        if key not in data:
            raise GraphFormatError(f"$.{key}: missing")

    num_vertices = data["n_vertices"]
    if not isinstance(num_vertices, int) or isinstance(num_vertices, bool) or num_vertices < 1:
        raise GraphFormatError(f"$.n_vertices: expected a positive integer, got {num_vertices!r}")

    kind = data.get("kind", "custom")
    if not isinstance(kind, str):
        raise GraphFormatError(f"$.kind: expected a string, got {kind!r}")
    params = data.get("params", {})
    if not isinstance(params, dict):
        raise GraphFormatError(f"$.params: expected an object, got {params!r}")

    edges = data["edges"]
    if not isinstance(edges, list):
        raise GraphFormatError("$.edges: expected a list")
    seen = set()
    for i, edge in enumerate(edges):
        if not isinstance(edge, list) or len(edge) != 2:
            raise GraphFormatError(f"$.edges[{i}]: expected a pair [u, v]")
        for j, value in enumerate(edge):
            if not isinstance(value, int) or isinstance(value, bool):
                raise GraphFormatError(f"$.edges[{i}][{j}]: expected an integer, got {value!r}")
            if not 0 <= value < num_vertices:
                raise GraphFormatError(f"$.edges[{i}][{j}]: index {value} out of range for N={num_vertices}")
        u, v = edge
        if u == v:
            raise GraphFormatError(f"$.edges[{i}]: self-loop on vertex {u}")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise GraphFormatError(f"$.edges[{i}]: duplicate edge {list(key)}")
        seen.add(key)

    cells = data.get("cells", [])
    if not isinstance(cells, list):
        raise GraphFormatError("$.cells: expected a list")
    for i, cell in enumerate(cells):
        if not isinstance(cell, list) or len(cell) < 3:
            raise GraphFormatError(f"$.cells[{i}]: expected a list of at least 3 vertices")
        for j, value in enumerate(cell):
            if not isinstance(value, int) or isinstance(value, bool) or not 0 <= value < num_vertices:
                raise GraphFormatError(f"$.cells[{i}][{j}]: invalid vertex {value!r}")
        if len(cell) != len(cells[0]):
            raise GraphFormatError(
                f"$.cells[{i}]: expected {len(cells[0])} vertices like $.cells[0], got {len(cell)}"
            )
        for j, u in enumerate(cell):
            v = cell[(j + 1) % len(cell)]
            if (min(u, v), max(u, v)) not in seen:
                raise GraphFormatError(f"$.cells[{i}]: vertices {u} and {v} are not joined by an edge")

    graph = Graph.from_edges(num_vertices, edges, kind=kind, params=params)
    return graph, tuple(tuple(cell) for cell in cells)


def load_graph(path: str) -> Tuple[Graph, Cells]:
    """Load a Graph JSON file"""
    try:
        with open(path, 'r') as f:
            data = json.load(f)
    except FileNotFoundError:
        raise GraphFormatError(f"{path}: file not found")
    except json.JSONDecodeError as e:
        raise GraphFormatError(f"$: invalid JSON in {path}: {e}")

    graph, cells = graph_from_dict(data)
    logger.info(f"Loaded graph from {path}: N={graph.num_vertices}, E={graph.edge_count}, cells={len(cells)}")
    return graph, cells
