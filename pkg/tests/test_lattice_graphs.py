import json

import numpy as np
import pytest

from conftest import make_graph
from lattice_graphs import (
    GraphFormatError,
    LatticeSpec,
    ParameterError,
    count_patterns,
    euler_lower_bound,
    gen_lattice,
    graph_stats,
    load_graph,
    save_graph,
)
from reveal_engine import count_components


def square(n):
    return gen_lattice(LatticeSpec("square", n=n))


def triangular(n):
    return gen_lattice(LatticeSpec("triangular", n=n))


def hexagonal(rows, cols):
    return gen_lattice(LatticeSpec("hexagonal", rows=rows, cols=cols))


class TestGenLattice:
    def test_square_2_is_a_four_cycle(self):
        graph, cells = square(2)
        assert graph.num_vertices == 4
        assert graph.edge_count == 4
        assert graph_stats(graph)[1] == {2: 4}
        assert cells == ((0, 1, 3, 2),)

    def test_square_200_edge_count(self):
        graph, cells = square(200)
        assert graph.num_vertices == 40000
        assert graph.edge_count == 2 * 40000 - 2 * 200 == 79600
        assert len(cells) == 199 ** 2

    def test_triangular_3(self):
        graph, cells = triangular(3)
        assert graph.num_vertices == 9
        assert graph.edge_count == 16
        assert len(cells) == 8

    def test_single_hexagon_is_a_six_cycle(self):
        graph, cells = hexagonal(1, 1)
        assert graph.num_vertices == 6
        assert graph.edge_count == 6
        assert graph.max_degree == 2
        assert len(cells) == 1

    @pytest.mark.parametrize("n", range(2, 51))
    def test_closed_form_edge_counts(self, n):
        graph, cells = square(n)
        assert graph.edge_count == 2 * n * (n - 1)
        assert len(cells) == (n - 1) ** 2

        graph, cells = triangular(n)
        assert graph.edge_count == 2 * n * (n - 1) + (n - 1) ** 2
        assert len(cells) == 2 * (n - 1) ** 2

    @pytest.mark.parametrize("rows,cols", [(r, c) for r in range(1, 8) for c in range(1, 8)])
    def test_hexagonal_counts(self, rows, cols):
        graph, cells = hexagonal(rows, cols)
        _, histogram = graph_stats(graph)
        assert graph.num_vertices == (rows + 1) * (2 * cols + 2) - 2
        assert len(cells) == rows * cols
        assert set(histogram) <= {2, 3}
        boundary = histogram.get(2, 0)
        assert graph.edge_count == (3 * graph.num_vertices - boundary) // 2

    @pytest.mark.parametrize("build", [lambda: square(6), lambda: triangular(6), lambda: hexagonal(4, 5)])
    def test_handshake_and_symmetry(self, build):
        graph, _ = build()
        assert int(graph.degrees.sum()) == 2 * graph.edge_count
        for v in range(graph.num_vertices):
            neighbors = graph.neighbors(v)
            assert v not in neighbors
            assert len(set(neighbors)) == len(neighbors)
            for u in neighbors:
                assert v in graph.neighbors(u)

    @pytest.mark.parametrize("build", [lambda: square(5), lambda: triangular(5), lambda: hexagonal(3, 3)])
    def test_cells_are_cycles(self, build):
        graph, cells = build()
        for cell in cells:
            for position, u in enumerate(cell):
                assert cell[(position + 1) % len(cell)] in graph.neighbors(u)

    def test_row_major_square_indexing(self):
        graph, _ = square(4)
        # vertex (1, 2) -> 6 has neighbors (0, 2), (1, 1), (1, 3), (2, 2)
        assert graph.neighbors(6) == (2, 5, 7, 10)
        assert graph.adjacency[0] == (1, 4)
        assert len(graph.adjacency) == 16

    @pytest.mark.parametrize("spec", [
        LatticeSpec("square", n=1),
        LatticeSpec("triangular", n=None),
        LatticeSpec("hexagonal", rows=0, cols=3),
        LatticeSpec("kagome", n=4),
    ])
    def test_invalid_sizes_rejected(self, spec):
        with pytest.raises(ParameterError):
            gen_lattice(spec)


class TestGraphStats:
    def test_square_max_degree(self):
        graph, _ = square(200)
        max_degree, histogram = graph_stats(graph)
        assert max_degree == 4
        assert sum(histogram.values()) == graph.num_vertices
        assert histogram == {2: 4, 3: 4 * 198, 4: 198 ** 2}

    def test_triangular_inner_degree(self):
        graph, _ = triangular(5)
        assert graph_stats(graph)[0] == 6

    def test_hexagonal_max_degree(self):
        graph, _ = hexagonal(5, 4)
        assert graph_stats(graph)[0] == 3

    def test_single_vertex(self, single_vertex):
        assert graph_stats(single_vertex) == (0, {0: 1})


class TestCountPatterns:
    def test_all_open_square(self):
        n = 7
        graph, cells = square(n)
        counts = count_patterns(graph, cells, np.ones(graph.num_vertices, dtype=bool))
        assert counts.isolated_vertices == 0
        assert counts.isolated_edges == 0
        assert counts.empty_cells == (n - 1) ** 2

    def test_single_open_vertex(self):
        graph, cells = square(5)
        occ = np.zeros(graph.num_vertices, dtype=bool)
        occ[12] = True
        counts = count_patterns(graph, cells, occ)
        assert (counts.isolated_vertices, counts.isolated_edges, counts.empty_cells) == (1, 0, 0)

    def test_isolated_edge(self):
        graph, cells = square(3)
        occ = np.zeros(graph.num_vertices, dtype=bool)
        occ[[0, 1]] = True
        counts = count_patterns(graph, cells, occ)
        assert counts.isolated_edges == 1
        assert counts.isolated_vertices == 0
        assert counts.open_edges == 1

    def test_path_of_three_has_no_isolated_edge(self):
        graph, cells = square(3)
        occ = np.zeros(graph.num_vertices, dtype=bool)
        occ[[0, 1, 2]] = True
        assert count_patterns(graph, cells, occ).isolated_edges == 0

    def test_closed_interior_vertex_spoils_four_cells(self):
        n = 9
        graph, cells = square(n)
        occ = np.ones(graph.num_vertices, dtype=bool)
        occ[4 * n + 4] = False
        assert count_patterns(graph, cells, occ).empty_cells == (n - 1) ** 2 - 4

    def test_length_mismatch_rejected(self):
        graph, cells = square(3)
        with pytest.raises(ParameterError):
            count_patterns(graph, cells, np.ones(5, dtype=bool))

    def test_isolated_vertex_density(self):
        p = 0.27
        graph, cells = square(100)
        rng = np.random.default_rng(2024)
        total = 0
        trials = 40
        for _ in range(trials):
            occ = rng.random(graph.num_vertices) < p
            total += count_patterns(graph, cells, occ).isolated_vertices
        assert total / (trials * graph.num_vertices) == pytest.approx(p * (1 - p) ** 4, abs=0.01)

    @pytest.mark.parametrize("build", [lambda: square(12), lambda: triangular(12), lambda: hexagonal(8, 8)])
    def test_euler_lower_bound_never_exceeds_components(self, build):
        graph, cells = build()
        rng = np.random.default_rng(5)
        for p in (0.1, 0.3, 0.5, 0.7, 0.9, 1.0):
            for _ in range(20):
                occ = rng.random(graph.num_vertices) < p
                counts = count_patterns(graph, cells, occ)
                assert euler_lower_bound(counts) <= count_components(graph, occ)


class TestGraphJson:
    def test_round_trip(self, tmp_path):
        graph, cells = square(3)
        path = str(tmp_path / "square3.json")
        save_graph(graph, cells, path)
        loaded, loaded_cells = load_graph(path)
        assert loaded == graph
        assert loaded.edges() == graph.edges()
        assert loaded_cells == cells
        assert loaded.kind == "square"
        assert loaded.params == {"n": 3}

    def test_edges_sorted_with_u_less_than_v(self, tmp_path):
        graph, cells = hexagonal(2, 2)
        path = str(tmp_path / "hex.json")
        save_graph(graph, cells, path)
        with open(path) as f:
            edges = json.load(f)["edges"]
        assert all(u < v for u, v in edges)
        assert edges == sorted(edges)

    def test_fixture_file(self, data_dir):
        graph, cells = load_graph(f"{data_dir}/c4.json")
        assert graph == make_graph(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
        assert cells == ()

    def _write(self, tmp_path, payload):
        path = tmp_path / "graph.json"
        path.write_text(json.dumps(payload))
        return str(path)

    def test_duplicate_edge_rejected(self, tmp_path):
        path = self._write(tmp_path, {"n_vertices": 3, "edges": [[0, 1], [1, 2], [1, 0]]})
        with pytest.raises(GraphFormatError, match=r"\$\.edges\[2\]"):
            load_graph(path)

    def test_out_of_range_index_rejected(self, tmp_path):
        path = self._write(tmp_path, {"n_vertices": 3, "edges": [[0, 1], [1, 3]]})
        with pytest.raises(GraphFormatError, match=r"\$\.edges\[1\]\[1\]"):
            load_graph(path)

    def test_missing_key_rejected(self, tmp_path):
        path = self._write(tmp_path, {"edges": []})
        with pytest.raises(GraphFormatError, match="n_vertices"):
            load_graph(path)

    def test_invalid_json_rejected(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(GraphFormatError):
            load_graph(str(path))

    def test_mixed_cell_lengths_rejected(self, tmp_path):
        path = self._write(tmp_path, {
            "kind": "square", "n_vertices": 4,
            "edges": [[0, 1], [0, 2], [1, 3], [2, 3]],
            "cells": [[0, 1, 3, 2], [0, 1, 3]],
        })
        with pytest.raises(GraphFormatError, match=r"\$\.cells\[1\]"):
            load_graph(path)

    def test_cell_that_is_not_a_cycle_rejected(self, tmp_path):
        path = self._write(tmp_path, {
            "n_vertices": 4,
            "edges": [[0, 1], [0, 2], [1, 3], [2, 3]],
            "cells": [[0, 1, 2, 3]],
        })
        with pytest.raises(GraphFormatError, match=r"\$\.cells\[0\]: vertices 1 and 2"):
            load_graph(path)

    def test_saved_lattice_cells_pass_validation(self, tmp_path):
        for graph, cells in (square(4), triangular(4), hexagonal(3, 2)):
            path = str(tmp_path / f"{graph.kind}.json")
            save_graph(graph, cells, path)
            assert load_graph(path)[1] == cells


def test_count_patterns_rejects_ragged_cells():
    graph, _ = square(2)
    with pytest.raises(ParameterError):
        count_patterns(graph, ((0, 1, 3, 2), (0, 1, 3)), np.ones(4, dtype=bool))
