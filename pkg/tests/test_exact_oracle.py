import math
from fractions import Fraction

import networkx as nx
import numpy as np
import pytest

from blind_estimator import estimate_curve
from bound_polynomials import RationalPolynomial
from conftest import make_graph, random_small_graph, to_networkx
from exact_oracle import (
    OracleSizeError,
    binomial_mad,
    component_table,
    exact_curve,
    exact_percolation_polynomial,
    full_info_value,
    expectation_margins,
    oracle_to_dict,
)
from lattice_graphs import ParameterError


class TestComponentTable:
    def test_matches_networkx_on_every_subset(self):
        rng = np.random.default_rng(21)
        for _ in range(5):
            graph = random_small_graph(rng, 9)
            g = to_networkx(graph)
            table = component_table(graph)
            assert table[0] == 0
            for mask in range(1 << graph.num_vertices):
                members = [v for v in range(graph.num_vertices) if mask >> v & 1]
                assert table[mask] == nx.number_connected_components(g.subgraph(members))

    def test_one_byte_per_subset(self, c4):
        table = component_table(c4)
        assert table.dtype == np.uint8
        assert table.shape == (16,)


class TestExactCurve:
    def test_four_cycle(self, c4):
        assert exact_curve(c4).values == (1, Fraction(4, 3), 1, 1)

    def test_two_disjoint_edges(self, two_k2):
        assert exact_curve(two_k2).values == (1, Fraction(5, 3), 2, 2)

    def test_path(self, p3):
        assert exact_curve(p3).values == (1, Fraction(4, 3), 1)

    def test_edgeless(self):
        assert exact_curve(make_graph(5, [])).values == (1, 2, 3, 4, 5)

    def test_oracle_size_guard(self):
        with pytest.raises(OracleSizeError):
            exact_curve(make_graph(25, []))


class TestAgreesWithMonteCarlo:
    TRIALS = 4000

    def assert_within_four_standard_errors(self, graph, seed):
        exact = exact_curve(graph).values
        curve = estimate_curve(graph, trials=self.TRIALS, master_seed=seed)
        for t, value in enumerate(exact):
            standard_error = curve.sample_std[t] / math.sqrt(self.TRIALS)
            assert abs(curve.mean[t] - float(value)) <= max(4 * standard_error, 1e-12)

    def test_named_graphs(self, c4, p3, two_k2):
        for seed, graph in enumerate((c4, p3, two_k2)):
            self.assert_within_four_standard_errors(graph, seed)

    def test_random_graphs(self):
        rng = np.random.default_rng(808)
        for i in range(20):
            self.assert_within_four_standard_errors(random_small_graph(rng, 8), 100 + i)


class TestFullInfoValue:
    def test_four_cycle(self, c4):
        game = full_info_value(c4)
        assert game.full_value == Fraction(4, 3)
        assert game.blind_value == Fraction(4, 3)
        assert game.blind_stop == 2

    def test_two_disjoint_edges(self, two_k2):
        game = full_info_value(two_k2)
        assert game.full_value == 2
        assert game.blind_value == 2
        assert game.blind_stop == 3

    def test_single_vertex(self, single_vertex):
        game = full_info_value(single_vertex)
        assert game.full_value == 1
        assert game.blind_value == 1

    def test_full_information_never_hurts(self):
        rng = np.random.default_rng(1234)
        for _ in range(50):
            graph = random_small_graph(rng, 12)
            game = full_info_value(graph)
            assert game.full_value >= game.blind_value
            assert game.full_value <= graph.num_vertices


class TestPercolationPolynomial:
    def test_single_vertex(self, single_vertex):
        assert exact_percolation_polynomial(single_vertex) == RationalPolynomial([0, 1])

    def test_edge(self, k2):
        assert exact_percolation_polynomial(k2) == RationalPolynomial([0, 2, -1])

    def test_four_cycle(self, c4):
        poly = exact_percolation_polynomial(c4)
        assert poly == RationalPolynomial([0, 4, -4, 0, 1])
        assert poly(1) == 1

    def test_endpoints(self):
        # E[C_1] is the number of components of the whole graph
        rng = np.random.default_rng(5)
        for _ in range(10):
            graph = random_small_graph(rng, 10)
            poly = exact_percolation_polynomial(graph)
            assert poly(1) == nx.number_connected_components(to_networkx(graph))
            assert poly(0) == 0


class TestExpectationMargins:
    def test_random_graphs(self):
        rng = np.random.default_rng(99)
        for _ in range(20):
            graph = random_small_graph(rng, 10)
            margins = expectation_margins(graph)
            assert margins.exp_ineq_holds
            assert margins.opt_blind_holds
            assert len(margins.differences) == graph.num_vertices

    def test_edgeless_has_zero_differences(self):
        margins = expectation_margins(make_graph(6, []))
        assert margins.differences == (0,) * 6
        assert margins.allowance == 0.0


class TestBinomialMad:
    def test_small_values(self):
        assert binomial_mad(1, Fraction(1, 2)) == Fraction(1, 2)
        assert binomial_mad(2, Fraction(1, 2)) == Fraction(1, 2)
        assert binomial_mad(4, Fraction(1, 2)) == Fraction(3, 4)
        assert binomial_mad(5, Fraction(0)) == 0

    @pytest.mark.parametrize("n", range(1, 65))
    def test_bounded_by_standard_deviation(self, n):
        for k in range(11):
            p = Fraction(k, 10)
            mad = binomial_mad(n, p)
            assert mad * mad <= n * p * (1 - p)
            assert 4 * mad * mad <= n

    def test_range(self):
        with pytest.raises(ParameterError):
            binomial_mad(65, Fraction(1, 2))
        with pytest.raises(ParameterError):
            binomial_mad(3, Fraction(3, 2))


def test_oracle_json(c4):
    assert oracle_to_dict(c4) == {
        "exact_curve": ["1", "4/3", "1", "1"],
        "blind": {"t": 2, "value": "4/3"},
        "full_value": "4/3",
        "percolation_poly": ["0", "4", "-4", "0", "1"],
    }
