#!/usr/bin/env python3
"""
Exact ground truth for tiny graphs (N <= 24).

Every quantity is computed from a table holding the component count of each
of the 2^N vertex subsets (one byte per subset), with exact rationals:
  - the blind curve E[C~_t] = sum_{|S|=t} comp(S) / C(N, t)
  - the full-information game value by backward induction over subsets
  - the percolation polynomial E[C_p] = sum_S comp(S) p^|S| (1-p)^(N-|S|)
  - the mean absolute deviation of a binomial law
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Tuple

import numpy as np

from blind_estimator import blind_policy
from bound_polynomials import RationalPolynomial
from lattice_graphs import Graph, ParameterError
from reveal_engine import njit

logger = logging.getLogger(__name__)

MAX_ORACLE_VERTICES = 24
SLOW_ORACLE_VERTICES = 20
MAX_MAD_TRIALS = 64


class OracleSizeError(ValueError):
    """Raised when a graph is too large for subset enumeration."""


@dataclass(frozen=True)
class ExactCurve:
    values: Tuple[Fraction, ...]


@dataclass(frozen=True)
class GameValue:
    blind_value: Fraction
    blind_stop: int
    full_value: Fraction


@dataclass(frozen=True)
class ExpectationMargins:
    """E[C_{t/N}] - E[C~_t] per t, against the allowance D sqrt(N) / 2"""

    differences: Tuple[Fraction, ...]
    allowance: float
    exp_ineq_holds: bool
    opt_blind_holds: bool


def _check_size(graph: Graph) -> None:
    if graph.num_vertices > MAX_ORACLE_VERTICES:
        raise OracleSizeError(
            f"Oracle enumerates 2^N subsets and is limited to N <= {MAX_ORACLE_VERTICES}, got N={graph.num_vertices}"
        )
    if graph.num_vertices > SLOW_ORACLE_VERTICES:
        logger.warning(f"Oracle on N={graph.num_vertices}: enumeration of 2^N subsets will be slow")


@njit(cache=True)
def _component_table_kernel(neighbor_masks, n):
    total = 1 << n
    table = np.zeros(total, dtype=np.uint8)
    for mask in range(1, total):
        remaining = mask
        components = 0
        while remaining:
            component = remaining & -remaining
            frontier = component
            while frontier:
                reach = 0
                for v in range(n):
                    if (frontier >> v) & 1:
                        reach |= neighbor_masks[v]
                frontier = reach & mask & ~component
                component |= frontier
            remaining &= ~component
            components += 1
        table[mask] = components
    return table


def component_table(graph: Graph) -> np.ndarray:
    """Component count of every vertex subset, indexed by bitmask"""
    _check_size(graph)
    neighbor_masks = np.zeros(graph.num_vertices, dtype=np.int64)
    for v in range(graph.num_vertices):
        for u in graph.neighbors(v):
            neighbor_masks[v] |= 1 << u
    return _component_table_kernel(neighbor_masks, graph.num_vertices)


def _popcounts(n: int) -> np.ndarray:
    masks = np.arange(1 << n, dtype=np.int64)
    counts = np.zeros(1 << n, dtype=np.int64)
    for v in range(n):
        counts += (masks >> v) & 1
    return counts


def _size_totals(graph: Graph, table: np.ndarray) -> List[int]:
    """A_k = sum of comp(S) over subsets of size k"""
    n = graph.num_vertices
    # float sums stay exact: at most 2^24 * 24 < 2^53
    totals = np.bincount(_popcounts(n), weights=table.astype(np.float64), minlength=n + 1)
    return [int(round(x)) for x in totals]


def exact_curve(graph: Graph) -> ExactCurve:
    totals = _size_totals(graph, component_table(graph))
    n = graph.num_vertices
    return ExactCurve(tuple(Fraction(totals[t], math.comb(n, t)) for t in range(1, n + 1)))


def exact_percolation_polynomial(graph: Graph) -> RationalPolynomial:
    totals = _size_totals(graph, component_table(graph))
    n = graph.num_vertices
    coeffs = [0] * (n + 1)
    for k, a_k in enumerate(totals):
        if a_k == 0:
            continue
        # a_k * p^k * (1-p)^(n-k)
        for j in range(n - k + 1):
            coeffs[k + j] += a_k * math.comb(n - k, j) * (-1) ** j
    return RationalPolynomial(coeffs)


def full_info_value(graph: Graph) -> GameValue:
    """
    Backward induction V(S) = max(comp(S), mean over v not in S of V(S + v)),
    with V(empty) forced to continue. Values are scaled by (N - |S|)! so the
    recursion stays in integers: U(S) = max(comp(S) (N-|S|)!, sum_v U(S + v)).
    """
    table = component_table(graph)
    n = graph.num_vertices
    full = (1 << n) - 1
    popcounts = _popcounts(n)
    factorials = [math.factorial(k) for k in range(n + 1)]

    comps = table.tolist()
    sizes = popcounts.tolist()
    scaled = [0] * (1 << n)
    scaled[full] = comps[full]
    for mask in range(full - 1, 0, -1):
        cont = 0
        for v in range(n):
            bit = 1 << v
            if not mask & bit:
                cont += scaled[mask | bit]
        scaled[mask] = max(comps[mask] * factorials[n - sizes[mask]], cont)
    root = sum(scaled[1 << v] for v in range(n))

    curve = exact_curve(graph)
    policy = blind_policy(curve)
    full_value = Fraction(root, factorials[n])
    logger.info(f"Oracle on N={n}: blind {policy.value} at t={policy.stop_time}, full {full_value}")
    return GameValue(blind_value=policy.value, blind_stop=policy.stop_time, full_value=full_value)


def binomial_mad(n: int, p: Fraction) -> Fraction:
    """E|X - np| for X ~ Binomial(n, p), summed exactly"""
    if not 0 <= n <= MAX_MAD_TRIALS:
        raise ParameterError(f"binomial_mad supports 0 <= n <= {MAX_MAD_TRIALS}, got {n}")
    p = Fraction(p)
    if not 0 <= p <= 1:
        raise ParameterError(f"Probability p must lie in [0, 1], got {p}")
    mean = n * p
    return sum(
        (math.comb(n, k) * p ** k * (1 - p) ** (n - k) * abs(k - mean) for k in range(n + 1)),
        Fraction(0),
    )


def _within_allowance(difference: Fraction, degree: int, n: int) -> bool:
    # difference <= degree * sqrt(n) / 2, decided without rounding
    return difference <= 0 or 4 * difference * difference <= degree * degree * n


def expectation_margins(graph: Graph) -> ExpectationMargins:
    """
    Exact check of E[C_{t/N}] <= E[C~_t] + D sqrt(N)/2 for every t, and of
    max_t E[C_{t/N}] <= blind value + D sqrt(N)/2.
    """
    n, degree = graph.num_vertices, graph.max_degree
    curve = exact_curve(graph)
    poly = exact_percolation_polynomial(graph)
    percolation = [poly(Fraction(t, n)) for t in range(1, n + 1)]
    differences = tuple(pct - blind for pct, blind in zip(percolation, curve.values))

    blind_value = max(curve.values)
    return ExpectationMargins(
        differences=differences,
        allowance=degree * math.sqrt(n) / 2,
        exp_ineq_holds=all(_within_allowance(d, degree, n) for d in differences),
        opt_blind_holds=_within_allowance(max(percolation) - blind_value, degree, n),
    )


def _rational(value: Fraction) -> str:
    value = Fraction(value)
    return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


def oracle_to_dict(graph: Graph) -> Dict:
    """Oracle JSON object; rationals as "num/den" strings"""
    curve = exact_curve(graph)
    game = full_info_value(graph)
    poly = exact_percolation_polynomial(graph)
    return {
        "exact_curve": [_rational(v) for v in curve.values],
        "blind": {"t": game.blind_stop, "value": _rational(game.blind_value)},
        "full_value": _rational(game.full_value),
        "percolation_poly": [_rational(c) for c in poly.coeffs] or ["0"],
    }
