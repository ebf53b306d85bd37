#!/usr/bin/env python3
"""
Lower/upper bound polynomials f(p), g(p) for E[C_p]/N on the three lattices.

Coefficients are exact rationals. The square-lattice polynomials are stored
expanded; the triangular and hexagonal upper bounds are kept as sums of
c * p^a * (1-p)^b terms and expanded binomially here.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Sequence, Tuple, Union

import pandas as pd

from lattice_graphs import LATTICE_KINDS, ParameterError

logger = logging.getLogger(__name__)

Number = Union[int, float, Fraction]

GRID_INTERVALS = 10_000
BRACKET_WIDTH = Fraction(1, 10 ** 12)
REPORT_DIGITS = 5

TABLE_COLUMNS = ["lattice", "p_max", "lower", "p_max_upper", "upper", "gap"]


class RationalPolynomial:
    """Univariate polynomial with Fraction coefficients, coefficient of p^k at index k."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[Number]):
        values = [Fraction(c) for c in coeffs]
        while values and values[-1] == 0:
            values.pop()
        self.coeffs: Tuple[Fraction, ...] = tuple(values)

    @classmethod
    def from_powers(cls, powers: Dict[int, Number]) -> "RationalPolynomial":
        degree = max(powers) if powers else 0
        coeffs = [Fraction(0)] * (degree + 1)
        for power, value in powers.items():
            coeffs[power] += Fraction(value)
        return cls(coeffs)

    @classmethod
    def from_terms(cls, terms: Sequence[Tuple[Number, int, int]], scale: Number = 1) -> "RationalPolynomial":
        """Expand scale * sum c * p^a * (1-p)^b"""
        powers: Dict[int, Fraction] = {}
        for c, a, b in terms:
            for j in range(b + 1):
                term = Fraction(c) * Fraction(scale) * math.comb(b, j) * (-1) ** j
                powers[a + j] = powers.get(a + j, Fraction(0)) + term
        return cls.from_powers(powers)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, p: Number):
        """Exact Horner evaluation; float input is evaluated exactly and rounded once"""
        if isinstance(p, float):
            return float(self(Fraction(p)))
        p = Fraction(p)
        result = Fraction(0)
        for c in reversed(self.coeffs):
            result = result * p + c
        return result

    def derivative(self) -> "RationalPolynomial":
        return RationalPolynomial(k * c for k, c in enumerate(self.coeffs) if k > 0)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RationalPolynomial):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __sub__(self, other: "RationalPolynomial") -> "RationalPolynomial":
        size = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (Fraction(0),) * (size - len(self.coeffs))
        b = other.coeffs + (Fraction(0),) * (size - len(other.coeffs))
        return RationalPolynomial(x - y for x, y in zip(a, b))

    def __repr__(self) -> str:
        return f"RationalPolynomial({[str(c) for c in self.coeffs]})"

    def integer_form(self) -> Tuple[int, ...]:
        """Integer coefficients with the same sign as the polynomial everywhere"""
        lcm = 1
        for c in self.coeffs:
            lcm = lcm * c.denominator // math.gcd(lcm, c.denominator)
        return tuple(int(c * lcm) for c in self.coeffs)


def _sign_at(int_coeffs: Sequence[int], x: Fraction) -> int:
    """Sign of the polynomial at x via homogeneous integer Horner"""
    if not int_coeffs:
        return 0
    a, b = x.numerator, x.denominator
    degree = len(int_coeffs) - 1
    value = int_coeffs[degree]
    b_power = 1
    for k in range(degree - 1, -1, -1):
        b_power *= b
        value = value * a + int_coeffs[k] * b_power
    return (value > 0) - (value < 0)


@dataclass(frozen=True)
class MaxResult:
    argmax: float
    value: float
    bracket_width: float
    exact_argmax: Fraction
    exact_value: Fraction


def maximize_poly(poly: RationalPolynomial, lo: Number = 0, hi: Number = 1) -> MaxResult:
    """
    Maximum of poly on [lo, hi]: scan the derivative's sign on a grid of
    10^4 intervals, bisect each sign change to width 1e-12, and compare the
    bracket midpoints with both endpoints by exact evaluation.
    """
    lo, hi = Fraction(lo), Fraction(hi)
    if not lo < hi:
        raise ParameterError(f"maximize_poly needs lo < hi, got [{lo}, {hi}]")

    slope = poly.derivative().integer_form()
    step = (hi - lo) / GRID_INTERVALS
    candidates: List[Tuple[Fraction, Fraction]] = [(lo, Fraction(0)), (hi, Fraction(0))]

    left = lo
    left_sign = _sign_at(slope, left)
    for k in range(1, GRID_INTERVALS + 1):
        right = lo + step * k
        right_sign = _sign_at(slope, right)
        if left_sign == 0:
            candidates.append((left, Fraction(0)))
        elif right_sign != 0 and right_sign != left_sign:
            a, b = left, right
            while b - a > BRACKET_WIDTH:
                mid = (a + b) / 2
                mid_sign = _sign_at(slope, mid)
                if mid_sign == 0:
                    a = b = mid
                elif mid_sign == left_sign:
                    a = mid
                else:
                    b = mid
            candidates.append(((a + b) / 2, b - a))
        left, left_sign = right, right_sign

    best_point, best_width = max(candidates, key=lambda item: poly(item[0]))
    best_value = poly(best_point)
    return MaxResult(
        argmax=float(best_point),
        value=float(best_value),
        bracket_width=float(best_width),
        exact_argmax=best_point,
        exact_value=best_value,
    )


# p - 2p^2 + p^4 + p^8 - p^9 + 2p^10 - 4p^11 + 2p^12 - 4p^13 + 2p^14
SQUARE_LOWER = {1: 1, 2: -2, 4: 1, 8: 1, 9: -1, 10: 2, 11: -4, 12: 2, 13: -4, 14: 2}

SQUARE_UPPER = {
    1: 1, 2: -2, 4: 1,
    6: Fraction(43, 2), 7: Fraction(-165, 2), 8: Fraction(535, 4), 9: -112, 10: Fraction(81, 2),
    11: Fraction(17, 2), 12: Fraction(-29, 2), 13: Fraction(11, 2), 14: Fraction(-3, 4),
}

# (c, a, b) means c * p^a * (1-p)^b
TRIANGULAR_LOWER_TERMS = [(1, 1, 0), (-3, 2, 0), (2, 3, 0), (1, 6, 1)]

TRIANGULAR_UPPER_TERMS = [
    (1, 1, 0), (-2, 2, 0), (2, 2, 8), (1, 1, 6), (1, 3, 0), (1, 3, 9),
    (3, 3, 10), (1, 4, 10), (2, 4, 11), (1, 5, 11),
]

HEXAGONAL_LOWER_TERMS = [(1, 1, 0), (Fraction(-3, 2), 2, 0), (Fraction(1, 2), 6, 0), (1, 12, 1)]

HEXAGONAL_UPPER_TERMS = [
    (1, 1, 0), (Fraction(-9, 8), 2, 0), (Fraction(9, 8), 2, 4), (1, 1, 3), (Fraction(3, 2), 3, 5),
    (Fraction(1, 8), 6, 0), (Fraction(1, 8), 6, 6), (Fraction(1, 4), 4, 6), (Fraction(3, 2), 4, 6),
]

UPPER_SCALE = Fraction(1, 2)


@dataclass(frozen=True)
class BoundsEntry:
    lattice: str
    lower: RationalPolynomial
    upper: RationalPolynomial
    published_lower: float
    published_upper: float
    p_max_window: Tuple[float, float]
    p_max_upper_window: Tuple[float, float]


def upper_terms(lattice: str):
    """Unexpanded upper-bound terms and their common scale, where the bound is given that way"""
    if lattice == "triangular":
        return TRIANGULAR_UPPER_TERMS, UPPER_SCALE
    if lattice == "hexagonal":
        return HEXAGONAL_UPPER_TERMS, UPPER_SCALE
    raise ParameterError(f"{lattice} upper bound is stored expanded")


def bound_polys(lattice: str) -> BoundsEntry:
    if lattice == "square":
        return BoundsEntry(
            "square",
            RationalPolynomial.from_powers(SQUARE_LOWER),
            RationalPolynomial.from_powers(SQUARE_UPPER),
            0.12953, 0.13268, (0.26, 0.28), (0.28, 0.30),
        )
    if lattice == "triangular":
        return BoundsEntry(
            "triangular",
            RationalPolynomial.from_terms(TRIANGULAR_LOWER_TERMS),
            RationalPolynomial.from_terms(TRIANGULAR_UPPER_TERMS, UPPER_SCALE),
            0.09629, 0.10107, (0.20, 0.22), (0.23, 0.25),
        )
    if lattice == "hexagonal":
        return BoundsEntry(
            "hexagonal",
            RationalPolynomial.from_terms(HEXAGONAL_LOWER_TERMS),
            RationalPolynomial.from_terms(HEXAGONAL_UPPER_TERMS, UPPER_SCALE),
            0.16738, 0.17144, (0.33, 0.35), (0.35, 0.37),
        )
    raise ParameterError(f"Unknown lattice kind: {lattice!r}")


def _truncate(value: Fraction) -> Fraction:
    scale = 10 ** REPORT_DIGITS
    return Fraction(math.floor(value * scale), scale)


def _round_up(value: Fraction) -> Fraction:
    scale = 10 ** REPORT_DIGITS
    return Fraction(math.ceil(value * scale), scale)


def lattice_bounds(lattice: str) -> Dict:
    """Bounds JSON object for one lattice"""
    entry = bound_polys(lattice)
    lower = maximize_poly(entry.lower)
    upper = maximize_poly(entry.upper)
    lower_value, upper_value = _truncate(lower.exact_value), _round_up(upper.exact_value)
    return {
        "lattice": lattice,
        "p_max": lower.argmax,
        "lower": float(lower_value),
        "p_max_upper": upper.argmax,
        "upper": float(upper_value),
        "gap": float(upper_value - lower_value),
    }


def bound_table() -> pd.DataFrame:
    rows = [lattice_bounds(lattice) for lattice in LATTICE_KINDS]
    logger.info(f"Computed bounds for {len(rows)} lattices")
    return pd.DataFrame(rows, columns=TABLE_COLUMNS)


def bound_stop_time(lattice: str, n_vertices: int) -> int:
    """Blind stop time floor(p_max * N) taken from the lower bound's maximizer, at least 1"""
    if n_vertices < 1:
        raise ParameterError(f"bound_stop_time needs N >= 1, got {n_vertices}")
    p_max = maximize_poly(bound_polys(lattice).lower).exact_argmax
    return max(1, math.floor(p_max * n_vertices))


def _derivative_cap(poly: RationalPolynomial, h: Fraction) -> Fraction:
    """sum k|a_k| h^(k-1), an upper bound on |poly'| over [0, h]"""
    return sum((k * abs(c) * h ** (k - 1) for k, c in enumerate(poly.coeffs) if k > 0), Fraction(0))


def finite_bracket(lattice: str, n_vertices: int, max_degree: int) -> Tuple[float, float]:
    """
    Window for the optimal blind value at finite N:
    N f(p_max) - D sqrt(N)/2 - b  <=  E[C~_tau]  <=  N g(p'_max) + D sqrt(N)/2
    with b bounding |f'| next to p_max.
    """
    if n_vertices < 1 or max_degree < 0:
        raise ParameterError(f"finite_bracket needs N >= 1 and D >= 0, got N={n_vertices}, D={max_degree}")
    entry = bound_polys(lattice)
    lower = maximize_poly(entry.lower)
    upper = maximize_poly(entry.upper)
    h = min(Fraction(1), lower.exact_argmax + Fraction(1, n_vertices))
    b = float(_derivative_cap(entry.lower, h))
    half_root = 0.5 * max_degree * math.sqrt(n_vertices)
    return (n_vertices * lower.value - half_root - b,
            n_vertices * upper.value + half_root)
