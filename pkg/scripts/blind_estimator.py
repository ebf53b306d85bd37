#!/usr/bin/env python3
"""
Monte Carlo estimation for the blind reveal game.

Estimates the blind curve t -> E[C~_t], derives the blind stopping time,
plays blind and full-information stopping rules, and checks the coupling,
concentration and degree-cap statements empirically at finite N.

Every trial draws from numpy.random.default_rng([master_seed, trial_index]),
and reductions add exact integer sums, so results do not depend on how trials
are split across worker threads.
"""

import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from experiment_config import THREADS_ENV
from lattice_graphs import Cells, Graph, ParameterError, count_patterns
from reveal_engine import (
    arrival_order,
    count_components,
    percolation_sample,
    sample_permutation,
    trajectory,
)

logger = logging.getLogger(__name__)

Z95 = 1.96


def trial_rng(master_seed: int, trial_index: int) -> np.random.Generator:
    return np.random.default_rng([master_seed, trial_index])


def worker_count() -> int:
    """Worker threads, capped by LATTICESTOP_THREADS (default 1)"""
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return 1
    try:
        workers = int(raw)
    except ValueError:
        logger.warning(f"Ignoring invalid {THREADS_ENV}={raw!r}, using 1 thread")
        return 1
    if workers < 1:
        logger.warning(f"Ignoring {THREADS_ENV}={workers}, using 1 thread")
        return 1
    return workers


def _chunks(trials: int, workers: int):
    step = math.ceil(trials / workers)
    return [(start, min(start + step, trials)) for start in range(0, trials, step)]


@dataclass(frozen=True)
class CurveEstimate:
    mean: np.ndarray
    sample_std: np.ndarray
    trials: int

    @property
    def ci95_halfwidth(self) -> np.ndarray:
        return Z95 * self.sample_std / math.sqrt(self.trials)

    @property
    def values(self) -> np.ndarray:
        return self.mean

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "t": np.arange(1, len(self.mean) + 1),
            "mean": self.mean,
            "std": self.sample_std,
            "ci95": self.ci95_halfwidth,
            "trials": self.trials,
        })

    def to_records(self) -> List[Dict]:
        """JSON-safe rows, one per reveal time"""
        half = self.ci95_halfwidth
        return [
            {"t": t + 1, "mean": float(self.mean[t]), "std": float(self.sample_std[t]),
             "ci95": float(half[t]), "trials": int(self.trials)}
            for t in range(len(self.mean))
        ]


@dataclass(frozen=True)
class BlindPolicy:
    stop_time: int
    value: float


@dataclass(frozen=True)
class GapCertificate:
    n_vertices: int
    max_degree: int
    epsilon: float
    degree_cap: float
    additive_bound: float
    vacuous: bool
    n_required_note: str

    def to_dict(self) -> Dict:
        return {
            "n_vertices": self.n_vertices,
            "max_degree": self.max_degree,
            "epsilon": self.epsilon,
            "degree_cap": self.degree_cap,
            "additive_bound": self.additive_bound,
            "vacuous": self.vacuous,
            "n_required_note": self.n_required_note,
        }


@dataclass(frozen=True)
class ConcentrationReport:
    p: float
    trials: int
    mean: float
    empirical_std: float
    lipschitz_budget: float

    @property
    def passes(self) -> bool:
        return self.empirical_std <= self.lipschitz_budget / 2

    def to_dict(self) -> Dict:
        return {
            "p": self.p,
            "trials": self.trials,
            "mean": self.mean,
            "empirical_std": self.empirical_std,
            "lipschitz_budget": self.lipschitz_budget,
            "std_limit": self.lipschitz_budget / 2,
            "passes": self.passes,
        }


def _trajectory_sums(graph: Graph, master_seed: int, start: int, stop: int):
    n = graph.num_vertices
    total = np.zeros(n, dtype=np.int64)
    total_sq = np.zeros(n, dtype=np.int64)
    for trial_index in range(start, stop):
        rng = trial_rng(master_seed, trial_index)
        counts = trajectory(graph, sample_permutation(n, rng))
        total += counts
        total_sq += counts * counts
    return total, total_sq


def estimate_curve(graph: Graph, trials: int, master_seed: int) -> CurveEstimate:
    """Average `trials` independent trajectories"""
    if trials < 1:
        raise ParameterError(f"trials must be >= 1, got {trials}")

    workers = worker_count()
    started = time.perf_counter()
    logger.info(f"Estimating blind curve: N={graph.num_vertices}, trials={trials}, "
                f"seed={master_seed}, workers={workers}")

    with ThreadPoolExecutor(max_workers=workers) as executor:
        futures = [executor.submit(_trajectory_sums, graph, master_seed, start, stop)
                   for start, stop in _chunks(trials, workers)]
        total = np.zeros(graph.num_vertices, dtype=np.int64)
        total_sq = np.zeros(graph.num_vertices, dtype=np.int64)
        for future in futures:
            chunk_total, chunk_sq = future.result()
            total += chunk_total
            total_sq += chunk_sq

    mean = total / trials
    if trials > 1:
        # exact integer numerator: trials * sum(x^2) - sum(x)^2
        spread = trials * total_sq.astype(object) - total.astype(object) ** 2
        variance = (spread / (trials * (trials - 1))).astype(np.float64)
        sample_std = np.sqrt(variance)
    else:
        sample_std = np.zeros(graph.num_vertices)

    logger.info(f"Blind curve done in {time.perf_counter() - started:.2f}s, "
                f"max mean {mean.max():.4f} at t={int(np.argmax(mean)) + 1}")
    return CurveEstimate(mean=mean, sample_std=sample_std, trials=trials)


def _curve_values(curve) -> Sequence:
    values = curve.values if hasattr(curve, "values") else curve
    if len(values) == 0:
        raise ParameterError("Cannot derive a blind policy from an empty curve")
    return values


def blind_policy(curve) -> BlindPolicy:
    """Stop at the smallest t attaining the maximum of the curve"""
    values = list(_curve_values(curve))
    best = max(values)
    stop_time = values.index(best) + 1
    return BlindPolicy(stop_time=stop_time, value=best)


def play_blind(graph: Graph, policy: BlindPolicy, rng: np.random.Generator,
               perm: Optional[Sequence[int]] = None) -> int:
    """Reveal one random order and take C~ at the fixed stop time"""
    if not 1 <= policy.stop_time <= graph.num_vertices:
        raise ParameterError(f"Stop time {policy.stop_time} outside [1, {graph.num_vertices}]")
    if perm is None:
        perm = sample_permutation(graph.num_vertices, rng)
    counts = trajectory(graph, perm, limit=policy.stop_time)
    return int(counts[-1])


def play_full_heuristic(graph: Graph, curve, rng: np.random.Generator,
                        perm: Optional[Sequence[int]] = None) -> Tuple[int, int]:
    """
    Threshold rule with full information: stop as soon as the revealed
    component count reaches the curve maximum, and stop at the curve's argmax
    otherwise. The decision at time t looks only at counts[:t].
    """
    policy = blind_policy(curve)
    threshold = policy.value
    if perm is None:
        perm = sample_permutation(graph.num_vertices, rng)
    counts = trajectory(graph, perm, limit=policy.stop_time)
    for t in range(1, policy.stop_time + 1):
        if counts[t - 1] >= threshold:
            return int(counts[t - 1]), t
    return int(counts[-1]), policy.stop_time


def _percolation_counts(graph: Graph, p: float, trials: int, seed: int) -> np.ndarray:
    return np.array([percolation_sample(graph, p, trial_rng(seed, i))[1] for i in range(trials)],
                    dtype=np.int64)


def percolation_mean(graph: Graph, p: float, trials: int, seed: int) -> Tuple[float, float]:
    """Sample mean and standard deviation of C_p"""
    if trials < 2:
        raise ParameterError(f"percolation_mean needs trials >= 2, got {trials}")
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"Probability p must lie in [0, 1], got {p}")
    values = _percolation_counts(graph, p, trials, seed)
    mean, std = float(values.mean()), float(values.std(ddof=1))
    logger.info(f"C_p at p={p}: mean {mean:.4f}, std {std:.4f} over {trials} trials")
    return mean, std


def coupling_violations(graph: Graph, omega: np.ndarray, t_grid: Sequence[int]) -> int:
    """
    Count failures of C~_t <= C_{t/N} + D|V_{t/N} - t| and the reverse
    inequality for one arrival-time sample.
    """
    n = graph.num_vertices
    counts = trajectory(graph, arrival_order(omega))
    # one reveal moves the count by at most max(D, 1)
    degree = max(graph.max_degree, 1)
    violations = 0
    for t in t_grid:
        occ = omega <= t / n
        open_count = int(np.count_nonzero(occ))
        c_p = count_components(graph, occ)
        c_tilde = int(counts[t - 1])
        allowance = degree * abs(open_count - t)
        if c_tilde > c_p + allowance:
            violations += 1
        if c_p > c_tilde + allowance:
            violations += 1
    return violations


def coupling_check(graph: Graph, trials: int, t_grid: Sequence[int], seed: int) -> int:
    """Number of violated coupling inequalities over `trials` coupled samples"""
    n = graph.num_vertices
    t_grid = [int(t) for t in t_grid]
    bad = [t for t in t_grid if not 1 <= t <= n]
    if bad:
        raise ParameterError(f"t grid values {bad} outside [1, {n}]")

    violations = 0
    for trial_index in range(trials):
        omega = trial_rng(seed, trial_index).random(n)
        violations += coupling_violations(graph, omega, t_grid)

    if violations:
        logger.warning(f"Coupling check found {violations} violations over {trials} samples")
    else:
        logger.info(f"Coupling check clean over {trials} samples and {len(t_grid)} grid points")
    return violations


def lipschitz_budget(graph: Graph) -> float:
    """sqrt(sum_j b_j^2) with b_j = max(deg(v_j), 1)"""
    b = np.maximum(graph.degrees, 1)
    return math.sqrt(int(np.sum(b * b)))


def concentration_report(graph: Graph, p: float, trials: int, seed: int) -> ConcentrationReport:
    if trials < 30:
        raise ParameterError(f"concentration_report needs trials >= 30, got {trials}")
    mean, std = percolation_mean(graph, p, trials, seed)
    report = ConcentrationReport(p=p, trials=trials, mean=mean, empirical_std=std,
                                 lipschitz_budget=lipschitz_budget(graph))
    logger.info(f"Concentration at p={p}: std {std:.3f} vs limit {report.lipschitz_budget / 2:.3f}")
    return report


def degree_cap(epsilon: float, n: int) -> float:
    """D_{eps,N} = (eps^2 / 32) * sqrt(N)"""
    return (epsilon ** 2 / 32) * math.sqrt(n)


def theorem_gap(n: int, max_degree: int) -> GapCertificate:
    """Smallest epsilon whose degree cap admits max_degree, and the additive gap eps*N"""
    if n < 1 or max_degree < 0:
        raise ParameterError(f"theorem_gap needs n >= 1 and max_degree >= 0, got n={n}, D={max_degree}")
    epsilon = math.sqrt(32 * max_degree / math.sqrt(n))
    vacuous = epsilon >= 1
    if vacuous:
        logger.warning(f"Degree {max_degree} too large for N={n}: epsilon={epsilon:.4f} >= 1, theorem vacuous")
    return GapCertificate(
        n_vertices=n,
        max_degree=max_degree,
        epsilon=epsilon,
        degree_cap=degree_cap(epsilon, n),
        additive_bound=epsilon * n,
        vacuous=vacuous,
        n_required_note="holds only for N >= N_eps; N_eps is not quantified",
    )


def pattern_means(graph: Graph, cells: Cells, p: float, trials: int, seed: int) -> Dict[str, float]:
    """Per-vertex means of isolated vertices/edges, empty cells and C_p at probability p"""
    if trials < 1:
        raise ParameterError(f"trials must be >= 1, got {trials}")
    n = graph.num_vertices
    sums = {"isolated_vertices": 0, "isolated_edges": 0, "empty_cells": 0, "components": 0}
    for trial_index in range(trials):
        occ, components = percolation_sample(graph, p, trial_rng(seed, trial_index))
        counts = count_patterns(graph, cells, occ)
        sums["isolated_vertices"] += counts.isolated_vertices
        sums["isolated_edges"] += counts.isolated_edges
        sums["empty_cells"] += counts.empty_cells
        sums["components"] += components
    return {key: total / (trials * n) for key, total in sums.items()}


def curve_summary(curve: CurveEstimate) -> Dict:
    policy = blind_policy(curve)
    n = len(curve.mean)
    return {
        "n_vertices": n,
        "trials": curve.trials,
        "argmax_t": policy.stop_time,
        "max_mean": float(policy.value),
        "max_mean_per_vertex": float(policy.value) / n,
        "ci95_at_argmax": float(curve.ci95_halfwidth[policy.stop_time - 1]),
    }
