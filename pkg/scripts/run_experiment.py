#!/usr/bin/env python3
"""
Reproducible experiments for the blind reveal game on lattices and small graphs.

Usage:
  python scripts/run_experiment.py bounds --lattice square
  python scripts/run_experiment.py simulate --lattice square --n 200 --trials 100 --seed 7 --out data/square_curve.csv
  python scripts/run_experiment.py oracle --graph data/c4.json
  python scripts/run_experiment.py reveal --lattice square --n 10 --seed 3 --p 0.27 --out data/square_reveal.csv
  python scripts/run_experiment.py report --lattice hexagonal --rows 100 --cols 100 --trials 100 --seed 1 --assert
"""

import argparse
import json
import logging
import os
import sys
from typing import Any, List, Optional, Tuple

import numpy as np
import pandas as pd

from blind_estimator import (
    blind_policy,
    concentration_report,
    coupling_check,
    curve_summary,
    estimate_curve,
    pattern_means,
    percolation_mean,
    theorem_gap,
    trial_rng,
)
from bound_polynomials import (
    TABLE_COLUMNS,
    bound_polys,
    bound_stop_time,
    bound_table,
    finite_bracket,
    lattice_bounds,
    maximize_poly,
)
from exact_oracle import OracleSizeError, oracle_to_dict
from experiment_config import COMMANDS, DEFAULT_SLACK, ExperimentConfig
from lattice_graphs import (
    LATTICE_KINDS,
    Cells,
    Graph,
    GraphFormatError,
    ParameterError,
    gen_lattice,
    graph_to_dict,
    load_graph,
)
from reveal_engine import coupled_views, occupancy_bits, trajectory, trajectory_frame

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VERDICT_FAILED = 1
EXIT_PARAMETER_ERROR = 2
EXIT_GRAPH_FORMAT_ERROR = 3
EXIT_ORACLE_SIZE_ERROR = 4

CSV_FLOAT_FORMAT = "%.12g"
DEFAULT_GRID_POINTS = 10
CSV_COMMANDS = ("simulate", "reveal")


def default_t_grid(n: int, points: int = DEFAULT_GRID_POINTS) -> List[int]:
    return sorted({int(t) for t in np.linspace(1, n, num=min(points, n)).round()})


class ExperimentRunner:
    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.verdict = True

    def load(self) -> Tuple[Graph, Cells]:
        spec = self.config.lattice_spec()
        if spec is not None:
            return gen_lattice(spec)
        return load_graph(self.config.graph_path)

    def run(self) -> bool:
        handler = getattr(self, "cmd_" + self.config.command.replace("-", "_"))
        logger.info(f"Running {self.config.command}...")
        handler()
        return self.verdict

    # -- output -------------------------------------------------------------

    def _write(self, text: str, path: Optional[str]) -> None:
        if path is None:
            sys.stdout.write(text)
            return
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(path, 'w', newline='\n') as f:
            f.write(text)
        logger.info(f"Wrote {path}")

    def emit_json(self, payload: Any, path: Optional[str] = None) -> None:
        self._write(json.dumps(payload, indent=2) + "\n", path or self.config.out)

    def emit_frame(self, frame: pd.DataFrame, path: Optional[str] = None) -> None:
        text = frame.to_csv(index=False, lineterminator="\n", float_format=CSV_FLOAT_FORMAT)
        self._write(text, path or self.config.out)

    # -- commands -----------------------------------------------------------

    def cmd_lattice(self) -> None:
        graph, cells = self.load()
        self.emit_json(graph_to_dict(graph, cells))

    def cmd_simulate(self) -> None:
        graph, _ = self.load()
        curve = estimate_curve(graph, self.config.trials, self.config.seed)
        policy = blind_policy(curve)
        blind = {"t": policy.stop_time, "value": float(policy.value),
                 "value_per_vertex": float(policy.value) / graph.num_vertices}

        if self.config.fmt == "json":
            self.emit_json({"curve": curve.to_records(), "blind": blind})
            return

        self.emit_frame(curve.to_frame())
        if self.config.out:
            root, _ = os.path.splitext(self.config.out)
            self.emit_json(blind, path=f"{root}_blind.json")
        else:
            self.emit_json(blind)

    def cmd_reveal(self) -> None:
        graph, _ = self.load()
        views = coupled_views(graph, trial_rng(self.config.seed, 0))
        counts = trajectory(graph, views.permutation)
        bits = occupancy_bits(views.occupancy(self.config.p)) if self.config.p is not None else None

        if self.config.fmt == "json":
            payload = {"permutation": views.permutation.tolist(), "counts": counts.tolist()}
            if bits is not None:
                payload["occupancy"] = {"p": self.config.p, "bits": bits}
            self.emit_json(payload)
            return

        self.emit_frame(trajectory_frame(counts))
        if bits is None:
            return
        path = None
        if self.config.out:
            root, _ = os.path.splitext(self.config.out)
            path = f"{root}_occupancy.txt"
        self._write(bits + "\n", path)

    def cmd_percolate(self) -> None:
        graph, _ = self.load()
        mean, std = percolation_mean(graph, self.config.p, self.config.trials, self.config.seed)
        self.emit_json({
            "p": self.config.p,
            "trials": self.config.trials,
            "mean": mean,
            "std": std,
            "mean_per_vertex": mean / graph.num_vertices,
        })

    def cmd_bounds(self) -> None:
        if self.config.lattice:
            table = pd.DataFrame([lattice_bounds(self.config.lattice)], columns=TABLE_COLUMNS)
        else:
            table = bound_table()
        rows = table.to_dict(orient="records")

        for row in rows:
            entry = bound_polys(row["lattice"])
            if row["lower"] < entry.published_lower or row["upper"] > entry.published_upper:
                logger.warning(f"{row['lattice']} bounds do not dominate the published values")
                self.verdict = False

        if self.config.fmt == "csv":
            self.emit_frame(table)
        else:
            self.emit_json(rows[0] if self.config.lattice else rows)

    def cmd_oracle(self) -> None:
        graph, _ = self.load()
        self.emit_json(oracle_to_dict(graph))

    def cmd_coupling_check(self) -> None:
        graph, _ = self.load()
        t_grid = list(self.config.t_grid) if self.config.t_grid else default_t_grid(graph.num_vertices)
        violations = coupling_check(graph, self.config.trials, t_grid, self.config.seed)
        self.verdict = violations == 0
        self.emit_json({"trials": self.config.trials, "t_grid": t_grid, "violations": violations})

    def cmd_concentration(self) -> None:
        graph, _ = self.load()
        report = concentration_report(graph, self.config.p, self.config.trials, self.config.seed)
        self.verdict = report.passes
        self.emit_json(report.to_dict())

    def cmd_gap(self) -> None:
        graph, _ = self.load()
        self.emit_json(theorem_gap(graph.num_vertices, graph.max_degree).to_dict())

    def cmd_report(self) -> None:
        graph, cells = self.load()
        n, seed, trials = graph.num_vertices, self.config.seed, self.config.trials

        curve = estimate_curve(graph, trials, seed)
        summary = curve_summary(curve)
        policy = blind_policy(curve)
        violations = coupling_check(graph, trials, default_t_grid(n), seed)
        p_star = policy.stop_time / n
        concentration = concentration_report(graph, p_star, max(trials, 30), seed)

        report = {
            "graph": {"kind": graph.kind, "params": dict(graph.params), "n_vertices": n,
                      "edge_count": graph.edge_count, "max_degree": graph.max_degree},
            "curve_summary": summary,
            "blind": {"t": policy.stop_time, "value": float(policy.value)},
            "coupling_violations": violations,
            "concentration": concentration.to_dict(),
            "gap_certificate": theorem_gap(n, graph.max_degree).to_dict(),
        }
        passed = violations == 0 and concentration.passes

        if graph.kind in LATTICE_KINDS:
            entry = bound_polys(graph.kind)
            lower = maximize_poly(entry.lower).value
            upper = maximize_poly(entry.upper).value
            slack = self.config.slack
            per_vertex = summary["max_mean_per_vertex"]
            contained = lower - slack < per_vertex < upper + slack
            bracket_low, bracket_high = finite_bracket(graph.kind, n, graph.max_degree)
            stop = bound_stop_time(graph.kind, n)
            stop_per_vertex = float(curve.mean[stop - 1]) / n
            stop_contained = lower - slack < stop_per_vertex < upper + slack
            report["bounds"] = {
                "lower": lower,
                "upper": upper,
                "slack": slack,
                "max_mean_per_vertex": per_vertex,
                "contained": contained,
                "finite_bracket": [bracket_low, bracket_high],
                "bound_stop": {"t": stop, "mean_per_vertex": stop_per_vertex, "contained": stop_contained},
            }
            report["patterns"] = {"p": p_star, **pattern_means(graph, cells, p_star, trials, seed)}
            passed = passed and contained and stop_contained

        report["verdict"] = "pass" if passed else "fail"
        self.verdict = passed
        logger.info(f"Report verdict: {report['verdict']}")
        self.emit_json(report)


def _t_grid(text: str) -> Tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description='Blind reveal game experiments on lattices and small graphs')
    parser.add_argument('command', choices=COMMANDS, help='Experiment to run')
    parser.add_argument('--lattice', choices=LATTICE_KINDS, help='Generate a lattice instead of reading --graph')
    parser.add_argument('--n', type=int, help='Side length of a square or triangular lattice')
    parser.add_argument('--rows', type=int, help='Hexagon rows of a hexagonal lattice')
    parser.add_argument('--cols', type=int, help='Hexagon columns of a hexagonal lattice')
    parser.add_argument('--graph', dest='graph_path', help='Graph JSON file')
    parser.add_argument('--trials', type=int, default=100, help='Independent trials (default: 100)')
    parser.add_argument('--seed', type=int, help='Master seed (required for randomized commands)')
    parser.add_argument('--p', type=float, help='Site occupation probability')
    parser.add_argument('--t-grid', type=_t_grid, help='Comma separated reveal times for coupling-check')
    parser.add_argument('--slack', type=float, default=DEFAULT_SLACK,
                        help=f'Per-vertex finite-size slack for bound containment (default: {DEFAULT_SLACK})')
    parser.add_argument('--out', help='Output file (default: stdout)')
    parser.add_argument('--format', dest='fmt', choices=('csv', 'json'), default=None,
                        help='Output format (default: csv for simulate and reveal, json otherwise)')
    parser.add_argument('--assert', dest='assert_verdict', action='store_true',
                        help='Exit nonzero when the experiment verdict fails')
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    fmt = args.fmt or ("csv" if args.command in CSV_COMMANDS else "json")
    return ExperimentConfig(
        command=args.command,
        lattice=args.lattice,
        n=args.n,
        rows=args.rows,
        cols=args.cols,
        graph_path=args.graph_path,
        trials=args.trials,
        seed=args.seed,
        p=args.p,
        t_grid=args.t_grid,
        slack=args.slack,
        out=args.out,
        fmt=fmt,
        assert_verdict=args.assert_verdict,
    )


def main(argv: Optional[List[str]] = None) -> int:
    """Main execution function"""
    logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(levelname)s - %(message)s')
    args = build_parser().parse_args(argv)

    try:
        config = config_from_args(args)
        config.validate()
        verdict = ExperimentRunner(config).run()
    except GraphFormatError as e:
        logger.error(f"Malformed graph file: {e}")
        return EXIT_GRAPH_FORMAT_ERROR
    except OracleSizeError as e:
        logger.error(f"Graph too large for the exact oracle: {e}")
        return EXIT_ORACLE_SIZE_ERROR
    except ParameterError as e:
        logger.error(f"Invalid parameters: {e}")
        return EXIT_PARAMETER_ERROR

    if config.assert_verdict and not verdict:
        logger.error(f"{config.command} verdict failed")
        return EXIT_VERDICT_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
