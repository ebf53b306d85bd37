#!/usr/bin/env python3
"""
Experiment configuration for run_experiment.py.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

from lattice_graphs import LATTICE_KINDS, LatticeSpec, ParameterError

COMMANDS = (
    "lattice", "simulate", "percolate", "bounds", "oracle",
    "coupling-check", "concentration", "gap", "report", "reveal",
)

# absolute slack on per-vertex quantities when comparing finite lattices with the limit bounds
DEFAULT_SLACK = 0.005
MAX_SLACK = 0.1

THREADS_ENV = "LATTICESTOP_THREADS"

# commands that draw random numbers and therefore need an explicit --seed
SEEDED_COMMANDS = ("simulate", "percolate", "coupling-check", "concentration", "report", "reveal")


@dataclass(frozen=True)
class ExperimentConfig:
    command: str
    lattice: Optional[str] = None
    n: Optional[int] = None
    rows: Optional[int] = None
    cols: Optional[int] = None
    graph_path: Optional[str] = None
    trials: int = 100
    seed: Optional[int] = None
    p: Optional[float] = None
    t_grid: Optional[Tuple[int, ...]] = None
    slack: float = DEFAULT_SLACK
    out: Optional[str] = None
    fmt: str = "json"
    assert_verdict: bool = False

    def lattice_spec(self) -> Optional[LatticeSpec]:
        if self.lattice is None:
            return None
        return LatticeSpec(self.lattice, n=self.n, rows=self.rows, cols=self.cols)

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ParameterError(f"Unknown command: {self.command!r}")
        if self.lattice is not None and self.lattice not in LATTICE_KINDS:
            raise ParameterError(f"Unknown lattice kind: {self.lattice!r}")
        if self.command not in ("bounds", "lattice") and self.lattice is None and self.graph_path is None:
            raise ParameterError(f"{self.command} needs --lattice or --graph")
        if self.lattice is not None and self.graph_path is not None:
            raise ParameterError("--lattice and --graph are mutually exclusive")
        if self.command == "lattice" and self.lattice is None:
            raise ParameterError("lattice needs --lattice")
        if self.trials < 1:
            raise ParameterError(f"--trials must be >= 1, got {self.trials}")
        if not 0.0 <= self.slack <= MAX_SLACK:
            raise ParameterError(f"--slack must lie in [0, {MAX_SLACK}], got {self.slack}")
        if self.command in SEEDED_COMMANDS and self.seed is None:
            raise ParameterError(f"{self.command} needs an explicit --seed")
        if self.command in ("percolate", "concentration") and self.p is None:
            raise ParameterError(f"{self.command} needs --p")
        if self.p is not None and not 0.0 <= self.p <= 1.0:
            raise ParameterError(f"--p must lie in [0, 1], got {self.p}")
        if self.fmt not in ("csv", "json"):
            raise ParameterError(f"--format must be csv or json, got {self.fmt!r}")
        spec = self.lattice_spec()
        if spec is not None and self.command != "bounds":
            spec.validate()
