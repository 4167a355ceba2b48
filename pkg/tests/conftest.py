from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import pytest

from fracshoot.bench import DEFAULT_STEPS, run_shooting
from fracshoot.problems import catalog

DATA = Path(__file__).parent / "data"

# One line per acceptance criterion, printed in the terminal summary.
ACCEPTANCE_LINES: dict[str, str] = {}


def record_acceptance(key: str, passed: bool, detail: str) -> None:
    ACCEPTANCE_LINES[key] = f"{key:<38} {'PASS' if passed else 'FAIL'}  {detail}"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES, key=lambda k: int(k.split()[1].rstrip(":"))):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])


@pytest.fixture(scope="session")
def mlf_oracle():
    return json.loads((DATA / "mlf_oracle.json").read_text())


@pytest.fixture(scope="session")
def weight_oracle():
    return json.loads((DATA / "weight_oracle.json").read_text())


@dataclass
class Cell:
    solver: str
    h: float
    eps: float
    strategy: str
    shots: int
    converged: bool
    max_error: float
    trajectory: object
    c_low: float | None
    c_high: float | None


class TableRuns:
    """Every (eps, solver, h, strategy) cell of one problem, computed lazily."""

    SOLVERS = ("adams", "bdf2")
    STRATEGIES = ("bisection", "unit", "midpoint", "auto")

    def __init__(self, pid: str):
        self.pid = pid
        self.problem = catalog(pid)
        self.steps = DEFAULT_STEPS[pid]
        self._cells: dict[tuple, Cell] = {}

    def cell(self, solver: str, h: float, eps: float, strategy: str) -> Cell:
        key = (solver, h, eps, strategy)
        if key not in self._cells:
            rep = run_shooting(self.problem, solver, h, eps, strategy)
            est = rep.estimate
            self._cells[key] = Cell(
                solver, h, eps, strategy, rep.n_shots, rep.converged,
                self.problem.max_error(rep.trajectory), rep.trajectory,
                est.c_low if est else None, est.c_high if est else None,
            )
        return self._cells[key]

    def table(self, eps: float) -> list[Cell]:
        return [
            self.cell(s, h, eps, st)
            for s in self.SOLVERS
            for h in self.steps
            for st in self.STRATEGIES
        ]

    def worst_error(self, solver: str, h: float, eps: float) -> float:
        return max(self.cell(solver, h, eps, st).max_error for st in self.STRATEGIES)


_RUNS: dict[str, TableRuns] = {}


@pytest.fixture(scope="session")
def table_runs():
    def get(pid: str) -> TableRuns:
        if pid not in _RUNS:
            _RUNS[pid] = TableRuns(pid)
        return _RUNS[pid]

    return get
