"""
Experiment matrices: shot counts, errors and wall times per configuration.

Each cell of the matrix is one ``(solver, h, eps, strategy)`` combination on
one catalog problem. Cells are independent and can be spread over worker
processes; timing repetitions of a cell always run back to back in the same
process.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import os
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .errors import FracShootError, UnknownProblemError, ValidationError
from .ivp import Mesh, SolverConfig
from .problems import PROBLEM_INTERVALS, catalog
from .proportionality import Strategy
from .shooting import ShootingConfig, ShootingReport, shoot_bisection, shoot_proportional_secting
from .weights import Method, clear_weight_cache

WORKERS_ENV = "FRACSHOOT_WORKERS"
STRATEGIES = ("bisection", "unit", "midpoint", "auto")

DEFAULT_STEPS = {
    "ex1": (0.002, 0.001, 0.0005),
    "ex2": (0.014, 0.007, 0.0035),
    "ex3": (0.04, 0.02, 0.01),
}
DEFAULT_EPS = (1e-6, 1e-8, 1e-10)
DEFAULT_SOLVERS = ("adams", "bdf2")


def parse_strategy(value: str) -> str:
    key = str(value).strip().lower()
    if key not in STRATEGIES:
        raise ValidationError(f"unknown strategy {value!r}; expected one of {list(STRATEGIES)}")
    return key


@dataclass(frozen=True)
class ExperimentMatrix:
    problem: str
    solvers: tuple[str, ...] = DEFAULT_SOLVERS
    steps: tuple[float, ...] | None = None
    eps: tuple[float, ...] = DEFAULT_EPS
    strategies: tuple[str, ...] = STRATEGIES
    repetitions: int = 3
    alpha: float | None = None
    include_setup: bool = False

    def __post_init__(self) -> None:
        key = str(self.problem).strip().lower()
        if key not in PROBLEM_INTERVALS:
            raise UnknownProblemError(
                f"unknown problem {self.problem!r}; expected one of {list(PROBLEM_INTERVALS)}"
            )
        steps = self.steps if self.steps is not None else DEFAULT_STEPS[key]
        object.__setattr__(self, "problem", key)
        object.__setattr__(self, "steps", tuple(float(h) for h in steps))
        object.__setattr__(self, "solvers", tuple(Method.parse(s).value for s in self.solvers))
        object.__setattr__(self, "strategies", tuple(parse_strategy(s) for s in self.strategies))
        object.__setattr__(self, "eps", tuple(float(e) for e in self.eps))
        for name in ("solvers", "steps", "eps", "strategies"):
            if not getattr(self, name):
                raise ValidationError(f"experiment matrix needs a nonempty {name} list")
        for e in self.eps:
            if not e > 0:
                raise ValidationError(f"eps must be positive, got {e!r}")
        if isinstance(self.repetitions, bool) or int(self.repetitions) != self.repetitions \
                or self.repetitions < 1:
            raise ValidationError(f"repetitions must be a positive integer, got {self.repetitions!r}")
        a, b = PROBLEM_INTERVALS[key]
        for h in self.steps:
            Mesh.from_step(a, b, h)

    def cells(self) -> list[tuple[str, float, float, str]]:
        return [
            (s, h, e, st)
            for e in self.eps
            for s in self.solvers
            for h in self.steps
            for st in self.strategies
        ]


@dataclass
class SummaryRow:
    problem: str
    method: str
    solver: str
    h: float
    eps: float
    strategy: str
    shots: int
    converged: bool
    max_error: float
    wall_time_s: float
    c_low: float = float("nan")
    c_high: float = float("nan")
    c_hat: float = float("nan")
    message: str = ""

    FIELDS = (
        "problem", "method", "solver", "h", "eps", "strategy", "shots", "converged",
        "max_error", "wall_time_s", "c_low", "c_high", "c_hat", "message",
    )

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.FIELDS}

    def to_csv_fields(self) -> list[str]:
        out = []
        for k in self.FIELDS:
            v = getattr(self, k)
            if isinstance(v, bool):
                out.append("true" if v else "false")
            elif isinstance(v, float):
                out.append(f"{v:.17g}")
            else:
                out.append(str(v))
        return out

    @classmethod
    def from_csv_fields(cls, row: dict) -> "SummaryRow":
        kw = {}
        for f in dataclasses.fields(cls):
            raw = row[f.name]
            if f.name in ("shots",):
                kw[f.name] = int(raw)
            elif f.name == "converged":
                kw[f.name] = raw.strip().lower() == "true"
            elif f.name in ("h", "eps", "max_error", "wall_time_s", "c_low", "c_high", "c_hat"):
                kw[f.name] = float(raw)
            else:
                kw[f.name] = raw
        return cls(**kw)


def rows_to_csv(rows: list[SummaryRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SummaryRow.FIELDS)
    for r in rows:
        w.writerow(r.to_csv_fields())
    return buf.getvalue()


def rows_from_csv(text: str) -> list[SummaryRow]:
    return [SummaryRow.from_csv_fields(r) for r in csv.DictReader(io.StringIO(text))]


def rows_to_json(rows: list[SummaryRow]) -> str:
    def clean(v):
        return None if isinstance(v, float) and not math.isfinite(v) else v

    return json.dumps([{k: clean(v) for k, v in r.as_dict().items()} for r in rows], indent=2)


def summarize(problem: str, solver: str, h: float, report: ShootingReport,
              max_err: float, wall: float) -> SummaryRow:
    est = report.estimate
    nan = float("nan")
    return SummaryRow(
        problem=problem,
        method=report.method.value,
        solver=solver,
        h=h,
        eps=report.eps,
        strategy=report.strategy,
        shots=report.n_shots,
        converged=report.converged,
        max_error=max_err,
        wall_time_s=wall,
        c_low=est.c_low if est else nan,
        c_high=est.c_high if est else nan,
        c_hat=est.c_hat if est else nan,
        message=report.message,
    )


def run_shooting(problem, solver: str, h: float, eps: float, strategy: str,
                 keep_trajectories: bool = False) -> ShootingReport:
    strategy = parse_strategy(strategy)
    cfg = ShootingConfig(
        eps=eps,
        mesh=problem.mesh(h),
        solver=SolverConfig(Method.parse(solver)),
        strategy=Strategy.UNIT if strategy == "bisection" else Strategy(strategy),
        keep_trajectories=keep_trajectories,
    )
    if strategy == "bisection":
        return shoot_bisection(problem.tvp, cfg)
    return shoot_proportional_secting(problem.tvp, cfg)


def run_cell(problem_id: str, alpha: float | None, solver: str, h: float, eps: float,
             strategy: str, repetitions: int = 3, include_setup: bool = False) -> SummaryRow:
    """One matrix cell; failures are reported in the row, never raised."""
    problem = catalog(problem_id, alpha)
    try:
        # Warm-up run: builds cached weight tables, gives shots and error.
        report = run_shooting(problem, solver, h, eps, strategy)
        times = []
        for _ in range(repetitions):
            if include_setup:
                clear_weight_cache()
            t0 = time.perf_counter()
            run_shooting(problem, solver, h, eps, strategy)
            times.append(time.perf_counter() - t0)
        err = problem.max_error(report.trajectory) if report.trajectory is not None else float("nan")
        return summarize(problem.id, solver, h, report, err, statistics.median(times))
    except FracShootError as exc:
        nan = float("nan")
        return SummaryRow(problem.id, "bisection" if strategy == "bisection" else "secting",
                          solver, h, eps, strategy, 0, False, nan, nan, message=str(exc))


def _run_cell_args(args) -> SummaryRow:
    return run_cell(*args)


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValidationError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    if n < 1:
        raise ValidationError(f"{WORKERS_ENV} must be positive, got {n}")
    return n


def run_matrix(m: ExperimentMatrix, workers: int | None = None) -> list[SummaryRow]:
    """One row per cell, in ``eps, solver, h, strategy`` order."""
    workers = worker_count() if workers is None else workers
    args = [
        (m.problem, m.alpha, s, h, e, st, m.repetitions, m.include_setup)
        for (s, h, e, st) in m.cells()
    ]
    if m.problem == "ex3":
        catalog("ex3", m.alpha).reference_trajectory()  # build the cache once, up front
    if workers <= 1:
        return [_run_cell_args(a) for a in args]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_cell_args, args))


def format_table(rows: list[SummaryRow]) -> str:
    """Compact view: one line per (eps, solver, h), shot counts per strategy."""
    groups: dict[tuple, dict] = {}
    for r in rows:
        g = groups.setdefault((r.eps, r.solver, r.h), {"err": [], "shots": {}})
        g["err"].append(r.max_error)
        g["shots"][r.strategy] = r.shots if r.converged else f"{r.shots}!"
    strategies = [s for s in STRATEGIES if any(s in g["shots"] for g in groups.values())]
    head = ["eps", "solver", "h", "max.err"] + strategies
    lines = ["  ".join(f"{x:>10}" for x in head)]
    for (eps, solver, h), g in groups.items():
        err = max(g["err"]) if g["err"] else float("nan")
        cells = [f"{eps:.0e}", solver, f"{h:g}", f"{err:.1e}"]
        cells += [str(g["shots"].get(s, "")) for s in strategies]
        lines.append("  ".join(f"{x:>10}" for x in cells))
    return "\n".join(lines) + "\n"


@dataclass
class FigureBundle:
    directory: Path
    manifest: Path
    files: list[Path] = field(default_factory=list)
    report: ShootingReport | None = None


def emit_figure_bundle(problem_id: str, strategy: str, solver: str, h: float, eps: float,
                       out_dir: str | os.PathLike, alpha: float | None = None) -> FigureBundle:
    """Write one trajectory CSV per shot plus ``manifest.json``."""
    problem = catalog(problem_id, alpha)
    report = run_shooting(problem, solver, h, eps, strategy, keep_trajectories=True)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = []
    entries = []
    for shot, traj in zip(report.shots, report.trajectories):
        path = out / f"shot_{shot.k:03d}.csv"
        traj.to_csv(path)
        files.append(path)
        entries.append({**shot.as_dict(), "file": path.name})
    manifest = {
        "problem": problem.id,
        "alpha": problem.alpha,
        "y_star": problem.tvp.y_star,
        "solver": Method.parse(solver).value,
        "h": h,
        "eps": eps,
        "strategy": parse_strategy(strategy),
        "converged": report.converged,
        "estimate": report.estimate.as_dict() if report.estimate else None,
        "shots": entries,
    }
    mpath = out / "manifest.json"
    mpath.write_text(json.dumps(manifest, indent=2))
    return FigureBundle(out, mpath, files, report)
