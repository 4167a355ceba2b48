r"""
Shooting for Caputo terminal value problems.

.. math::

    D^\alpha_* y(t) = f(t, y(t)), \qquad y(b) = y^*.

Each shot solves the initial value problem from a trial value
:math:`\tilde y_0^{(k)}` and compares :math:`\tilde y_k(b)` with
:math:`y^*`. Proportional secting takes

* ``k = 0``: :math:`\tilde y_0^{(0)} = y^*`;
* ``k = 1``: :math:`\tilde y_0^{(1)} = \tilde y_0^{(0)} + (y^* - \tilde y_0(b)) / \hat c`;
* ``k >= 2``: the secant through the two most recent shots.

Bisection (after a geometric bracketing phase) is provided as the baseline.
"""

from __future__ import annotations

import enum
import json
import math
import time
from dataclasses import dataclass, field

from .errors import DegenerateSecantError, StrategyError, ValidationError
from .ivp import FractionalIVP, Mesh, Rhs, SolverConfig, Trajectory, solve_ivp, _check_alpha
from .proportionality import (
    DEFAULT_PROBES,
    ProportionalityEstimate,
    Strategy,
    estimate,
)

DEFAULT_MAX_SHOTS = 100


class ShootingMethod(str, enum.Enum):
    SECTING = "secting"
    BISECTION = "bisection"


@dataclass(frozen=True)
class FractionalTVP:
    alpha: float
    a: float
    b: float
    rhs: Rhs
    y_star: float

    def __post_init__(self) -> None:
        _check_alpha(self.alpha)
        if not (math.isfinite(self.a) and math.isfinite(self.b) and self.a < self.b):
            raise ValidationError(f"need a < b, got [{self.a}, {self.b}]")
        if not math.isfinite(self.y_star):
            raise ValidationError(f"terminal value must be finite, got {self.y_star!r}")

    def ivp(self, y0: float) -> FractionalIVP:
        return FractionalIVP(self.alpha, self.a, self.b, self.rhs, float(y0))


@dataclass(frozen=True)
class ShootingConfig:
    eps: float
    mesh: Mesh
    solver: SolverConfig = field(default_factory=SolverConfig)
    strategy: Strategy = Strategy.UNIT
    max_shots: int = DEFAULT_MAX_SHOTS
    keep_trajectories: bool = False
    probe_step: float | None = None
    probe_count: int = DEFAULT_PROBES

    def __post_init__(self) -> None:
        if not (self.eps > 0 and math.isfinite(self.eps)):
            raise ValidationError(f"eps must be positive, got {self.eps!r}")
        if isinstance(self.max_shots, bool) or int(self.max_shots) != self.max_shots or self.max_shots < 1:
            raise ValidationError(f"max_shots must be a positive integer, got {self.max_shots!r}")
        object.__setattr__(self, "strategy", Strategy.parse(self.strategy))

    def check_mesh(self, tvp: FractionalTVP) -> None:
        if not (math.isclose(self.mesh.a, tvp.a, abs_tol=1e-14)
                and math.isclose(self.mesh.b, tvp.b, abs_tol=1e-12)):
            raise ValidationError(
                f"mesh [{self.mesh.a}, {self.mesh.b}] does not span [{tvp.a}, {tvp.b}]"
            )


@dataclass
class Shot:
    k: int
    y0: float
    yb: float
    residual: float
    wall_time: float
    note: str = ""

    def as_dict(self) -> dict:
        return {
            "k": self.k,
            "y0": self.y0,
            "yb": self.yb,
            "residual": self.residual,
            "wall_time_s": self.wall_time,
            "note": self.note,
        }


@dataclass
class ShootingReport:
    method: ShootingMethod
    strategy: str
    eps: float
    shots: list[Shot]
    converged: bool
    trajectory: Trajectory | None
    wall_time: float
    estimate: ProportionalityEstimate | None = None
    message: str = ""
    trajectories: list[Trajectory] = field(default_factory=list)

    @property
    def n_shots(self) -> int:
        return len(self.shots)

    @property
    def initial_value(self) -> float:
        return self.shots[-1].y0

    @property
    def final_residual(self) -> float:
        return self.shots[-1].residual

    def as_dict(self) -> dict:
        return {
            "method": self.method.value,
            "strategy": self.strategy,
            "eps": self.eps,
            "converged": self.converged,
            "n_shots": self.n_shots,
            "wall_time_s": self.wall_time,
            "message": self.message,
            "estimate": self.estimate.as_dict() if self.estimate else None,
            "shots": [s.as_dict() for s in self.shots],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.as_dict(), allow_nan=False, **kwargs)


def first_guess(tvp: FractionalTVP) -> float:
    return float(tvp.y_star)


def second_guess(y0_prev: float, yb_prev: float, y_star: float, c_hat: float) -> float:
    if not (math.isfinite(c_hat) and c_hat > 0.0):
        raise StrategyError(f"proportionality factor must be positive and finite, got {c_hat!r}")
    return y0_prev + (y_star - yb_prev) / c_hat


def secant_guess(y0_km1: float, y0_km2: float, yb_km1: float, yb_km2: float,
                 y_star: float) -> float:
    """Secant step through the two most recent shots."""
    denom = yb_km1 - yb_km2
    if denom == 0.0:
        raise DegenerateSecantError("terminal values of the last two shots coincide")
    return y0_km1 + (y_star - yb_km1) * (y0_km1 - y0_km2) / denom


class _Runner:
    """Counts and records shots for one shooting run."""

    def __init__(self, tvp: FractionalTVP, cfg: ShootingConfig):
        self.tvp = tvp
        self.cfg = cfg
        self.shots: list[Shot] = []
        self.trajectories: list[Trajectory] = []
        self.last: Trajectory | None = None

    def shoot(self, y0: float, note: str = "") -> Shot:
        t0 = time.perf_counter()
        traj = solve_ivp(self.tvp.ivp(y0), self.cfg.mesh, self.cfg.solver)
        dt = time.perf_counter() - t0
        yb = traj.terminal
        shot = Shot(len(self.shots), float(y0), yb, self.tvp.y_star - yb, dt, note)
        self.shots.append(shot)
        self.last = traj
        if self.cfg.keep_trajectories:
            self.trajectories.append(traj)
        return shot

    def done(self, shot: Shot) -> bool:
        return abs(shot.residual) <= self.cfg.eps

    @property
    def exhausted(self) -> bool:
        return len(self.shots) >= self.cfg.max_shots

    def report(self, method: ShootingMethod, strategy: str, converged: bool, start: float,
               est: ProportionalityEstimate | None = None, message: str = "") -> ShootingReport:
        if not message and not converged:
            message = f"no convergence within {self.cfg.max_shots} shots"
        return ShootingReport(
            method, strategy, self.cfg.eps, self.shots, converged, self.last,
            time.perf_counter() - start, est, message, self.trajectories,
        )


def shoot_proportional_secting(tvp: FractionalTVP, cfg: ShootingConfig) -> ShootingReport:
    """Proportional secting: ``y*``, then the scaled residual step, then secants."""
    cfg.check_mesh(tvp)
    start = time.perf_counter()
    run = _Runner(tvp, cfg)
    y_star = tvp.y_star
    name = cfg.strategy.value

    prev = run.shoot(first_guess(tvp))
    if run.done(prev):
        return run.report(ShootingMethod.SECTING, name, True, start)

    est = estimate(cfg.strategy, tvp.rhs, tvp.alpha, tvp.a, tvp.b, run.last,
                   cfg.probe_step, cfg.probe_count)
    if run.exhausted:
        return run.report(ShootingMethod.SECTING, name, False, start, est)
    cur = run.shoot(second_guess(prev.y0, prev.yb, y_star, est.c_hat))

    while not run.done(cur):
        if run.exhausted:
            return run.report(ShootingMethod.SECTING, name, False, start, est)
        try:
            nxt = secant_guess(cur.y0, prev.y0, cur.yb, prev.yb, y_star)
            note = ""
        except DegenerateSecantError:
            if prev.note == "perturbed" or cur.note == "perturbed":
                return run.report(ShootingMethod.SECTING, name, False, start, est,
                                  "degenerate secant persisted after perturbation")
            nxt = cur.y0 + max(cfg.eps, 1e-12 * (1.0 + abs(cur.y0)))
            note = "perturbed"
        prev, cur = cur, run.shoot(nxt, note)
    return run.report(ShootingMethod.SECTING, name, True, start, est)


def shoot_bisection(tvp: FractionalTVP, cfg: ShootingConfig) -> ShootingReport:
    """Geometric bracketing from ``y*`` followed by classical bisection."""
    cfg.check_mesh(tvp)
    start = time.perf_counter()
    run = _Runner(tvp, cfg)
    name = "bisection"

    first = run.shoot(first_guess(tvp))
    if run.done(first):
        return run.report(ShootingMethod.BISECTION, name, True, start)

    # The terminal value grows with the initial value, so move in the
    # direction of the residual until it changes sign.
    direction = 1.0 if first.residual > 0 else -1.0
    inner = first
    outer = None
    offset = 1.0
    while outer is None:
        if run.exhausted:
            return run.report(ShootingMethod.BISECTION, name, False, start,
                              message=f"no bracket within {cfg.max_shots} shots")
        s = run.shoot(first.y0 + direction * offset, "bracket")
        if run.done(s):
            return run.report(ShootingMethod.BISECTION, name, True, start)
        if math.copysign(1.0, s.residual) != math.copysign(1.0, inner.residual):
            outer = s
        else:
            inner = s
            offset *= 2.0

    lo, hi = (inner, outer) if inner.y0 < outer.y0 else (outer, inner)
    while True:
        if run.exhausted:
            return run.report(ShootingMethod.BISECTION, name, False, start)
        s = run.shoot(0.5 * (lo.y0 + hi.y0))
        if run.done(s):
            return run.report(ShootingMethod.BISECTION, name, True, start)
        if math.copysign(1.0, s.residual) == math.copysign(1.0, lo.residual):
            lo = s
        else:
            hi = s


def shoot(tvp: FractionalTVP, cfg: ShootingConfig, method: ShootingMethod | str = "secting") -> ShootingReport:
    method = ShootingMethod(method)
    if method is ShootingMethod.BISECTION:
        return shoot_bisection(tvp, cfg)
    return shoot_proportional_secting(tvp, cfg)
