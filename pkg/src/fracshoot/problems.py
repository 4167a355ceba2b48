"""
Built-in test problems and error metrics.

``ex1``
    Polynomial-type solution ``t^8 - 3 t^(4 + a/2) + 9/4 t^a`` with a
    non-dissipative ``-|y|^(3/2)`` term, on ``[0, 1]``.
``ex2``
    Linear relaxation ``D^a y = -3/2 y`` on ``[0, 7]`` with a Mittag-Leffler
    solution.
``ex3``
    ``D^a y = sin(t y) / (t + 1)`` on ``[0, 20]``; no closed form, errors are
    taken against a fine BDF2 reference started from ``y(0) = 1``.
"""

from __future__ import annotations

import functools
import hashlib
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import MetricError, UnknownProblemError
from .ivp import FractionalIVP, Mesh, SolverConfig, Trajectory, solve_ivp
from .mlf import mittag_leffler
from .shooting import FractionalTVP
from .weights import Method

PROBLEM_IDS = ("ex1", "ex2", "ex3")
PROBLEM_INTERVALS = {"ex1": (0.0, 1.0), "ex2": (0.0, 7.0), "ex3": (0.0, 20.0)}

EX3_TERMINAL = 0.8360565
EX3_REFERENCE_STEPS = 2_000_000
EX3_REFERENCE_STRIDE = 10
CACHE_ENV = "FRACSHOOT_CACHE"


class Ex1Rhs:
    """Right-hand side whose exact solution is known in closed form."""

    def __init__(self, alpha: float):
        a = alpha
        g = math.gamma
        self.alpha = a
        self.k8 = 40320.0 / g(9.0 - a)
        self.k4 = 3.0 * g(5.0 + a / 2) / g(5.0 - a / 2)
        self.k0 = 2.25 * g(1.0 + a)
        self.p8 = 8.0 - a
        self.p4 = 4.0 - a / 2
        self.ph = a / 2

    def __call__(self, t, y):
        # plain operators so scalars and arrays both work
        return (self.k8 * t**self.p8 - self.k4 * t**self.p4 + self.k0
                + (1.5 * t**self.ph - t**4) ** 3 - abs(y) ** 1.5)


class Ex2Rhs:
    def __init__(self, lam: float = -1.5):
        self.lam = lam

    def __call__(self, t, y):
        return self.lam * y


class Ex3Rhs:
    def __call__(self, t, y):
        if isinstance(y, float) and isinstance(t, float):
            return math.sin(t * y) / (t + 1.0)
        return np.sin(t * y) / (t + 1.0)


@dataclass(frozen=True)
class ReferenceRecipe:
    """Fine solve used in place of a closed-form solution."""

    y0: float
    method: Method
    n_steps: int
    stride: int

    def cache_name(self, problem_id: str, alpha: float) -> str:
        key = f"{problem_id}|{alpha!r}|{self.y0!r}|{self.method.value}|{self.n_steps}|{self.stride}"
        digest = hashlib.sha256(key.encode()).hexdigest()[:12]
        return f"{problem_id}-a{alpha:g}-{self.method.value}-N{self.n_steps}-{digest}.csv"


@dataclass(frozen=True)
class CatalogProblem:
    id: str
    tvp: FractionalTVP
    exact: Callable[[np.ndarray], np.ndarray] | None = None
    reference: ReferenceRecipe | None = None

    def __post_init__(self) -> None:
        if (self.exact is None) == (self.reference is None):
            raise ValueError("a catalog problem needs exactly one of exact/reference")

    @property
    def alpha(self) -> float:
        return self.tvp.alpha

    def mesh(self, h: float) -> Mesh:
        return Mesh.from_step(self.tvp.a, self.tvp.b, h)

    def reference_trajectory(self, cache_dir: str | os.PathLike | None = None) -> Trajectory:
        if self.reference is None:
            raise MetricError(f"{self.id} has a closed-form solution, not a reference")
        return reference_trajectory(self.id, self.tvp, self.reference, cache_dir)

    def truth(self):
        """Callable exact solution or the reference trajectory."""
        if self.exact is not None:
            return self.exact
        return self.reference_trajectory()

    def max_error(self, traj: Trajectory) -> float:
        return max_error(traj, self.truth())


def _ex1_exact(alpha: float):
    def y(t):
        t = np.asarray(t, dtype=float)
        return t**8 - 3.0 * t ** (4.0 + alpha / 2) + 2.25 * t**alpha

    return y


def _ex2_exact(alpha: float):
    def y(t):
        t = np.asarray(t, dtype=float)
        return _ex2_values(alpha, tuple(np.atleast_1d(t).tolist())).reshape(t.shape)

    return y


@functools.lru_cache(maxsize=16)
def _ex2_values(alpha: float, nodes: tuple) -> np.ndarray:
    out = np.array([2.8 * mittag_leffler(alpha, -1.5 * s**alpha) for s in nodes])
    out.setflags(write=False)
    return out


def catalog(problem_id: str, alpha: float | None = None) -> CatalogProblem:
    """Look up a built-in problem, optionally with a different order."""
    key = str(problem_id).strip().lower()
    if key == "ex1":
        a = 0.3 if alpha is None else float(alpha)
        tvp = FractionalTVP(a, 0.0, 1.0, Ex1Rhs(a), 0.25)
        return CatalogProblem("ex1", tvp, exact=_ex1_exact(a))
    if key == "ex2":
        a = 0.3 if alpha is None else float(alpha)
        y_star = 2.8 * mittag_leffler(a, -1.5 * 7.0**a)
        tvp = FractionalTVP(a, 0.0, 7.0, Ex2Rhs(), y_star)
        return CatalogProblem("ex2", tvp, exact=_ex2_exact(a))
    if key == "ex3":
        a = 0.7 if alpha is None else float(alpha)
        recipe = ReferenceRecipe(1.0, Method.FBDF2, EX3_REFERENCE_STEPS, EX3_REFERENCE_STRIDE)
        if alpha is None:
            y_star = EX3_TERMINAL
        else:
            # Other orders: the terminal value is whatever the reference reaches.
            probe = FractionalTVP(a, 0.0, 20.0, Ex3Rhs(), 0.0)
            y_star = reference_trajectory("ex3", probe, recipe).terminal
        tvp = FractionalTVP(a, 0.0, 20.0, Ex3Rhs(), y_star)
        return CatalogProblem("ex3", tvp, reference=recipe)
    raise UnknownProblemError(f"unknown problem {problem_id!r}; expected one of {list(PROBLEM_IDS)}")


def cache_dir() -> Path:
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    base = os.environ.get("XDG_CACHE_HOME") or os.path.join(os.path.expanduser("~"), ".cache")
    return Path(base) / "fracshoot"


_memory: dict[tuple[str, str], Trajectory] = {}


def reference_trajectory(problem_id: str, tvp: FractionalTVP, recipe: ReferenceRecipe,
                         directory: str | os.PathLike | None = None) -> Trajectory:
    """Load the reference from disk, generating and storing it on first use."""
    directory = Path(directory) if directory is not None else cache_dir()
    name = recipe.cache_name(problem_id, tvp.alpha)
    key = (str(directory), name)
    if key in _memory:
        return _memory[key]
    path = directory / name
    if path.exists():
        traj = Trajectory.from_csv(path)
    else:
        ivp = FractionalIVP(tvp.alpha, tvp.a, tvp.b, tvp.rhs, recipe.y0)
        full = solve_ivp(ivp, Mesh(tvp.a, tvp.b, recipe.n_steps), SolverConfig(recipe.method))
        coarse = Mesh(tvp.a, tvp.b, recipe.n_steps // recipe.stride)
        traj = Trajectory(coarse, full.values[:: recipe.stride].copy())
        _atomic_write(path, traj.to_csv())
    _memory[key] = traj
    return traj


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def max_error(traj: Trajectory, truth) -> float:
    """``max_j |y_j - y(t_j)|`` against a callable or a commensurate reference."""
    if isinstance(truth, Trajectory):
        ref = truth
        m, r = traj.mesh, ref.mesh
        same_interval = math.isclose(m.a, r.a, abs_tol=1e-12) and math.isclose(m.b, r.b, abs_tol=1e-12)
        if not same_interval or r.N % m.N != 0:
            raise MetricError(
                f"mesh with {m.N} steps on [{m.a}, {m.b}] is not commensurate with the "
                f"reference ({r.N} steps on [{r.a}, {r.b}])"
            )
        values = ref.values[:: r.N // m.N]
    elif callable(truth):
        values = np.asarray(truth(traj.t), dtype=float)
    else:
        raise MetricError(f"cannot compare against {type(truth).__name__}")
    return float(np.max(np.abs(traj.values - values)))
