r"""
Caputo fractional initial value problems on a uniform mesh.

.. math::

    D^\alpha_* y(t) = f(t, y(t)), \quad y(a) = y_0, \qquad t \in [a, b],

solved in the equivalent Volterra form
:math:`y(t) = y_0 + I^\alpha[f(\cdot, y)](t)`. Two families are available:

* ``adams``: fractional Adams-Bashforth-Moulton in P(EC)^m E mode;
* ``bdf2`` / ``trapezoidal``: Lubich convolution quadrature with starting
  weights, one scalar Newton solve per step.

All history sums run through :func:`fracshoot.history.lagged_convolution`.
"""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .errors import NewtonConvergenceError, RhsError, ValidationError
from .history import DEFAULT_FFT_THRESHOLD, lagged_convolution
from .weights import Method, adams_weights, flmm_weights

Rhs = Callable[[float, float], float]

# Relative slack when checking that a step size divides an interval.
_MESH_RTOL = 1e-9


def _check_alpha(alpha: float) -> None:
    if not (isinstance(alpha, (int, float)) and 0.0 < alpha < 1.0):
        raise ValidationError(f"alpha must lie in (0, 1), got {alpha!r}")


@dataclass(frozen=True)
class FractionalIVP:
    alpha: float
    a: float
    b: float
    rhs: Rhs
    y0: float

    def __post_init__(self) -> None:
        _check_alpha(self.alpha)
        if not (math.isfinite(self.a) and math.isfinite(self.b) and self.a < self.b):
            raise ValidationError(f"need a < b, got [{self.a}, {self.b}]")
        if not callable(self.rhs):
            raise ValidationError("rhs must be callable")
        if not math.isfinite(self.y0):
            raise ValidationError(f"initial value must be finite, got {self.y0!r}")

    def with_initial_value(self, y0: float) -> "FractionalIVP":
        return replace(self, y0=float(y0))


@dataclass(frozen=True)
class Mesh:
    """Uniform mesh ``t_j = a + j h`` with ``h = (b - a) / N``."""

    a: float
    b: float
    N: int

    def __post_init__(self) -> None:
        if not (math.isfinite(self.a) and math.isfinite(self.b) and self.a < self.b):
            raise ValidationError(f"need a < b, got [{self.a}, {self.b}]")
        if isinstance(self.N, bool) or int(self.N) != self.N or self.N < 1:
            raise ValidationError(f"step count must be a positive integer, got {self.N!r}")
        object.__setattr__(self, "N", int(self.N))

    @classmethod
    def from_step(cls, a: float, b: float, h: float) -> "Mesh":
        if not (h > 0 and math.isfinite(h)):
            raise ValidationError(f"step size must be positive, got {h!r}")
        ratio = (b - a) / h
        n = round(ratio)
        if n < 1 or abs(ratio - n) > _MESH_RTOL * max(1.0, ratio):
            raise ValidationError(f"step {h!r} does not divide [{a}, {b}] into whole steps")
        return cls(a, b, n)

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.N

    @property
    def nodes(self) -> np.ndarray:
        t = self.a + self.h * np.arange(self.N + 1, dtype=float)
        t[-1] = self.b
        return t

    def extended(self, c: float) -> "Mesh":
        """Same step size on ``[a, c]``; ``c - a`` must be a whole number of steps."""
        if c < self.b:
            raise ValidationError(f"extension endpoint {c} lies before {self.b}")
        if c == self.b:
            return self
        m = Mesh.from_step(self.a, c, self.h)
        return m

    def is_refinement_of(self, other: "Mesh") -> bool:
        """True when every node of ``other`` is a node of ``self``."""
        if (self.a, self.b) != (other.a, other.b):
            return False
        return self.N % other.N == 0


@dataclass
class Trajectory:
    mesh: Mesh
    values: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.mesh.N + 1,):
            raise ValidationError(
                f"expected {self.mesh.N + 1} values, got shape {self.values.shape}"
            )

    @property
    def t(self) -> np.ndarray:
        return self.mesh.nodes

    @property
    def terminal(self) -> float:
        return float(self.values[-1])

    @property
    def initial(self) -> float:
        return float(self.values[0])

    def restrict(self, n_steps: int) -> "Trajectory":
        """First ``n_steps`` steps as a trajectory on ``[a, a + n_steps h]``."""
        m = self.mesh
        sub = Mesh(m.a, m.a + n_steps * m.h, n_steps) if n_steps < m.N else m
        return Trajectory(sub, self.values[: n_steps + 1].copy())

    def to_csv(self, path: str | os.PathLike | None = None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t", "y"])
        for t, y in zip(self.t, self.values):
            writer.writerow([f"{t:.17g}", f"{y:.17g}"])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, source: str | os.PathLike | io.TextIOBase) -> "Trajectory":
        if isinstance(source, (str, os.PathLike)) and os.path.exists(source):
            with open(source, newline="") as fh:
                return cls._parse(fh)
        if isinstance(source, str):
            return cls._parse(io.StringIO(source))
        return cls._parse(source)

    @classmethod
    def _parse(cls, fh) -> "Trajectory":
        reader = csv.reader(fh)
        header = next(reader)
        if [h.strip() for h in header] != ["t", "y"]:
            raise ValidationError(f"unexpected trajectory header {header!r}")
        rows = np.array([[float(a), float(b)] for a, b in reader])
        if len(rows) < 2:
            raise ValidationError("trajectory needs at least two nodes")
        mesh = Mesh(rows[0, 0], rows[-1, 0], len(rows) - 1)
        return cls(mesh, rows[:, 1])


@dataclass(frozen=True)
class SolverConfig:
    method: Method = Method.ADAMS
    corrector_iters: int = 4
    newton_tol: float = 1e-10
    newton_max_iters: int = 50
    fft_threshold: int = DEFAULT_FFT_THRESHOLD

    def __post_init__(self) -> None:
        object.__setattr__(self, "method", Method.parse(self.method))
        for name in ("corrector_iters", "newton_max_iters", "fft_threshold"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v or v < 1:
                raise ValidationError(f"{name} must be a positive integer, got {v!r}")
        if not self.newton_tol > 0:
            raise ValidationError(f"newton_tol must be positive, got {self.newton_tol!r}")


def _checked(rhs: Rhs) -> Rhs:
    def f(t: float, y: float) -> float:
        v = rhs(t, y)
        try:
            v = float(v)
        except (TypeError, ValueError):
            raise RhsError(t, y, v) from None
        if not math.isfinite(v):
            raise RhsError(t, y, v)
        return v

    return f


def solve_ivp(ivp: FractionalIVP, mesh: Mesh, cfg: SolverConfig | None = None) -> Trajectory:
    """Solve ``ivp`` on ``mesh`` with the method selected in ``cfg``."""
    cfg = cfg or SolverConfig()
    if not (math.isclose(mesh.a, ivp.a, abs_tol=1e-14) and math.isclose(mesh.b, ivp.b, abs_tol=1e-12)):
        raise ValidationError(
            f"mesh [{mesh.a}, {mesh.b}] does not match problem interval [{ivp.a}, {ivp.b}]"
        )
    if cfg.method is Method.ADAMS:
        return _solve_adams(ivp, mesh, cfg)
    return _solve_flmm(ivp, mesh, cfg)


def _solve_adams(ivp: FractionalIVP, mesh: Mesh, cfg: SolverConfig) -> Trajectory:
    N = mesh.N
    W = adams_weights(ivp.alpha, N)
    f = _checked(ivp.rhs)
    t = mesh.nodes.tolist()
    ha = mesh.h**ivp.alpha
    y0 = float(ivp.y0)
    c0 = ha * W.w[0]
    fix = (W.start - W.w).tolist()  # swap w[n] for the endpoint weight at j = 0
    iters = cfg.corrector_iters
    y = np.empty(N + 1)
    y[0] = y0
    fs = np.empty(N + 1)
    fs[0] = f(t[0], y0)
    f0 = fs[0]

    def step(n: int, acc: np.ndarray) -> float:
        tn = t[n]
        yn = y0 + ha * acc[0]
        base = y0 + ha * (acc[1] + fix[n] * f0)
        for _ in range(iters):
            yn = base + c0 * f(tn, yn)
        y[n] = yn
        return f(tn, yn)

    weights = np.vstack([W.predictor, W.w])
    lagged_convolution(weights, fs, N, step, cfg.fft_threshold, kernels=_kernel_cache(W, weights))
    return Trajectory(mesh, y)


def _kernel_cache(W, weights):
    # One FFT kernel cache per weight table, shared across solves.
    from .history import _KernelCache

    cache = W._kernels.get("lagged")
    if cache is None:
        cache = _KernelCache(weights)
        W._kernels["lagged"] = cache
    return cache


def _newton_scalar(f: Rhs, tn: float, base: float, c: float, guess: float,
                   cfg: SolverConfig, n: int) -> tuple[float, float]:
    """Solve ``y = base + c f(tn, y)``; returns ``(y, f(tn, y))``."""
    y = guess
    fy = f(tn, y)
    delta = 0.0
    for _ in range(cfg.newton_max_iters):
        d = max(abs(y), 1.0) * 1e-7
        slope = (f(tn, y + d) - fy) / d
        delta = (y - base - c * fy) / (1.0 - c * slope)
        y -= delta
        fy = f(tn, y)
        if abs(delta) < cfg.newton_tol:
            return y, fy
    raise NewtonConvergenceError(n, cfg.newton_max_iters, abs(delta))


def _solve_flmm(ivp: FractionalIVP, mesh: Mesh, cfg: SolverConfig) -> Trajectory:
    N = mesh.N
    W = flmm_weights(ivp.alpha, cfg.method, N)
    nu = len(W.exponents)
    if N < nu:
        raise ValidationError(
            f"{cfg.method.value} needs at least {nu} steps for its starting values, got {N}"
        )
    f = _checked(ivp.rhs)
    t = mesh.nodes.tolist()
    ha = mesh.h**ivp.alpha
    y0 = float(ivp.y0)
    omega = W.w
    S = W.start
    y = np.empty(N + 1)
    fs = np.empty(N + 1)
    y[0] = y0
    fs[0] = f(t[0], y0)

    _starting_values(f, t, y, fs, omega, S, ha, nu, cfg)

    c = ha * omega[0]
    tail = S[:, :nu] @ fs[:nu]  # starting-weight corrections, fixed from here on
    tail = tail.tolist()

    def step(n: int, acc: np.ndarray) -> float:
        if n < nu:
            return fs[n]
        base = y0 + ha * (acc[0] + tail[n])
        yn, fn = _newton_scalar(f, t[n], base, c, y[n - 1], cfg, n)
        y[n] = yn
        return fn

    weights = omega.reshape(1, -1)
    lagged_convolution(weights, fs, N, step, cfg.fft_threshold, kernels=_kernel_cache(W, weights))
    return Trajectory(mesh, y)


def _starting_values(f, t, y, fs, omega, S, ha, nu, cfg: SolverConfig) -> None:
    """Coupled Newton solve for ``y_1 .. y_{nu-1}``, filled into ``y``/``fs`` in place."""
    m = nu - 1
    if m == 0:
        return
    y0 = y[0]
    # y_n - y0 - h^a [sum_{j<=n} omega_{n-j} f_j + sum_{j<nu} S[n, j] f_j] = 0
    A = np.zeros((m, nu))
    for n in range(1, nu):
        A[n - 1, : n + 1] += omega[n::-1]
        A[n - 1, :] += S[n, :nu]
    A *= ha
    const = y0 + A[:, 0] * fs[0]
    B = A[:, 1:]
    x = np.full(m, y0)

    def evalf(x):
        return np.array([f(t[i + 1], x[i]) for i in range(m)])

    fx = evalf(x)
    for _ in range(cfg.newton_max_iters):
        G = x - const - B @ fx
        d = np.maximum(np.abs(x), 1.0) * 1e-7
        dfx = (np.array([f(t[i + 1], x[i] + d[i]) for i in range(m)]) - fx) / d
        J = np.eye(m) - B * dfx[None, :]
        delta = np.linalg.solve(J, G)
        x = x - delta
        fx = evalf(x)
        if np.max(np.abs(delta)) < cfg.newton_tol:
            y[1:nu] = x
            fs[1:nu] = fx
            return
    raise NewtonConvergenceError(1, cfg.newton_max_iters, float(np.max(np.abs(delta))))


def extend_solution(
    tvp_solution: Trajectory,
    ivp: FractionalIVP,
    c: float,
    cfg: SolverConfig | None = None,
    mesh: Mesh | None = None,
) -> Trajectory:
    """Re-solve from ``tvp_solution``'s initial value over ``[a, c]``.

    By default the step size of ``tvp_solution`` is kept, so the nodes on
    ``[a, b]`` coincide. A different ``mesh`` on ``[a, c]`` may be supplied.
    """
    if c < ivp.b:
        raise ValidationError(f"extension endpoint {c} lies before {ivp.b}")
    if mesh is None:
        mesh = tvp_solution.mesh.extended(c)
    if mesh.b != c:
        raise ValidationError("extension mesh must end at the extension endpoint")
    problem = replace(ivp, b=float(c), y0=tvp_solution.initial)
    return solve_ivp(problem, mesh, cfg)
