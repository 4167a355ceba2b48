r"""
Bounds on the factor relating initial-value and terminal-value differences.

For two solutions of the same equation the ratio
:math:`\hat c = (y_1(b) - y_2(b)) / (y_1(a) - y_2(a))` lies between
:math:`c_* = E_\alpha(\ell_*(b-a)^\alpha)` and
:math:`c^* = E_\alpha(\ell^*(b-a)^\alpha)`, where :math:`\ell_*, \ell^*` bound
the difference quotients of ``f`` in ``y``. Those bounds are estimated by
probing ``f`` around an available approximate solution.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import EstimationError, StrategyError, ValidationError
from .ivp import Rhs, Trajectory
from .mlf import mittag_leffler

DEFAULT_PROBES = 100
C_CEILING = 1e300


class Strategy(str, enum.Enum):
    UNIT = "unit"
    MIDPOINT = "midpoint"
    AUTO = "auto"

    @classmethod
    def parse(cls, value: "Strategy | str") -> "Strategy":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise StrategyError(
                f"unknown strategy {value!r}; expected one of {[s.value for s in cls]}"
            ) from None


@dataclass(frozen=True)
class LQuotientScan:
    H: float
    M: int
    l_low: float
    l_high: float
    skipped: int = 0

    def __post_init__(self) -> None:
        if not self.l_low <= self.l_high:
            raise ValidationError(f"l_low={self.l_low} exceeds l_high={self.l_high}")


@dataclass(frozen=True)
class ProportionalityEstimate:
    c_low: float
    c_high: float
    c_hat: float
    strategy: Strategy
    l_low: float | None = None
    l_high: float | None = None

    def as_dict(self) -> dict:
        """JSON-ready mapping; values that were never computed become ``None``."""
        def clean(v):
            return None if v is None or not math.isfinite(v) else v

        return {
            "c_low": clean(self.c_low),
            "c_high": clean(self.c_high),
            "c_hat": clean(self.c_hat),
            "strategy": self.strategy.value,
            "l_low": clean(self.l_low),
            "l_high": clean(self.l_high),
        }


def default_probe_step(traj: Trajectory, M: int = DEFAULT_PROBES) -> float:
    """``H = (1 + 2 max |y|) / M``.

    The largest offset ``M H`` then carries every node across the band
    ``|y| <= 1 + max |y|``, so the scan sees secant slopes between the
    solution and anything of comparable size, including its mirror image.
    """
    return (1.0 + 2.0 * float(np.max(np.abs(traj.values)))) / M


def scan_l_bounds(rhs: Rhs, traj: Trajectory, H: float | None = None,
                  M: int = DEFAULT_PROBES) -> LQuotientScan:
    """Min and max of ``[f(t_j, y_j + kH) - f(t_j, y_j)] / (kH)``, ``k = +-1..+-M``."""
    if isinstance(M, bool) or int(M) != M or M < 1:
        raise ValidationError(f"probe count must be a positive integer, got {M!r}")
    M = int(M)
    if H is None:
        H = default_probe_step(traj, M)
    if not (H > 0 and math.isfinite(H)):
        raise ValidationError(f"probe step must be positive, got {H!r}")
    offsets = np.concatenate([-np.arange(M, 0, -1), np.arange(1, M + 1)]) * H
    q = _quotients_vectorized(rhs, traj.t, traj.values, offsets)
    if q is not None:
        ok = np.isfinite(q)
        if not ok.any():
            raise EstimationError("every probe of the right-hand side was non-finite")
        return LQuotientScan(float(H), M, float(q[ok].min()), float(q[ok].max()), int((~ok).sum()))
    lo, hi = math.inf, -math.inf
    skipped = 0
    with np.errstate(all="ignore"):
        for t, y in zip(traj.t.tolist(), traj.values.tolist()):
            try:
                f0 = float(rhs(t, y))
            except (ArithmeticError, ValueError):
                skipped += len(offsets)
                continue
            if not math.isfinite(f0):
                skipped += len(offsets)
                continue
            for d in offsets.tolist():
                try:
                    q = (float(rhs(t, y + d)) - f0) / d
                except (ArithmeticError, ValueError):
                    skipped += 1
                    continue
                if not math.isfinite(q):
                    skipped += 1
                    continue
                if q < lo:
                    lo = q
                if q > hi:
                    hi = q
    if lo > hi:
        raise EstimationError("every probe of the right-hand side was non-finite")
    return LQuotientScan(float(H), M, lo, hi, skipped)


def _quotients_vectorized(rhs: Rhs, t: np.ndarray, y: np.ndarray,
                          offsets: np.ndarray) -> np.ndarray | None:
    """All quotients in one call when ``rhs`` accepts arrays, else ``None``."""
    tt = np.broadcast_to(t[:, None], (len(t), len(offsets)))
    yy = y[:, None] + offsets[None, :]
    try:
        with np.errstate(all="ignore"):
            f0 = np.asarray(rhs(t, y), dtype=float)
            f1 = np.asarray(rhs(tt, yy), dtype=float)
    except Exception:
        return None
    if f0.shape != t.shape or f1.shape != yy.shape:
        return None
    with np.errstate(all="ignore"):
        return (f1 - f0[:, None]) / offsets[None, :]


def proportionality_bounds(alpha: float, a: float, b: float,
                           scan: LQuotientScan) -> tuple[float, float]:
    """``(E_a(l_low (b-a)^a), E_a(l_high (b-a)^a))`` with the upper value capped."""
    span = (b - a) ** alpha
    c_low = min(mittag_leffler(alpha, scan.l_low * span), C_CEILING)
    c_high = min(mittag_leffler(alpha, scan.l_high * span), C_CEILING)
    return c_low, c_high


def choose_c_hat(strategy: Strategy | str, c_low: float, c_high: float,
                 l_low: float | None = None, l_high: float | None = None) -> ProportionalityEstimate:
    """Pick the factor used for the second initial guess."""
    strategy = Strategy.parse(strategy)
    if strategy is Strategy.UNIT:
        c_hat = 1.0
    elif strategy is Strategy.MIDPOINT:
        c_hat = 0.5 * (c_low + c_high)
    else:
        if l_low is None or l_high is None:
            raise StrategyError("the auto strategy needs the quotient bounds")
        if l_high <= 0.0:
            c_hat = 0.5 * (c_low + c_high)
        elif l_low <= 0.0:
            c_hat = 1.0
        else:
            c_hat = c_low
    return ProportionalityEstimate(c_low, c_high, min(c_hat, C_CEILING), strategy, l_low, l_high)


def estimate(strategy: Strategy | str, rhs: Rhs, alpha: float, a: float, b: float,
             traj: Trajectory | None, H: float | None = None,
             M: int = DEFAULT_PROBES) -> ProportionalityEstimate:
    """Scan (unless the strategy is ``unit``) and choose ``c_hat``."""
    strategy = Strategy.parse(strategy)
    if strategy is Strategy.UNIT:
        return ProportionalityEstimate(math.nan, math.nan, 1.0, strategy)
    if traj is None:
        raise StrategyError(f"strategy {strategy.value!r} needs a trajectory to scan")
    scan = scan_l_bounds(rhs, traj, H, M)
    c_low, c_high = proportionality_bounds(alpha, a, b, scan)
    return choose_c_hat(strategy, c_low, c_high, scan.l_low, scan.l_high)
