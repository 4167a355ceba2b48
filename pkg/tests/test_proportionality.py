from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from fracshoot.errors import EstimationError, StrategyError, ValidationError
from fracshoot.ivp import Mesh, Trajectory
from fracshoot.mlf import mittag_leffler
from fracshoot.proportionality import (
    C_CEILING,
    LQuotientScan,
    ProportionalityEstimate,
    Strategy,
    choose_c_hat,
    default_probe_step,
    estimate,
    proportionality_bounds,
    scan_l_bounds,
)


def _traj(values, a=0.0, b=1.0):
    values = np.asarray(values, dtype=float)
    return Trajectory(Mesh(a, b, len(values) - 1), values)


class ScalarOnly:
    """Wraps an rhs so that it refuses array arguments (forces the scalar path)."""

    def __init__(self, f):
        self.f = f

    def __call__(self, t, y):
        if isinstance(y, np.ndarray):
            raise TypeError("scalars only")
        return self.f(t, y)


def test_default_probe_step():
    assert default_probe_step(_traj([0.0, -2.0, 1.0]), 100) == pytest.approx(0.05)


@settings(max_examples=40, deadline=None)
@given(st.floats(-20, 20), st.floats(1e-3, 1.0), st.integers(1, 30))
def test_property_linear_rhs_scan_is_exact(lam, H, M):
    traj = _traj(np.linspace(-1, 3, 11))
    scan = scan_l_bounds(lambda t, y: lam * y + np.sin(t), traj, H, M)
    assert scan.l_low == pytest.approx(lam, abs=1e-9 * (1 + abs(lam)))
    assert scan.l_high == pytest.approx(lam, abs=1e-9 * (1 + abs(lam)))


@settings(max_examples=30, deadline=None)
@given(st.floats(0.01, 0.5), st.integers(1, 20), st.randoms(use_true_random=False))
def test_property_scan_independent_of_offset_order(H, M, rnd):
    """Pure min/max: any enumeration of the offsets gives the same bounds."""
    f = lambda t, y: np.sin(3 * y) * (1 + t) - y**3 / 10  # noqa: E731
    traj = _traj([0.3, -0.7, 1.1, 0.2])
    scan = scan_l_bounds(f, traj, H, M)
    offsets = [k * H for k in range(-M, M + 1) if k]
    rnd.shuffle(offsets)
    qs = [(f(t, y + d) - f(t, y)) / d for t, y in zip(traj.t, traj.values) for d in offsets]
    assert scan.l_low == pytest.approx(min(qs), rel=1e-12, abs=1e-12)
    assert scan.l_high == pytest.approx(max(qs), rel=1e-12, abs=1e-12)


def test_vectorized_and_scalar_paths_agree():
    f = lambda t, y: math.sin(t * y) / (t + 1) if isinstance(y, float) else np.sin(t * y) / (t + 1)  # noqa: E731
    traj = _traj(np.cos(np.linspace(0, 4, 41)), 0.0, 20.0)
    a = scan_l_bounds(f, traj)
    b = scan_l_bounds(ScalarOnly(f), traj)
    assert a.l_low == pytest.approx(b.l_low, rel=1e-13)
    assert a.l_high == pytest.approx(b.l_high, rel=1e-13)


def test_non_finite_probes_are_skipped():
    f = ScalarOnly(lambda t, y: math.sqrt(y) if y >= 0 else math.nan)
    scan = scan_l_bounds(f, _traj([1.0, 2.0]), H=0.5, M=4)
    assert scan.skipped > 0 and scan.l_high > 0
    with pytest.raises(EstimationError):
        scan_l_bounds(ScalarOnly(lambda t, y: math.nan), _traj([1.0, 2.0]))


def test_scan_validation():
    with pytest.raises(ValidationError):
        scan_l_bounds(lambda t, y: y, _traj([1.0, 2.0]), H=-1.0)
    with pytest.raises(ValidationError):
        scan_l_bounds(lambda t, y: y, _traj([1.0, 2.0]), M=0)
    with pytest.raises(ValidationError):
        LQuotientScan(0.1, 3, 2.0, 1.0)


def test_bounds_are_mittag_leffler_values():
    scan = LQuotientScan(0.1, 10, -1.5, -1.5)
    lo, hi = proportionality_bounds(0.3, 0.0, 7.0, scan)
    assert lo == hi == pytest.approx(mittag_leffler(0.3, -1.5 * 7**0.3), rel=1e-12)


def test_upper_bound_capped():
    lo, hi = proportionality_bounds(0.5, 0.0, 10.0, LQuotientScan(1.0, 1, 0.0, 500.0))
    assert lo == 1.0 and hi == C_CEILING


@settings(max_examples=60, deadline=None)
@given(st.floats(-30, 30), st.floats(-30, 30), st.floats(0.1, 0.95), st.floats(0.5, 20))
def test_property_dissipative_and_auto(l1, l2, alpha, span):
    l_low, l_high = min(l1, l2), max(l1, l2)
    c_low, c_high = proportionality_bounds(alpha, 0.0, span, LQuotientScan(1.0, 1, l_low, l_high))
    assert c_low <= c_high
    if l_high <= 0:
        assert c_high <= 1.0
    est = choose_c_hat("auto", c_low, c_high, l_low, l_high)
    assert 0 < est.c_hat <= max(1.0, c_low)


def test_strategy_choices():
    assert choose_c_hat("unit", 0.2, 5.0).c_hat == 1.0
    assert choose_c_hat("midpoint", 0.2, 5.0).c_hat == pytest.approx(2.6)
    assert choose_c_hat("auto", 0.2, 0.6, -2.0, -1.0).c_hat == pytest.approx(0.4)
    assert choose_c_hat("auto", 0.2, 5.0, -2.0, 1.0).c_hat == 1.0
    assert choose_c_hat("auto", 2.0, 5.0, 1.0, 2.0).c_hat == 2.0
    with pytest.raises(StrategyError):
        choose_c_hat("auto", 0.2, 5.0)
    with pytest.raises(StrategyError):
        Strategy.parse("golden")


def test_estimate_unit_skips_scan():
    est = estimate("unit", None, 0.5, 0.0, 1.0, None)
    assert est.c_hat == 1.0 and math.isnan(est.c_low)
    assert est.as_dict()["c_low"] is None
    with pytest.raises(StrategyError):
        estimate("midpoint", lambda t, y: y, 0.5, 0.0, 1.0, None)


def test_estimate_as_dict_round_values():
    est = ProportionalityEstimate(0.25, 3.0, 1.0, Strategy.AUTO, -1.0, 2.0)
    assert est.as_dict() == {"c_low": 0.25, "c_high": 3.0, "c_hat": 1.0, "strategy": "auto",
                             "l_low": -1.0, "l_high": 2.0}
