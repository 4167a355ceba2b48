from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from fracshoot.history import _KernelCache, direct_history_sum, history_sum, lagged_convolution


def test_direct_sum_small_by_hand():
    w = [1.0, 2.0, 3.0]
    s = [1.0, 10.0, 100.0]
    # out[n] = sum_j w[n-j] s[j]
    assert np.allclose(direct_history_sum(w, s), [1.0, 12.0, 123.0])


@pytest.mark.parametrize("n", [1, 5, 64, 65, 300, 4097])
def test_fft_path_matches_direct(n):
    rng = np.random.default_rng(n)
    w, s = rng.standard_normal(n + 3), rng.standard_normal(n)
    fast = history_sum(w, s)
    ref = direct_history_sum(w, s)
    assert fast.shape == (n,)
    assert np.max(np.abs(fast - ref)) <= 1e-12 * np.max(np.abs(ref))


def test_two_dimensional_samples_convolve_rowwise():
    rng = np.random.default_rng(1)
    w, s = rng.standard_normal(200), rng.standard_normal((3, 200))
    out = history_sum(w, s)
    for row, got in zip(s, out):
        assert np.allclose(got, direct_history_sum(w, row), atol=1e-12)


def test_too_few_weights_rejected():
    with pytest.raises(ValueError):
        history_sum(np.ones(3), np.ones(4))


@pytest.mark.parametrize("n_steps,threshold", [(10, 64), (200, 64), (1000, 16), (777, 8)])
def test_lagged_convolution_matches_offline_sum(n_steps, threshold):
    """A stepper whose next sample depends on the running history sums."""
    rng = np.random.default_rng(n_steps)
    weights = rng.standard_normal((2, n_steps + 1))
    seen = {}

    def step(n, acc):
        seen[n] = acc.copy()
        return np.sin(n) + 0.01 * acc[0] - 0.02 * acc[1]

    samples = np.zeros(n_steps + 1)
    samples[0] = 0.5
    lagged_convolution(weights, samples, n_steps, step, fft_threshold=threshold,
                       kernels=_KernelCache(weights))
    for i in range(2):
        w = weights[i].copy()
        w[0] = 0.0
        full = direct_history_sum(w, samples)
        got = np.array([seen[n][i] for n in range(1, n_steps + 1)])
        assert np.allclose(got, full[1:], rtol=0, atol=1e-12 * max(1, np.abs(full).max()))


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, st.integers(1, 400), elements=st.floats(-1e3, 1e3)))
def test_property_fft_equals_direct(s):
    w = np.cos(np.arange(len(s)) * 0.37) / (1 + np.arange(len(s)))
    fast = history_sum(w, s, fft_threshold=8)
    ref = direct_history_sum(w, s)
    scale = max(1.0, np.abs(w).sum() * np.abs(s).max())
    assert np.max(np.abs(fast - ref)) <= 1e-12 * scale
