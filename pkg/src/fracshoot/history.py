"""
Lower-triangular Toeplitz products (discrete Volterra convolutions).

Two flavours are provided. :func:`history_sum` is the offline product when
all samples are known up front. :func:`lagged_convolution` drives a time
stepper in which sample ``n`` only becomes known after step ``n`` has used
every earlier sample. It uses the recursive splitting of Hairer, Lubich and
Schlichte: once the first half of a block is done, its contribution to the
second half is added with one FFT product, giving ``O(N log(N)^2)`` work.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

DEFAULT_FFT_THRESHOLD = 64


def direct_history_sum(weights, samples) -> np.ndarray:
    """``out[n] = sum_{j<=n} w[n-j] * s[j]`` by direct summation."""
    w = np.asarray(weights, dtype=float)
    s = np.asarray(samples, dtype=float)
    n = len(s)
    return np.convolve(w[:n], s)[:n]


def history_sum(weights, samples, fft_threshold: int = DEFAULT_FFT_THRESHOLD) -> np.ndarray:
    """Lower-triangular Toeplitz product, FFT based above ``fft_threshold``.

    ``weights`` must be at least as long as ``samples``; extra weights are
    ignored. Samples may also be a 2-D array of shape ``(m, n)``, in which
    case each row is convolved independently.
    """
    w = np.asarray(weights, dtype=float)
    s = np.asarray(samples, dtype=float)
    n = s.shape[-1]
    if len(w) < n:
        raise ValueError(f"need at least {n} weights, got {len(w)}")
    if n <= fft_threshold:
        if s.ndim == 1:
            return direct_history_sum(w, s)
        return np.array([direct_history_sum(w, row) for row in s])
    nfft = _fft_size(2 * n - 1)
    wf = np.fft.rfft(w[:n], nfft)
    out = np.fft.irfft(np.fft.rfft(s, nfft, axis=-1) * wf, nfft, axis=-1)
    return out[..., :n]


def _fft_size(n: int) -> int:
    return 1 << max(0, (n - 1).bit_length())


class _KernelCache:
    """FFTs of the weight segments ``w[:, 1:size]``, keyed by block size."""

    def __init__(self, weights: np.ndarray):
        self.weights = weights
        self._cache: dict[int, np.ndarray] = {}

    def get(self, size: int) -> np.ndarray:
        kf = self._cache.get(size)
        if kf is None:
            seg = np.zeros((self.weights.shape[0], size))
            avail = min(size - 1, self.weights.shape[1] - 1)
            seg[:, :avail] = self.weights[:, 1 : avail + 1]
            kf = np.fft.rfft(seg, size, axis=-1)
            self._cache[size] = kf
        return kf


def lagged_convolution(
    weights: np.ndarray,
    samples: np.ndarray,
    n_steps: int,
    step: Callable[[int, np.ndarray], float],
    fft_threshold: int = DEFAULT_FFT_THRESHOLD,
    kernels: _KernelCache | None = None,
) -> np.ndarray:
    """Run ``step(n, acc)`` for ``n = 1..n_steps`` with on-line history sums.

    ``weights`` has shape ``(m, >= n_steps + 1)``; row ``i`` is a convolution
    sequence whose entry ``0`` is ignored. ``samples[0]`` must be set by the
    caller. Before step ``n`` the vector ``acc`` (length ``m``) holds
    ``sum_{j<n} weights[:, n-j] * samples[j]``; the step returns
    ``samples[n]``. ``samples`` is filled in place and returned.
    """
    weights = np.atleast_2d(np.asarray(weights, dtype=float))
    m = weights.shape[0]
    if n_steps <= fft_threshold:
        for n in range(1, n_steps + 1):
            acc = weights[:, n:0:-1] @ samples[:n]
            samples[n] = step(n, acc)
        return samples

    leaf = max(8, fft_threshold)
    total = leaf
    while total < n_steps + 1:
        total *= 2
    acc = np.zeros((m, total))
    if kernels is None:
        kernels = _KernelCache(weights)
    last = n_steps

    def run(lo: int, hi: int) -> None:
        if lo > last:
            return
        if hi - lo <= leaf:
            for n in range(max(lo, 1), min(hi, last + 1)):
                if n > lo:
                    acc[:, n] += weights[:, n - lo : 0 : -1] @ samples[lo:n]
                samples[n] = step(n, acc[:, n])
            return
        mid = (lo + hi) // 2
        run(lo, mid)
        if mid <= last:
            size = hi - lo
            sf = np.fft.rfft(samples[lo:mid], size)
            block = np.fft.irfft(kernels.get(size) * sf, size, axis=-1)
            # conv index n - lo - 1 for targets n in [mid, hi)
            stop = min(hi, last + 1)
            acc[:, mid:stop] += block[:, mid - lo - 1 : stop - lo - 1]
        run(mid, hi)

    run(0, total)
    return samples
