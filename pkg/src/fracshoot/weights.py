r"""
Quadrature weights for the Riemann-Liouville integral on a uniform mesh.

Every rule is normalised so that

.. math::

    I^\alpha g(t_n) \approx h^\alpha \Big(\sum_{j} W_{n,j}\, g(t_j)\Big),

i.e. the Gamma-function factors are already folded into the arrays.

* Adams (product integration): rectangle weights for the predictor and
  trapezoidal weights for the corrector.
* Lubich convolution quadrature generated by BDF2 or the trapezoidal rule,
  with starting weights that make the rule exact on :math:`t^\gamma` for the
  exponents :math:`\gamma \in \{k\alpha \le 1\} \cup \{1\}`.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import ValidationError
from .history import history_sum

# Starting-weight systems above this condition number are flagged.
ILL_CONDITIONED = 1e8


class Method(str, enum.Enum):
    ADAMS = "adams"
    FBDF2 = "bdf2"
    FTRAPEZOIDAL = "trapezoidal"

    @classmethod
    def parse(cls, value: "Method | str") -> "Method":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {"abm": "adams", "pece": "adams", "fbdf2": "bdf2", "trap": "trapezoidal",
                   "ftrapezoidal": "trapezoidal"}
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise ValidationError(
                f"unknown method {value!r}; expected one of {[m.value for m in cls]}"
            ) from None


@dataclass(frozen=True, eq=False)
class ConvolutionWeights:
    """Weight tables for one ``(alpha, method, N)`` triple.

    ``w`` is the Toeplitz part (corrector weights for Adams, Lubich weights
    otherwise). For Adams ``predictor`` holds the rectangle weights (index
    ``k = n - j``, entry 0 unused) and ``start[n]`` the endpoint weight of
    ``g(t_0)``. For the multistep rules ``start`` has shape
    ``(N + 1, len(exponents))`` with the starting weights ``S[n, j]``.
    """

    alpha: float
    method: Method
    n_steps: int
    w: np.ndarray
    predictor: np.ndarray | None = None
    start: np.ndarray | None = None
    exponents: tuple[float, ...] = ()
    condition: float = 1.0
    warnings: tuple[str, ...] = ()
    _kernels: dict = field(default_factory=dict, repr=False, compare=False)

    def quadrature(self, g_values, h: float) -> np.ndarray:
        """Apply the (corrector) rule to samples of ``g`` at every node."""
        g = np.asarray(g_values, dtype=float)
        if len(g) != self.n_steps + 1:
            raise ValueError("need one sample per mesh node")
        conv = history_sum(self.w, g)
        if self.method is Method.ADAMS:
            # history_sum used w[n] for j = 0; the rule wants start[n] there.
            conv[1:] += (self.start[1:] - self.w[1:]) * g[0]
            conv[0] = 0.0
        else:
            k = self.start.shape[1]
            conv += self.start @ g[:k]
        return h**self.alpha * conv


def _check(alpha: float, n_steps: int) -> None:
    if not 0.0 < alpha <= 1.0:
        raise ValidationError(f"alpha must lie in (0, 1], got {alpha!r}")
    if int(n_steps) != n_steps or n_steps < 1:
        raise ValidationError(f"step count must be a positive integer, got {n_steps!r}")


def adams_weights(alpha: float, n_steps: int) -> ConvolutionWeights:
    """Product-rectangle and product-trapezoidal weights on ``n_steps`` steps."""
    _check(alpha, n_steps)
    return _adams_weights_cached(float(alpha), int(n_steps))


@functools.lru_cache(maxsize=32)
def _adams_weights_cached(alpha: float, n: int) -> ConvolutionWeights:
    k = np.arange(n + 1, dtype=float)
    a1 = alpha + 1.0
    g1 = math.gamma(alpha + 1.0)
    g2 = math.gamma(alpha + 2.0)

    pred = np.zeros(n + 1)
    pred[1:] = (k[1:] ** alpha - k[:-1] ** alpha) / g1

    corr = np.empty(n + 1)
    corr[0] = 1.0
    kk = k[1:]
    corr[1:] = (kk + 1.0) ** a1 - 2.0 * kk**a1 + (kk - 1.0) ** a1
    corr /= g2

    start = np.zeros(n + 1)
    start[1:] = ((kk - 1.0) ** a1 - (kk - 1.0 - alpha) * kk**alpha) / g2

    for arr in (pred, corr, start):
        arr.setflags(write=False)
    return ConvolutionWeights(alpha, Method.ADAMS, n, corr, predictor=pred, start=start)


def lubich_coefficients(alpha: float, method: Method | str, n_terms: int) -> np.ndarray:
    r"""Taylor coefficients of :math:`\delta(\zeta)^{-\alpha}`.

    BDF2: :math:`\delta(\zeta) = \tfrac32 - 2\zeta + \tfrac12\zeta^2`, using
    the recurrence :math:`k\delta_0 u_k = \sum_j ((1-\alpha)j - k)\delta_j u_{k-j}`
    obtained from :math:`\delta u' = -\alpha\delta' u`.

    Trapezoidal: :math:`\delta(\zeta) = 2(1-\zeta)/(1+\zeta)`; the quotient
    satisfies :math:`(1-\zeta^2)u' = 2\alpha u`.
    """
    method = Method.parse(method)
    u = np.zeros(n_terms)
    if n_terms == 0:
        return u
    if method is Method.FBDF2:
        d = (1.5, -2.0, 0.5)
        beta = -alpha
        u[0] = d[0] ** beta
        for k in range(1, n_terms):
            acc = ((beta + 1.0) - k) * d[1] * u[k - 1]
            if k >= 2:
                acc += (2.0 * (beta + 1.0) - k) * d[2] * u[k - 2]
            u[k] = acc / (k * d[0])
    elif method is Method.FTRAPEZOIDAL:
        u[0] = 2.0**-alpha
        if n_terms > 1:
            u[1] = 2.0 * alpha * u[0]
        for k in range(1, n_terms - 1):
            u[k + 1] = (2.0 * alpha * u[k] + (k - 1.0) * u[k - 1]) / (k + 1.0)
    else:
        raise ValidationError("Lubich coefficients exist only for the multistep methods")
    return u


def starting_exponents(alpha: float, order: int = 2) -> tuple[float, ...]:
    """Exponents ``{k alpha <= order - 1} U {1}`` with duplicates removed."""
    top = order - 1.0
    out: list[float] = []
    k = 0
    while k * alpha <= top + 1e-12:
        out.append(k * alpha)
        k += 1
    out.append(1.0)
    uniq: list[float] = []
    for g in sorted(out):
        if not uniq or abs(g - uniq[-1]) > 1e-10:
            uniq.append(g)
    return tuple(uniq)


def flmm_weights(alpha: float, method: Method | str, n_steps: int) -> ConvolutionWeights:
    """Lubich weights plus starting weights for the BDF2/trapezoidal rules."""
    _check(alpha, n_steps)
    method = Method.parse(method)
    if method is Method.ADAMS:
        raise ValidationError("use adams_weights for the Adams method")
    return _flmm_weights_cached(float(alpha), method, int(n_steps))


@functools.lru_cache(maxsize=32)
def _flmm_weights_cached(alpha: float, method: Method, n: int) -> ConvolutionWeights:
    omega = lubich_coefficients(alpha, method, n + 1)
    exps = starting_exponents(alpha)
    ns = len(exps)
    j = np.arange(ns, dtype=float)
    # V[i, j] = j ** gamma_i with 0 ** 0 = 1
    V = np.array([[1.0 if (jj == 0 and g == 0) else jj**g for jj in j] for g in exps])
    nodes = np.arange(n + 1, dtype=float)
    powers = np.array([nodes**g for g in exps])  # 0 ** 0 == 1 in numpy
    conv = history_sum(omega, powers)
    exact = np.array(
        [math.gamma(g + 1.0) / math.gamma(g + 1.0 + alpha) * nodes ** (g + alpha) for g in exps]
    )
    rhs = exact - conv
    lu = scipy.linalg.lu_factor(V)
    start = scipy.linalg.lu_solve(lu, rhs).T.copy()
    cond = float(np.linalg.cond(V))
    warnings: tuple[str, ...] = ()
    if cond > ILL_CONDITIONED:
        warnings = (f"starting-weight system is ill-conditioned (cond={cond:.2e})",)
    omega.setflags(write=False)
    start.setflags(write=False)
    return ConvolutionWeights(
        alpha, method, n, omega, start=start, exponents=exps, condition=cond, warnings=warnings
    )


def convolution_weights(alpha: float, method: Method | str, n_steps: int) -> ConvolutionWeights:
    method = Method.parse(method)
    if method is Method.ADAMS:
        return adams_weights(alpha, n_steps)
    return flmm_weights(alpha, method, n_steps)


def clear_weight_cache() -> None:
    _adams_weights_cached.cache_clear()
    _flmm_weights_cached.cache_clear()
