"""Exception hierarchy shared by the solver, estimation and shooting layers."""

from __future__ import annotations


class FracShootError(Exception):
    """Base class for every error raised by :mod:`fracshoot`."""


class ValidationError(FracShootError, ValueError):
    """Invalid user input (problem data, configuration, CLI arguments)."""


class NumericalError(FracShootError, ArithmeticError):
    """A computation could not be completed to the requested accuracy."""


class MittagLefflerDomainError(ValidationError):
    pass


class MittagLefflerAccuracyError(NumericalError):
    """Raised when no regime reaches the requested tolerance.

    The best available estimate and its error bound are kept on the exception
    so callers can decide whether they are good enough.
    """

    def __init__(self, message: str, estimate: float, error_bound: float):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound


class RhsError(NumericalError):
    """The right-hand side returned a non-finite value."""

    def __init__(self, t: float, y: float, value: float):
        super().__init__(f"right-hand side is not finite at t={t!r}, y={y!r}: {value!r}")
        self.t = t
        self.y = y
        self.value = value


class NewtonConvergenceError(NumericalError):
    def __init__(self, step: int, iterations: int, last_update: float):
        super().__init__(
            f"Newton iteration did not converge at step {step} "
            f"after {iterations} iterations (last update {last_update:.3e})"
        )
        self.step = step
        self.iterations = iterations
        self.last_update = last_update


class EstimationError(NumericalError):
    """Every probe of the Lipschitz-quotient scan was non-finite."""


class StrategyError(ValidationError):
    """Invalid proportionality factor handed to the second-guess rule."""


class DegenerateSecantError(NumericalError):
    """Two shots produced identical terminal values."""


class MetricError(ValidationError):
    """Trajectory and reference solution live on incommensurate meshes."""


class UnknownProblemError(ValidationError, KeyError):
    def __str__(self) -> str:  # KeyError quotes its argument otherwise
        return str(self.args[0]) if self.args else ""
