﻿# encoding: utf-8-sig

# ----------------------------------------------------------------------------
class DomainError(ValueError):
    """Argument outside the domain of a function."""


# ----------------------------------------------------------------------------
class ParameterError(ValueError):
    """Invalid algorithm or model parameter."""


# ----------------------------------------------------------------------------
class StrategyError(ValueError):
    """Infeasible pure strategy or malformed mixed strategy."""


# ----------------------------------------------------------------------------
class CapResidualError(ValueError):
    """Security cap does not invert the cost function at the budget."""


# ----------------------------------------------------------------------------
class FitError(RuntimeError):
    """
    Piecewise-linear fitting failed.

    Attributes:
        x (float | None): abscissa where the failure was detected, if any.
    """

    def __init__(self, message: str, x: float | None = None):
        super().__init__(message)
        self.x = x


# ----------------------------------------------------------------------------
class SampledSolverExhausted(RuntimeError):
    """The bounded support search of the sampled game gave up."""


__all__ = [
    "DomainError",
    "ParameterError",
    "StrategyError",
    "CapResidualError",
    "FitError",
    "SampledSolverExhausted",
]
