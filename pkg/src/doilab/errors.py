"""Exception hierarchy.

Validation problems (bad arguments, violated preconditions) derive from
:class:`ValidationError`; failures detected while computing (an invariant
that should hold numerically but does not) derive from :class:`NumericalFailure`.
The CLI maps the former to exit code 2 and the latter to exit code 1.
"""

from __future__ import annotations


class DoiLabError(Exception):
    """Base class for all package errors."""


class ValidationError(DoiLabError, ValueError):
    pass


class NumericalFailure(DoiLabError, ArithmeticError):
    pass


# linalg
class NotHermitian(ValidationError):
    pass


class NotCommuting(ValidationError):
    def __init__(self, pair: tuple[int, int], norm: float, tol: float):
        self.pair = pair
        self.norm = norm
        self.tol = tol
        super().__init__(
            f"matrices {pair[0]} and {pair[1]} do not commute: "
            f"||[A_{pair[0]}, A_{pair[1]}]|| = {norm:.3e} > {tol:.3e}"
        )


class DimensionMismatch(ValidationError):
    pass


class InvalidExponent(ValidationError):
    pass


# funcalc
class InvalidSigma(ValidationError):
    pass


class SamplerUnsupported(ValidationError):
    pass


class GridTooCoarse(ValidationError):
    pass


class EmptyRange(ValidationError):
    pass


# doi
class NonFiniteKernel(NumericalFailure):
    pass


class VariantDimensionMismatch(ValidationError):
    pass


class IdentityViolation(NumericalFailure):
    def __init__(self, worst_pair: tuple[int, int], defect: float, tol: float):
        self.worst_pair = worst_pair
        self.defect = defect
        self.tol = tol
        super().__init__(
            f"scalar identity fails at eigengrid pair {worst_pair}: "
            f"defect {defect:.3e} > {tol:.3e}"
        )


# cubes
class OddAmbientDimension(ValidationError):
    pass


class LevelCapTooSmall(NumericalFailure):
    pass


class WindowTooSmall(ValidationError):
    pass


# multipliers
class QuadratureBudgetExceeded(NumericalFailure):
    pass


class DenominatorVanished(NumericalFailure):
    pass


class UncoveredPoint(ValidationError):
    pass


class TailFitUnstable(NumericalFailure):
    pass


class DecayViolated(NumericalFailure):
    def __init__(self, slope: float, table: dict):
        self.slope = slope
        self.table = table
        super().__init__(f"per-scale bounds decay with slope {slope:.3f} > -0.8: {table}")


# experiments / cli
class AlphaOutOfRange(ValidationError):
    pass


class UnknownCommand(ValidationError):
    pass


class ConfigInvalid(ValidationError):
    pass
