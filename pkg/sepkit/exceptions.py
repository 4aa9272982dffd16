#
# Copyright (c) 2025, sepkit developers
#
# SPDX-License-Identifier: BSD 2-Clause License
#

"""Errors raised by sepkit.

Numerical non-outcomes (a trajectory that runs out of time, an index check that cannot
be classified) are returned as data. Only genuine failures end up here.
"""


class SepkitError(Exception):
    """Root of every sepkit error."""


class ConfigError(SepkitError):
    """Invalid run configuration (domain strings, TOML values, flags)."""


class ParseError(SepkitError):
    """The function expression could not be parsed."""

    def __init__(self, message: str, position: int = 0):
        super().__init__(f"{message} (at position {position})")
        self.message = message
        self.position = position


class ExpressionSyntaxError(ParseError):
    pass


class UnknownIdentifier(ParseError):
    pass


class NonIntegerExponent(ParseError):
    pass


class EvaluationError(SepkitError):
    """Evaluating a parsed function failed at a point."""


class DomainError(EvaluationError):
    pass


class EvaluationOverflow(EvaluationError):
    pass


class ZeroVelocity(SepkitError):
    pass


class FlatCurvature(SepkitError):
    pass


class PointOnCurve(SepkitError):
    pass


class AmbiguousWinding(SepkitError):
    def __init__(self, message: str, raw_value: float):
        super().__init__(message)
        self.raw_value = raw_value


class NoBracket(SepkitError):
    pass


class EmptyContour(SepkitError):
    pass


class InnerNewtonDiverged(SepkitError):
    pass


class BracketInvalid(SepkitError):
    pass
