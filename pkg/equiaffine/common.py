import logging
import sys
from numbers import Real

import numpy as np

import equiaffine.configs as conf


class EquiaffineError(Exception):
    """Base class for every error raised by the package"""


class JetOrderMismatch(EquiaffineError):
    pass


class DivisionByNearZero(EquiaffineError):
    pass


class DomainError(EquiaffineError):
    pass


class DegenerateJet(EquiaffineError):
    pass


class LexError(EquiaffineError):
    def __init__(self, position, character=''):
        self.position = position
        self.character = character
        super().__init__(f"LexError at {position}: unexpected character {character!r}")


class ExpressionSyntaxError(EquiaffineError):
    def __init__(self, position, expectation):
        self.position = position
        self.expectation = expectation
        super().__init__(f"SyntaxError at {position}: {expectation}")


class UnboundIdentifier(EquiaffineError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"UnboundIdentifier: {name}")


class DegenerateMetric(EquiaffineError):
    pass


class SingularCurve(EquiaffineError):
    pass


class DegenerateCurve(EquiaffineError):
    pass


class GeodesicRelationUndefined(EquiaffineError):
    pass


class QuadratureFailure(EquiaffineError):
    pass


class ConsistencyError(EquiaffineError):
    pass


class ScenarioError(EquiaffineError):
    pass


# Errors caused by what the user typed, as opposed to what the numbers did
INPUT_ERRORS = (LexError, ExpressionSyntaxError, UnboundIdentifier, ScenarioError)


def is_plain(value):
    """True for plain real numbers (python or numpy)"""
    return isinstance(value, (Real, np.floating, np.integer))


def value_of(scalar):
    """
    Return the plain real value carried by a scalar of any algebra.

    Jets and spatial bundles expose ``value``; nested algebras resolve
    recursively down to the real leading coefficient.
    """
    while not is_plain(scalar):
        scalar = scalar.value
    return float(scalar)


def sign_of(scalar):
    return 1.0 if value_of(scalar) >= 0 else -1.0


def setup_logging(level=None, stream=None):
    """
    Configure the root logger the way the command line tools expect.

    Args:
        level (str or int, optional): logging level. Defaults to conf.log_level.
        stream (file, optional): output stream. Defaults to sys.stderr.
    """
    level = level or conf.log_level
    stream = stream or sys.stderr
    logging.basicConfig(stream=stream, format=conf.log_format, level=level)
