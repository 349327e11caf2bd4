#!/usr/bin/env python3
"""
Error hierarchy for the matrix-factorisation toolkit
Every error carries the CLI exit code it maps to
"""


class MFError(Exception):
    """Base class for all toolkit errors"""
    exit_code = 3


# Input errors (exit 2)

class ParseError(MFError):
    exit_code = 2

    def __init__(self, message, position=None, source=None):
        self.position = position
        self.source = source
        where = f" at position {position}" if position is not None else ""
        super().__init__(f"{message}{where}")


class UnknownVariable(ParseError):
    pass


# Mathematical preconditions (exit 3)

class ContextMismatch(MFError):
    pass


class NotInIdeal(MFError):
    pass


class NotZeroDimensional(MFError):
    pass


class UnsupportedConnection(MFError):
    pass


class BoundExceeded(MFError):
    pass


class ShapeMismatch(MFError):
    pass


class NotAMorphism(MFError):
    pass


class CharacteristicTooSmall(MFError):
    pass


class PotentialNotBased(MFError):
    pass


class BaseNotField(MFError):
    pass


class VariableClash(MFError):
    pass


class PerturbationNotSmall(MFError):
    pass


class SideConditionsViolated(MFError):
    pass


# Verification failures (exit 4)

class NotAFactorisation(MFError):
    exit_code = 4

    def __init__(self, message, entry=None):
        self.entry = entry
        super().__init__(message)


class HomotopyIdentityFailed(MFError):
    exit_code = 4


class VerificationFailed(MFError):
    exit_code = 4
