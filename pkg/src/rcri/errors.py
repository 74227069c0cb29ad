"""Exception hierarchy shared by every module."""

from __future__ import annotations


class RCRIError(Exception):
    """Base class for all errors raised by the package."""


class InvalidParameterError(RCRIError, ValueError):
    """A distribution or measure parameter is outside its admissible range."""


class DomainError(RCRIError, ValueError):
    """A quantity was evaluated outside the region where it is defined."""


class DivergenceError(RCRIError, ArithmeticError):
    """An improper integral does not converge (or a finiteness condition fails)."""


class NoClosedFormError(RCRIError, NotImplementedError):
    """No closed-form expression is available; use the quadrature route."""


class InputError(RCRIError, ValueError):
    """Malformed user input (files, spec strings, scenario files)."""
