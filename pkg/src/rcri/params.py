"""Measure parameters shared by the analytic, quadrature and estimator layers."""

from __future__ import annotations

import math
from dataclasses import dataclass

from rcri.errors import InvalidParameterError


@dataclass(frozen=True)
class MeasureParams:
    """Exponents, PH constant and truncation age of an RCRI/DRCRI evaluation.

    ``alpha`` weights the first survival function, ``beta`` the second,
    ``theta`` is the proportional-hazards constant (second curve is the
    first raised to ``theta``) and ``t`` the truncation age (``t = 0`` gives
    the plain, non-dynamic measure).
    """

    alpha: float = 1.0
    beta: float = 1.0
    theta: float = 1.0
    t: float = 0.0

    def __post_init__(self) -> None:
        for name in ("alpha", "beta", "theta"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise InvalidParameterError(f"{name} must be a positive finite real, got {value!r}")
        if not (math.isfinite(self.t) and self.t >= 0):
            raise InvalidParameterError(f"t must be a nonnegative finite real, got {self.t!r}")

    @property
    def ph_order(self) -> float:
        """Exponent ``alpha + beta * theta`` of the survival power under PH."""
        return self.alpha + self.beta * self.theta
