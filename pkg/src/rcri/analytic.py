"""Closed-form RCRI/DRCRI values and the identities they satisfy.

Closed forms are for the proportional-hazards (PH) pair ``(S, S**theta)``,
for which the measure reduces to ``int S(x)**s dx`` with
``s = alpha + beta * theta``.  Integrals start at the support infimum
(``k`` for ``pareto1``).
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np
from scipy.special import gammaln

from rcri.distributions import DistributionSpec
from rcri.errors import DivergenceError, InvalidParameterError, NoClosedFormError
from rcri.params import MeasureParams
from rcri.quadrature import (
    QuadratureOptions,
    SurvivalCurve,
    drcri_quadrature,
    integrate_survival_product,
)

__all__ = [
    "MeasureParams",
    "TaylorResult",
    "amgm_upper_bound_gap",
    "cregf",
    "cregf_value",
    "drcri_closed_form",
    "drcri_derivative_identity",
    "drcri_value",
    "ph_curve",
    "rcri_ph_closed_form",
    "rcri_ph_quadrature",
    "rcri_quadrature",
    "rcri_two_exponentials",
    "taylor_rcri_perturbation",
]

_TIGHT = QuadratureOptions(abs_tol=0.0, rel_tol=1e-12)


def _power_integral(spec: DistributionSpec, s: float) -> float:
    """``int_{inf support}^inf S(x)**s dx`` in closed form."""
    if not (math.isfinite(s) and s > 0):
        raise InvalidParameterError(f"exponent must be positive, got {s}")
    fam, p = spec.family, spec.params
    if fam == "uniform":
        return p[0] / (s + 1.0)
    if fam == "exponential":
        return math.exp(-math.log(p[0]) - math.log(s))
    if fam == "weibull":
        lam, k = p
        return math.exp(gammaln(1.0 / k) - math.log(lam * k) - math.log(s) / k)
    if fam == "gpd":
        a, b = p
        denom = (b + 1.0) * s - b
        if denom <= 0:
            raise DivergenceError(f"gpd power integral needs (b+1)*s - b > 0; got {denom:.6g}")
        return a / denom
    if fam == "pareto1":
        k, a = p
        if a * s <= 1:
            raise DivergenceError(f"pareto1 power integral needs a*s > 1; got a*s = {a * s:.6g}")
        return k / (a * s - 1.0)
    if fam == "pareto2":
        a, b = p
        if b * s <= 1:
            raise DivergenceError(f"pareto2 power integral needs b*s > 1; got b*s = {b * s:.6g}")
        return a / (b * s - 1.0)
    raise NoClosedFormError(f"no closed form for {fam}; use rcri_ph_quadrature / rcri_quadrature")


def rcri_ph_closed_form(spec: DistributionSpec, params: MeasureParams) -> float:
    """RCRI between ``S`` and its PH transform ``S**theta``.

    >>> rcri_ph_closed_form(DistributionSpec.exponential(1.0), MeasureParams(1, 1, 1))
    0.5
    """
    return _power_integral(spec, params.ph_order)


def cregf(spec: DistributionSpec, order: float) -> float:
    """Cumulative residual entropy generating function ``int S(x)**order dx`` (closed form)."""
    return _power_integral(spec, order)


def cregf_value(spec: DistributionSpec, order: float, options: QuadratureOptions | None = None) -> float:
    """:func:`cregf`, falling back to quadrature for families without a closed form."""
    try:
        return cregf(spec, order)
    except NoClosedFormError:
        c = spec.curve
        return integrate_survival_product(c, c, order / 2.0, order / 2.0, options=options or _TIGHT).value


def rcri_two_exponentials(lam1: float, lam2: float, alpha: float, beta: float) -> float:
    """Exact RCRI of ``Exp(lam1)`` and ``Exp(lam2)``: ``1 / (alpha lam1 + beta lam2)``."""
    if not (lam1 > 0 and lam2 > 0 and alpha > 0 and beta > 0):
        raise InvalidParameterError("rates and exponents must be positive")
    return 1.0 / (alpha * lam1 + beta * lam2)


def ph_curve(spec: DistributionSpec, theta: float) -> SurvivalCurve:
    """Survival curve of the PH transform ``S(x)**theta``."""
    if not theta > 0:
        raise InvalidParameterError("theta must be positive")
    base = spec.curve
    return SurvivalCurve(
        eval=lambda x: np.exp(theta * np.asarray(spec.log_survival(x))),
        log_eval=lambda x: theta * np.asarray(spec.log_survival(x)),
        support_infimum=base.support_infimum,
        upper_hint=base.upper_hint,
        breakpoints=base.breakpoints,
    )


def rcri_quadrature(
    spec_x: DistributionSpec,
    spec_y: DistributionSpec,
    alpha: float,
    beta: float,
    options: QuadratureOptions | None = None,
) -> float:
    """RCRI of two laws by quadrature over ``[max support infimum, inf)``."""
    return integrate_survival_product(spec_x.curve, spec_y.curve, alpha, beta, options=options).value


def rcri_ph_quadrature(
    spec: DistributionSpec, params: MeasureParams, options: QuadratureOptions | None = None
) -> float:
    """RCRI of the PH pair ``(S, S**theta)`` by quadrature."""
    return integrate_survival_product(
        spec.curve, ph_curve(spec, params.theta), params.alpha, params.beta, options=options
    ).value


def _drcri_ph_closed(spec: DistributionSpec, s: float, t: float) -> float:
    # int_t^inf (S(x)/S(t))**s dx for the PH pair.
    fam, p = spec.family, spec.params
    if fam == "exponential":
        return 1.0 / (p[0] * s)
    if fam == "uniform":
        (a,) = p
        if t >= a:
            raise InvalidParameterError("t lies beyond the uniform support")
        return (a - t) / (s + 1.0)
    if fam == "gpd":
        a, b = p
        if b < 0 and t >= -a / b:
            raise InvalidParameterError("t lies beyond the gpd support")
        return (a + b * t) * _power_integral(DistributionSpec.gpd(1.0, b), s)
    if fam == "pareto1":
        k, a = p
        # Below the support start the integral is clipped to [k, inf), as
        # for every other measure, so the value equals the t = 0 value.
        return max(t, k) * _power_integral(DistributionSpec.pareto1(1.0, a), s)
    if fam == "pareto2":
        a, b = p
        return (a + t) * _power_integral(DistributionSpec.pareto2(1.0, b), s)
    raise NoClosedFormError(f"no closed-form DRCRI for {fam}; use drcri_value with quadrature")


def drcri_closed_form(
    spec_x: DistributionSpec,
    spec_y: DistributionSpec | None,
    params: MeasureParams,
) -> float:
    """DRCRI at age ``params.t`` in closed form.

    ``spec_y=None`` means the PH partner ``S_x**theta``.  An explicit pair has
    a closed form when both laws are exponential (the value does not depend
    on ``t``) or when the two laws coincide.
    """
    a, b, t = params.alpha, params.beta, params.t
    if spec_y is None:
        return _drcri_ph_closed(spec_x, params.ph_order, t)
    if spec_x.family == "exponential" and spec_y.family == "exponential":
        return rcri_two_exponentials(spec_x.params[0], spec_y.params[0], a, b)
    if spec_x == spec_y:
        return _drcri_ph_closed(spec_x, a + b, t)
    raise NoClosedFormError(f"no closed-form DRCRI for the pair ({spec_x}, {spec_y})")


def _pair_curves(spec_x, spec_y, params):
    sy = ph_curve(spec_x, params.theta) if spec_y is None else spec_y.curve
    return spec_x.curve, sy


def drcri_value(
    spec_x: DistributionSpec,
    spec_y: DistributionSpec | None,
    params: MeasureParams,
    method: str = "auto",
    options: QuadratureOptions | None = None,
) -> float:
    """DRCRI by closed form (``method='closed'``), quadrature, or whichever exists (``auto``)."""
    if method not in ("auto", "closed", "quadrature"):
        raise InvalidParameterError(f"unknown method {method!r}")
    if method != "quadrature":
        try:
            return drcri_closed_form(spec_x, spec_y, params)
        except NoClosedFormError:
            if method == "closed":
                raise
    sx, sy = _pair_curves(spec_x, spec_y, params)
    return drcri_quadrature(sx, sy, params, options)


def drcri_derivative_identity(
    spec_x: DistributionSpec,
    spec_y: DistributionSpec | None,
    params: MeasureParams,
    step: float | None = None,
) -> float:
    """Residual of ``R'(t) = (beta h2(t) + alpha h1(t)) R(t) - 1``.

    ``R'`` is a central difference of the DRCRI (one-sided second-order
    difference when ``t`` is closer to 0 than the step).  ``spec_y=None``
    selects the PH partner, whose hazard is ``theta * h1``.
    """
    t = params.t
    h = step if step is not None else 1e-4 * max(1.0, t)

    def value(at: float) -> float:
        return drcri_value(spec_x, spec_y, MeasureParams(params.alpha, params.beta, params.theta, at),
                           options=_TIGHT)

    if t >= h:
        deriv = (value(t + h) - value(t - h)) / (2.0 * h)
    else:
        deriv = (-3.0 * value(t) + 4.0 * value(t + h) - value(t + 2.0 * h)) / (2.0 * h)
    h1 = float(spec_x.hazard(t))
    h2 = params.theta * h1 if spec_y is None else float(spec_y.hazard(t))
    return deriv - ((params.beta * h2 + params.alpha * h1) * value(t) - 1.0)


class TaylorResult(NamedTuple):
    approx: float
    exact: float


# Parameters that move the support boundary make the survival function
# non-differentiable in the parameter at that boundary.
_NON_DIFFERENTIABLE = {("uniform", 0), ("pareto1", 0)}


def taylor_rcri_perturbation(
    family: str,
    theta0: float,
    delta: float,
    params: MeasureParams = MeasureParams(),
    other_params: tuple[float, ...] = (),
    index: int = 0,
) -> TaylorResult:
    """First-order approximation of RCRI between a law and a perturbed copy.

    The perturbed parameter sits at position ``index`` of the family's
    parameter tuple; ``other_params`` fills the remaining positions in order.
    ``approx = cregf(spec(theta0), alpha + beta) + beta / (alpha + beta) * delta``
    and ``exact`` is the quadrature of the measure between ``spec(theta0)``
    and ``spec(theta0 + delta)``.
    """
    spec0 = _family_member(family, theta0, other_params, index)
    if (spec0.family, index) in _NON_DIFFERENTIABLE:
        raise InvalidParameterError(
            f"{spec0.family} parameter {index} sets the support boundary; survival is not differentiable in it"
        )
    spec1 = _family_member(family, theta0 + delta, other_params, index)
    a, b = params.alpha, params.beta
    base = cregf_value(spec0, a + b)
    approx = base + (b / (a + b)) * delta
    exact = rcri_quadrature(spec0, spec1, a, b, options=_TIGHT) if delta != 0 else base
    return TaylorResult(approx, exact)


def _family_member(family: str, value: float, others: tuple[float, ...], index: int) -> DistributionSpec:
    others = list(others)
    others.insert(index, value)
    return DistributionSpec(family, tuple(others))


def amgm_upper_bound_gap(
    spec_x: DistributionSpec,
    spec_y: DistributionSpec,
    alpha: float,
    beta: float,
    half: bool = False,
    options: QuadratureOptions | None = None,
) -> float:
    """Gap between the CREGF bound and the RCRI.

    Returns ``c * (cregf(X, 2 alpha) + cregf(Y, 2 beta)) - RCRI(X, Y)`` with
    ``c = 1`` (the bound as usually quoted) or ``c = 1/2`` when ``half`` is
    set (the sharper arithmetic-geometric mean bound).  Both gaps are >= 0.
    """
    opts = options or _TIGHT
    bound = cregf_value(spec_x, 2.0 * alpha, opts) + cregf_value(spec_y, 2.0 * beta, opts)
    if half:
        bound *= 0.5
    return bound - rcri_quadrature(spec_x, spec_y, alpha, beta, options=opts)
