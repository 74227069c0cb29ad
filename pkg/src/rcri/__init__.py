"""Relative cumulative residual information (RCRI) and its dynamic version.

Closed forms, quadrature, kernel estimators, Monte Carlo studies,
characterization checks and an epoch-photometry pipeline.
"""

from __future__ import annotations

__version__ = "0.1.0"

from rcri.analytic import (
    amgm_upper_bound_gap,
    cregf,
    drcri_closed_form,
    drcri_derivative_identity,
    drcri_value,
    rcri_ph_closed_form,
    rcri_ph_quadrature,
    rcri_quadrature,
    rcri_two_exponentials,
    taylor_rcri_perturbation,
)
from rcri.distributions import DistributionSpec, Sample, mle_exponential, parse_spec
from rcri.errors import (
    DivergenceError,
    DomainError,
    InputError,
    InvalidParameterError,
    NoClosedFormError,
    RCRIError,
)
from rcri.estimators import KernelSurvivalEstimate, drcri_hat, kernel_survival, rcri_hat, silverman_bandwidth
from rcri.params import MeasureParams
from rcri.quadrature import QuadratureOptions, SurvivalCurve, drcri_quadrature, integrate_survival_product

__all__ = [
    "DistributionSpec",
    "DivergenceError",
    "DomainError",
    "InputError",
    "InvalidParameterError",
    "KernelSurvivalEstimate",
    "MeasureParams",
    "NoClosedFormError",
    "QuadratureOptions",
    "RCRIError",
    "Sample",
    "SurvivalCurve",
    "amgm_upper_bound_gap",
    "cregf",
    "drcri_closed_form",
    "drcri_derivative_identity",
    "drcri_hat",
    "drcri_quadrature",
    "drcri_value",
    "integrate_survival_product",
    "kernel_survival",
    "mle_exponential",
    "parse_spec",
    "rcri_hat",
    "rcri_ph_closed_form",
    "rcri_ph_quadrature",
    "rcri_quadrature",
    "rcri_two_exponentials",
    "silverman_bandwidth",
    "taylor_rcri_perturbation",
]
