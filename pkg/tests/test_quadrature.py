from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from rcri.analytic import cregf
from rcri.distributions import DistributionSpec as D
from rcri.errors import DivergenceError, DomainError, InvalidParameterError
from rcri.params import MeasureParams
from rcri.quadrature import (
    QuadratureOptions,
    SurvivalCurve,
    adaptive_gauss_kronrod,
    drcri_quadrature,
    integrate_survival_product,
    product_integrand,
)


def romberg(f, a, b, levels=18):
    """Plain Romberg table, used as an independent oracle on finite intervals."""
    r = [[0.5 * (b - a) * (f(a) + f(b))]]
    for k in range(1, levels):
        h = (b - a) / 2**k
        mids = a + h * np.arange(1, 2**k, 2)
        row = [0.5 * r[-1][0] + h * float(np.sum(f(mids)))]
        for j in range(1, k + 1):
            row.append(row[j - 1] + (row[j - 1] - r[-1][j - 1]) / (4**j - 1))
        r.append(row)
    return r[-1][-1]


def test_exponential_pair():
    c = D.exponential(1).curve
    res = integrate_survival_product(c, c, 1, 1, lower=0.0)
    assert abs(res.value - 0.5) <= 1e-8
    assert res.abs_err <= max(1e-9, 1e-8 * res.value)


@pytest.mark.parametrize("spec", [D.exponential(2.0), D.weibull(1, 2), D.pareto2(1, 3), D.gpd(1, 0.5), D.uniform(3)], ids=str)
@pytest.mark.parametrize("beta", [0.5, 1.0, 2.5])
def test_diagonal_reduces_to_cregf(spec, beta):
    c = spec.curve
    got = integrate_survival_product(c, c, 1.0, beta).value
    assert got == pytest.approx(cregf(spec, 1 + beta), rel=1e-8)


def test_pareto2_against_romberg():
    c = D.pareto2(1, 3).curve
    got = integrate_survival_product(c, c, 1, 1).value
    # x = u / (1 - u) maps (1 + x)^-6 dx to (1 - u)^4 du on [0, 1)
    oracle = romberg(lambda u: (1 - u) ** 4, 0.0, 1.0)
    assert oracle == pytest.approx(0.2, abs=1e-14)
    assert abs(got - 0.2) <= 1e-8
    assert abs(got - oracle) <= 1e-8


def test_pareto1_integrates_from_support_start():
    c = D.pareto1(1, 3).curve
    assert integrate_survival_product(c, c, 1, 1).value == pytest.approx(0.2, rel=1e-10)
    with pytest.raises(DomainError):
        integrate_survival_product(c, c, 1, 1, lower=0.5)


@pytest.mark.parametrize(
    "spec, s, expected",
    [
        (D.pareto1(1, 0.6), 2.0, 5.0),  # slow power-law tail, x^-1.2
        (D.pareto2(1, 0.55), 2.0, 10.0),  # x^-1.1
        (D.gpd(2, -0.5), 2.0, 4 / 3),  # bounded support
        (D.weibull(1, 0.3), 2.0, math.gamma(1 / 0.3) / (0.3 * 2 ** (1 / 0.3))),
    ],
    ids=str,
)
def test_hard_tails(spec, s, expected):
    c = spec.curve
    assert integrate_survival_product(c, c, s / 2, s / 2).value == pytest.approx(expected, rel=1e-7)


def test_lognormal_matches_scipy_quad():
    spec = D.lognormal(0, 1)
    c = spec.curve
    oracle = quad(lambda x: spec.survival(x) ** 2, 0, np.inf, epsabs=1e-13, epsrel=1e-12)[0]
    assert integrate_survival_product(c, c, 1, 1).value == pytest.approx(oracle, rel=1e-8)


@pytest.mark.parametrize("spec, alpha", [(D.pareto1(1, 0.5), 1.0), (D.pareto2(1, 0.4), 1.0), (D.pareto1(1, 0.501), 1.0)], ids=str)
def test_divergent_tail_reported(spec, alpha):
    c = spec.curve
    with pytest.raises(DivergenceError):
        integrate_survival_product(c, c, alpha, alpha)


def test_tail_ceiling_is_configurable():
    c = D.pareto2(1, 0.55).curve
    with pytest.raises(DivergenceError):
        integrate_survival_product(c, c, 1, 1, options=QuadratureOptions(tail_ceiling=10.0))


def test_nonpositive_exponents_rejected():
    c = D.exponential(1).curve
    with pytest.raises(InvalidParameterError):
        integrate_survival_product(c, c, 0.0, 1.0)


def test_survival_curve_construction_checks():
    with pytest.raises(InvalidParameterError):
        SurvivalCurve(eval=lambda x: np.minimum(1.0, 0.1 + 0.01 * np.asarray(x)))
    with pytest.raises(InvalidParameterError):
        SurvivalCurve(eval=lambda x: np.zeros_like(np.asarray(x, dtype=float)))
    c = SurvivalCurve(eval=lambda x: np.exp(-np.maximum(np.asarray(x), 0.0)))
    assert float(c.log(np.array([2.0]))[0]) == pytest.approx(-2.0)


# -- DRCRI ------------------------------------------------------------------------------


@pytest.mark.parametrize("t", [0.0, 0.3, 1.0, 7.5])
def test_drcri_exponential_pair(t):
    sx, sy = D.exponential(2).curve, D.exponential(3).curve
    got = drcri_quadrature(sx, sy, MeasureParams(1, 2, t=t))
    assert abs(got - 1 / 8) <= 1e-8


def test_drcri_at_zero_equals_plain_integral():
    sx, sy = D.weibull(1, 2).curve, D.gpd(1, 0.3).curve
    a = drcri_quadrature(sx, sy, MeasureParams(1.5, 0.7))
    b = integrate_survival_product(sx, sy, 1.5, 0.7, lower=0.0).value
    assert a == pytest.approx(b, rel=1e-12)


def test_drcri_weibull_two_rules():
    spec = D.weibull(1, 2)
    got = drcri_quadrature(spec.curve, spec.curve, MeasureParams(1, 1, t=1.0))
    x = np.linspace(1.0, 12.0, 1_000_001)
    y = np.exp(-2 * (x**2 - 1.0))
    trap = float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(x)))
    assert abs(got - trap) <= 1e-6


def test_drcri_integrand_is_one_at_t():
    sx, sy = D.lognormal(0, 1).curve, D.pareto2(2, 3).curve
    for t in (0.2, 1.0, 4.0):
        f = product_integrand(sx, sy, 1.3, 0.4, normalize_at=t)
        assert float(f(np.array([t]))[0]) == 1.0


def test_drcri_beyond_support():
    c = D.uniform(1).curve
    with pytest.raises(DomainError):
        drcri_quadrature(c, c, MeasureParams(t=1.5))


# -- properties ----------------------------------------------------------------------------

positive = st.floats(0.2, 4.0)


@given(positive, positive, positive, st.floats(0.3, 3.0), st.floats(0.3, 3.0))
def test_monotone_in_alpha(a1, a2, beta, lam, k):
    a1, a2 = sorted((a1, a2))
    sx, sy = D.weibull(lam, k).curve, D.exponential(1.0).curve
    v1 = integrate_survival_product(sx, sy, a1, beta).value
    v2 = integrate_survival_product(sx, sy, a2, beta).value
    assert v1 >= v2 - 1e-9


@given(st.floats(0.3, 3.0), st.floats(0.5, 5.0), st.floats(0.2, 3.0))
def test_halving_tolerance_is_consistent(alpha, b, lam):
    sx, sy = D.pareto2(1.0, b).curve, D.exponential(lam).curve
    loose = integrate_survival_product(sx, sy, alpha, 1.0, options=QuadratureOptions(1e-8, 1e-7))
    tight = integrate_survival_product(sx, sy, alpha, 1.0, options=QuadratureOptions(5e-9, 5e-8))
    assert abs(loose.value - tight.value) <= loose.abs_err + tight.abs_err


def test_adaptive_gk_polynomial_and_kink():
    assert adaptive_gauss_kronrod(lambda x: x**5, 0, 2, 1e-12).value == pytest.approx(64 / 6, rel=1e-14)
    got = adaptive_gauss_kronrod(lambda x: np.abs(x - 0.3), 0, 1, 1e-12, seeds=[0.3]).value
    assert got == pytest.approx(0.5 * 0.09 + 0.5 * 0.49, rel=1e-13)
    assert adaptive_gauss_kronrod(np.exp, 1, 1, 1e-9).value == 0.0


@pytest.mark.parametrize("k, a, s", [(3.845302987216359, 0.7956120090831007, 11.16), (50.0, 0.3, 40.0), (1e-3, 2.0, 30.0)])
def test_mass_concentrated_at_lower_end_is_found(k, a, s):
    # (k/x)**(a*s) on [k, inf) has all its mass within ~k/(a*s) of k, far below the 0.999 quantile
    spec = D.pareto1(k, a)
    got = integrate_survival_product(spec.curve, spec.curve, s / 2, s / 2).value
    assert got == pytest.approx(k / (a * s - 1), rel=1e-8)
