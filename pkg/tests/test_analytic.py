from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st
from scipy.integrate import quad

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
from rcri.distributions import DistributionSpec as D
from rcri.errors import DivergenceError, InvalidParameterError, NoClosedFormError
from rcri.params import MeasureParams as P


def test_table_rows():
    assert rcri_ph_closed_form(D.exponential(1), P(1, 1, 1)) == 0.5
    assert rcri_ph_closed_form(D.uniform(1), P(1, 1, 1)) == pytest.approx(1 / 3, rel=1e-15)
    assert rcri_ph_closed_form(D.pareto1(1, 3), P(1, 1, 1)) == pytest.approx(0.2, rel=1e-15)


def test_remaining_rows_against_direct_formulas():
    s = 1.5 + 0.5 * 2.0
    p = P(1.5, 0.5, 2.0)
    assert rcri_ph_closed_form(D.weibull(2, 3), p) == pytest.approx(math.gamma(1 / 3) / (2 * 3 * s ** (1 / 3)))
    # shape-first GPD row b/((a+1)s - a) with shape a=0.5, scale b=2
    assert rcri_ph_closed_form(D.gpd(2.0, 0.5), p) == pytest.approx(2.0 / (1.5 * s - 0.5))
    assert rcri_ph_closed_form(D.pareto2(3, 2), p) == pytest.approx(3 / (2 * s - 1))


@pytest.mark.parametrize(
    "spec, params, condition",
    [
        (D.pareto1(1, 0.4), P(1, 1, 1), "a*s > 1"),
        (D.pareto2(1, 0.3), P(1, 0.5, 2), "b*s > 1"),
        (D.gpd(1, 4.0), P(0.1, 0.1, 1), "(b+1)*s - b > 0"),
    ],
    ids=str,
)
def test_finiteness_violation_names_condition(spec, params, condition):
    with pytest.raises(DivergenceError, match=re_escape(condition)):
        rcri_ph_closed_form(spec, params)


def re_escape(text):
    import re

    return re.escape(text)


def test_lognormal_has_no_closed_form():
    with pytest.raises(NoClosedFormError):
        rcri_ph_closed_form(D.lognormal(0, 1), P())
    # the quadrature route still works
    oracle = quad(lambda x: D.lognormal(0, 1).survival(x) ** 2, 0, np.inf, epsabs=1e-13)[0]
    assert rcri_ph_quadrature(D.lognormal(0, 1), P()) == pytest.approx(oracle, rel=1e-8)


def test_cregf_examples():
    assert cregf(D.exponential(1), 2) == 0.5
    assert cregf(D.exponential(1), 1) == 1.0
    assert cregf(D.weibull(1, 2), 1) == pytest.approx(math.sqrt(math.pi) / 2, rel=1e-14)


def test_cregf_large_order_stays_finite():
    spec = D.weibull(1, 2)
    got = cregf(spec, 400.0)
    assert got == pytest.approx(math.sqrt(math.pi) / (2 * math.sqrt(400.0)), rel=1e-13)
    assert rcri_ph_quadrature(spec, P(200, 200, 1)) == pytest.approx(got, rel=1e-6)


def test_two_exponentials():
    assert rcri_two_exponentials(1, 1, 1, 1) == 0.5
    # quadrature oracle on exp(-0.1x) exp(-1.6x)
    assert rcri_two_exponentials(0.1, 0.8, 1, 2) == pytest.approx(0.5882352941176471, rel=1e-14)
    assert rcri_two_exponentials(2, 3, 1, 1) == pytest.approx(0.2, rel=1e-15)
    with pytest.raises(InvalidParameterError):
        rcri_two_exponentials(0, 1, 1, 1)


def test_drcri_closed_form_examples():
    assert drcri_closed_form(D.exponential(1), D.exponential(1), P(1, 1, t=0.75)) == 0.5
    assert drcri_closed_form(D.exponential(2), D.exponential(3), P(1, 2, t=1)) == pytest.approx(1 / 8, rel=1e-15)
    with pytest.raises(NoClosedFormError):
        drcri_closed_form(D.exponential(1), D.weibull(1, 2), P())
    with pytest.raises(NoClosedFormError):
        drcri_value(D.weibull(1, 2), None, P(t=1), method="closed")


def test_gpd_drcri_is_linear_in_t():
    spec = D.gpd(1.0, 0.5)
    t = np.array([0.0, 0.5, 1.0])
    v = np.array([drcri_closed_form(spec, None, P(1, 1, 1, ti)) for ti in t])
    collinear = (v[2] - v[1]) / 0.5 - (v[1] - v[0]) / 0.5
    assert abs(collinear) < 1e-10


@pytest.mark.parametrize(
    "spec", [D.gpd(1.0, 0.5), D.gpd(2.0, -0.3), D.pareto2(1.0, 4.0), D.pareto1(2.0, 3.0), D.uniform(3.0), D.exponential(0.4)],
    ids=str,
)
@pytest.mark.parametrize("t", [0.0, 0.8, 2.5])
def test_ph_drcri_closed_form_matches_quadrature(spec, t):
    p = P(1.2, 0.7, 1.6, t)
    assert drcri_value(spec, None, p, method="closed") == pytest.approx(drcri_value(spec, None, p, method="quadrature"), rel=1e-9)


def test_gpd_drcri_constant_from_direct_integration():
    # R(t) = (a + b t) / (b ((1 + 1/b) s - 1)); checked against scipy quad
    a, b, s, t = 1.5, 0.5, 3.0, 0.7
    spec = D.gpd(a, b)
    oracle = quad(lambda x: (spec.survival(x) / spec.survival(t)) ** s, t, np.inf, epsabs=1e-13)[0]
    closed = drcri_closed_form(spec, None, P(1, 1, 2, t))
    assert closed == pytest.approx((a + b * t) / (b * ((1 + 1 / b) * s - 1)), rel=1e-14)
    assert closed == pytest.approx(oracle, rel=1e-9)


def test_derivative_identity_examples():
    assert drcri_derivative_identity(D.exponential(1), D.exponential(1), P(1, 1, t=0.5)) == 0.0
    assert abs(drcri_derivative_identity(D.exponential(2), D.exponential(3), P(1, 2, t=1))) <= 1e-6
    assert abs(drcri_derivative_identity(D.gpd(1.0, 0.5), None, P(1, 1, 2.0, 0.8))) <= 1e-4


@pytest.mark.parametrize("t", [0.0, 0.5, 1.5])
def test_derivative_identity_by_quadrature(t):
    # Weibull/GPD pair: no closed form, R' from quadrature values
    r = drcri_derivative_identity(D.weibull(1, 2.0), D.gpd(1.0, 0.3), P(0.8, 1.4, t=t))
    assert abs(r) <= 1e-4


def test_taylor_zero_perturbation():
    r = taylor_rcri_perturbation("exponential", 1.0, 0.0)
    assert r.approx == r.exact == cregf(D.exponential(1), 2)


def test_taylor_first_order_behaviour():
    r1 = taylor_rcri_perturbation("exponential", 1.0, 0.01)
    r2 = taylor_rcri_perturbation("exponential", 1.0, 0.005)
    assert r1.exact == pytest.approx(1 / 2.01, rel=1e-10)
    assert abs(r1.approx - r1.exact) <= 0.01
    ratio = abs(r2.approx - r2.exact) / abs(r1.approx - r1.exact)
    assert 0.3 <= ratio <= 0.7


def test_taylor_other_families():
    r = taylor_rcri_perturbation("weibull", 2.0, 0.02, P(1, 1), other_params=(1.5,), index=1)
    assert math.isfinite(r.approx) and math.isfinite(r.exact)
    assert abs(r.approx - r.exact) <= 0.05


@pytest.mark.parametrize("family, others", [("uniform", ()), ("pareto1", (3.0,))])
def test_taylor_rejects_support_parameters(family, others):
    with pytest.raises(InvalidParameterError):
        taylor_rcri_perturbation(family, 1.0, 0.01, other_params=others)


def test_amgm_gap_examples():
    e = D.exponential(1)
    assert amgm_upper_bound_gap(e, e, 1, 1) == pytest.approx(0.5, abs=1e-10)
    spec = D.weibull(1.3, 2.0)
    assert amgm_upper_bound_gap(spec, spec, 0.7, 0.7) == pytest.approx(cregf(spec, 1.4), rel=1e-9)
    assert amgm_upper_bound_gap(spec, spec, 0.7, 0.7, half=True) == pytest.approx(0.0, abs=1e-10)


def test_amgm_divergent_terms_reported():
    with pytest.raises(DivergenceError):
        amgm_upper_bound_gap(D.pareto2(1, 1.5), D.exponential(1), 0.3, 1.0)


FAMILY_DRAWS = st.one_of(
    st.builds(D.exponential, st.floats(0.1, 5)),
    st.builds(D.weibull, st.floats(0.2, 4), st.floats(0.4, 4)),
    st.builds(D.gpd, st.floats(0.2, 4), st.floats(-0.8, 0.9)),
    st.builds(D.pareto2, st.floats(0.2, 4), st.floats(1.1, 6)),
    st.builds(D.lognormal, st.floats(-1, 1), st.floats(0.2, 1.5)),
    st.builds(D.uniform, st.floats(0.2, 5)),
)


@given(FAMILY_DRAWS, FAMILY_DRAWS, st.floats(0.3, 2.5), st.floats(0.3, 2.5))
def test_amgm_gap_nonnegative(sx, sy, alpha, beta):
    try:
        gap = amgm_upper_bound_gap(sx, sy, alpha, beta)
    except DivergenceError:
        assume(False)  # the bound needs finite cregf terms
    assert gap >= -1e-10
    assert amgm_upper_bound_gap(sx, sy, alpha, beta, half=True) >= -1e-10


@given(FAMILY_DRAWS, FAMILY_DRAWS, st.floats(0.3, 2.5), st.floats(0.3, 2.5))
def test_swap_symmetry_is_exact(sx, sy, alpha, beta):
    assert rcri_quadrature(sx, sy, alpha, beta) == rcri_quadrature(sy, sx, beta, alpha)


def test_measure_is_not_symmetric_in_laws():
    a = rcri_quadrature(D.exponential(1), D.exponential(2), 1, 2)
    b = rcri_quadrature(D.exponential(2), D.exponential(1), 1, 2)
    assert a == pytest.approx(1 / 5) and b == pytest.approx(1 / 4)
    assert abs(a - b) > 1e-3


@pytest.mark.parametrize("spec", [D.weibull(1, 2), D.gpd(1, 0.4), D.lognormal(0.2, 0.7), D.pareto2(1, 3)], ids=str)
@pytest.mark.parametrize("a", [0.5, 2.0, 10.0])
def test_scale_equivariance(spec, a):
    p = P(1.1, 0.8, 1.7)
    assert rcri_ph_quadrature(spec.scaled(a), p) == pytest.approx(a * rcri_ph_quadrature(spec, p), rel=1e-6)


def test_exponential_drcri_constant_in_t():
    t = np.linspace(0, 5, 21)
    v = [drcri_value(D.exponential(0.6), D.exponential(1.7), P(0.9, 1.3, t=ti), method="quadrature") for ti in t]
    assert max(v) - min(v) <= 1e-10


PH_DRAWS = st.one_of(
    st.builds(D.uniform, st.floats(0.2, 5)),
    st.builds(D.exponential, st.floats(0.1, 5)),
    st.builds(D.weibull, st.floats(0.2, 4), st.floats(0.3, 5)),
    st.builds(D.gpd, st.floats(0.2, 4), st.floats(-0.9, 2.0)),
    st.builds(D.pareto1, st.floats(0.2, 4), st.floats(0.6, 6)),
    st.builds(D.pareto2, st.floats(0.2, 4), st.floats(0.6, 6)),
)


@given(PH_DRAWS, st.floats(0.2, 3), st.floats(0.2, 3), st.floats(0.2, 3))
def test_closed_form_matches_quadrature_property(spec, alpha, beta, theta):
    p = P(alpha, beta, theta)
    try:
        closed = rcri_ph_closed_form(spec, p)
    except DivergenceError:
        with pytest.raises(DivergenceError):
            rcri_ph_quadrature(spec, p, options=None)
        return
    assert rcri_ph_quadrature(spec, p) == pytest.approx(closed, rel=1e-6)
