"""Quick consistency sweep behind ``rcri selftest``."""

from __future__ import annotations

from typing import NamedTuple

from rcri.analytic import drcri_derivative_identity, rcri_ph_closed_form, rcri_ph_quadrature
from rcri.characterization import (
    check_constant_drcri,
    check_hazard_reciprocal,
    check_linear_drcri,
    check_mrl_proportional,
)
from rcri.distributions import DistributionSpec as D
from rcri.params import MeasureParams
from rcri.quadrature import QuadratureOptions


class SelftestResult(NamedTuple):
    name: str
    ok: bool
    detail: str


SWEEP = (
    D.uniform(2.0),
    D.exponential(0.7),
    D.weibull(1.5, 0.6),
    D.gpd(1.2, 0.4),
    D.gpd(2.0, -0.3),
    D.pareto1(1.5, 2.5),
    D.pareto2(2.0, 3.0),
)
SWEEP_PARAMS = (MeasureParams(1, 1, 1), MeasureParams(0.5, 2.0, 1.5), MeasureParams(2.0, 0.3, 0.8))
GRID = tuple(0.25 * i for i in range(9))


def run_selftest(options: QuadratureOptions | None = None) -> list[SelftestResult]:
    out: list[SelftestResult] = []
    for spec in SWEEP:
        for p in SWEEP_PARAMS:
            closed = rcri_ph_closed_form(spec, p)
            quad = rcri_ph_quadrature(spec, p, options)
            rel = abs(closed - quad) / closed
            out.append(SelftestResult(f"closed-vs-quadrature {spec} a={p.alpha:g} b={p.beta:g} th={p.theta:g}",
                                      rel <= 1e-6, f"rel_err={rel:.3e}"))
    p = MeasureParams(1, 1, 2)
    witnesses = [
        ("constant exp/exp holds", check_constant_drcri(D.exponential(1), D.exponential(0.5), 1, 1, GRID), True),
        ("constant exp/gpd fails", check_constant_drcri(D.exponential(1), D.gpd(0.5, 1), 1, 1, GRID), False),
        ("linear gpd holds", check_linear_drcri(D.gpd(1, 0.5), p, GRID), True),
        ("linear weibull fails", check_linear_drcri(D.weibull(1, 3), MeasureParams(), GRID), False),
        ("hazard gpd holds", check_hazard_reciprocal(D.gpd(1, 0.5), p, GRID), True),
        ("hazard weibull fails", check_hazard_reciprocal(D.weibull(1, 3), MeasureParams(), GRID), False),
        ("mrl gpd holds", check_mrl_proportional(D.gpd(1, 0.5), p, GRID), True),
        ("mrl weibull fails", check_mrl_proportional(D.weibull(1, 3), MeasureParams(), GRID), False),
    ]
    for name, verdict, expected in witnesses:
        out.append(SelftestResult(name, verdict.holds == expected, f"residual={verdict.fit_residual:.3e}"))
    for t in (0.0, 0.5, 1.5):
        r = drcri_derivative_identity(D.gpd(1, 0.5), None, MeasureParams(1, 2, 1.5, t))
        out.append(SelftestResult(f"derivative identity gpd t={t:g}", abs(r) <= 1e-4, f"residual={r:.3e}"))
    return out
