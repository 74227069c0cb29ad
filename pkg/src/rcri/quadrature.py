"""Adaptive quadrature of survival-function products over half-lines.

Every other module checks itself against :func:`integrate_survival_product`,
so the routine is written to be robust rather than fast-at-all-costs:

* local rule is the 7/15-point Gauss-Kronrod pair, evaluated for all active
  intervals in one vectorised call, with the QUADPACK error heuristic;
* the half-line is covered by panels of doubling width.  Tails that decay
  faster than geometric panels stop as soon as a panel is negligible; power
  law tails are closed by extrapolating the (asymptotically geometric)
  sequence of panel contributions;
* powers are taken as ``exp(alpha * log S)`` so that tiny survival values
  never produce ``0 ** alpha`` artefacts.

Curve evaluation callables must be vectorised and free of side effects; the
integrator may call them in any order and from several processes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from rcri.errors import DivergenceError, DomainError, InvalidParameterError
from rcri.params import MeasureParams

__all__ = [
    "QuadratureOptions",
    "QuadResult",
    "SurvivalCurve",
    "adaptive_gauss_kronrod",
    "drcri_quadrature",
    "integrate_survival_product",
    "product_integrand",
]

ArrayFunc = Callable[[np.ndarray], np.ndarray]

# Gauss-Kronrod 7/15 abscissae (non-negative half) and weights.
_XGK = np.array(
    [
        0.991455371120812639206854697526329,
        0.949107912342758524526189684047851,
        0.864864423359769072789712788640926,
        0.741531185599394439863864773280788,
        0.586087235467691130294144845693013,
        0.405845151377397166906606412076961,
        0.207784955007898467600689403773245,
        0.000000000000000000000000000000000,
    ]
)
_WGK = np.array(
    [
        0.022935322010529224963732008058970,
        0.063092092629978553290700663189204,
        0.104790010322250183839876322541518,
        0.140653259715525918745189590510238,
        0.169004726639267902826583426598550,
        0.190350578064785409913256402421014,
        0.204432940075298892414161999234649,
        0.209482141084727828012999174891714,
    ]
)
_WG = np.array(
    [
        0.129484966168869693270611432679082,
        0.279705391489276667901467771423780,
        0.381830050505118944950369775488975,
        0.417959183673469387755102040816327,
    ]
)
# Full 15-node layout on [-1, 1]: negative half, centre, positive half.
_NODES = np.concatenate([-_XGK[:-1], [0.0], _XGK[:-1][::-1]])
_KRONROD_W = np.concatenate([_WGK[:-1], [_WGK[-1]], _WGK[:-1][::-1]])
_GAUSS_W = np.zeros(15)
_GAUSS_W[[1, 3, 5]] = _WG[:3]
_GAUSS_W[7] = _WG[3]
_GAUSS_W[[9, 11, 13]] = _WG[:3][::-1]

_EPS = np.finfo(float).eps
# Panel ratios closer to 1 than this are treated as non-decaying (divergent).
_MAX_EXTRAPOLATION_RATIO = 0.99
# Probes of the body panel reach width / 2**40, about 1e-12 of it.
_GRADING_DEPTH = 40
_TINY = np.finfo(float).tiny


@dataclass(frozen=True)
class QuadratureOptions:
    """Error targets for the adaptive integrator.

    The reported absolute error estimate is driven below
    ``max(abs_tol, rel_tol * |value|)``.  ``tail_ceiling`` bounds how far
    the panel sequence may extend before the integral is declared divergent.
    """

    abs_tol: float = 1e-9
    rel_tol: float = 1e-8
    tail_ceiling: float = 1e12
    tail_tol: float = 1e-10
    max_intervals: int = 4000

    def __post_init__(self) -> None:
        if self.abs_tol < 0 or self.rel_tol < 0 or (self.abs_tol == 0 and self.rel_tol == 0):
            raise InvalidParameterError("need abs_tol >= 0, rel_tol >= 0, not both zero")
        if not self.tail_ceiling > 0:
            raise InvalidParameterError("tail_ceiling must be positive")

    def target(self, value: float) -> float:
        return max(self.abs_tol, self.rel_tol * abs(value))


DEFAULT_OPTIONS = QuadratureOptions()


class QuadResult(NamedTuple):
    value: float
    abs_err: float


def _spot_check_range(curve: "SurvivalCurve") -> tuple[float, float]:
    if math.isfinite(curve.support_infimum):
        lo = curve.support_infimum
    elif curve.breakpoints:
        lo = min(curve.breakpoints)
    else:
        lo = -10.0
    hi = curve.upper_hint if curve.upper_hint is not None else lo + 10.0 * (1.0 + abs(lo))
    if hi <= lo:
        hi = lo + 1.0
    return lo, hi


@dataclass(frozen=True, eq=False)
class SurvivalCurve:
    """A nonincreasing function ``S: R -> [0, 1]`` prepared for integration.

    Parameters
    ----------
    eval : callable
        Vectorised survival function.
    support_infimum : float
        Left end of the support (``-inf`` allowed for curves defined on R).
    upper_hint : float, optional
        A point beyond which the curve is negligible; used to size the first
        integration panel.
    log_eval : callable, optional
        Vectorised ``log S``; supplied when it is more accurate than
        ``log(eval(x))`` deep in the tail.
    breakpoints : sequence of float
        Points where the integrand is known to have kinks or concentrated
        curvature; the integrator starts subdivision there.
    validate : bool
        Run the monotonicity spot check (64 random ordered pairs).
    """

    eval: ArrayFunc
    support_infimum: float = 0.0
    upper_hint: float | None = None
    log_eval: ArrayFunc | None = None
    breakpoints: tuple[float, ...] = field(default=())
    validate: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "breakpoints", tuple(float(b) for b in self.breakpoints))
        if not self.validate:
            return
        start = self.support_infimum if math.isfinite(self.support_infimum) else -np.inf
        s0 = float(np.asarray(self.eval(np.array([start])))[0])
        if not (0.0 < s0 <= 1.0):
            raise InvalidParameterError(f"curve value at support infimum must lie in (0, 1], got {s0}")
        lo, hi = _spot_check_range(self)
        rng = np.random.default_rng(0x5EED)
        pts = np.sort(rng.uniform(lo, hi, size=(64, 2)), axis=1)
        vals = np.asarray(self.eval(pts.ravel()), dtype=float).reshape(64, 2)
        if np.any(vals[:, 0] < vals[:, 1] - 1e-12):
            raise InvalidParameterError("survival curve is not nonincreasing")
        if np.any((vals < 0) | (vals > 1 + 1e-12)):
            raise InvalidParameterError("survival curve leaves [0, 1]")

    def __call__(self, x):
        return self.eval(x)

    def log(self, x: np.ndarray) -> np.ndarray:
        if self.log_eval is not None:
            return self.log_eval(x)
        s = np.clip(np.asarray(self.eval(x), dtype=float), 0.0, 1.0)
        with np.errstate(divide="ignore"):
            return np.log(s)


def product_integrand(
    sx: SurvivalCurve,
    sy: SurvivalCurve,
    alpha: float,
    beta: float,
    normalize_at: float | None = None,
) -> ArrayFunc:
    """Return ``x -> Sx(x)**alpha * Sy(x)**beta``, optionally divided by its value at ``t``.

    With ``normalize_at=t`` each curve is divided by its value at ``t``, which
    is the DRCRI integrand; it equals exactly 1 at ``x = t``.
    """
    if normalize_at is None:
        cx = cy = 0.0
    else:
        t = np.array([float(normalize_at)])
        cx = float(sx.log(t)[0])
        cy = float(sy.log(t)[0])
        if not (math.isfinite(cx) and math.isfinite(cy)):
            raise DomainError(f"survival vanishes at truncation point t={normalize_at}")

    def integrand(x):
        x = np.asarray(x, dtype=float)
        lx = sx.log(x)
        ly = sy.log(x)
        with np.errstate(invalid="ignore"):
            expo = alpha * (lx - cx) + beta * (ly - cy)
        expo = np.where(np.isnan(expo), -np.inf, expo)
        return np.exp(np.minimum(expo, 0.0) if normalize_at is not None else expo)

    return integrand


def _gk15(f: ArrayFunc, a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    centre = 0.5 * (a + b)
    half = 0.5 * (b - a)
    x = centre[:, None] + half[:, None] * _NODES[None, :]
    fx = np.asarray(f(x.ravel()), dtype=float).reshape(x.shape)
    resk = fx @ _KRONROD_W
    resg = fx @ _GAUSS_W
    resabs = np.abs(fx) @ _KRONROD_W
    mean = 0.5 * resk
    resasc = np.abs(fx - mean[:, None]) @ _KRONROD_W
    err = np.abs((resk - resg) * half)
    resasc = resasc * np.abs(half)
    resabs = resabs * np.abs(half)
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = resasc * np.minimum(1.0, (200.0 * err / resasc) ** 1.5)
    err = np.where((resasc != 0) & (err != 0), scaled, err)
    floor = 50.0 * _EPS * resabs
    err = np.where(resabs > _TINY / (50.0 * _EPS), np.maximum(err, floor), err)
    return resk * half, err


def adaptive_gauss_kronrod(
    f: ArrayFunc,
    a: float,
    b: float,
    tol: float,
    seeds: Sequence[float] = (),
    max_intervals: int = 4000,
    rel_tol: float = 0.0,
) -> QuadResult:
    """Integrate ``f`` over ``[a, b]`` to absolute error ``max(tol, rel_tol * |I|)``.

    Subdivision starts from ``seeds`` (points inside ``(a, b)``).  An interval
    is accepted once its error estimate falls below its width share of the
    target; the others are bisected.  If ``max_intervals`` is reached the
    remaining intervals are accepted as they are and their error estimates
    are still reported.
    """
    if not b > a:
        return QuadResult(0.0, 0.0)
    inner = np.asarray([s for s in seeds if a < s < b], dtype=float)
    edges = np.unique(np.concatenate([[a], inner, [b]]))
    lo, hi = edges[:-1], edges[1:]
    span = b - a
    values: list[np.ndarray] = []
    errors: list[np.ndarray] = []
    accepted_sum = 0.0
    n_done = 0
    while lo.size:
        val, err = _gk15(f, lo, hi)
        estimate = accepted_sum + float(val.sum())
        target = max(tol, rel_tol * abs(estimate))
        width = hi - lo
        tiny = width <= 1e-13 * np.maximum(np.abs(lo), np.abs(hi)) + 1e-300
        accept = (err <= target * width / span) | tiny
        if n_done + 2 * lo.size > max_intervals:
            accept[:] = True
        values.append(val[accept])
        errors.append(err[accept])
        accepted_sum += float(val[accept].sum())
        n_done += int(accept.sum())
        lo, hi = lo[~accept], hi[~accept]
        mid = 0.5 * (lo + hi)
        lo, hi = np.concatenate([lo, mid]), np.concatenate([mid, hi])
    value = math.fsum(np.concatenate(values).tolist())
    error = math.fsum(np.concatenate(errors).tolist())
    return QuadResult(value, error)


def _integrate_half_line(
    f: ArrayFunc,
    lower: float,
    first_width: float,
    seeds: Sequence[float],
    options: QuadratureOptions,
) -> QuadResult:
    body_end = lower + first_width
    body = adaptive_gauss_kronrod(
        f, lower, body_end, tol=0.5 * options.abs_tol, rel_tol=0.5 * options.rel_tol,
        seeds=list(seeds) + _graded_seeds(f, lower, first_width), max_intervals=options.max_intervals,
    )
    target = options.target(body.value)
    parts = [body.value]
    err = body.abs_err
    # Truncation: a negligible panel in a fast-decaying tail ends the sum.
    trunc_budget = 0.25 * target
    if options.abs_tol > 0:
        trunc_budget = min(options.tail_tol, trunc_budget)
    extrap_budget = 0.25 * target
    prev_panel = body.value
    sums: list[float] = [body.value]
    start, width, k = body_end, first_width, 0
    while True:
        if start > options.tail_ceiling:
            raise DivergenceError(
                f"integrand has not decayed by x={start:.3g} (tail ceiling {options.tail_ceiling:.3g}); "
                "the integral appears to diverge"
            )
        width *= 2.0
        k += 1
        panel = adaptive_gauss_kronrod(
            f, start, start + width, tol=target * 2.0 ** (-k - 2), seeds=seeds,
            max_intervals=options.max_intervals,
        )
        parts.append(panel.value)
        err += panel.abs_err
        start += width
        p = panel.value
        if p <= 0.0:
            break
        ratio = p / prev_panel if prev_panel > 0 else 0.0
        if p <= trunc_budget and ratio <= 0.5:
            break
        prev_panel = p
        sums.append(math.fsum(parts))
        if k >= 4 and ratio < _MAX_EXTRAPOLATION_RATIO:
            # Power-law tails: partial sums converge like a mixture of
            # geometric sequences, which the epsilon algorithm extrapolates.
            estimate, change = _wynn_epsilon(sums[-12:])
            if change <= extrap_budget:
                return QuadResult(estimate, err + change)
    return QuadResult(math.fsum(parts), err)


def _graded_seeds(f: ArrayFunc, lower: float, width: float) -> list[float]:
    """Seeds ``lower + width / 2**j`` down to the scale on which ``f`` halves.

    A high power of a survival function can concentrate nearly all mass in a
    sliver next to ``lower`` that a single Kronrod panel over ``width`` would
    not sample.
    """
    probe = lower + width * 2.0 ** -np.arange(1, _GRADING_DEPTH + 1)
    probe = probe[probe > lower]
    if probe.size == 0:
        return []
    with np.errstate(all="ignore"):
        vals = np.asarray(f(np.concatenate([[lower], probe])), dtype=float)
    finite = vals[np.isfinite(vals)]
    ref = float(finite.max()) if finite.size else 0.0
    if not ref > 0:
        return []
    halved = np.nonzero(np.isfinite(vals[1:]) & (vals[1:] <= 0.5 * ref))[0]
    if halved.size == 0:
        return []
    return probe[: min(halved[-1] + 2, probe.size)].tolist()


def _wynn_epsilon(seq: Sequence[float]) -> tuple[float, float]:
    """Limit estimate of ``seq`` by Wynn's epsilon algorithm, with an error guess."""
    prev = [0.0] * (len(seq) + 1)
    cur = list(seq)
    estimates = [cur[-1]]
    order = 0
    while len(cur) > 1:
        nxt = []
        for j in range(len(cur) - 1):
            diff = cur[j + 1] - cur[j]
            if diff == 0.0:
                if order % 2 == 0:
                    # An even column settled exactly: that is the limit.
                    return cur[-1], abs(cur[-1] - cur[-2])
                return estimates[-1], math.inf
            nxt.append(prev[j + 1] + 1.0 / diff)
        prev, cur = cur, nxt
        order += 1
        if order % 2 == 0:
            if not all(math.isfinite(v) for v in cur):
                break
            estimates.append(cur[-1])
    if len(estimates) < 2:
        return estimates[-1], math.inf
    best = estimates[-1]
    change = abs(best - estimates[-2])
    return best, change


def _first_width(lower: float, curves: Sequence[SurvivalCurve]) -> float:
    hints = [c.upper_hint for c in curves if c.upper_hint is not None and c.upper_hint > lower]
    if hints:
        return min(hints) - lower
    return 1.0


def _options(options: QuadratureOptions | None) -> QuadratureOptions:
    return DEFAULT_OPTIONS if options is None else options


def integrate_survival_product(
    sx: SurvivalCurve,
    sy: SurvivalCurve,
    alpha: float,
    beta: float,
    lower: float | None = None,
    options: QuadratureOptions | None = None,
) -> QuadResult:
    """Integrate ``Sx(x)**alpha * Sy(x)**beta`` over ``[lower, inf)``.

    ``lower`` defaults to the larger of the two support infima.

    Returns
    -------
    QuadResult
        ``(value, abs_err)``; the error estimate is at most
        ``max(abs_tol, rel_tol * value)`` unless the interval budget ran out.

    Raises
    ------
    DivergenceError
        If the integrand has not decayed before ``options.tail_ceiling``.
    """
    if not (alpha > 0 and beta > 0):
        raise InvalidParameterError("alpha and beta must be positive")
    opts = _options(options)
    floor = max(sx.support_infimum, sy.support_infimum)
    if lower is None:
        lower = floor if math.isfinite(floor) else 0.0
    if lower < floor:
        raise DomainError(f"lower limit {lower} lies below the support infimum {floor}")
    f = product_integrand(sx, sy, alpha, beta)
    seeds = sorted(set(sx.breakpoints) | set(sy.breakpoints))
    return _integrate_half_line(f, float(lower), _first_width(lower, (sx, sy)), seeds, opts)


def drcri_quadrature(
    sx: SurvivalCurve,
    sy: SurvivalCurve,
    params: MeasureParams,
    options: QuadratureOptions | None = None,
) -> float:
    """Dynamic measure at age ``params.t``: integral of the normalised curve product."""
    opts = _options(options)
    t = float(params.t)
    floor = max(sx.support_infimum, sy.support_infimum)
    lower = max(t, floor) if math.isfinite(floor) else t
    f = product_integrand(sx, sy, params.alpha, params.beta, normalize_at=t)
    seeds = sorted(set(sx.breakpoints) | set(sy.breakpoints))
    return _integrate_half_line(f, lower, _first_width(lower, (sx, sy)), seeds, opts).value
