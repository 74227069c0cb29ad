"""Parametric lifetime distributions.

Every family exposes survival, log-survival, density, hazard, mean residual
life and quantile functions.  Sampling is by inversion for all families so
that, for example, ``Weibull(lam, 1)`` and ``Exponential(lam)`` produce the
same draws under a shared seed.

Parameterisations
-----------------
========== ============ ==========================================  ==============
family     parameters   survival                                    support
========== ============ ==========================================  ==============
uniform    a            1 - x/a                                     (0, a)
exponential lam         exp(-lam x)                                 [0, inf)
weibull    lam, k       exp(-(lam x)^k)                             [0, inf)
gpd        a, b         (1 + (b/a) x)^-(1 + 1/b)  (b > -1, b != 0)  [0, inf) or
                                                                    [0, -a/b] if b < 0
pareto1    k, a         (k/x)^a                                     [k, inf)
pareto2    a, b         (1 + x/a)^-b                                [0, inf)
lognormal  mu, sigma    1 - Phi((log x - mu)/sigma)                 (0, inf)
========== ============ ==========================================  ==============

The ``gpd`` family uses the scale-first form; :func:`gpd_from_shape_scale`
builds it from the shape-first form ``(1 + a x / b)^-(1 + 1/a)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, NamedTuple

import numpy as np
from scipy.special import log_ndtr, ndtr, ndtri

from rcri.errors import DomainError, InputError, InvalidParameterError
from rcri.quadrature import SurvivalCurve

__all__ = [
    "FAMILIES",
    "DistributionSpec",
    "Sample",
    "SampleOrigin",
    "density",
    "gpd_from_shape_scale",
    "gpd_to_shape_scale",
    "hazard",
    "mle_exponential",
    "mrl",
    "pareto2_as_gpd",
    "parse_spec",
    "quantile",
    "sample",
    "survival",
]

FAMILIES = {
    "uniform": ("a",),
    "exponential": ("lam",),
    "weibull": ("lam", "k"),
    "gpd": ("a", "b"),
    "pareto1": ("k", "a"),
    "pareto2": ("a", "b"),
    "lognormal": ("mu", "sigma"),
}

_ALIASES = {
    "exp": "exponential",
    "paretoi": "pareto1",
    "pareto_i": "pareto1",
    "pareto": "pareto1",
    "paretoii": "pareto2",
    "pareto_ii": "pareto2",
    "lomax": "pareto2",
    "lnorm": "lognormal",
}


def _check_params(family: str, p: tuple[float, ...]) -> None:
    if not all(math.isfinite(v) for v in p):
        raise InvalidParameterError(f"{family}: parameters must be finite, got {p}")
    if family == "gpd":
        a, b = p
        if a <= 0:
            raise InvalidParameterError(f"gpd: scale a must be > 0, got {a}")
        if b <= -1:
            raise InvalidParameterError(f"gpd: shape b must be > -1, got {b}")
    elif family == "lognormal":
        if p[1] <= 0:
            raise InvalidParameterError(f"lognormal: sigma must be > 0, got {p[1]}")
    elif any(v <= 0 for v in p):
        raise InvalidParameterError(f"{family}: parameters must be positive, got {p}")


@dataclass(frozen=True)
class DistributionSpec:
    """A lifetime law: family name plus its parameter tuple.

    >>> DistributionSpec("weibull", (1.0, 2.0)).survival(1.0)
    0.36787944117144233
    """

    family: str
    params: tuple[float, ...]

    def __post_init__(self) -> None:
        family = _ALIASES.get(self.family.lower(), self.family.lower())
        if family not in FAMILIES:
            raise InvalidParameterError(f"unknown family {self.family!r}; choose from {sorted(FAMILIES)}")
        params = tuple(float(v) for v in np.atleast_1d(self.params))
        if len(params) != len(FAMILIES[family]):
            raise InvalidParameterError(
                f"{family} takes {len(FAMILIES[family])} parameter(s) {FAMILIES[family]}, got {params}"
            )
        _check_params(family, params)
        object.__setattr__(self, "family", family)
        object.__setattr__(self, "params", params)

    # -- convenience constructors ------------------------------------------------
    @classmethod
    def uniform(cls, a: float) -> "DistributionSpec":
        return cls("uniform", (a,))

    @classmethod
    def exponential(cls, lam: float) -> "DistributionSpec":
        return cls("exponential", (lam,))

    @classmethod
    def weibull(cls, lam: float, k: float) -> "DistributionSpec":
        return cls("weibull", (lam, k))

    @classmethod
    def gpd(cls, a: float, b: float) -> "DistributionSpec":
        return cls("gpd", (a, b))

    @classmethod
    def pareto1(cls, k: float, a: float) -> "DistributionSpec":
        return cls("pareto1", (k, a))

    @classmethod
    def pareto2(cls, a: float, b: float) -> "DistributionSpec":
        return cls("pareto2", (a, b))

    @classmethod
    def lognormal(cls, mu: float, sigma: float) -> "DistributionSpec":
        return cls("lognormal", (mu, sigma))

    def __str__(self) -> str:
        return f"{self.family}:" + ",".join(repr(v) for v in self.params)

    # -- support -------------------------------------------------------------------
    @property
    def support_infimum(self) -> float:
        return self.params[0] if self.family == "pareto1" else 0.0

    @property
    def support_supremum(self) -> float:
        if self.family == "uniform":
            return self.params[0]
        if self.family == "gpd" and self.params[1] < 0:
            a, b = self.params
            return -a / b
        return math.inf

    # -- core functions --------------------------------------------------------------
    def log_survival(self, x):
        """Natural log of the survival function (``-inf`` beyond the support)."""
        x = np.asarray(x, dtype=float)
        fam, p = self.family, self.params
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            if fam == "uniform":
                (a,) = p
                out = np.where(x >= a, -np.inf, np.log1p(-np.clip(x, 0.0, a) / a))
            elif fam == "exponential":
                out = -p[0] * np.maximum(x, 0.0)
            elif fam == "weibull":
                lam, k = p
                out = -((lam * np.maximum(x, 0.0)) ** k)
            elif fam == "gpd":
                a, b = p
                xx = np.maximum(x, 0.0)
                if b == 0.0:
                    out = -xx / a
                else:
                    arg = (b / a) * xx
                    out = np.where(arg <= -1.0, -np.inf, -(1.0 + 1.0 / b) * np.log1p(np.maximum(arg, -1.0)))
            elif fam == "pareto1":
                k, a = p
                out = np.where(x <= k, 0.0, a * np.log(k / np.maximum(x, k)))
            elif fam == "pareto2":
                a, b = p
                out = -b * np.log1p(np.maximum(x, 0.0) / a)
            else:  # lognormal
                mu, sigma = p
                z = (np.log(np.maximum(x, 0.0)) - mu) / sigma
                out = np.where(x <= 0, 0.0, log_ndtr(-z))
        return out if out.ndim else float(out)

    def survival(self, x):
        """P(X > x); equals 1 left of the support."""
        x = np.asarray(x, dtype=float)
        if self.family == "lognormal":
            mu, sigma = self.params
            with np.errstate(divide="ignore"):
                z = (np.log(np.maximum(x, 0.0)) - mu) / sigma
            out = np.where(x <= 0, 1.0, ndtr(-z))
        else:
            out = np.exp(self.log_survival(x))
        return out if np.ndim(out) else float(out)

    def cdf(self, x):
        return 1.0 - self.survival(x)

    def density(self, x):
        x = np.asarray(x, dtype=float)
        fam, p = self.family, self.params
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            if fam == "uniform":
                (a,) = p
                out = np.where((x > 0) & (x < a), 1.0 / a, 0.0)
            elif fam in ("exponential", "weibull", "gpd", "pareto2"):
                h = self._hazard_formula(x)
                out = np.where(x < 0, 0.0, h * np.exp(self.log_survival(x)))
                if fam == "gpd" and p[1] < 0:
                    out = np.where(x >= self.support_supremum, 0.0, out)
            elif fam == "pareto1":
                k, a = p
                out = np.where(x < k, 0.0, a * k**a / np.maximum(x, k) ** (a + 1.0))
            else:
                mu, sigma = p
                xx = np.where(x > 0, x, 1.0)
                z = (np.log(xx) - mu) / sigma
                out = np.where(x > 0, np.exp(-0.5 * z * z) / (xx * sigma * math.sqrt(2 * math.pi)), 0.0)
        return out if out.ndim else float(out)

    def _hazard_formula(self, x: np.ndarray) -> np.ndarray:
        fam, p = self.family, self.params
        xx = np.maximum(x, 0.0)
        if fam == "exponential":
            return np.full_like(xx, p[0])
        if fam == "weibull":
            lam, k = p
            return k * lam * (lam * xx) ** (k - 1.0)
        if fam == "gpd":
            a, b = p
            return (b + 1.0) / (a + b * xx)
        if fam == "pareto2":
            a, b = p
            return b / (a + xx)
        raise AssertionError(fam)

    def hazard(self, x):
        """``density / survival``; raises :class:`DomainError` where survival is 0."""
        x = np.asarray(x, dtype=float)
        logs = np.asarray(self.log_survival(x))
        if np.any(np.isneginf(logs)):
            raise DomainError(f"hazard undefined where survival is 0 ({self})")
        fam, p = self.family, self.params
        with np.errstate(divide="ignore", invalid="ignore"):
            if fam in ("exponential", "weibull", "gpd", "pareto2"):
                out = np.where(x < 0, 0.0, self._hazard_formula(x))
            elif fam == "uniform":
                out = np.where(x < 0, 0.0, 1.0 / (p[0] - np.clip(x, 0.0, None)))
            elif fam == "pareto1":
                k, a = p
                out = np.where(x < k, 0.0, a / np.maximum(x, k))
            else:
                out = np.asarray(self.density(x)) / np.exp(logs)
        return out if out.ndim else float(out)

    def quantile(self, p):
        """Inverse CDF; ``p`` must lie in the open unit interval."""
        p = np.asarray(p, dtype=float)
        if np.any((p <= 0) | (p >= 1)) or np.any(np.isnan(p)):
            raise DomainError("quantile requires 0 < p < 1")
        out = self._ppf(p)
        return out if out.ndim else float(out)

    def _ppf(self, u: np.ndarray) -> np.ndarray:
        # Inversion in terms of the cumulative hazard -log(1 - u).
        fam, p = self.family, self.params
        q = -np.log1p(-u)
        if fam == "uniform":
            return p[0] * u
        if fam == "exponential":
            return q / p[0]
        if fam == "weibull":
            lam, k = p
            return q ** (1.0 / k) / lam
        if fam == "gpd":
            a, b = p
            if b == 0.0:
                return a * q
            return (a / b) * np.expm1(q * b / (b + 1.0))
        if fam == "pareto1":
            k, a = p
            return k * np.exp(q / a)
        if fam == "pareto2":
            a, b = p
            return a * np.expm1(q / b)
        mu, sigma = p
        return np.exp(mu + sigma * ndtri(u))

    def mean(self) -> float:
        return self.mrl(self.support_infimum) + self.support_infimum

    def mrl(self, t):
        """Mean residual life ``E(X - t | X > t)``.

        Raises :class:`DomainError` for infinite-mean laws or where the
        survival function has already reached 0.
        """
        t_arr = np.asarray(t, dtype=float)
        if np.any(np.isneginf(np.asarray(self.log_survival(t_arr)))):
            raise DomainError(f"mrl undefined where survival is 0 ({self})")
        fam, p = self.family, self.params
        if fam == "exponential":
            out = np.full_like(t_arr, 1.0 / p[0])
        elif fam == "uniform":
            (a,) = p
            out = np.where(t_arr < 0, a / 2 - t_arr, (a - t_arr) / 2)
        elif fam == "gpd":
            a, b = p
            tt = np.maximum(t_arr, 0.0)
            out = a + b * tt + (tt - t_arr)
        elif fam == "pareto1":
            k, a = p
            if a <= 1:
                raise DomainError(f"pareto1 with a={a} <= 1 has infinite mean")
            out = np.where(t_arr >= k, t_arr / (a - 1.0), a * k / (a - 1.0) - t_arr)
        elif fam == "pareto2":
            a, b = p
            if b <= 1:
                raise DomainError(f"pareto2 with b={b} <= 1 has infinite mean")
            tt = np.maximum(t_arr, 0.0)
            out = (a + tt) / (b - 1.0) + (tt - t_arr)
        else:
            out = np.vectorize(self._mrl_quadrature, otypes=[float])(t_arr)
        return out if out.ndim else float(out)

    def _mrl_quadrature(self, t: float) -> float:
        from rcri.params import MeasureParams
        from rcri.quadrature import QuadratureOptions, drcri_quadrature

        lower = max(t, self.support_infimum)
        curve = self.curve
        # S**0.5 * S**0.5 normalised at t is S(x)/S(t).
        value = drcri_quadrature(
            curve, curve, MeasureParams(0.5, 0.5, 1.0, lower),
            QuadratureOptions(abs_tol=0.0, rel_tol=1e-12),
        )
        return value + (lower - t)

    # -- integration & sampling ----------------------------------------------------------
    @cached_property
    def curve(self) -> SurvivalCurve:
        """The survival function wrapped for the quadrature module."""
        breaks: list[float] = []
        if math.isfinite(self.support_supremum):
            breaks.append(self.support_supremum)
        if self.family == "pareto1":
            breaks.append(self.params[0])
        upper = min(float(self._ppf(np.array(0.999))), self.support_supremum)
        return SurvivalCurve(
            eval=self.survival,
            log_eval=self.log_survival,
            support_infimum=self.support_infimum,
            upper_hint=upper,
            breakpoints=tuple(breaks),
        )

    def scaled(self, c: float) -> "DistributionSpec":
        """Law of ``c * X`` for ``c > 0``."""
        if not c > 0:
            raise InvalidParameterError("scale factor must be positive")
        fam, p = self.family, self.params
        if fam == "uniform":
            return DistributionSpec(fam, (p[0] * c,))
        if fam == "exponential":
            return DistributionSpec(fam, (p[0] / c,))
        if fam == "weibull":
            return DistributionSpec(fam, (p[0] / c, p[1]))
        if fam == "gpd":
            return DistributionSpec(fam, (p[0] * c, p[1]))
        if fam == "pareto1":
            return DistributionSpec(fam, (p[0] * c, p[1]))
        if fam == "pareto2":
            return DistributionSpec(fam, (p[0] * c, p[1]))
        return DistributionSpec(fam, (p[0] + math.log(c), p[1]))

    def sample(self, n: int, seed: int | np.random.SeedSequence | None = None) -> "Sample":
        return sample(self, n, seed)

    def from_uniforms(self, u) -> np.ndarray:
        """Map uniforms on ``[0, 1)`` to draws by inversion."""
        return self._ppf(np.asarray(u, dtype=float))


class SampleOrigin(NamedTuple):
    spec: DistributionSpec
    seed: object


@dataclass(frozen=True, eq=False)
class Sample:
    """Nonnegative observations, stored sorted ascending and read-only."""

    values: np.ndarray
    origin: SampleOrigin | None = field(default=None)

    def __post_init__(self) -> None:
        arr = np.sort(np.asarray(self.values, dtype=float).ravel())
        if arr.size == 0:
            raise InvalidParameterError("a sample needs at least one observation")
        if not np.all(np.isfinite(arr)):
            raise InvalidParameterError("sample values must be finite")
        if arr[0] < 0:
            raise InvalidParameterError("sample values must be nonnegative")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return int(self.values.size)

    @property
    def n(self) -> int:
        return len(self)

    def mean(self) -> float:
        return math.fsum(self.values.tolist()) / self.n

    def std(self) -> float:
        """Standard deviation with denominator ``n - 1``."""
        if self.n < 2:
            raise DomainError("standard deviation needs at least two observations")
        return float(np.std(self.values, ddof=1))


def as_sample(values) -> Sample:
    return values if isinstance(values, Sample) else Sample(values)


def parse_spec(text: str) -> DistributionSpec:
    """Parse ``family:p1,p2`` (``.`` as decimal separator, locale independent)."""
    if ":" not in text:
        raise InputError(f"distribution spec {text!r} must look like family:p1[,p2]")
    family, _, rest = text.strip().partition(":")
    try:
        params = tuple(float(tok) for tok in rest.split(",") if tok.strip())
    except ValueError as exc:
        raise InputError(f"bad numeric parameter in {text!r}") from exc
    try:
        return DistributionSpec(family.strip(), params)
    except InvalidParameterError as exc:
        raise InputError(str(exc)) from exc


# -- module-level operations -----------------------------------------------------------


def survival(spec: DistributionSpec, x):
    return spec.survival(x)


def density(spec: DistributionSpec, x):
    return spec.density(x)


def hazard(spec: DistributionSpec, x):
    return spec.hazard(x)


def mrl(spec: DistributionSpec, t):
    return spec.mrl(t)


def quantile(spec: DistributionSpec, p):
    return spec.quantile(p)


def sample(spec: DistributionSpec, n: int, seed: int | np.random.SeedSequence | None = None) -> Sample:
    """Draw ``n`` i.i.d. values by inversion of uniform variates."""
    if n < 1:
        raise InvalidParameterError("n must be at least 1")
    rng = np.random.default_rng(seed)
    return Sample(spec._ppf(rng.random(n)), SampleOrigin(spec, seed))


def mle_exponential(s: Sample | Iterable[float]) -> DistributionSpec:
    """Exponential fit by maximum likelihood: rate = 1 / sample mean."""
    if not isinstance(s, Sample):
        s = Sample(np.asarray(list(s) if not isinstance(s, np.ndarray) else s, dtype=float))
    m = s.mean()
    if not m > 0:
        raise DomainError("exponential MLE needs a positive sample mean")
    return DistributionSpec.exponential(1.0 / m)


def gpd_from_shape_scale(shape: float, scale: float) -> DistributionSpec:
    """GPD given in the shape-first form ``(1 + shape x / scale)^-(1 + 1/shape)``."""
    return DistributionSpec.gpd(scale, shape)


def gpd_to_shape_scale(spec: DistributionSpec) -> tuple[float, float]:
    if spec.family != "gpd":
        raise InvalidParameterError("not a gpd spec")
    a, b = spec.params
    return b, a


def pareto2_as_gpd(spec: DistributionSpec) -> DistributionSpec:
    """Rewrite ``(1 + x/a)^-b`` (``b > 1``) as the equivalent scale-first GPD."""
    if spec.family != "pareto2":
        raise InvalidParameterError("not a pareto2 spec")
    a, b = spec.params
    if b <= 1:
        raise DomainError("pareto2 with b <= 1 has no finite-mean GPD counterpart")
    shape = 1.0 / (b - 1.0)
    return DistributionSpec.gpd(a * shape, shape)
