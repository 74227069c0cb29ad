"""Monte Carlo bias/MSE studies for the kernel RCRI and DRCRI estimators.

Replicate ``r`` of scenario ``s`` at sample size ``n`` draws from its own
generator, seeded by ``SeedSequence(base_seed, spawn_key=(crc32(s), n, r))``.
The X sample is drawn first, then the Y sample, both by inversion.  Results
are reduced with exactly rounded summation (:func:`math.fsum`), so reports
do not depend on execution order or on the number of worker processes.
"""

from __future__ import annotations

import csv
import io
import json
import math
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np
from scipy import stats

from rcri.analytic import drcri_value, rcri_two_exponentials
from rcri.distributions import DistributionSpec, Sample, as_sample, mle_exponential, parse_spec
from rcri.errors import InputError, InvalidParameterError
from rcri.estimators import KERNELS, drcri_hat, rcri_hat
from rcri.params import MeasureParams
from rcri.quadrature import QuadratureOptions

__all__ = [
    "NormalityResult",
    "SimConfig",
    "SimReport",
    "TRUTH_MODES",
    "bootstrap_bias_mse",
    "compute_truth",
    "normality_study",
    "parse_scenario",
    "parse_scenario_file",
    "replicate_estimates",
    "replicate_seed",
    "reports_to_csv",
    "reports_to_json",
    "run_bias_mse",
    "run_drcri_bias_mse",
    "summarize",
]

TRUTH_MODES = ("auto", "closed", "quadrature")
_TRUTH_OPTIONS = QuadratureOptions(abs_tol=0.0, rel_tol=1e-12)


@dataclass(frozen=True)
class SimConfig:
    """One simulation scenario.

    ``t_values`` lists the ages for DRCRI studies; when empty the single age
    ``params.t`` is used.  ``truth`` selects the reference value: ``closed``
    (closed form, error if unavailable), ``quadrature`` or ``auto``
    (closed form when one exists).
    """

    spec_x: DistributionSpec
    spec_y: DistributionSpec
    params: MeasureParams = field(default_factory=MeasureParams)
    n_values: tuple[int, ...] = (10, 20, 30, 40, 50)
    replicates: int = 10_000
    base_seed: int = 0
    truth: str = "auto"
    kernel: str = "gaussian"
    shared_bandwidth: bool = False
    t_values: tuple[float, ...] = ()
    scenario: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        object.__setattr__(self, "t_values", tuple(float(t) for t in self.t_values))
        if not self.n_values or any(n < 2 for n in self.n_values):
            raise InvalidParameterError("n_values must be nonempty with every n >= 2")
        if self.replicates < 1:
            raise InvalidParameterError("replicates must be at least 1")
        if self.truth not in TRUTH_MODES:
            raise InvalidParameterError(f"truth must be one of {TRUTH_MODES}")
        if self.kernel not in KERNELS:
            raise InvalidParameterError(f"kernel must be one of {KERNELS}")
        if any(not (math.isfinite(t) and t >= 0) for t in self.t_values):
            raise InvalidParameterError("t values must be nonnegative")
        if not self.scenario:
            p = self.params
            name = f"{self.spec_x}|{self.spec_y}|alpha={p.alpha:g}|beta={p.beta:g}"
            object.__setattr__(self, "scenario", name)

    @property
    def ages(self) -> tuple[float, ...]:
        return self.t_values or (self.params.t,)

    def at_age(self, t: float) -> "SimConfig":
        return replace(self, params=replace(self.params, t=float(t)), t_values=())

    def scenario_id(self, t: float | None = None) -> str:
        """Row label; DRCRI rows carry their age (``name@t=0.5``)."""
        t = self.params.t if t is None else t
        return self.scenario if t == 0 and not self.t_values else f"{self.scenario}@t={t:g}"

    def as_dict(self) -> dict:
        d = asdict(self)
        d["spec_x"] = str(self.spec_x)
        d["spec_y"] = str(self.spec_y)
        return d


@dataclass(frozen=True)
class SimReport:
    """One table row: bias and MSE of ``replicates`` estimates at sample size ``n``."""

    scenario: str
    n: int
    replicates: int
    truth: float
    bias: float
    mse: float
    mean_estimate: float
    t: float = 0.0
    redraws: int = 0


def replicate_seed(base_seed: int, scenario: str, n: int, r: int) -> np.random.SeedSequence:
    """Counter-based seed of replicate ``r``; independent of execution order."""
    return np.random.SeedSequence(int(base_seed), spawn_key=(zlib.crc32(scenario.encode("utf-8")), int(n), int(r)))


def compute_truth(cfg: SimConfig, t: float | None = None) -> float:
    """Reference value of the measure for ``cfg`` at age ``t``."""
    params = cfg.params if t is None else replace(cfg.params, t=float(t))
    method = "closed" if cfg.truth == "closed" else cfg.truth
    return drcri_value(cfg.spec_x, cfg.spec_y, params, method=method, options=_TRUTH_OPTIONS)


def _estimate_block(task) -> np.ndarray:
    cfg, seed_label, n, t, start, stop = task
    params = replace(cfg.params, t=t)
    out = np.empty(stop - start)
    for i, r in enumerate(range(start, stop)):
        rng = np.random.default_rng(replicate_seed(cfg.base_seed, seed_label, n, r))
        x = Sample(cfg.spec_x.from_uniforms(rng.random(n)))
        y = Sample(cfg.spec_y.from_uniforms(rng.random(n)))
        if t > 0:
            out[i] = drcri_hat(x, y, params, cfg.kernel, cfg.shared_bandwidth)
        else:
            out[i] = rcri_hat(x, y, params.alpha, params.beta, cfg.kernel, cfg.shared_bandwidth)
    return out


def replicate_estimates(
    cfg: SimConfig,
    n: int,
    t: float | None = None,
    replicates: int | None = None,
    workers: int = 1,
    seed_label: str | None = None,
) -> np.ndarray:
    """Estimates of all replicates for sample size ``n``, in replicate order."""
    t = cfg.params.t if t is None else float(t)
    m = cfg.replicates if replicates is None else int(replicates)
    label = cfg.scenario_id(t) if seed_label is None else seed_label
    if workers <= 1 or m < 2 * workers:
        return _estimate_block((cfg, label, n, t, 0, m))
    bounds = np.linspace(0, m, 4 * workers + 1).astype(int)
    tasks = [(cfg, label, n, t, int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return np.concatenate(list(pool.map(_estimate_block, tasks)))


def summarize(estimates: Iterable[float], truth: float, scenario: str, n: int, t: float = 0.0,
              redraws: int = 0) -> SimReport:
    """Bias and MSE of ``estimates`` against ``truth`` (exactly rounded sums)."""
    est = np.asarray(list(estimates), dtype=float)
    m = est.size
    if m == 0:
        raise InvalidParameterError("no estimates to summarise")
    mean = math.fsum(est.tolist()) / m
    mse = math.fsum(((est - truth) ** 2).tolist()) / m
    return SimReport(scenario, n, m, truth, mean - truth, mse, mean, t, redraws)


def _run(cfg: SimConfig, ages: Sequence[float], workers: int) -> list[SimReport]:
    # Every truth is computed first so that divergence surfaces before sampling.
    truths = [compute_truth(cfg, t) for t in ages]
    reports = []
    for t, truth in zip(ages, truths):
        label = cfg.scenario_id(t)
        for n in cfg.n_values:
            est = replicate_estimates(cfg, n, t, workers=workers, seed_label=label)
            reports.append(summarize(est, truth, label, n, t))
    return reports


def run_bias_mse(cfg: SimConfig, workers: int = 1) -> list[SimReport]:
    """Bias/MSE rows at every ``n`` for age ``cfg.params.t`` (RCRI when ``t = 0``)."""
    return _run(cfg, (cfg.params.t,), workers)


def run_drcri_bias_mse(cfg: SimConfig, workers: int = 1) -> list[SimReport]:
    """Bias/MSE rows for every age in ``cfg.t_values`` and every ``n``."""
    return _run(cfg, cfg.ages, workers)


Resampler = Callable[[np.random.Generator, np.ndarray], np.ndarray]


def _with_replacement(rng: np.random.Generator, values: np.ndarray) -> np.ndarray:
    return values[rng.integers(0, values.size, values.size)]


def bootstrap_bias_mse(
    sx,
    sy,
    params: MeasureParams = MeasureParams(),
    B: int = 10_000,
    seed: int = 0,
    kernel: str = "gaussian",
    shared_bandwidth: bool = False,
    resampler: Resampler | None = None,
    max_redraws: int = 1000,
) -> SimReport:
    """Bootstrap bias/MSE of the kernel estimator against the exponential plug-in truth.

    Each of the ``B`` rounds resamples both samples with replacement and
    recomputes the kernel estimate.  The reference value is the exact measure
    between the two fitted exponentials.  Resamples with zero variance (no
    bandwidth) are redrawn; the number of redraws is reported.
    """
    if B < 1:
        raise InvalidParameterError("B must be at least 1")
    sx, sy = as_sample(sx), as_sample(sy)
    draw = resampler or _with_replacement
    lam_x = mle_exponential(sx).params[0]
    lam_y = mle_exponential(sy).params[0]
    truth = rcri_two_exponentials(lam_x, lam_y, params.alpha, params.beta)
    xv, yv = np.asarray(sx.values), np.asarray(sy.values)
    est = np.empty(B)
    redraws = 0
    for b in range(B):
        rng = np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(b,)))
        while True:
            x, y = draw(rng, xv), draw(rng, yv)
            if np.ptp(x) > 0 and np.ptp(y) > 0:
                break
            redraws += 1
            if redraws > max_redraws:
                raise InvalidParameterError("too many degenerate bootstrap resamples")
        if params.t > 0:
            est[b] = drcri_hat(x, y, params, kernel, shared_bandwidth)
        else:
            est[b] = rcri_hat(x, y, params.alpha, params.beta, kernel, shared_bandwidth)
    return summarize(est, truth, "bootstrap", int(min(sx.n, sy.n)), params.t, redraws)


class NormalityResult(NamedTuple):
    skewness: float
    excess_kurtosis: float
    standardized: np.ndarray
    ks_distance: float


def normality_study(
    cfg: SimConfig,
    m: int = 10_000,
    n: int | None = None,
    histogram_path: str | Path | None = None,
    bins: int = 50,
    workers: int = 1,
) -> NormalityResult:
    """Shape of the sampling distribution of the estimator.

    Draws ``m`` estimates at sample size ``n`` (default ``cfg.n_values[0]``),
    standardises them by their mean and standard deviation (ddof=0) and
    returns skewness, excess kurtosis, the standardised values and the
    Kolmogorov-Smirnov distance to N(0, 1).  With ``histogram_path`` a
    two-column CSV ``z,density`` of the histogram is written.
    """
    if m < 1000:
        raise InvalidParameterError("normality study needs m >= 1000 estimates")
    n = cfg.n_values[0] if n is None else int(n)
    est = replicate_estimates(cfg, n, replicates=m, workers=workers,
                              seed_label=f"{cfg.scenario_id()}#normality")
    mean = math.fsum(est.tolist()) / m
    centred = est - mean
    sd = math.sqrt(math.fsum((centred**2).tolist()) / m)
    z = centred / sd
    skew = math.fsum((z**3).tolist()) / m
    kurt = math.fsum((z**4).tolist()) / m - 3.0
    ks = float(stats.kstest(z, "norm").statistic)
    if histogram_path is not None:
        dens, edges = np.histogram(z, bins=bins, density=True)
        centres = 0.5 * (edges[:-1] + edges[1:])
        with open(histogram_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["z", "density"])
            w.writerows(zip(map(repr, centres.tolist()), map(repr, dens.tolist())))
    return NormalityResult(skew, kurt, z, ks)


# -- scenario files and report output --------------------------------------------------

_BOOL = {"true": True, "yes": True, "1": True, "false": False, "no": False, "0": False}


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in text.split(",") if tok.strip())


def parse_scenario(text: str, default_name: str = "") -> SimConfig:
    """Build a :class:`SimConfig` from flat ``key=value`` lines (``#`` starts a comment).

    Keys: ``scenario``, ``spec_x``, ``spec_y``, ``alpha``, ``beta``, ``t``
    (one age or a comma list), ``n``, ``replicates``, ``seed``, ``truth``,
    ``kernel``, ``shared_bandwidth``.
    """
    kv: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise InputError(f"line {lineno}: expected key=value, got {raw!r}")
        kv[key.strip().lower()] = value.strip()
    known = {"scenario", "spec_x", "spec_y", "alpha", "beta", "t", "n", "replicates", "seed",
             "truth", "kernel", "shared_bandwidth"}
    unknown = set(kv) - known
    if unknown:
        raise InputError(f"unknown scenario keys: {', '.join(sorted(unknown))}")
    for req in ("spec_x", "spec_y"):
        if req not in kv:
            raise InputError(f"scenario is missing {req}")
    try:
        ages = _floats(kv.get("t", "0"))
        params = MeasureParams(float(kv.get("alpha", 1)), float(kv.get("beta", 1)), t=ages[0] if len(ages) == 1 else 0.0)
        shared = _BOOL.get(kv.get("shared_bandwidth", "false").lower())
        if shared is None:
            raise InputError("shared_bandwidth must be true or false")
        return SimConfig(
            spec_x=parse_spec(kv["spec_x"]),
            spec_y=parse_spec(kv["spec_y"]),
            params=params,
            n_values=tuple(int(v) for v in kv.get("n", "10,20,30,40,50").split(",") if v.strip()),
            replicates=int(kv.get("replicates", 10_000)),
            base_seed=int(kv.get("seed", 0)),
            truth=kv.get("truth", "auto"),
            kernel=kv.get("kernel", "gaussian"),
            shared_bandwidth=shared,
            t_values=ages if len(ages) > 1 else (),
            scenario=kv.get("scenario", default_name),
        )
    except (ValueError, IndexError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"bad scenario value: {exc}") from exc


def parse_scenario_file(path: str | Path) -> SimConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read scenario file {path}: {exc}") from exc
    return parse_scenario(text, default_name=path.stem)


CSV_FIELDS = ("scenario", "n", "bias", "mse", "truth")


def reports_to_csv(reports: Sequence[SimReport]) -> str:
    """CSV text with columns ``scenario,n,bias,mse,truth`` (full precision)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in reports:
        w.writerow([r.scenario, r.n, repr(r.bias), repr(r.mse), repr(r.truth)])
    return buf.getvalue()


def reports_to_json(reports: Sequence[SimReport]) -> str:
    return json.dumps([asdict(r) for r in reports], indent=2) + "\n"
