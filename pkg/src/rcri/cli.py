"""Command-line entry point: ``rcri <subcommand> [options]``.

Exit codes: 0 success, 1 usage error, 2 bad input (files, specs,
parameters), 3 numerical failure (divergence, no closed form, domain).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from rcri import __version__
from rcri.errors import DivergenceError, DomainError, InputError, InvalidParameterError, NoClosedFormError, RCRIError
from rcri.params import MeasureParams
from rcri.quadrature import QuadratureOptions

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit with status 2
        raise UsageError(f"{self.prog}: {message}")


def _env_float(name: str, default: float) -> float:
    raw = os.environ.get(name)
    if raw is None or not raw.strip():
        return default
    try:
        return float(raw)
    except ValueError:
        raise InputError(f"environment variable {name}={raw!r} is not a number") from None


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("output")
    g.add_argument("--out", help="write results here instead of stdout")
    g.add_argument("--format", choices=("csv", "json"), default="csv")
    g.add_argument("--manifest", help="manifest path (default: <out>.manifest.json when --out is given)")
    q = p.add_argument_group("quadrature")
    q.add_argument("--abs-tol", type=float, default=None, help="absolute tolerance (env RCRI_ABS_TOL, default 1e-9)")
    q.add_argument("--rel-tol", type=float, default=None, help="relative tolerance (env RCRI_REL_TOL, default 1e-8)")
    q.add_argument("--tail-ceiling", type=float, default=1e12, help="divergence is declared past this x")


def _measure(p: argparse.ArgumentParser, theta: bool = True, t: bool = True) -> None:
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=1.0)
    if theta:
        p.add_argument("--theta", type=float, default=1.0, help="PH constant (second curve is S**theta)")
    if t:
        p.add_argument("--t", type=float, default=0.0, help="truncation age (0: plain RCRI)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rcri", description="Relative cumulative residual information: values, estimates, studies.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analytic", help="RCRI/DRCRI of parametric laws")
    a.add_argument("--spec", required=True, help="first law, e.g. exponential:1")
    a.add_argument("--spec-y", help="second law (default: PH partner S**theta)")
    a.add_argument("--method", choices=("auto", "closed", "quadrature"), default="auto")
    _measure(a)
    _common(a)

    e = sub.add_parser("estimate", help="kernel estimate from two sample files")
    e.add_argument("x", help="file with one observation per line (# comments allowed)")
    e.add_argument("y")
    e.add_argument("--kernel", choices=("gaussian", "epanechnikov"), default="gaussian")
    e.add_argument("--shared-bandwidth", action="store_true", help="one Silverman bandwidth from the pooled sample")
    _measure(e, theta=False)
    _common(e)

    s = sub.add_parser("simulate", help="Monte Carlo bias/MSE from a scenario file")
    s.add_argument("scenario", help="scenario file (key=value lines) or a bundled name such as table2_exponential")
    s.add_argument("--replicates", type=int, help="override the scenario's replicate count")
    s.add_argument("--seed", type=int, help="override the scenario's base seed")
    s.add_argument("--threads", type=int, default=os.cpu_count() or 1, help="worker processes (output does not depend on it)")
    s.add_argument("--normality", type=int, metavar="M",
                   help="instead of bias/MSE, study the shape of M estimates at the first n")
    s.add_argument("--histogram", help="with --normality: write histogram CSV here")
    _common(s)

    c = sub.add_parser("characterize", help="check a characterization property on an age grid")
    c.add_argument("--spec", required=True)
    c.add_argument("--spec-y", help="second law for --property constant (default: PH partner)")
    c.add_argument("--property", choices=("constant", "linear", "hazard", "mrl"), required=True)
    c.add_argument("--grid", default="0:2:0.25", help="start:stop:step or comma list")
    _measure(c, t=False)
    _common(c)

    ph = sub.add_parser("photometry", help="band-pair RCRI table from epoch photometry CSV")
    ph.add_argument("--input", help="CSV with source_id,band,time,mag (default: bundled synthetic fixture)")
    ph.add_argument("--source", help="keep only this source_id")
    ph.add_argument("--pairs", default="G:BP,G:RP,BP:RP")
    ph.add_argument("--method", choices=("parametric", "kernel"), default="parametric")
    ph.add_argument("--bootstrap", type=int, default=0, metavar="B", help="bootstrap rounds for bias/MSE (0: none)")
    ph.add_argument("--seed", type=int, default=0)
    _measure(ph, theta=False, t=False)
    _common(ph)

    st = sub.add_parser("selftest", help="closed-form vs quadrature sweep and characterization witnesses")
    _common(st)
    return parser


def _options(args) -> QuadratureOptions:
    abs_tol = args.abs_tol if args.abs_tol is not None else _env_float("RCRI_ABS_TOL", 1e-9)
    rel_tol = args.rel_tol if args.rel_tol is not None else _env_float("RCRI_REL_TOL", 1e-8)
    try:
        return QuadratureOptions(abs_tol=abs_tol, rel_tol=rel_tol, tail_ceiling=args.tail_ceiling)
    except InvalidParameterError as exc:
        raise InputError(str(exc)) from exc


def _table(header: Sequence[str], rows: Sequence[Sequence], fmt: str) -> str:
    if fmt == "json":
        return json.dumps([dict(zip(header, r)) for r in rows], indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in r])
    return buf.getvalue()


def _read_values(path: str) -> np.ndarray:
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    vals = []
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            vals.append(float(line))
        except ValueError:
            raise InputError(f"{path}:{lineno}: not a number: {line!r}") from None
    if not vals:
        raise InputError(f"{path}: no observations")
    return np.asarray(vals)


def _cmd_analytic(args, opts, manifest) -> str:
    from rcri.analytic import drcri_value
    from rcri.distributions import parse_spec

    spec = parse_spec(args.spec)
    spec_y = parse_spec(args.spec_y) if args.spec_y else None
    params = MeasureParams(args.alpha, args.beta, args.theta, args.t)
    value = drcri_value(spec, spec_y, params, method=args.method, options=opts)
    return _table(["value"], [[value]], args.format)


def _cmd_estimate(args, opts, manifest) -> str:
    from rcri.estimators import drcri_hat, rcri_hat

    x, y = _read_values(args.x), _read_values(args.y)
    params = MeasureParams(args.alpha, args.beta, t=args.t)
    kw = dict(kernel=args.kernel, shared_bandwidth=args.shared_bandwidth, options=opts)
    if params.t > 0:
        value = drcri_hat(x, y, params, **kw)
    else:
        value = rcri_hat(x, y, params.alpha, params.beta, **kw)
    return _table(["value"], [[value]], args.format)


def _scenario_path(name: str) -> Path:
    p = Path(name)
    if p.exists():
        return p
    bundled = Path(__file__).parent / "scenarios" / f"{p.stem}.txt"
    if bundled.exists():
        return bundled
    raise InputError(f"scenario file {name!r} not found")


def _cmd_simulate(args, opts, manifest) -> str:
    from dataclasses import replace

    from rcri import montecarlo as mc

    cfg = mc.parse_scenario_file(_scenario_path(args.scenario))
    if args.replicates is not None:
        cfg = replace(cfg, replicates=args.replicates)
    if args.seed is not None:
        cfg = replace(cfg, base_seed=args.seed)
    manifest["config"]["scenario_config"] = cfg.as_dict()
    manifest["seeds"] = {"base_seed": cfg.base_seed, "derivation": "SeedSequence(base_seed, spawn_key=(crc32(scenario), n, r))"}
    workers = max(1, int(args.threads))
    if args.normality:
        res = mc.normality_study(cfg, m=args.normality, histogram_path=args.histogram, workers=workers)
        if args.histogram:
            manifest["outputs"].append(str(args.histogram))
        return _table(["scenario", "n", "m", "skewness", "excess_kurtosis", "ks_distance"],
                      [[cfg.scenario_id(), cfg.n_values[0], args.normality, res.skewness, res.excess_kurtosis,
                        res.ks_distance]], args.format)
    reports = mc.run_drcri_bias_mse(cfg, workers=workers)
    return mc.reports_to_json(reports) if args.format == "json" else mc.reports_to_csv(reports)


def _cmd_characterize(args, opts, manifest) -> str:
    from rcri.characterization import check, parse_grid
    from rcri.distributions import parse_spec

    spec = parse_spec(args.spec)
    spec_y = parse_spec(args.spec_y) if args.spec_y else None
    try:
        grid = parse_grid(args.grid)
    except InvalidParameterError as exc:
        raise InputError(str(exc)) from exc
    v = check(args.property, spec, MeasureParams(args.alpha, args.beta, args.theta), grid, spec_y)
    row = [v.property, str(v.holds).lower(), v.fit_residual, v.threshold, v.coefficient,
           ";".join(repr(t) for t in v.t_grid), ";".join(repr(x) for x in v.values)]
    if args.format == "json":
        return json.dumps({"property": v.property, "holds": v.holds, "fit_residual": v.fit_residual,
                           "threshold": v.threshold, "coefficient": v.coefficient,
                           "t_grid": list(v.t_grid), "values": list(v.values)}, indent=2) + "\n"
    return _table(["property", "holds", "fit_residual", "threshold", "coefficient", "t_grid", "values"], [row], "csv")


def _cmd_photometry(args, opts, manifest) -> str:
    from rcri import photometry as ph

    path = args.input or str(Path(__file__).parent / "fixtures" / "synthetic_epoch.csv")
    manifest["config"]["input_resolved"] = path
    parsed = ph.parse_epoch_csv(path, args.source)
    if parsed.skipped:
        print(f"rcri: skipped {parsed.skipped} malformed row(s)", file=sys.stderr)
    manifest["skipped_rows"] = parsed.skipped
    pairs = ph.parse_pairs(args.pairs)
    table = ph.band_rcri_table(parsed.records, pairs, args.alpha, args.beta, method=args.method)
    rows = []
    for r in table.rows:
        bias = mse = None
        if args.bootstrap:
            bias, mse = ph.band_bootstrap(parsed.records, (r.f_band, r.g_band), args.alpha, args.beta,
                                          B=args.bootstrap, seed=args.seed)
        rows.append([r.f_band, r.g_band, r.rcri, "" if bias is None else bias, "" if mse is None else mse,
                     r.rate_f, r.rate_g])
    manifest["seeds"] = {"bootstrap_seed": args.seed}
    return _table(["f_band", "g_band", "rcri", "bias", "mse", "rate_f", "rate_g"], rows, args.format)


def _cmd_selftest(args, opts, manifest) -> str:
    from rcri.selftest import run_selftest

    results = run_selftest(opts)
    manifest["selftest_failures"] = [r.name for r in results if not r.ok]
    out = _table(["check", "ok", "detail"], [[r.name, str(r.ok).lower(), r.detail] for r in results], args.format)
    if not all(r.ok for r in results):
        raise _SelftestFailed(out)
    return out


class _SelftestFailed(Exception):
    def __init__(self, output: str):
        super().__init__("selftest failed")
        self.output = output


_COMMANDS = {
    "analytic": _cmd_analytic,
    "estimate": _cmd_estimate,
    "simulate": _cmd_simulate,
    "characterize": _cmd_characterize,
    "photometry": _cmd_photometry,
    "selftest": _cmd_selftest,
}


def _emit(text: str, args, manifest: dict, argv: Sequence[str]) -> None:
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        manifest["outputs"].insert(0, str(args.out))
    else:
        sys.stdout.write(text)
    mpath = args.manifest or (f"{args.out}.manifest.json" if args.out else None)
    if mpath:
        Path(mpath).write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n", encoding="utf-8")


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    manifest = {
        "tool": "rcri",
        "version": __version__,
        "subcommand": args.command,
        "argv": argv,
        "config": {k: v for k, v in vars(args).items() if k not in ("out", "manifest")},
        "seeds": {},
        "outputs": [],
    }
    try:
        opts = _options(args)
        manifest["config"]["quadrature"] = {"abs_tol": opts.abs_tol, "rel_tol": opts.rel_tol,
                                            "tail_ceiling": opts.tail_ceiling}
        text = _COMMANDS[args.command](args, opts, manifest)
        _emit(text, args, manifest, argv)
        return EXIT_OK
    except _SelftestFailed as exc:
        _emit(exc.output, args, manifest, argv)
        print("rcri: selftest failed", file=sys.stderr)
        return EXIT_NUMERIC
    except (InputError, InvalidParameterError) as exc:
        print(f"rcri: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (DivergenceError, NoClosedFormError, DomainError) as exc:
        print(f"rcri: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except RCRIError as exc:
        print(f"rcri: error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"rcri: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
