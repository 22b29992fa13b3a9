"""Command-line front end: ``simulate``, ``estimate``, ``compare``, ``sweep``.

Exit codes: 0 success, 2 usage error, 3 configuration error, 4 data error,
5 unobservable geometry, 6 I/O error.
"""
import argparse
import csv
import datetime as _dt
import io
import json
import logging
import math
import os
import re
import sys
import tempfile
import warnings
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .config import (
    build_scenario,
    default_methods,
    file_digest,
    parse_method,
    read_config,
    resolve_path,
)
from .errors import (
    ConfigError,
    DegenerateGeometryError,
    DomainError,
    InsufficientDataError,
    ShapeError,
    UnobservableGeometryError,
)
from .estimators import NBEARINGS, NPOLY, EstimatorConfig, estimate
from .evaluation import compare_table, run_monte_carlo
from .polybasis import MAX_DEGREE, BasisKind
from .sensing import ObservationSeries, observe, run_rng

log = logging.getLogger("bearingtma")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_DATA = 4
EXIT_UNOBSERVABLE = 5
EXIT_IO = 6

OBS_COLUMNS = ["t", "obs_x", "obs_y", "bearing_rad", "sigma_rad"]
TRUTH_COLUMNS = ["t", "tgt_x", "tgt_y", "tgt_vx", "tgt_vy"]
TRACK_COLUMNS = ["t", "x", "y", "vx", "vy", "pos_stderr"]
REPORT_COLUMNS = [
    "t", "mean_pos_err", "rmse_pos_err", "p5", "median", "p95",
    "mean_range_err", "rmse_range_err", "mean_x_err", "mean_y_err", "mean_vel_err",
]
SWEEP_PARAMS = ("initial_range", "sigma_deg", "degree", "n_obs")


class DataError(Exception):
    """Malformed input data file."""


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    return repr(float(v))


def write_atomic(path, text):
    """Write ``text`` to ``path`` via a temporary file and rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path, columns, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        vals = [row[c] for c in columns] if isinstance(row, dict) else row
        w.writerow([_fmt(v) for v in vals])
    write_atomic(path, buf.getvalue())
    return Path(path)


def read_observations(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = set(OBS_COLUMNS) - set(reader.fieldnames or [])
        if missing:
            raise DataError(f"{path}: missing columns {sorted(missing)}")
        cols = {c: [] for c in OBS_COLUMNS}
        for lineno, row in enumerate(reader, start=2):
            for c in OBS_COLUMNS:
                try:
                    cols[c].append(float(row[c]))
                except (TypeError, ValueError):
                    raise DataError(f"{path}:{lineno}: bad value for {c}: {row[c]!r}") from None
    if not cols["t"]:
        raise DataError(f"{path}: no observations")
    try:
        return ObservationSeries(cols["t"], cols["obs_x"], cols["obs_y"], cols["bearing_rad"], cols["sigma_rad"])
    except (DomainError, ShapeError) as exc:
        raise DataError(f"{path}: {exc}") from None


def _safe(label):
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", label)


def _non_negative_int(raw):
    try:
        v = int(raw)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {raw!r}") from None
    if v < 0 or v > MAX_DEGREE:
        raise argparse.ArgumentTypeError(f"must be in [0, {MAX_DEGREE}], got {v}")
    return v


def _positive_int(raw):
    try:
        v = int(raw)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {raw!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _basis(raw):
    try:
        return BasisKind.parse(raw)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _load(args, **overrides):
    path = resolve_path(args.scenario)
    cp = read_config(path)
    if args.seed is not None:
        overrides["seed"] = args.seed
    return path, cp, build_scenario(cp, overrides)


def _methods(args, cp):
    if args.method:
        return [parse_method(m) for m in args.method]
    return default_methods(cp)


# -- simulate ---------------------------------------------------------------

def cmd_simulate(args):
    path, cp, scenario = _load(args)
    scenario.validate(max(m.degree for m in default_methods(cp)))
    series, truth = observe(scenario, run_rng(scenario.seed, 0))
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    n = len(series)
    write_csv(out / "observations.csv", OBS_COLUMNS, (
        (series.t[i], series.obs_x[i], series.obs_y[i], series.beta[i], series.sigma) for i in range(n)
    ))
    write_csv(out / "truth.csv", TRUTH_COLUMNS, (
        (truth.t[i], truth.xy[i, 0], truth.xy[i, 1], truth.vxy[i, 0], truth.vxy[i, 1]) for i in range(n)
    ))
    print(f"{n} observations written to {out}")
    return EXIT_OK


# -- estimate ---------------------------------------------------------------

def cmd_estimate(args):
    series = read_observations(args.observations)
    cfg = EstimatorConfig(method=args.name, kind=args.basis, degree=args.degree, refine=args.refine)
    est = estimate(series, cfg)
    d = est.diagnostics
    print(f"method: {cfg.name}")
    print(f"basis: {est.basis.kind.value} degree {est.basis.degree} window [{est.basis.t0!r}, {est.basis.tf!r}]")
    print("coeffs_x: " + " ".join(repr(float(c)) for c in est.coeffs_x))
    print("coeffs_y: " + " ".join(repr(float(c)) for c in est.coeffs_y))
    print(f"condition_number: {d.condition_number!r}")
    print(f"residual_rms_m: {d.residual_rms!r}")
    print(f"stderr_x_m: {d.per_coordinate_stderr[0]!r}")
    print(f"stderr_y_m: {d.per_coordinate_stderr[1]!r}")
    print(f"angular_rms_rad: {d.angular_rms!r}")
    if est.refined:
        print(f"refined: converged={est.converged} iterations={est.iterations}")
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    xy, vxy = est.track(series.t)
    se = est.position_stderr(series.t)
    write_csv(out / "predicted_track.csv", TRACK_COLUMNS, (
        (series.t[i], xy[i, 0], xy[i, 1], vxy[i, 0], vxy[i, 1], se[i]) for i in range(len(series))
    ))
    report = {
        "method": cfg.name,
        "basis": est.basis.kind.value,
        "degree": est.basis.degree,
        "t0": est.basis.t0,
        "tf": est.basis.tf,
        "coeffs_x": [float(c) for c in est.coeffs_x],
        "coeffs_y": [float(c) for c in est.coeffs_y],
        "condition_number": d.condition_number,
        "residual_rms": d.residual_rms,
        "per_coordinate_stderr": list(d.per_coordinate_stderr),
        "angular_rms": d.angular_rms,
        "refined": est.refined,
        "converged": est.converged,
    }
    write_atomic(out / "estimate.json", json.dumps(report, indent=2) + "\n")
    return EXIT_OK


# -- compare ----------------------------------------------------------------

def _report_rows(rep):
    s = rep.stats
    for k, t in enumerate(rep.times):
        yield {
            "t": t,
            "mean_pos_err": s["position"].mean[k],
            "rmse_pos_err": s["position"].rmse[k],
            "p5": s["position"].p5[k],
            "median": s["position"].median[k],
            "p95": s["position"].p95[k],
            "mean_range_err": s["range"].mean[k],
            "rmse_range_err": s["range"].rmse[k],
            "mean_x_err": s["x"].mean[k],
            "mean_y_err": s["y"].mean[k],
            "mean_vel_err": s["velocity"].mean[k],
        }


def _write_plot(out, scenario_name, reports):
    dat = out / f"plot_{_safe(scenario_name)}.dat"
    lines = ["# t " + " ".join(f"rmse_pos_err[{r.method}]" for r in reports)]
    for k, t in enumerate(reports[0].times):
        lines.append(" ".join([_fmt(t)] + [_fmt(r.stats["position"].rmse[k]) for r in reports]))
    write_atomic(dat, "\n".join(lines) + "\n")
    gp = out / f"plot_{_safe(scenario_name)}.gp"
    plots = ", ".join(
        f"'{dat.name}' using 1:{i + 2} with lines title '{r.method}'" for i, r in enumerate(reports)
    )
    write_atomic(gp, (
        f"# gnuplot {gp.name}\n"
        f"set title 'Position error RMSE: {scenario_name}'\n"
        "set xlabel 't [s]'\nset ylabel 'RMSE [m]'\nset logscale y\n"
        f"plot {plots}\n"
    ))
    return [dat, gp]


def _write_reports(out, scenario, reports):
    files = []
    for rep in reports:
        files.append(write_csv(out / f"report_{_safe(rep.method)}.csv", REPORT_COLUMNS, _report_rows(rep)))
    table = compare_table(reports)
    files.append(write_csv(out / "comparison.csv", table.columns, table.rows))
    files += _write_plot(out, scenario.name, reports)
    return files


def _method_json(cfg):
    return {
        "label": cfg.name, "method": cfg.method, "basis": cfg.kind.value, "degree": cfg.degree,
        "refine": cfg.refine, "refine_max_iters": cfg.refine_max_iters, "refine_tol": cfg.refine_tol,
        "cond_limit": cfg.cond_limit,
    }


def _write_manifest(out, entries, files, methods, seed):
    manifest = {
        "tool": "bearingtma",
        "version": __version__,
        "backend": kernels.BACKEND,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "master_seed": seed,
        "methods": [_method_json(m) for m in methods],
        "scenarios": entries,
        "outputs": sorted(str(f.relative_to(out)) for f in files),
    }
    write_atomic(out / "manifest.json", json.dumps(manifest, indent=2) + "\n")


def cmd_compare(args):
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files, entries = [], []
    methods = None
    seed = None
    scenarios = args.scenario
    for name in scenarios:
        ns = argparse.Namespace(scenario=name, seed=args.seed)
        path, cp, scenario = _load(ns)
        methods = _methods(args, cp)
        seed = scenario.seed
        target = out / _safe(scenario.name) if len(scenarios) > 1 else out
        target.mkdir(parents=True, exist_ok=True)
        reports = run_monte_carlo(scenario, methods, args.runs, threads=args.threads)
        for rep in reports:
            if rep.failure_count == rep.n_runs:
                print(f"warning: {rep.method} failed on all {rep.n_runs} runs of {scenario.name}", file=sys.stderr)
        files += _write_reports(target, scenario, reports)
        entries.append({
            "name": scenario.name,
            "file": str(path),
            "digest_sha256": file_digest(path),
            "initial_range_class": scenario.initial_range_class,
            "n_runs": args.runs,
            "failures": {r.method: r.failure_count for r in reports},
            "degenerate": [r.method for r in reports if r.degenerate],
            "all_failed": [r.method for r in reports if r.failure_count == r.n_runs],
        })
        final = ", ".join(f"{r.method}={r.stats['position'].rmse[-1]:.1f} m" for r in reports)
        print(f"{scenario.name}: final-time position RMSE {final}")
    _write_manifest(out, entries, files, methods, seed)
    return EXIT_OK


# -- sweep ------------------------------------------------------------------

def _cell_seed(master, cell):
    ss = np.random.SeedSequence(entropy=int(master), spawn_key=(0x5EED, int(cell)))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _parse_values(param, raw):
    vals = []
    for item in raw.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            vals.append(int(item) if param in ("degree", "n_obs") else float(item))
        except ValueError:
            raise ConfigError(param, f"invalid value {item!r}") from None
    if not vals:
        raise ConfigError(param, "no values given")
    return vals


def cmd_sweep(args):
    if args.param not in SWEEP_PARAMS:
        print(f"error: unknown parameter {args.param!r}; valid: {', '.join(SWEEP_PARAMS)}", file=sys.stderr)
        return EXIT_USAGE
    values = _parse_values(args.param, args.values)
    path = resolve_path(args.scenario)
    cp = read_config(path)
    base = build_scenario(cp, {"seed": args.seed} if args.seed is not None else {})
    methods = _methods(args, cp)
    columns = [
        "param_value", "method", "t", "mean_pos_err", "rmse_pos_err", "p5", "median", "p95",
        "mean_range_err", "rmse_range_err", "mean_vel_err", "failures",
    ]
    rows = []
    for cell, value in enumerate(values):
        overrides = {"seed": _cell_seed(base.seed, cell)}
        cell_methods = methods
        if args.param == "degree":
            if not 0 <= value <= MAX_DEGREE:
                raise ConfigError("degree", f"must be in [0, {MAX_DEGREE}], got {value}")
            cell_methods = [replace(m, degree=value) if m.method == NPOLY else m for m in methods]
        else:
            overrides[args.param] = value
        scenario = build_scenario(cp, overrides)
        for rep in run_monte_carlo(scenario, cell_methods, args.runs, threads=args.threads):
            s = rep.stats
            for k, t in enumerate(rep.times):
                rows.append({
                    "param_value": _fmt(value) if args.param not in ("degree", "n_obs") else str(value),
                    "method": rep.method, "t": t,
                    "mean_pos_err": s["position"].mean[k], "rmse_pos_err": s["position"].rmse[k],
                    "p5": s["position"].p5[k], "median": s["position"].median[k], "p95": s["position"].p95[k],
                    "mean_range_err": s["range"].mean[k], "rmse_range_err": s["range"].rmse[k],
                    "mean_vel_err": s["velocity"].mean[k], "failures": str(rep.failure_count),
                })
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    dest = write_csv(out / f"sweep_{args.param}.csv", columns, rows)
    print(f"{len(rows)} rows written to {dest}")
    return EXIT_OK


# -- entry point ------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(prog="bearingtma", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, scenario_repeat=False):
        if scenario_repeat:
            p.add_argument("--scenario", action="append", required=True,
                           help="scenario file or bundled name (repeatable)")
        else:
            p.add_argument("--scenario", required=True, help="scenario file or bundled name")
        p.add_argument("--seed", type=int, help="override the scenario seed")
        p.add_argument("--out-dir", default=".", help="output directory")

    def mc(p):
        p.add_argument("--runs", type=_positive_int, default=1000)
        p.add_argument("--threads", type=_positive_int, default=1)
        p.add_argument("--method", action="append",
                       help="name=nbearings|npoly,basis=cheb1|cheb2|legendre,degree=N,refine=0|1 (repeatable)")

    p = sub.add_parser("simulate", help="write noisy observations and truth CSVs")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="fit a trajectory to an observations CSV")
    p.add_argument("--observations", required=True)
    p.add_argument("--method", dest="name", choices=[NPOLY, NBEARINGS], default=NPOLY)
    p.add_argument("--basis", type=_basis, default=BasisKind.CHEBYSHEV1)
    p.add_argument("--degree", type=_non_negative_int, default=2)
    p.add_argument("--refine", action="store_true")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("compare", help="paired Monte Carlo comparison of methods")
    common(p, scenario_repeat=True)
    mc(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sweep", help="Monte Carlo comparison over a swept parameter")
    common(p)
    mc(p)
    p.add_argument("--param", required=True, help=f"one of {', '.join(SWEEP_PARAMS)}")
    p.add_argument("--values", required=True, help="comma-separated values")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except UnobservableGeometryError as exc:
        print(f"unobservable geometry: {exc} (condition number {exc.condition_number:.6g})", file=sys.stderr)
        return EXIT_UNOBSERVABLE
    except (DataError, InsufficientDataError, DegenerateGeometryError, DomainError, ShapeError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
