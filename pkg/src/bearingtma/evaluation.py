"""Error metrics and the paired Monte Carlo comparison harness.

Every run draws one observation series from its own counter-derived
generator and feeds it to all methods, so method comparisons are paired.
Failed fits (unobservable geometry and the like) are counted, never
averaged in.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from .errors import DegenerateGeometryError, InsufficientDataError, ShapeError, UnobservableGeometryError
from .estimators import NBEARINGS, estimate
from .sensing import observe, run_rng

log = logging.getLogger(__name__)

FIELDS = ("position", "range", "x", "y", "velocity")

# failures that count against a method instead of aborting the experiment
FIT_FAILURES = (UnobservableGeometryError, InsufficientDataError, DegenerateGeometryError, np.linalg.LinAlgError)


@dataclass(frozen=True, eq=False)
class ErrorSeries:
    """Per-time errors of one estimate. ``x_error``/``y_error`` are signed."""

    t: np.ndarray
    position_error: np.ndarray
    range_error: np.ndarray
    x_error: np.ndarray
    y_error: np.ndarray
    velocity_error: np.ndarray

    def field(self, name):
        """Non-negative error magnitude for one of :data:`FIELDS`."""
        if name == "position":
            return self.position_error
        if name == "range":
            return self.range_error
        if name == "x":
            return np.abs(self.x_error)
        if name == "y":
            return np.abs(self.y_error)
        if name == "velocity":
            return self.velocity_error
        raise KeyError(name)


def score_run(estimate, truth, observer_xy=None):
    """Compare an estimate against the ground truth track."""
    t = np.asarray(truth.t, dtype=np.float64)
    obs = truth.observer_xy if observer_xy is None else np.asarray(observer_xy, dtype=np.float64)
    if truth.xy.shape != (t.shape[0], 2) or obs.shape != (t.shape[0], 2):
        raise ShapeError("truth, observer and time arrays do not line up")
    xy, vxy = estimate.track(t)
    d = xy - truth.xy
    rng_hat = np.hypot(*(xy - obs).T)
    rng_true = np.hypot(*(truth.xy - obs).T)
    return ErrorSeries(
        t=t,
        position_error=np.hypot(d[:, 0], d[:, 1]),
        range_error=np.abs(rng_hat - rng_true),
        x_error=d[:, 0],
        y_error=d[:, 1],
        velocity_error=np.hypot(*(vxy - truth.vxy).T),
    )


@dataclass(frozen=True, eq=False)
class FieldStats:
    mean: np.ndarray
    rmse: np.ndarray
    median: np.ndarray
    p5: np.ndarray
    p95: np.ndarray


@dataclass(frozen=True, eq=False)
class MonteCarloReport:
    method: str
    scenario: str
    initial_range_class: Optional[str]
    n_runs: int
    failure_count: int
    master_seed: int
    times: np.ndarray
    stats: Dict[str, FieldStats]
    bias_x: np.ndarray
    bias_y: np.ndarray
    degenerate: bool
    raw: Optional[Dict[str, np.ndarray]] = field(default=None, repr=False)

    @property
    def successes(self):
        return self.n_runs - self.failure_count


class _Accumulator:
    """Sufficient statistics merged in run order, plus stored values for percentiles."""

    def __init__(self, n_times):
        self.count = 0
        self.sums = {f: np.zeros(n_times) for f in FIELDS}
        self.sq = {f: np.zeros(n_times) for f in FIELDS}
        self.signed = {"x": np.zeros(n_times), "y": np.zeros(n_times)}
        self.values = {f: [] for f in FIELDS}

    def add(self, err):
        self.count += 1
        for f in FIELDS:
            v = err.field(f)
            self.sums[f] += v
            self.sq[f] += v * v
            self.values[f].append(v)
        self.signed["x"] += err.x_error
        self.signed["y"] += err.y_error

    def stats(self):
        out = {}
        n = self.count
        for f in FIELDS:
            if n == 0:
                nan = np.full_like(self.sums[f], np.nan)
                out[f] = FieldStats(nan, nan, nan, nan, nan)
                continue
            vals = np.vstack(self.values[f])
            p5, med, p95 = np.percentile(vals, [5, 50, 95], axis=0)
            out[f] = FieldStats(self.sums[f] / n, np.sqrt(self.sq[f] / n), med, p5, p95)
        return out


def _one_run(scenario, methods, j):
    series, truth = observe(scenario, run_rng(scenario.seed, j))
    results = []
    for cfg in methods:
        try:
            results.append(score_run(estimate(series, cfg), truth))
        except FIT_FAILURES as exc:
            results.append(exc)
    return results


def _unique_labels(methods):
    labels, seen = [], {}
    for cfg in methods:
        name = cfg.name
        seen[name] = seen.get(name, 0) + 1
        labels.append(name if seen[name] == 1 else f"{name}#{seen[name]}")
    return labels


def run_monte_carlo(scenario, methods, n_runs, threads=1, keep_raw=False):
    """Paired Monte Carlo comparison; one report per method, in input order.

    Run ``j`` uses ``run_rng(scenario.seed, j)``; results are aggregated in
    run order, so reports do not depend on ``threads``.
    """
    if n_runs < 1:
        raise ValueError(f"n_runs must be >= 1, got {n_runs}")
    methods = list(methods)
    if not methods:
        raise ValueError("at least one method is required")
    scenario.validate(max(cfg.degree for cfg in methods))
    from .kinematics import sample_times

    times = sample_times(scenario)
    accs = [_Accumulator(times.shape[0]) for _ in methods]
    failures = [0] * len(methods)

    def task(j):
        return _one_run(scenario, methods, j)

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = pool.map(task, range(n_runs))
            for res in results:
                _merge(res, accs, failures)
    else:
        for j in range(n_runs):
            _merge(task(j), accs, failures)

    reports = []
    for label, acc, fails in zip(_unique_labels(methods), accs, failures):
        degenerate = fails > 0.5 * n_runs
        if degenerate:
            log.warning("method %s failed on %d of %d runs", label, fails, n_runs)
        n = max(acc.count, 1)
        raw = {f: np.vstack(acc.values[f]) for f in FIELDS} if keep_raw and acc.count else None
        reports.append(
            MonteCarloReport(
                method=label,
                scenario=scenario.name,
                initial_range_class=scenario.initial_range_class,
                n_runs=n_runs,
                failure_count=fails,
                master_seed=scenario.seed,
                times=times,
                stats=acc.stats(),
                bias_x=acc.signed["x"] / n if acc.count else np.full_like(times, np.nan),
                bias_y=acc.signed["y"] / n if acc.count else np.full_like(times, np.nan),
                degenerate=degenerate,
                raw=raw,
            )
        )
    return reports


def _merge(results, accs, failures):
    for i, res in enumerate(results):
        if isinstance(res, Exception):
            failures[i] += 1
        else:
            accs[i].add(res)


@dataclass(frozen=True)
class ComparisonTable:
    """Wide table: one row per (time, metric); ``None`` marks an omitted ratio."""

    scenario: str
    columns: List[str]
    rows: List[dict]


TABLE_METRICS = ("position", "range", "velocity")


def _baseline_index(reports):
    for i, rep in enumerate(reports):
        if rep.method.startswith(NBEARINGS):
            return i
    return 0


def compare_table(reports):
    """Align reports on their common grid.

    RMSE ratios ``baseline / other`` are added for every non-baseline report;
    the baseline is the first N-Bearings report, else the first report.
    """
    reports = list(reports)
    if not reports:
        raise ShapeError("no reports to compare")
    ref = reports[0]
    for rep in reports[1:]:
        if rep.scenario != ref.scenario or not np.array_equal(rep.times, ref.times):
            raise ShapeError("reports do not share scenario and time grid")
    base = _baseline_index(reports)
    labels = [r.method for r in reports]
    columns = ["t", "metric"]
    for lab in labels:
        columns += [f"{lab}_mean", f"{lab}_rmse"]
    ratio_cols = [
        (i, f"ratio_{labels[base]}_over_{lab}") for i, lab in enumerate(labels) if i != base
    ]
    columns += [name for _, name in ratio_cols]
    rows = []
    for k, t in enumerate(ref.times):
        for metric in TABLE_METRICS:
            row = {"t": float(t), "metric": metric}
            for lab, rep in zip(labels, reports):
                row[f"{lab}_mean"] = float(rep.stats[metric].mean[k])
                row[f"{lab}_rmse"] = float(rep.stats[metric].rmse[k])
            num = reports[base].stats[metric].rmse[k]
            for i, name in ratio_cols:
                den = reports[i].stats[metric].rmse[k]
                row[name] = float(num / den) if den >= 1e-12 and np.isfinite(num) else None
            rows.append(row)
    return ComparisonTable(ref.scenario, columns, rows)


def final_rmse_ratio(reports, metric="position"):
    """Baseline/other final-time RMSE ratio for a two-report comparison."""
    base = _baseline_index(reports)
    other = 1 - base if len(reports) == 2 else None
    if other is None:
        raise ShapeError("final_rmse_ratio needs exactly two reports")
    return float(reports[base].stats[metric].rmse[-1] / reports[other].stats[metric].rmse[-1])
