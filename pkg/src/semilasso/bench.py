"""Experiment harness: repeated seeded runs, metrics, aggregation, reports.

A repetition regenerates the scenario with seed ``base + rep``, transforms
it, builds the penalty weights, picks the penalty level (information
criterion over a warm-started path, or a fixed value), and then cold-solves
with every requested method so iteration and time columns are head-to-head
comparable.  Both solvers of a penalty variant receive byte-identical inputs,
recorded as a hash in the per-repetition records.

Fixed penalty levels are understood on the uncentered-objective scale and are
divided by ``scale**2`` before solving, mirroring the sigma convention of the
solvers.
"""

import hashlib
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .admm import AdmmOptions, admm_solve
from .datagen import ScenarioSpec, generate
from .errors import ZeroTruth
from .model_select import (
    adaptive_weights_highdim,
    adaptive_weights_lowdim,
    lasso_weights,
    select_lambda,
    solve_path,
)
from .smoothing import transform_sample
from .ssnal import SolveOptions, ssnal_solve

__all__ = [
    "Metrics",
    "AggregateRow",
    "RepRecord",
    "Preset",
    "PRESETS",
    "relative_error",
    "nnz_estimate",
    "run_experiment",
    "run_csv_study",
    "aggregate",
    "emit_report",
    "read_report",
    "emit_support_dump",
    "WAGE_SCHEMA",
]

log = logging.getLogger("semilasso.bench")

METHODS = ("ssnal_a", "ssnal_l", "admm_a", "admm_l")

# CSV column layout of aggregate reports (fixed order, %.6e values).
_COLUMNS = (
    "method",
    "re_err_mean", "re_err_std", "nnz_mean", "nnz_std", "res_mean", "res_std",
    "time_mean", "time_std", "iter_mean", "iter_std",
)
_METRIC_KEYS = ("re_err", "nnz", "res", "time", "iter")


@dataclass
class Metrics:
    """Per-run metric tuple; ``re_err`` is NaN for real-data studies."""

    re_err: float
    nnz: int
    res: float
    time_s: float
    iters: int

    def value(self, key):
        return {
            "re_err": self.re_err, "nnz": self.nnz, "res": self.res,
            "time": self.time_s, "iter": self.iters,
        }[key]


@dataclass
class AggregateRow:
    """Mean/std of each metric over the repetition set for one method."""

    method: str
    means: dict
    stds: dict


@dataclass
class RepRecord:
    """Everything retained from one (repetition, method) solve."""

    rep: int
    method: str
    metrics: Metrics
    lam: float
    lam_raw: float
    bandwidth: float
    input_hash: str
    beta_hat: np.ndarray
    beta_star: np.ndarray | None
    converged: bool


def relative_error(beta_hat, beta_star):
    """``||beta_star - beta_hat|| / ||beta_star||``."""
    denom = np.linalg.norm(beta_star)
    if denom == 0.0:
        raise ZeroTruth("relative error undefined for a zero truth vector")
    return float(np.linalg.norm(np.asarray(beta_star) - np.asarray(beta_hat)) / denom)


def nnz_estimate(beta_hat):
    """Smallest k whose top-k magnitudes hold 99.9% of the l1 mass."""
    a = np.abs(np.asarray(beta_hat, dtype=float))
    total = a.sum()
    if total == 0.0:
        return 0
    cum = np.cumsum(np.sort(a)[::-1])
    return int(np.searchsorted(cum, 0.999 * total) + 1)


def _hash_inputs(prob, lam, omega):
    h = hashlib.sha256()
    h.update(prob.Xt.tobytes())
    h.update(prob.Yt.tobytes())
    h.update(np.float64(lam).tobytes())
    h.update(np.asarray(omega, dtype=float).tobytes())
    return h.hexdigest()


def _build_weights(prob, penalty, weight_mode, beta_star):
    if penalty == "l":
        return lasso_weights(prob.p)
    if weight_mode == "lowdim" or (weight_mode == "auto" and prob.p < prob.n):
        return adaptive_weights_lowdim(prob)
    if beta_star is None:
        raise ValueError("high-dimensional adaptive weights need a known support")
    return adaptive_weights_highdim(prob, np.flatnonzero(beta_star))


def _pick_lambda(prob, weights, lambda_fixed, criterion, ssnal_opts):
    if lambda_fixed is not None:
        return lambda_fixed / prob.scale**2
    crit = criterion or ("bic" if prob.p < prob.n else "hbic")
    path = solve_path(prob, weights, opts=ssnal_opts, criterion=crit)
    lam, _ = select_lambda(path)
    return lam


def _solve_with(method_solver, prob, radii, ssnal_opts, admm_opts):
    t0 = time.perf_counter()
    if method_solver == "ssnal":
        rep = ssnal_solve(prob, radii, ssnal_opts)
    else:
        rep = admm_solve(prob, radii, admm_opts)
    return rep, time.perf_counter() - t0


def _run_rep(rep_idx, scenario, methods, lambda_fixed, criterion, bandwidth,
             weight_mode, ssnal_opts, admm_opts):
    spec = replace(scenario, seed=scenario.seed + rep_idx)
    inst = generate(spec)
    prob, h = transform_sample(inst.sample, bandwidth=bandwidth)
    records = []
    for penalty in ("a", "l"):
        wanted = [m for m in methods if m.endswith("_" + penalty)]
        if not wanted:
            continue
        weights = _build_weights(prob, penalty, weight_mode, inst.beta_star)
        lam = _pick_lambda(prob, weights, lambda_fixed, criterion, ssnal_opts)
        radii = lam * weights.omega
        digest = _hash_inputs(prob, lam, weights.omega)
        for method in wanted:
            solver = method.split("_")[0]
            report, elapsed = _solve_with(solver, prob, radii, ssnal_opts, admm_opts)
            records.append(
                RepRecord(
                    rep=rep_idx,
                    method=method,
                    metrics=Metrics(
                        re_err=relative_error(report.beta_hat, inst.beta_star),
                        nnz=nnz_estimate(report.beta_hat),
                        res=report.res,
                        time_s=elapsed,
                        iters=report.outer_iters,
                    ),
                    lam=lam,
                    lam_raw=lam * prob.scale**2,
                    bandwidth=h,
                    input_hash=digest,
                    beta_hat=report.beta_hat,
                    beta_star=inst.beta_star,
                    converged=report.converged,
                )
            )
    return records


def run_experiment(scenario, methods, reps, lambda_fixed=None, criterion=None,
                   bandwidth="cv", weight_mode="auto", threads=1,
                   ssnal_opts=None, admm_opts=None):
    """Run ``reps`` seeded repetitions of a scenario with each method.

    Returns ``(table, records)`` where ``table`` holds one AggregateRow per
    method in the requested order and ``records`` the flat per-repetition
    results (ordered by repetition, then method).  Solver failures inside a
    repetition propagate; non-convergence does not (it is flagged on the
    record).
    """
    if reps < 1:
        raise ValueError("reps must be at least 1")
    bad = [m for m in methods if m not in METHODS]
    if bad:
        raise ValueError(f"unknown methods {bad}; choose from {METHODS}")
    ssnal_opts = ssnal_opts or SolveOptions()
    admm_opts = admm_opts or AdmmOptions()

    args = (scenario, methods, lambda_fixed, criterion, bandwidth, weight_mode,
            ssnal_opts, admm_opts)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(_run_rep, r, *args) for r in range(reps)]
            per_rep = [f.result() for f in futures]
    else:
        per_rep = [_run_rep(r, *args) for r in range(reps)]
    records = [rec for chunk in per_rep for rec in chunk]
    return aggregate(records, methods), records


def run_csv_study(sample, methods, lambda_fixed=None, criterion="bic",
                  bandwidth="cv", ssnal_opts=None, admm_opts=None):
    """Single-sample study on real data (no truth vector, so ReErr is NaN)."""
    ssnal_opts = ssnal_opts or SolveOptions()
    admm_opts = admm_opts or AdmmOptions()
    prob, h = transform_sample(sample, bandwidth=bandwidth)
    records = []
    for penalty in ("a", "l"):
        wanted = [m for m in methods if m.endswith("_" + penalty)]
        if not wanted:
            continue
        weights = _build_weights(prob, penalty, "lowdim", None)
        lam = _pick_lambda(prob, weights, lambda_fixed, criterion, ssnal_opts)
        radii = lam * weights.omega
        digest = _hash_inputs(prob, lam, weights.omega)
        for method in wanted:
            solver = method.split("_")[0]
            report, elapsed = _solve_with(solver, prob, radii, ssnal_opts, admm_opts)
            records.append(
                RepRecord(
                    rep=0, method=method,
                    metrics=Metrics(
                        re_err=float("nan"),
                        nnz=nnz_estimate(report.beta_hat),
                        res=report.res,
                        time_s=elapsed,
                        iters=report.outer_iters,
                    ),
                    lam=lam, lam_raw=lam * prob.scale**2, bandwidth=h,
                    input_hash=digest, beta_hat=report.beta_hat,
                    beta_star=None, converged=report.converged,
                )
            )
    return aggregate(records, methods), records


def _mean_std(values):
    arr = np.asarray(values, dtype=float)
    mean = float(arr.mean())
    std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return mean, std


def aggregate(records, methods):
    """Mean/std per metric per method, in the requested method order."""
    table = []
    for method in methods:
        chunk = [r for r in records if r.method == method]
        if not chunk:
            continue
        means, stds = {}, {}
        for key in _METRIC_KEYS:
            means[key], stds[key] = _mean_std([r.metrics.value(key) for r in chunk])
        table.append(AggregateRow(method=method, means=means, stds=stds))
    return table


def _row_values(row):
    out = [row.method]
    for key in _METRIC_KEYS:
        out.extend((row.means[key], row.stds[key]))
    return out


def render_report(table, fmt):
    """Aggregate table as CSV text (fixed column order, %.6e) or JSON text."""
    if fmt == "csv":
        lines = [",".join(_COLUMNS)]
        for row in table:
            vals = _row_values(row)
            lines.append(",".join([vals[0]] + ["%.6e" % v for v in vals[1:]]))
        return "\n".join(lines) + "\n"
    if fmt == "json":
        payload = [dict(zip(_COLUMNS, _row_values(row))) for row in table]
        return json.dumps(payload, indent=2) + "\n"
    raise ValueError(f"unknown report format {fmt!r}")


def emit_report(table, fmt, path):
    """Write the aggregate table as CSV (fixed column order, %.6e) or JSON."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(render_report(table, fmt))


def read_report(path, fmt="csv"):
    """Parse a report written by emit_report back into AggregateRow objects."""
    rows = []
    if fmt == "csv":
        with open(path, encoding="utf-8") as fh:
            lines = [ln for ln in fh.read().splitlines() if ln and not ln.startswith("#")]
        if lines[0] != ",".join(_COLUMNS):
            raise ValueError("unexpected report header")
        for ln in lines[1:]:
            parts = ln.split(",")
            rows.append(_record_row(parts[0], [float(v) for v in parts[1:]]))
    elif fmt == "json":
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        for entry in payload:
            rows.append(_record_row(entry["method"], [entry[c] for c in _COLUMNS[1:]]))
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    return rows


def _record_row(method, values):
    means = dict(zip(_METRIC_KEYS, values[0::2]))
    stds = dict(zip(_METRIC_KEYS, values[1::2]))
    return AggregateRow(method=method, means=means, stds=stds)


def emit_support_dump(records, path):
    """One CSV row per (rep, method, nonzero coordinate) for box-plot data."""
    lines = ["rep,method,coord,value"]
    for rec in records:
        for j in np.flatnonzero(rec.beta_hat):
            lines.append("%d,%s,%d,%.9e" % (rec.rep, rec.method, j, rec.beta_hat[j]))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


@dataclass(frozen=True)
class Preset:
    """Named experiment configuration reproducing one reported table/figure."""

    name: str
    scenario: ScenarioSpec | None
    methods: tuple
    reps: int
    lambda_fixed: float | None = None
    criterion: str | None = None
    bandwidth: object = "cv"
    needs_csv: bool = False


PRESETS = {
    "table1": Preset(
        name="table1",
        scenario=ScenarioSpec(kind="lowdim_uniform", n=1000, p=500, seed=1000,
                              nnz=20, value_interval=(0.0, 20.0), coef_seed=113),
        methods=METHODS,
        reps=20,
        criterion="bic",
    ),
    "table2": Preset(
        name="table2",
        scenario=ScenarioSpec(kind="highdim_uniform", n=500, p=1000, seed=2000,
                              nnz=20),
        methods=METHODS,
        reps=20,
        criterion="hbic",
    ),
    "fig1": Preset(
        name="fig1",
        scenario=ScenarioSpec(kind="lowdim_fixed", n=10000, p=500, seed=3000),
        methods=("ssnal_a",),
        reps=20,
        lambda_fixed=0.5,
        bandwidth="rule",
    ),
    "fig2": Preset(
        name="fig2",
        scenario=ScenarioSpec(kind="highdim_fixed", n=300, p=10000, seed=4000),
        methods=("ssnal_a",),
        reps=20,
        lambda_fixed=0.1,
    ),
    "wage": Preset(
        name="wage",
        scenario=None,
        methods=METHODS,
        reps=1,
        criterion="bic",
        needs_csv=True,
    ),
}

# Column roles and ordinal codings for the workers' wage study CSV.
WAGE_SCHEMA = {
    "y": "wage",
    "t": "education",
    "x": ["age", "maritl", "race", "jobclass", "health", "health_ins"],
    "encodings": {
        "maritl": {
            "1. Never Married": 1, "2. Married": 2, "3. Widowed": 3,
            "4. Divorced": 4, "5. Separated": 5,
        },
        "race": {"1. White": 4, "2. Black": 2, "3. Asian": 3, "4. Other": 1},
        "education": {
            "1. < HS Grad": 1, "2. HS Grad": 2, "3. Some College": 3,
            "4. College Grad": 4, "5. Advanced Degree": 5,
        },
        "jobclass": {"1. Industrial": 1, "2. Information": 2},
        "health": {"1. <=Good": 1, "2. >=Very Good": 2},
        "health_ins": {"1. Yes": 1, "2. No": 0},
    },
}
