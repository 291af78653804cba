"""Command-line entry point: transform, solve, path, and bench subcommands.

Every run is driven by a resolved RunConfig assembled from an optional flat
``key=value`` config file plus command-line flags (flags win).  The resolved
config and seed are echoed into every report for provenance: JSON reports
carry a ``config`` object; CSV reports are preceded by ``#``-comment lines.

Exit codes: 0 success, 1 solver non-convergence (the report is still
written), 2 usage error.
"""

import argparse
import json
import logging
import sys
from dataclasses import dataclass, fields, replace

import numpy as np

from . import bench
from .admm import AdmmOptions, admm_solve
from .datagen import CsvSchema, load_csv
from .errors import SemilassoError, UsageError
from .model_select import (
    adaptive_weights_highdim,
    adaptive_weights_lowdim,
    lasso_weights,
    lambda_grid,
    select_lambda,
    solve_path,
)
from .smoothing import transform_sample
from .ssnal import SolveOptions, ssnal_solve

__all__ = ["RunConfig", "parse_config", "serialize_config", "run", "main"]

log = logging.getLogger("semilasso.cli")

_SUBCOMMANDS = ("transform", "solve", "path", "bench")


@dataclass
class RunConfig:
    """Fully resolved run description (one field per flag)."""

    subcommand: str
    scenario: str | None = None
    csv: str | None = None
    schema: str | None = None
    method: str = "both"
    penalty: str = "adaptive"
    lambda_fixed: float | None = None
    lambda_criterion: str | None = None
    bandwidth: str = "cv"
    reps: int | None = None
    seed: int | None = None
    n: int | None = None
    p: int | None = None
    out: str = "report.csv"
    format: str = "csv"
    threads: int = 1
    verbose: bool = False
    max_outer: int | None = None
    admm_max_iters: int | None = None
    res_tol: float | None = None


_FLAG_FIELDS = {f.name for f in fields(RunConfig)} - {"subcommand"}


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="semilasso",
        description="Sparse coefficient estimation in partially linear models",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in _SUBCOMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="flat key=value config file")
        sp.add_argument("--scenario", help="named preset: " + ", ".join(bench.PRESETS))
        sp.add_argument("--csv", help="input CSV path (real-data study)")
        sp.add_argument("--schema", help="JSON schema file for --csv (default: wage schema)")
        sp.add_argument("--method", choices=["ssnal", "admm", "both"])
        sp.add_argument("--penalty", choices=["adaptive", "lasso", "both"])
        sp.add_argument("--lambda", dest="lambda_fixed", type=float,
                        help="fixed penalty level (uncentered-objective units)")
        sp.add_argument("--lambda-criterion", choices=["bic", "hbic"])
        sp.add_argument("--bandwidth", help="'cv', 'rule', or a number")
        sp.add_argument("--reps", type=int)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--n", type=int, help="override preset sample size")
        sp.add_argument("--p", type=int, help="override preset dimension")
        sp.add_argument("--out")
        sp.add_argument("--format", choices=["csv", "json"])
        sp.add_argument("--threads", type=int)
        sp.add_argument("--verbose", action="store_true", default=None)
        sp.add_argument("--max-outer", type=int, help="outer-iteration cap (ssnal)")
        sp.add_argument("--admm-max-iters", type=int, help="iteration cap (admm)")
        sp.add_argument("--res-tol", type=float, help="KKT residual tolerance")
    return parser


def _read_config_file(path):
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, value = line.partition("=")
            key = key.strip().replace("-", "_")
            if key == "lambda":
                key = "lambda_fixed"
            if key == "subcommand":  # informational; the CLI positional wins
                continue
            if key not in _FLAG_FIELDS:
                raise UsageError(f"{path}:{lineno}: unknown config key {key!r}")
            values[key] = value.strip()
    return values


_BOOL_TRUE = {"1", "true", "yes", "on"}
_BOOL_FALSE = {"0", "false", "no", "off"}


def _coerce(name, value):
    if value is None or not isinstance(value, str):
        return value
    if name in ("lambda_fixed", "res_tol"):
        return float(value)
    if name in ("reps", "seed", "threads", "n", "p", "max_outer", "admm_max_iters"):
        return int(value)
    if name == "verbose":
        low = value.lower()
        if low in _BOOL_TRUE:
            return True
        if low in _BOOL_FALSE:
            return False
        raise UsageError(f"cannot parse boolean {value!r} for {name}")
    return value


def parse_config(argv, config_file=None):
    """Resolve flags plus an optional config file into a RunConfig.

    Flags always override config-file keys; unknown keys and inconsistent
    combinations raise UsageError.
    """
    parser = _build_parser()
    ns = parser.parse_args(argv)
    file_path = config_file or ns.config
    file_values = _read_config_file(file_path) if file_path else {}

    cfg = RunConfig(subcommand=ns.subcommand)
    for key, value in file_values.items():
        setattr(cfg, key, _coerce(key, value))
    for key in _FLAG_FIELDS:
        flag_val = getattr(ns, key, None)
        if flag_val is not None:
            setattr(cfg, key, flag_val)
    if cfg.verbose is None:
        cfg.verbose = False
    _validate(cfg)
    return cfg


def _validate(cfg):
    if cfg.lambda_fixed is not None and cfg.lambda_criterion is not None:
        raise UsageError("--lambda and --lambda-criterion are mutually exclusive")
    if cfg.scenario is not None and cfg.csv is not None:
        raise UsageError("--scenario and --csv are mutually exclusive")
    if cfg.subcommand != "transform" and cfg.scenario is None and cfg.csv is None:
        raise UsageError("one of --scenario or --csv is required")
    if cfg.subcommand == "transform" and cfg.scenario is None and cfg.csv is None:
        raise UsageError("transform needs --scenario or --csv")
    if cfg.scenario is not None and cfg.scenario not in bench.PRESETS:
        raise UsageError(
            f"unknown scenario {cfg.scenario!r}; presets: {', '.join(bench.PRESETS)}"
        )
    if cfg.format not in ("csv", "json"):
        raise UsageError(f"unknown format {cfg.format!r}")
    if cfg.bandwidth not in ("cv", "rule"):
        try:
            float(cfg.bandwidth)
        except (TypeError, ValueError):
            raise UsageError(f"bandwidth must be 'cv', 'rule', or a number, got {cfg.bandwidth!r}") from None
    if cfg.threads < 1:
        raise UsageError("threads must be at least 1")


def serialize_config(cfg):
    """Canonical flat key=value text for a RunConfig (round-trips)."""
    lines = [f"subcommand={cfg.subcommand}"]
    for f in sorted(_FLAG_FIELDS):
        value = getattr(cfg, f)
        if value is None:
            continue
        lines.append(f"{f}={value}")
    return "\n".join(lines) + "\n"


def _bandwidth_value(cfg):
    return cfg.bandwidth if cfg.bandwidth in ("cv", "rule") else float(cfg.bandwidth)


def _method_list(cfg):
    solvers = ("ssnal", "admm") if cfg.method == "both" else (cfg.method,)
    pens = {"adaptive": ("a",), "lasso": ("l",), "both": ("a", "l")}[cfg.penalty]
    return tuple(f"{s}_{p}" for s in solvers for p in pens)


def _load_input(cfg):
    """Returns ('scenario', preset/spec) or ('sample', RawSample)."""
    if cfg.csv is not None:
        if cfg.schema is not None:
            with open(cfg.schema, encoding="utf-8") as fh:
                schema = CsvSchema.from_dict(json.load(fh))
        else:
            schema = CsvSchema.from_dict(bench.WAGE_SCHEMA)
        return "sample", load_csv(cfg.csv, schema)
    preset = bench.PRESETS[cfg.scenario]
    if preset.needs_csv:
        raise UsageError(f"preset {cfg.scenario!r} needs --csv")
    spec = preset.scenario
    if cfg.seed is not None:
        spec = replace(spec, seed=cfg.seed)
    if cfg.n is not None:
        spec = replace(spec, n=cfg.n)
    if cfg.p is not None:
        spec = replace(spec, p=cfg.p, nnz=min(spec.nnz, cfg.p))
    return "scenario", replace(preset, scenario=spec)


def _provenance_lines(cfg):
    return ["# " + line for line in serialize_config(cfg).splitlines()]


def _write_with_provenance(cfg, payload_lines=None, payload_obj=None):
    if cfg.format == "csv":
        text = "\n".join(_provenance_lines(cfg) + (payload_lines or [])) + "\n"
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            json.dump({"config": _config_dict(cfg), **(payload_obj or {})}, fh, indent=2)
            fh.write("\n")


def _config_dict(cfg):
    return {f.name: getattr(cfg, f.name) for f in fields(cfg) if getattr(cfg, f.name) is not None}


def _report_lines(report, lam_raw, scale):
    return [
        "metric,value",
        f"method,{report.method}",
        "lambda_raw,%.9e" % lam_raw,
        "scale,%.9e" % scale,
        "res,%.6e" % report.res,
        f"outer_iters,{report.outer_iters}",
        f"total_inner_iters,{report.total_inner_iters}",
        "wall_time_s,%.6e" % report.wall_time_s,
        "primal_obj,%.9e" % report.primal_obj,
        "dual_obj,%.9e" % report.dual_obj,
        f"converged,{report.converged}",
        f"nnz,{bench.nnz_estimate(report.beta_hat)}",
    ] + ["beta,%d,%.9e" % (j, b) for j, b in enumerate(report.beta_hat) if b != 0.0]


def _report_obj(report, lam_raw, scale):
    return {
        "method": report.method,
        "lambda_raw": lam_raw,
        "scale": scale,
        "res": report.res,
        "outer_iters": report.outer_iters,
        "total_inner_iters": report.total_inner_iters,
        "wall_time_s": report.wall_time_s,
        "primal_obj": report.primal_obj,
        "dual_obj": report.dual_obj,
        "converged": report.converged,
        "nnz": bench.nnz_estimate(report.beta_hat),
        "beta_nonzero": {int(j): float(b) for j, b in enumerate(report.beta_hat) if b != 0.0},
    }


def _prepare_problem(cfg):
    """Common front half of solve/path: transformed problem plus weights."""
    kind, payload = _load_input(cfg)
    if kind == "sample":
        sample, beta_star = payload, None
    else:
        from .datagen import generate

        inst = generate(payload.scenario)
        sample, beta_star = inst.sample, inst.beta_star
        if cfg.lambda_fixed is None and payload.lambda_fixed is not None and cfg.lambda_criterion is None:
            cfg.lambda_fixed = payload.lambda_fixed
    prob, h = transform_sample(sample, bandwidth=_bandwidth_value(cfg))
    if cfg.penalty == "lasso":
        weights = lasso_weights(prob.p)
    elif prob.p < prob.n:
        weights = adaptive_weights_lowdim(prob)
    elif beta_star is not None:
        weights = adaptive_weights_highdim(prob, np.flatnonzero(beta_star))
    else:
        raise UsageError("adaptive penalty with p >= n needs a scenario with known support")
    return prob, h, weights


def _cmd_transform(cfg):
    kind, payload = _load_input(cfg)
    if kind == "scenario":
        from .datagen import generate

        sample = generate(payload.scenario).sample
    else:
        sample = payload
    prob, h = transform_sample(sample, bandwidth=_bandwidth_value(cfg))
    if cfg.format == "json":
        _write_with_provenance(cfg, payload_obj={
            "bandwidth": h, "scale": prob.scale,
            "Xt": prob.Xt.tolist(), "Yt": prob.Yt.tolist(),
        })
    else:
        lines = ["field,values", "bandwidth,%.9e" % h, "scale,%.9e" % prob.scale]
        lines += ["Yt," + ",".join("%.9e" % v for v in prob.Yt)]
        lines += ["Xt_%d," % i + ",".join("%.9e" % v for v in row) for i, row in enumerate(prob.Xt)]
        _write_with_provenance(cfg, payload_lines=lines)
    return 0


def _solver_opts(cfg):
    ssnal_kw, admm_kw = {}, {}
    if cfg.max_outer is not None:
        ssnal_kw["max_outer"] = cfg.max_outer
    if cfg.res_tol is not None:
        ssnal_kw["res_tol"] = cfg.res_tol
        admm_kw["res_tol"] = cfg.res_tol
    if cfg.admm_max_iters is not None:
        admm_kw["max_iters"] = cfg.admm_max_iters
    return SolveOptions(**ssnal_kw), AdmmOptions(**admm_kw)


def _cmd_solve(cfg):
    prob, _h, weights = _prepare_problem(cfg)
    ssnal_opts, admm_opts = _solver_opts(cfg)
    if cfg.lambda_fixed is not None:
        lam = cfg.lambda_fixed / prob.scale**2
    else:
        crit = cfg.lambda_criterion or ("bic" if prob.p < prob.n else "hbic")
        lam, _ = select_lambda(solve_path(prob, weights, opts=ssnal_opts, criterion=crit))
    radii = lam * weights.omega
    solvers = ("ssnal", "admm") if cfg.method == "both" else (cfg.method,)
    reports = [
        ssnal_solve(prob, radii, ssnal_opts) if s == "ssnal" else admm_solve(prob, radii, admm_opts)
        for s in solvers
    ]
    lam_raw = lam * prob.scale**2
    if cfg.format == "json":
        _write_with_provenance(
            cfg, payload_obj={"reports": [_report_obj(r, lam_raw, prob.scale) for r in reports]}
        )
    else:
        lines = []
        for r in reports:
            lines.extend(_report_lines(r, lam_raw, prob.scale))
        _write_with_provenance(cfg, payload_lines=lines)
    return 0 if all(r.converged for r in reports) else 1


def _cmd_path(cfg):
    prob, _h, weights = _prepare_problem(cfg)
    ssnal_opts, _ = _solver_opts(cfg)
    crit = cfg.lambda_criterion or ("bic" if prob.p < prob.n else "hbic")
    path = solve_path(prob, weights, grid=lambda_grid(prob), opts=ssnal_opts, criterion=crit)
    lam_star, _ = select_lambda(path)
    if cfg.format == "json":
        entries = [
            {
                "lam": float(lam), "lam_raw": float(lam * prob.scale**2),
                "score": float(score), "res": rep.res, "converged": rep.converged,
                "nnz": int(np.count_nonzero(rep.beta_hat)),
                "outer_iters": rep.outer_iters,
            }
            for lam, score, rep in zip(path.grid, path.scores, path.reports)
        ]
        _write_with_provenance(cfg, payload_obj={"lambda_star": lam_star, "path": entries})
    else:
        lines = ["lam,lam_raw,score,res,converged,nnz,outer_iters"]
        for lam, score, rep in zip(path.grid, path.scores, path.reports):
            lines.append(
                "%.6e,%.6e,%.6e,%.6e,%s,%d,%d"
                % (lam, lam * prob.scale**2, score, rep.res, rep.converged,
                   np.count_nonzero(rep.beta_hat), rep.outer_iters)
            )
        lines.append("lambda_star,%.6e" % lam_star)
        _write_with_provenance(cfg, payload_lines=lines)
    all_conv = all(r.converged for r in path.reports)
    return 0 if all_conv else 1


def _cmd_bench(cfg):
    kind, payload = _load_input(cfg)
    methods = _method_list(cfg)
    ssnal_opts, admm_opts = _solver_opts(cfg)
    if kind == "sample":
        crit = cfg.lambda_criterion or "bic"
        table, records = bench.run_csv_study(
            payload, methods, lambda_fixed=cfg.lambda_fixed, criterion=crit,
            bandwidth=_bandwidth_value(cfg), ssnal_opts=ssnal_opts, admm_opts=admm_opts,
        )
    else:
        preset = payload
        reps = cfg.reps if cfg.reps is not None else preset.reps
        table, records = bench.run_experiment(
            preset.scenario, methods, reps,
            lambda_fixed=cfg.lambda_fixed if cfg.lambda_fixed is not None else preset.lambda_fixed,
            criterion=cfg.lambda_criterion or preset.criterion,
            bandwidth=cfg.bandwidth if cfg.bandwidth != "cv" else preset.bandwidth,
            threads=cfg.threads,
            ssnal_opts=ssnal_opts, admm_opts=admm_opts,
        )
    body = bench.render_report(table, cfg.format)
    if cfg.format == "csv":
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write("\n".join(_provenance_lines(cfg)) + "\n" + body)
    else:
        _write_with_provenance(cfg, payload_obj={"table": json.loads(body)})
    dump_path = cfg.out + ".support.csv"
    bench.emit_support_dump(records, dump_path)
    return 0 if all(r.converged for r in records) else 1


def run(cfg):
    """Execute a resolved config; returns the process exit code."""
    logging.basicConfig(
        level=logging.DEBUG if cfg.verbose else logging.WARNING,
        format="%(name)s %(levelname)s %(message)s",
    )
    handler = {
        "transform": _cmd_transform,
        "solve": _cmd_solve,
        "path": _cmd_path,
        "bench": _cmd_bench,
    }[cfg.subcommand]
    return handler(cfg)


def main(argv=None):
    try:
        cfg = parse_config(sys.argv[1:] if argv is None else argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        return run(cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SemilassoError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
