"""Synthetic scenario generators and CSV ingestion.

Low-dimensional scenarios draw covariate columns from N(0, Sigma) with
``Sigma_ij = 0.7**|i-j|`` (generated by the closed-form bidiagonal Cholesky
recurrence); high-dimensional ones mix adjacent *sample* columns of an i.i.d.
Gaussian matrix.  Responses follow ``Y = X' beta + g(T) + eps`` with a smooth
``g`` (sine for low-dimensional, cosine for high-dimensional scenarios) and
standard normal noise.

All randomness comes from PCG64 generators seeded through SeedSequence
spawning, one independent substream per ingredient (support, X, T, eps), so
repetition protocols can redraw data while holding the coefficient vector
fixed via ``coef_seed``.
"""

import csv as _csv
from dataclasses import dataclass, field

import numpy as np

from .errors import ParseError, SchemaError
from .smoothing import RawSample

__all__ = [
    "ScenarioSpec",
    "SyntheticInstance",
    "CsvSchema",
    "FIG1_SUPPORT",
    "FIG2_SUPPORT",
    "G_FUNCS",
    "substreams",
    "generate",
    "gen_lowdim",
    "gen_highdim",
    "highdim_interval",
    "scaled_fixed_support",
    "load_csv",
]

KINDS = ("lowdim_fixed", "lowdim_uniform", "highdim_fixed", "highdim_uniform")

G_FUNCS = {
    "sin2pi": lambda t: np.sin(2.0 * np.pi * t),
    "cos2pi": lambda t: np.cos(2.0 * np.pi * t),
}

# Fixed-position coefficient supports (1-based coordinates as usually quoted).
FIG1_SUPPORT = {
    55: 9.0, 83: -5.0, 96: -7.0, 251: 3.0, 315: -6.0,
    368: 1.0, 404: 10.0, 456: -8.0, 465: 2.0, 482: 7.0,
}
FIG2_SUPPORT = {
    104: 5.0, 572: 2.0, 1746: -4.0, 2947: -3.0, 4065: -5.0,
    5092: 4.0, 5112: -1.0, 6680: 1.0, 7979: -2.0, 8460: 3.0,
}

_STREAM_LABELS = ("support", "x", "t", "eps")


@dataclass(frozen=True)
class ScenarioSpec:
    """Description of one synthetic scenario.

    ``value_interval`` may be None for high-dimensional uniform scenarios,
    where the default interval ``[a, 100a]`` with ``a = 5 sqrt(2 log(p)/n)``
    applies.  ``coef_seed`` optionally pins the coefficient substream to a
    separate seed so repetitions redraw data but share one truth vector.
    """

    kind: str
    n: int
    p: int
    seed: int
    nnz: int = 0
    value_interval: tuple | None = None
    coef_seed: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown scenario kind {self.kind!r}")
        if self.n < 1 or self.p < 1:
            raise ValueError("n and p must be at least 1")
        if not 0 <= self.nnz <= self.p:
            raise ValueError("need 0 <= nnz <= p")


@dataclass(frozen=True)
class SyntheticInstance:
    sample: RawSample
    beta_star: np.ndarray
    g_name: str
    eps: np.ndarray


def substreams(seed, coef_seed=None):
    """Independent PCG64 generators keyed 'support', 'x', 't', 'eps'.

    The support stream is derived from ``coef_seed`` when given; the three
    data streams always come from ``seed``.
    """
    children = np.random.SeedSequence(seed).spawn(len(_STREAM_LABELS))
    gens = {
        label: np.random.Generator(np.random.PCG64(child))
        for label, child in zip(_STREAM_LABELS, children)
    }
    if coef_seed is not None:
        child = np.random.SeedSequence(coef_seed).spawn(1)[0]
        gens["support"] = np.random.Generator(np.random.PCG64(child))
    return gens


def _fixed_beta(support, p):
    beta = np.zeros(p)
    for pos, val in support.items():
        if not 1 <= pos <= p:
            raise ValueError(f"fixed support position {pos} outside 1..{p}")
        beta[pos - 1] = val
    return beta


def _uniform_beta(rng, p, nnz, lo, hi):
    positions = rng.choice(p, size=nnz, replace=False)
    values = rng.uniform(lo, hi, size=nnz)
    while np.any(values == 0.0):  # keep the support size exact
        values[values == 0.0] = rng.uniform(lo, hi, size=int(np.sum(values == 0.0)))
    beta = np.zeros(p)
    beta[positions] = values
    return beta


def highdim_interval(n, p):
    """Default high-dimensional value interval ``[a, 100a]``."""
    a = 5.0 * np.sqrt(2.0 * np.log(p) / n)
    return (a, 100.0 * a)


def _assemble(spec, X, beta, g_name, rngs):
    T = rngs["t"].uniform(0.0, 1.0, size=spec.n)
    eps = rngs["eps"].standard_normal(spec.n)
    Y = X.T @ beta + G_FUNCS[g_name](T) + eps
    return SyntheticInstance(
        sample=RawSample(X=X, T=T, Y=Y), beta_star=beta, g_name=g_name, eps=eps
    )


def gen_lowdim(spec):
    """AR(0.7)-correlated covariates, sinusoidal nonparametric part."""
    if not spec.kind.startswith("lowdim"):
        raise ValueError(f"not a low-dimensional spec: {spec.kind}")
    rngs = substreams(spec.seed, spec.coef_seed)
    if spec.kind == "lowdim_fixed":
        beta = _fixed_beta(FIG1_SUPPORT, spec.p)
    else:
        lo, hi = spec.value_interval
        beta = _uniform_beta(rngs["support"], spec.p, spec.nnz, lo, hi)
    Z = rngs["x"].standard_normal((spec.p, spec.n))
    # Stationary AR(1) over the covariate index: X_k = 0.7 X_{k-1} + sqrt(0.51) Z_k
    # realizes the banded Cholesky of the 0.7^|i-j| covariance exactly.
    X = np.empty_like(Z)
    X[0] = Z[0]
    c = np.sqrt(1.0 - 0.49)
    for k in range(1, spec.p):
        X[k] = 0.7 * X[k - 1] + c * Z[k]
    return _assemble(spec, X, beta, "sin2pi", rngs)


def gen_highdim(spec):
    """Adjacent-sample-mixed Gaussian design, cosine nonparametric part."""
    if not spec.kind.startswith("highdim"):
        raise ValueError(f"not a high-dimensional spec: {spec.kind}")
    rngs = substreams(spec.seed, spec.coef_seed)
    if spec.kind == "highdim_fixed":
        beta = _fixed_beta(FIG2_SUPPORT, spec.p)
    else:
        lo, hi = spec.value_interval or highdim_interval(spec.n, spec.p)
        beta = _uniform_beta(rngs["support"], spec.p, spec.nnz, lo, hi)
    Xbar = rngs["x"].standard_normal((spec.p, spec.n))
    X = Xbar.copy()
    if spec.n > 2:
        X[:, 1:-1] = Xbar[:, 1:-1] + 0.7 * (Xbar[:, 2:] + Xbar[:, :-2])
    return _assemble(spec, X, beta, "cos2pi", rngs)


def generate(spec):
    """Dispatch on the scenario kind."""
    if spec.kind.startswith("lowdim"):
        return gen_lowdim(spec)
    return gen_highdim(spec)


def scaled_fixed_support(support, p_from, p_to):
    """Map 1-based fixed positions proportionally onto a smaller dimension."""
    out = {}
    for pos, val in support.items():
        new = max(1, min(p_to, round(pos * p_to / p_from)))
        while new in out:  # preserve support size under rounding collisions
            new += 1
        out[new] = val
    return out


@dataclass
class CsvSchema:
    """Column roles and categorical encodings for CSV ingestion.

    ``encodings`` maps a column name to a {string value -> numeric code}
    dictionary; columns without an entry are parsed as plain numbers.
    """

    y: str
    t: str
    x: list
    encodings: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d):
        try:
            return cls(
                y=d["y"], t=d["t"], x=list(d["x"]),
                encodings={k: dict(v) for k, v in d.get("encodings", {}).items()},
            )
        except KeyError as exc:
            raise SchemaError(f"schema is missing key {exc.args[0]!r}") from exc


def _parse_cell(raw, col, enc, line):
    if enc is not None:
        try:
            return float(enc[raw])
        except KeyError:
            raise ParseError(f"unknown category {raw!r} in column {col!r}", line=line) from None
    try:
        return float(raw)
    except ValueError:
        raise ParseError(f"cannot parse {raw!r} in column {col!r} as a number", line=line) from None


def load_csv(path, schema):
    """Read a header-first CSV into a standardized RawSample.

    Covariates are standardized to mean 0, variance 1; the index column is
    rescaled affinely to [0, 1].  Rows with any empty field among the used
    columns are dropped (the count of complete records becomes n); malformed
    cells raise with their line number.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = _csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError("empty file: header row required") from None
        cols = {name: i for i, name in enumerate(header)}
        used = [schema.y, schema.t, *schema.x]
        for name in used:
            if name not in cols:
                raise SchemaError(f"column {name!r} not found in header")
        rows = []
        for line, rec in enumerate(reader, start=2):
            if not rec or all(f == "" for f in rec):
                continue
            if len(rec) != len(header):
                raise ParseError(
                    f"expected {len(header)} fields, got {len(rec)}", line=line
                )
            cells = [rec[cols[name]] for name in used]
            if any(c == "" for c in cells):
                continue  # incomplete record
            rows.append(
                [
                    _parse_cell(c, name, schema.encodings.get(name), line)
                    for c, name in zip(cells, used)
                ]
            )
    if len(rows) < 2:
        raise SchemaError(f"only {len(rows)} complete records; need at least 2")
    data = np.asarray(rows, dtype=float)
    Y = data[:, 0]
    T = data[:, 1]
    X = data[:, 2:].T

    t_range = T.max() - T.min()
    if t_range == 0.0:
        raise SchemaError(f"index column {schema.t!r} has zero range")
    T = (T - T.min()) / t_range

    mean = X.mean(axis=1, keepdims=True)
    std = X.std(axis=1, keepdims=True)
    flat = np.flatnonzero(std.ravel() == 0.0)
    if flat.size:
        raise SchemaError(f"column {schema.x[flat[0]]!r} has zero variance")
    X = (X - mean) / std
    return RawSample(X=X, T=T, Y=Y)
