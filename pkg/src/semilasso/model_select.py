"""Adaptive penalty weights, continuation grid, and criterion-based selection.

Weights are reciprocal squared pilot coefficients: a least-squares pilot on
the full design when p < n, or on a restricted support with the remaining
pilot entries set to 1e-3 when p >= n.  A pilot coefficient of exactly zero
yields an infinite weight, which pins that coordinate to zero downstream.
The penalty level is chosen by sweeping a descending log-spaced grid with
warm starts and scoring each converged fit by BIC (low-dimensional) or HBIC
(high-dimensional).
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import NoConvergedFit, SingularGram, ZeroCorrelation
from .ssnal import SolveOptions, ssnal_solve

__all__ = [
    "WeightSpec",
    "LambdaPath",
    "weights_from_pilot",
    "adaptive_weights_lowdim",
    "adaptive_weights_highdim",
    "lasso_weights",
    "lambda_grid",
    "bic_score",
    "solve_path",
    "select_lambda",
]

log = logging.getLogger("semilasso.model_select")

_PILOT_ZERO = 1e-12
_COND_LIMIT = 1e12


@dataclass
class WeightSpec:
    """Adaptive weight vector with the pilot estimate it came from."""

    omega: np.ndarray
    gamma: float
    pilot: np.ndarray


@dataclass
class LambdaPath:
    """Descending penalty grid with per-point scores and solve reports."""

    grid: np.ndarray
    scores: np.ndarray
    reports: list = field(default_factory=list)


def weights_from_pilot(pilot, gamma=2.0):
    """``omega_j = |pilot_j|**-gamma``, infinite where the pilot is (near) zero."""
    pilot = np.asarray(pilot, dtype=float)
    mag = np.abs(pilot)
    omega = np.full(pilot.shape, np.inf)
    ok = mag >= _PILOT_ZERO
    omega[ok] = mag[ok] ** -gamma
    return WeightSpec(omega=omega, gamma=float(gamma), pilot=pilot.copy())


def _gram_solve(rows, rhs, what):
    G = rows @ rows.T
    cond = np.linalg.cond(G)
    if not np.isfinite(cond) or cond > _COND_LIMIT:
        raise SingularGram(f"{what} Gram condition number {cond:.3e}")
    return np.linalg.solve(G, rhs)


def adaptive_weights_lowdim(prob, gamma=2.0):
    """Weights from the full least-squares pilot; requires p < n."""
    if prob.p >= prob.n:
        raise ValueError("low-dimensional weights need p < n")
    pilot = _gram_solve(prob.Xt, prob.Xt @ prob.Yt, "design")
    return weights_from_pilot(pilot, gamma)


def adaptive_weights_highdim(prob, support, gamma=2.0, off_pilot=1e-3):
    """Weights from a least-squares pilot restricted to ``support``.

    Off-support pilot entries are set to ``off_pilot`` (default 1e-3, so
    their weight is exactly 1e6 at gamma 2).
    """
    support = np.asarray(sorted(set(int(j) for j in np.asarray(support).ravel())))
    if support.size >= prob.n:
        raise ValueError("restricted support must be smaller than n")
    pilot = np.full(prob.p, float(off_pilot))
    if support.size:
        rows = prob.Xt[support]
        pilot[support] = _gram_solve(rows, rows @ prob.Yt, "restricted")
    return weights_from_pilot(pilot, gamma)


def lasso_weights(p):
    """Unit weights (plain lasso penalty)."""
    ones = np.ones(p)
    return WeightSpec(omega=ones, gamma=0.0, pilot=ones.copy())


def lambda_grid(prob, num=201, min_ratio=1e-10):
    """Descending log-equispaced grid from ``0.5 * ||Xt Yt||_inf**2`` down to
    ``min_ratio`` times that."""
    corr = prob.Xt @ prob.Yt
    top = float(np.max(np.abs(corr))) if corr.size else 0.0
    if top == 0.0:
        raise ZeroCorrelation("Xt @ Yt is identically zero")
    lam_max = 0.5 * top**2
    return np.geomspace(lam_max, min_ratio * lam_max, num)


def bic_score(report, prob, mode="bic"):
    """Schwarz-type criterion of a converged fit.

    ``n log(RSS/n)`` plus ``df log n`` (bic) or ``df log(log n) log p``
    (hbic), with ``df`` the number of exactly nonzero coefficients.
    """
    beta = report.beta_hat
    resid = prob.Yt - prob.Xt.T @ beta
    rss = max(float(resid @ resid), 1e-300)
    df = int(np.count_nonzero(beta))
    n, p = prob.n, prob.p
    base = n * np.log(rss / n)
    mode = mode.lower()
    if mode == "bic":
        return float(base + df * np.log(n))
    if mode == "hbic":
        return float(base + df * np.log(np.log(n)) * np.log(p))
    raise ValueError(f"unknown criterion {mode!r}")


def solve_path(prob, weights, grid=None, opts=None, criterion="bic", warm_start=True):
    """Sweep the penalty grid, warm-starting each solve from the previous one.

    Non-converged points get an infinite score so selection skips them.
    """
    if grid is None:
        grid = lambda_grid(prob)
    grid = np.asarray(grid, dtype=float)
    opts = opts or SolveOptions()
    reports = []
    scores = np.full(grid.size, np.inf)
    state = None
    for i, lam in enumerate(grid):
        rep = ssnal_solve(prob, lam * weights.omega, opts, init=state)
        if warm_start:
            state = rep.state
        reports.append(rep)
        if rep.converged:
            scores[i] = bic_score(rep, prob, criterion)
    log.info("path swept %d lambdas, %d converged", grid.size, int(np.isfinite(scores).sum()))
    return LambdaPath(grid=grid, scores=scores, reports=reports)


def select_lambda(path):
    """Penalty level with the best score; ties go to the larger (sparser) one."""
    if not np.any(np.isfinite(path.scores)):
        raise NoConvergedFit("no converged fit on the path")
    i = int(np.argmin(path.scores))
    return float(path.grid[i]), path.reports[i]
