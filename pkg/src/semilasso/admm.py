"""ADMM baseline for the dual problem, used for head-to-head comparisons.

One sweep minimizes the augmented Lagrangian in ``u`` (a fixed linear solve),
then in ``v`` (a box clamp), then takes a relaxed multiplier step.  The
``u``-update matrix ``I + sigma Xt' Xt`` is factorized once per run; when
p < n the Woodbury complement ``I_p / sigma + Xt Xt'`` is factorized instead.
Stopping uses the same relative KKT residual and tolerance as the Newton
solver so iteration counts are comparable.
"""

import logging
import time
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import FactorizationFail
from .prox import project_box
from .ssnal import DualState, SolveReport, dual_objective, kkt_residual, primal_objective

__all__ = ["AdmmOptions", "AdmmFactorization", "admm_factorize", "admm_solve"]

log = logging.getLogger("semilasso.admm")

_TAU_SUP = (1.0 + np.sqrt(5.0)) / 2.0


@dataclass
class AdmmOptions:
    """Step sizes and caps; ``sigma`` follows the same uncentered-scale
    convention as the Newton solver (see ssnal module docstring)."""

    sigma: float = 0.03
    tau: float = 1.618
    res_tol: float = 1e-6
    max_iters: int = 2000
    scale_sigma: bool = True

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if not 0 < self.tau < _TAU_SUP:
            raise ValueError(f"tau must lie in (0, {_TAU_SUP:.4f})")
        if self.res_tol <= 0 or self.max_iters < 1:
            raise ValueError("res_tol and max_iters must be positive")


class AdmmFactorization:
    """Cached SPD factorization of the u-update system, tagged with its sigma.

    The factorization is only valid for the (sigma, Xt) pair it was built
    from; ``solve`` rejects a mismatched sigma rather than silently returning
    a solution of the wrong system.
    """

    def __init__(self, prob, sigma):
        if sigma <= 0:
            raise ValueError("sigma must be positive")
        self.sigma = float(sigma)
        self._Xt = prob.Xt
        p, n = prob.Xt.shape
        self._woodbury = p < n
        try:
            if self._woodbury:
                M = prob.Xt @ prob.Xt.T
                M[np.diag_indices_from(M)] += 1.0 / self.sigma
            else:
                M = self.sigma * (prob.Xt.T @ prob.Xt)
                M[np.diag_indices_from(M)] += 1.0
            self._factor = cho_factor(M, lower=True)
        except np.linalg.LinAlgError as exc:
            raise FactorizationFail(str(exc)) from exc

    def solve(self, rhs, sigma=None):
        """Apply ``(I + sigma Xt' Xt)^-1``; ``sigma`` may be passed to assert
        the handle is not stale."""
        if sigma is not None and sigma != self.sigma:
            raise FactorizationFail(
                f"factorization built for sigma={self.sigma:g}, asked for {sigma:g}"
            )
        if self._woodbury:
            return rhs - self._Xt.T @ cho_solve(self._factor, self._Xt @ rhs)
        return cho_solve(self._factor, rhs)


def admm_factorize(prob, sigma):
    """Factorize the u-update system for this (problem, sigma) pair."""
    return AdmmFactorization(prob, sigma)


def admm_solve(prob, radii, opts=None):
    """Run ADMM until the KKT residual drops below tolerance or the cap.

    Returns the same report shape as the Newton solver; ``converged`` is
    False when ``max_iters`` was exhausted.
    """
    opts = opts or AdmmOptions()
    radii = np.asarray(radii, dtype=float)
    n, p = prob.n, prob.p
    sigma = opts.sigma * (prob.scale**2 if opts.scale_sigma else 1.0)

    t0 = time.perf_counter()
    fact = admm_factorize(prob, sigma)
    u = np.zeros(n)
    v = np.zeros(p)
    beta = np.zeros(p)
    res = kkt_residual(beta, prob, radii)
    converged = False
    iters = 0
    for k in range(opts.max_iters):
        u = fact.solve(prob.Xt.T @ (beta - sigma * v) - prob.Yt, sigma=sigma)
        xu = prob.Xt @ u
        v = project_box(beta / sigma - xu, radii)
        beta = beta - opts.tau * sigma * (xu + v)
        res = kkt_residual(beta, prob, radii)
        iters = k + 1
        if res < opts.res_tol:
            converged = True
            break
    wall = time.perf_counter() - t0
    log.info("admm finished iters=%d res=%.3e converged=%s", iters, res, converged)

    return SolveReport(
        beta_hat=beta,
        res=res,
        outer_iters=iters,
        total_inner_iters=0,
        wall_time_s=wall,
        primal_obj=primal_objective(beta, prob, radii),
        dual_obj=dual_objective(u, v, prob, radii),
        converged=converged,
        method="admm",
        state=DualState(u=u, v=v, beta=beta, sigma=sigma, outer_iter=iters),
    )
