"""Outer augmented-Lagrangian loop on the dual of the penalized least squares.

The dual couples a smooth strongly convex term in ``u`` with a box indicator
in ``v`` through ``Xt u + v = 0``; the multiplier of that constraint is the
primal coefficient vector itself.  Each outer iteration inexactly minimizes
the augmented Lagrangian over ``(u, v)`` (via the semismooth Newton inner
solver), updates the multiplier, and grows the penalty parameter.  Progress
is measured by the relative KKT residual of the multiplier, the same rule the
ADMM baseline uses, so iteration counts are directly comparable.

Penalty-parameter convention: ``sigma0``/``sigma_max`` are understood on the
scale of the *uncentered* objective.  A transformed problem arrives divided
by ``scale``, which shrinks the Gram curvature by ``scale**2``; multiplying
sigma by ``scale**2`` (the default) makes the multiplier iterates identical
to running on the uncentered data, so iteration counts stay in the regime the
defaults were tuned for.
"""

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleV
from .prox import project_box, soft_threshold
from .ssn import InnerProblem, NewtonConfig, ssn_solve

__all__ = [
    "DualState",
    "SolveOptions",
    "SolveReport",
    "primal_objective",
    "dual_objective",
    "kkt_residual",
    "recover_v",
    "update_beta",
    "ssnal_solve",
]

log = logging.getLogger("semilasso.ssnal")


@dataclass
class DualState:
    """Dual pair, multiplier, and penalty parameter of one outer iterate."""

    u: np.ndarray
    v: np.ndarray
    beta: np.ndarray
    sigma: float
    outer_iter: int = 0


@dataclass
class SolveOptions:
    """Outer-loop options.

    ``sigma0 <= sigma_max`` are in uncentered-objective units when
    ``scale_sigma`` is set (see module docstring).  The inner stopping
    sequence is ``pi0 / (k+1)**2``, summable as the convergence theory
    requires, combined with the inner gradient tolerance floor.
    """

    sigma0: float = 0.01
    sigma_max: float = 2.0
    sigma_growth: float = 3.0
    res_tol: float = 1e-6
    max_outer: int = 20
    inner: NewtonConfig = field(default_factory=NewtonConfig)
    pi0: float = 1e-2
    scale_sigma: bool = True

    def __post_init__(self):
        if self.sigma0 <= 0 or self.sigma0 > self.sigma_max:
            raise ValueError("need 0 < sigma0 <= sigma_max")
        if self.sigma_growth <= 1:
            raise ValueError("sigma_growth must exceed 1")
        if self.res_tol <= 0 or self.max_outer < 1 or self.pi0 <= 0:
            raise ValueError("res_tol, max_outer, pi0 must be positive")


@dataclass
class SolveReport:
    """Solution plus convergence diagnostics, shared by both solvers."""

    beta_hat: np.ndarray
    res: float
    outer_iters: int
    total_inner_iters: int
    wall_time_s: float
    primal_obj: float
    dual_obj: float
    converged: bool
    method: str = "ssnal"
    state: DualState | None = None
    trace: list = field(default_factory=list)


def primal_objective(beta, prob, radii):
    """``0.5 ||Yt - Xt' beta||^2 + sum_j radii_j |beta_j|``.

    Coordinates with infinite radius contribute zero when the coefficient is
    exactly zero and +inf otherwise.
    """
    beta = np.asarray(beta, dtype=float)
    resid = prob.Yt - prob.Xt.T @ beta
    r = np.broadcast_to(np.asarray(radii, dtype=float), beta.shape)
    nz = beta != 0.0  # skip zero coordinates so inf radii contribute nothing
    pen = float(np.sum(r[nz] * np.abs(beta[nz]))) if nz.any() else 0.0
    return 0.5 * float(resid @ resid) + pen


def dual_objective(u, v, prob, radii, feas_tol=1e-9):
    """Negated dual minimand ``-(0.5 ||u||^2 + <Yt, u>)``.

    Valid as a dual bound only for box-feasible ``v``; a violation beyond
    ``feas_tol`` raises.  At the KKT point this equals the primal objective.
    """
    v = np.asarray(v, dtype=float)
    if v.size and np.any(np.abs(v) - radii > feas_tol):
        worst = float(np.max(np.abs(v) - radii))
        raise InfeasibleV(f"box violation {worst:.3e} exceeds {feas_tol:g}")
    u = np.asarray(u, dtype=float)
    return -(0.5 * float(u @ u) + float(prob.Yt @ u))


def kkt_residual(beta, prob, radii):
    """Relative fixed-point gap of the prox-gradient map at ``beta``.

    Zero exactly when ``beta`` solves the penalized least-squares problem;
    used as the uniform stopping rule for every solver in the package.
    """
    beta = np.asarray(beta, dtype=float)
    resid = prob.Xt.T @ beta - prob.Yt
    step = beta - prob.Xt @ resid
    num = np.linalg.norm(beta - soft_threshold(step, radii))
    den = 1.0 + np.linalg.norm(beta) + np.linalg.norm(resid)
    return float(num / den)


def recover_v(beta, u, sigma, radii, prob):
    """Closed-form box minimizer ``clamp(beta/sigma - Xt u, +-radii)``."""
    return project_box(np.asarray(beta) / sigma - prob.Xt @ u, radii)


def update_beta(state, u_new, v_new, prob):
    """Multiplier step ``beta - sigma (Xt u + v)``; fixed point iff feasible."""
    return state.beta - state.sigma * (prob.Xt @ u_new + v_new)


def ssnal_solve(prob, radii, opts=None, init=None):
    """Solve the penalized least-squares problem on a transformed sample.

    Parameters
    ----------
    prob : TransformedProblem
        Centered design/response with recorded scale.
    radii : array (p,)
        Penalty box radii, i.e. penalty level times the weight vector;
        ``+inf`` pins a coordinate to zero.
    opts : SolveOptions, optional
    init : DualState, optional
        Warm start (continuation along a penalty path).  Its ``sigma`` is
        used as-is; ``v`` is re-projected into the current box.

    Returns
    -------
    SolveReport
        ``converged`` is False when ``max_outer`` was exhausted with the KKT
        residual still above ``res_tol``; the report is returned either way.
    """
    opts = opts or SolveOptions()
    radii = np.asarray(radii, dtype=float)
    n, p = prob.n, prob.p
    sig_unit = prob.scale**2 if opts.scale_sigma else 1.0
    sigma_max = opts.sigma_max * sig_unit

    if init is not None:
        u = np.array(init.u, dtype=float, copy=True)
        beta = np.array(init.beta, dtype=float, copy=True)
        sigma = min(float(init.sigma), sigma_max)
    else:
        u = np.zeros(n)
        beta = np.zeros(p)
        sigma = opts.sigma0 * sig_unit
    v = np.zeros(p)

    t0 = time.perf_counter()
    total_inner = 0
    converged = False
    outer = 0
    res = kkt_residual(beta, prob, radii)
    trace = []
    for k in range(opts.max_outer):
        inner_tol = min(opts.pi0 / (k + 1) ** 2 / np.sqrt(sigma), opts.inner.grad_tol)
        sub = InnerProblem(prob.Xt, prob.Yt, beta, sigma, radii)
        result = ssn_solve(u, sub, opts.inner, inner_tol)
        u = result.u
        total_inner += result.iterations

        # beta <- beta - sigma (Xt u + v) with v the box minimizer collapses
        # to a soft-threshold of z = beta - sigma Xt u, giving exact zeros.
        z = beta - sigma * (prob.Xt @ u)
        v = project_box(z / sigma, radii)
        beta = soft_threshold(z, sigma * radii)

        res = kkt_residual(beta, prob, radii)
        outer = k + 1
        trace.append(
            {
                "outer": outer,
                "sigma": sigma,
                "res": res,
                "inner_iters": result.iterations,
                "inner_grad_norm": result.grad_norm,
                "v_violation": float(np.max(np.abs(v) - radii, initial=0.0)),
            }
        )
        log.info("ssnal outer %d sigma=%.3e res=%.3e inner=%d", outer, sigma, res, result.iterations)
        if res < opts.res_tol:
            converged = True
            break
        sigma = min(sigma * opts.sigma_growth, sigma_max)
    wall = time.perf_counter() - t0

    return SolveReport(
        beta_hat=beta,
        res=res,
        outer_iters=outer,
        total_inner_iters=total_inner,
        wall_time_s=wall,
        primal_obj=primal_objective(beta, prob, radii),
        dual_obj=dual_objective(u, v, prob, radii),
        converged=converged,
        method="ssnal",
        state=DualState(u=u, v=v, beta=beta, sigma=sigma, outer_iter=outer),
        trace=trace,
    )
