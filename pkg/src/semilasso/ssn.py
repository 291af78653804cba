"""Inner solver: semismooth Newton on the reduced augmented-Lagrangian.

With the box variable minimized out in closed form, the augmented-Lagrangian
subproblem collapses to a strongly convex, once-differentiable function
``psi(u)`` whose gradient involves a soft-threshold.  Its generalized Hessian
is ``I + sigma * Xa' Xa`` where ``Xa`` keeps only the rows where the
soft-threshold is locally an identity shift, so the Newton system is solved
either through a small dense factorization over that active set
(Sherman-Morrison-Woodbury) or matrix-free CG when the active set is large.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import CGStall, LineSearchFail
from .prox import soft_threshold

__all__ = [
    "InnerProblem",
    "NewtonConfig",
    "SsnResult",
    "psi_value",
    "psi_gradient",
    "active_set",
    "newton_direction",
    "line_search",
    "ssn_solve",
]

log = logging.getLogger("semilasso.ssn")


@dataclass
class InnerProblem:
    """Data of one augmented-Lagrangian subproblem.

    ``radii`` holds the penalty box radii (penalty level times the adaptive
    weights); ``beta_tilde`` is the current multiplier and ``sigma`` the
    penalty parameter, both fixed for the duration of the inner solve.
    """

    Xt: np.ndarray
    Yt: np.ndarray
    beta_tilde: np.ndarray
    sigma: float
    radii: np.ndarray

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")

    @property
    def scaled_radii(self):
        return self.sigma * self.radii


@dataclass
class NewtonConfig:
    """Inner-solver knobs; defaults follow the reference experiment settings."""

    mu: float = 0.1
    rho: float = 0.84
    t_exp: float = 0.5
    eta_bar: float = 0.5
    grad_tol: float = 1e-6
    max_newton: int = 50
    max_cg: int = 300
    r_direct: int = 500

    def __post_init__(self):
        if not 0 < self.mu < 0.5:
            raise ValueError("mu must lie in (0, 1/2)")
        if not 0 < self.rho < 1:
            raise ValueError("rho must lie in (0, 1)")
        if not 0 < self.t_exp <= 1:
            raise ValueError("t_exp must lie in (0, 1]")
        if not 0 < self.eta_bar < 1:
            raise ValueError("eta_bar must lie in (0, 1)")
        if self.grad_tol <= 0 or self.max_newton < 1 or self.max_cg < 1:
            raise ValueError("grad_tol, max_newton, max_cg must be positive")


@dataclass
class SsnResult:
    u: np.ndarray
    iterations: int
    grad_norm: float
    converged: bool
    grad_norms: list = field(default_factory=list)


def _psi_parts(u, xu, prob):
    """psi value given the cached product ``xu = Xt @ u``."""
    pz = soft_threshold(prob.beta_tilde - prob.sigma * xu, prob.scaled_radii)
    quad = 0.5 * float(u @ u) + float(prob.Yt @ u)
    bterm = float(prob.beta_tilde @ prob.beta_tilde) / (2.0 * prob.sigma)
    return quad - bterm + float(pz @ pz) / (2.0 * prob.sigma)


def psi_value(u, prob):
    """Reduced augmented-Lagrangian value at ``u``."""
    return _psi_parts(u, prob.Xt @ u, prob)


def psi_gradient(u, prob):
    """``u + Yt - Xt' soft_threshold(beta_tilde - sigma Xt u, sigma radii)``."""
    z = prob.beta_tilde - prob.sigma * (prob.Xt @ u)
    return u + prob.Yt - prob.Xt.T @ soft_threshold(z, prob.scaled_radii)


def active_set(z, scaled_radii):
    """Indices with ``|z_i|`` strictly above the scaled radius.

    Boundary ties count as inactive, which keeps the generalized Hessian
    best-conditioned among the admissible choices.
    """
    return np.flatnonzero(np.abs(z) > scaled_radii)


def _cg(apply_h, b, tol, max_iter):
    """Plain CG for ``H x = b`` with SPD ``H``; absolute residual stop."""
    x = np.zeros_like(b)
    r = b.copy()
    rs = float(r @ r)
    if np.sqrt(rs) <= tol:
        return x
    p = r.copy()
    for _ in range(max_iter):
        hp = apply_h(p)
        alpha = rs / float(p @ hp)
        x += alpha * p
        r -= alpha * hp
        rs_new = float(r @ r)
        if np.sqrt(rs_new) <= tol:
            return x
        p = r + (rs_new / rs) * p
        rs = rs_new
    raise CGStall(
        f"CG residual {np.sqrt(rs):.3e} above bound {tol:.3e} "
        f"after {max_iter} iterations"
    )


def newton_direction(u, prob, cfg, grad=None, xu=None):
    """Inexact Newton direction ``d`` with ``||H d + grad|| <= min(eta, ||grad||^(1+t))``.

    Small active sets go through the Woodbury identity (one r x r Cholesky);
    large ones fall back to matrix-free CG on the n-dimensional operator.
    """
    if xu is None:
        xu = prob.Xt @ u
    if grad is None:
        z = prob.beta_tilde - prob.sigma * xu
        grad = u + prob.Yt - prob.Xt.T @ soft_threshold(z, prob.scaled_radii)
    else:
        z = prob.beta_tilde - prob.sigma * xu
    D = active_set(z, prob.scaled_radii)
    r = D.size
    if r == 0:
        return -grad
    n = u.size
    XD = prob.Xt[D]
    if r <= min(n, cfg.r_direct):
        M = XD @ XD.T
        M[np.diag_indices_from(M)] += 1.0 / prob.sigma
        return -grad + XD.T @ cho_solve(cho_factor(M, lower=True), XD @ grad)
    bound = min(cfg.eta_bar, np.linalg.norm(grad) ** (1.0 + cfg.t_exp))
    sigma = prob.sigma
    return _cg(lambda x: x + sigma * (XD.T @ (XD @ x)), -grad, bound, cfg.max_cg)


def line_search(u, d, prob, cfg, grad=None, xu=None):
    """Armijo backtracking step size ``rho**m`` for the descent direction ``d``.

    Returns the step for the smallest admissible ``m``; raises past m = 100,
    which only happens on numerical breakdown since ``psi`` is strongly
    convex and ``d`` is a descent direction.
    """
    if xu is None:
        xu = prob.Xt @ u
    if grad is None:
        z = prob.beta_tilde - prob.sigma * xu
        grad = u + prob.Yt - prob.Xt.T @ soft_threshold(z, prob.scaled_radii)
    slope = float(grad @ d)
    psi0 = _psi_parts(u, xu, prob)
    xd = prob.Xt @ d
    alpha = 1.0
    for _ in range(101):
        if _psi_parts(u + alpha * d, xu + alpha * xd, prob) <= psi0 + cfg.mu * alpha * slope:
            return alpha
        alpha *= cfg.rho
    raise LineSearchFail(f"no Armijo step within 100 trials (slope {slope:.3e})")


def ssn_solve(u0, prob, cfg, inner_tol):
    """Run Newton steps until ``||grad psi|| <= inner_tol`` or the cap.

    Never raises on hitting ``max_newton``: the last iterate and its gradient
    norm are reported so the outer loop can decide what to do.
    """
    u = np.array(u0, dtype=float, copy=True)
    grad_norms = []
    iters = 0
    while True:
        xu = prob.Xt @ u
        z = prob.beta_tilde - prob.sigma * xu
        grad = u + prob.Yt - prob.Xt.T @ soft_threshold(z, prob.scaled_radii)
        gn = float(np.linalg.norm(grad))
        grad_norms.append(gn)
        log.debug("ssn iter %d |grad|=%.3e", iters, gn)
        if gn <= inner_tol or iters >= cfg.max_newton:
            return SsnResult(u, iters, gn, gn <= inner_tol, grad_norms)
        d = newton_direction(u, prob, cfg, grad=grad, xu=xu)
        alpha = line_search(u, d, prob, cfg, grad=grad, xu=xu)
        u = u + alpha * d
        iters += 1
