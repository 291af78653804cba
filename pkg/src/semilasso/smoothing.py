"""Kernel smoothing layer: from a partially linear sample to a linear problem.

Given observations ``Y_i = X_i' beta + g(T_i) + eps_i`` with an unknown smooth
``g``, Nadaraya-Watson weights built on ``T`` remove the nonparametric part:
subtracting the kernel smooth from each covariate column and from the response
leaves a purely linear regression in the centered quantities.  The centered
design is then rescaled so its Gram spectral radius is at most one, which is
what the downstream solvers assume about the data they receive.
"""

from dataclasses import dataclass

import numpy as np

from .errors import AllDegenerate, DegenerateBandwidth

__all__ = [
    "RawSample",
    "KernelWeights",
    "TransformedProblem",
    "epanechnikov_kernel",
    "nadaraya_watson_weights",
    "partial_residual_transform",
    "transform_sample",
    "default_bandwidth_grid",
    "select_bandwidth_cv",
    "recover_g",
    "spectral_norm",
]

# Kernel rows for at most this many matrix entries are built per block, so the
# n x n weight matrix is never materialized for large samples.
_BLOCK_ENTRIES = 5_000_000


@dataclass(frozen=True)
class RawSample:
    """A partially linear regression sample.

    ``X`` is p x n with column i holding the covariate vector of observation
    i; ``T`` are scalar indices in [0, 1]; ``Y`` are responses.
    """

    X: np.ndarray
    T: np.ndarray
    Y: np.ndarray

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        T = np.asarray(self.T, dtype=float).ravel()
        Y = np.asarray(self.Y, dtype=float).ravel()
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "Y", Y)
        n = T.size
        if n < 2:
            raise ValueError("need at least 2 observations")
        if X.shape[1] != n or Y.size != n:
            raise ValueError(
                f"inconsistent sizes: X {X.shape}, T {T.shape}, Y {Y.shape}"
            )
        for name, arr in (("X", X), ("T", T), ("Y", Y)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains NaN/Inf entries")
        if T.min() < 0.0 or T.max() > 1.0:
            raise ValueError("T entries must lie in [0, 1]")

    @property
    def n(self):
        return self.T.size

    @property
    def p(self):
        return self.X.shape[0]


@dataclass(frozen=True)
class KernelWeights:
    """Row-stochastic weight matrix ``W[i, j] = W_nj(T_i)`` and its bandwidth."""

    W: np.ndarray
    h: float


@dataclass(frozen=True)
class TransformedProblem:
    """Centered design (p x n), centered response (n,), and the applied scale.

    After construction the spectral radius of ``Xt @ Xt.T`` is at most
    ``1 + 1e-8``.  ``scale`` is the factor both ``Xt`` and ``Yt`` were divided
    by; dividing a penalty level by ``scale**2`` maps it back to the
    uncentered problem's units.
    """

    Xt: np.ndarray
    Yt: np.ndarray
    scale: float

    @property
    def n(self):
        return self.Yt.size

    @property
    def p(self):
        return self.Xt.shape[0]


def epanechnikov_kernel(x):
    """``0.75 * (1 - x**2)`` on [-1, 1], zero outside."""
    x = np.asarray(x, dtype=float)
    out = 0.75 * (1.0 - x * x) * (np.abs(x) <= 1.0)
    return out if out.ndim else float(out)


def _kernel_rows(t_eval, T, h, zero_diag_offset=None):
    """Unnormalized kernel block K_h(T_j - t_i); optionally zero self-weights."""
    K = epanechnikov_kernel((T[None, :] - np.asarray(t_eval)[:, None]) / h)
    if zero_diag_offset is not None:
        idx = np.arange(K.shape[0])
        K[idx, zero_diag_offset + idx] = 0.0
    return K


def _normalize_rows(K, h):
    denom = K.sum(axis=1)
    if np.any(denom <= 0.0):
        bad = int(np.flatnonzero(denom <= 0.0)[0])
        raise DegenerateBandwidth(
            f"all kernel weights vanish at evaluation point {bad} (h={h:g})"
        )
    return K / denom[:, None]


def nadaraya_watson_weights(T, h):
    """Nadaraya-Watson weight matrix over the sample points themselves.

    Row i holds ``K_h(T_j - T_i) / sum_j K_h(T_j - T_i)``, so every
    non-degenerate row sums to one.
    """
    if h <= 0:
        raise ValueError("bandwidth must be positive")
    T = np.asarray(T, dtype=float).ravel()
    W = _normalize_rows(_kernel_rows(T, T, h), h)
    return KernelWeights(W=W, h=float(h))


def _normalize_problem(Xt, Yt):
    s = max(1.0, spectral_norm(Xt))
    return TransformedProblem(Xt=Xt / s, Yt=Yt / s, scale=s)


def partial_residual_transform(sample, weights):
    """Subtract the kernel smooths of X and Y, then rescale.

    Returns the centered pair divided by ``max(1, ||Xt||_2)`` so the Gram
    spectral radius is at most one; the response is divided by the same
    factor, which leaves the penalized argmin unchanged up to the recorded
    penalty rescaling.
    """
    W = weights.W
    Xt = sample.X - sample.X @ W.T
    Yt = sample.Y - W @ sample.Y
    return _normalize_problem(Xt, Yt)


def transform_sample(sample, bandwidth="cv", h_grid=None):
    """Bandwidth selection plus partial-residual transform in one call.

    ``bandwidth`` is a number, ``"cv"`` (leave-one-out selection over
    ``h_grid`` or the default grid), or ``"rule"`` (``n**-0.2``).  Kernel rows
    are processed in blocks, so the n x n weight matrix is never stored.

    Returns ``(problem, h)``.
    """
    n = sample.n
    if bandwidth == "cv":
        h = select_bandwidth_cv(sample, default_bandwidth_grid(n) if h_grid is None else h_grid)
    elif bandwidth == "rule":
        h = float(n) ** -0.2
    else:
        h = float(bandwidth)
        if h <= 0:
            raise ValueError("bandwidth must be positive")

    Xt = np.empty_like(sample.X)
    Yt = np.empty_like(sample.Y)
    block = max(1, _BLOCK_ENTRIES // n)
    for lo in range(0, n, block):
        hi = min(lo + block, n)
        Wb = _normalize_rows(_kernel_rows(sample.T[lo:hi], sample.T, h), h)
        Xt[:, lo:hi] = sample.X[:, lo:hi] - sample.X @ Wb.T
        Yt[lo:hi] = sample.Y[lo:hi] - Wb @ sample.Y
    return _normalize_problem(Xt, Yt), h


def default_bandwidth_grid(n, num=20):
    """20 log-spaced bandwidths around the n**(-1/5) rate."""
    anchor = float(n) ** -0.2
    return np.geomspace(0.5 * anchor, 2.0 * anchor, num)


def _loo_error(sample, h):
    """Leave-one-out squared error of smoothing Y on T with bandwidth h."""
    n = sample.n
    sse = 0.0
    block = max(1, _BLOCK_ENTRIES // n)
    for lo in range(0, n, block):
        hi = min(lo + block, n)
        K = _kernel_rows(sample.T[lo:hi], sample.T, h, zero_diag_offset=lo)
        denom = K.sum(axis=1)
        if np.any(denom <= 0.0):
            raise DegenerateBandwidth(f"LOO weights vanish for h={h:g}")
        pred = (K @ sample.Y) / denom
        sse += float(np.sum((sample.Y[lo:hi] - pred) ** 2))
    return sse


def select_bandwidth_cv(sample, h_grid):
    """Grid bandwidth minimizing the leave-one-out smoother error.

    Degenerate grid points (some observation with no neighbors in reach) are
    skipped; ties break toward the larger bandwidth.
    """
    h_grid = np.asarray(h_grid, dtype=float).ravel()
    if h_grid.size == 0 or np.any(h_grid <= 0):
        raise ValueError("bandwidth grid must be nonempty and positive")
    best_h, best_err = None, np.inf
    for h in h_grid:
        try:
            err = _loo_error(sample, h)
        except DegenerateBandwidth:
            continue
        if err < best_err or (err == best_err and h > best_h):
            best_h, best_err = float(h), err
    if best_h is None:
        raise AllDegenerate("every bandwidth in the grid is degenerate")
    return best_h


def recover_g(t_eval, beta, sample, h):
    """Kernel-smoothed residual curve ``sum_j W_nj(t) (Y_j - X_j' beta)``.

    Evaluates the nonparametric-part estimate at each requested ``t`` using
    the fitted coefficients; raises if some ``t`` is out of kernel reach.
    """
    t_eval = np.atleast_1d(np.asarray(t_eval, dtype=float))
    resid = sample.Y - sample.X.T @ np.asarray(beta, dtype=float)
    W = _normalize_rows(_kernel_rows(t_eval, sample.T, h), h)
    return W @ resid


def spectral_norm(Xt, tol=1e-10, max_iter=5000):
    """Largest singular value of ``Xt`` by power iteration on the small Gram.

    The Rayleigh estimate is inflated by 2e-6 so that dividing by the result
    can never leave the true spectral radius above one.
    """
    Xt = np.asarray(Xt, dtype=float)
    p, n = Xt.shape
    if p == 0 or n == 0 or not Xt.any():
        return 0.0
    gram_small = p <= n

    def matvec(v):
        return Xt @ (Xt.T @ v) if gram_small else Xt.T @ (Xt @ v)

    dim = p if gram_small else n
    v = np.full(dim, dim**-0.5)
    lam = 0.0
    for _ in range(max_iter):
        w = matvec(v)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        lam_new = float(v @ w)
        if abs(lam_new - lam) <= tol * max(abs(lam_new), 1.0):
            lam = lam_new
            break
        lam = lam_new
        v = w / nw
    return float(np.sqrt(lam) * (1.0 + 2e-6))
