"""Proximal and projection primitives for the weighted l1 penalty.

The weighted l1 norm ``sum_j r_j |x_j|`` has the componentwise soft-threshold
as its proximal mapping, and its conjugate is the indicator of the box
``{v : |v_j| <= r_j}``.  The two are linked by the Moreau decomposition
``x = soft_threshold(x, r) + project_box(x, r)``, which downstream solvers
rely on to switch between primal and dual representations for free.

A radius ``r_j = +inf`` encodes a coordinate whose estimate is pinned to zero
(the soft threshold kills it; the box projection leaves it untouched), so no
separate "excluded coordinate" code path is needed.
"""

import numpy as np

__all__ = ["soft_threshold", "project_box", "moreau_gap"]


def soft_threshold(x, radii):
    """Componentwise ``sgn(x_j) * max(|x_j| - r_j, 0)``.

    Exact arithmetic, no epsilon fudging: a tie ``|x_j| == r_j`` maps to 0.
    """
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.maximum(np.abs(x) - radii, 0.0)


def project_box(x, radii):
    """Orthogonal projection onto the box ``{v : |v_j| <= r_j}``."""
    x = np.asarray(x, dtype=float)
    return np.minimum(radii, np.maximum(x, -np.asarray(radii, dtype=float)))


def moreau_gap(x, radii):
    """Sup-norm defect of the decomposition ``x = prox + projection``.

    Returns ``max_j |x_j - soft_threshold(x, r)_j - project_box(x, r)_j|``;
    the identity is algebraic, so the result is <= 1e-12 for finite inputs.
    """
    x = np.asarray(x, dtype=float)
    gap = x - soft_threshold(x, radii) - project_box(x, radii)
    return float(np.max(np.abs(gap))) if gap.size else 0.0
