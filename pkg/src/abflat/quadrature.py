"""Adaptive Gauss-Legendre quadrature over batches of intervals.

All intervals of a batch share one subdivision of the *normalized* interval
``[0, 1]``: a panel is split when any member of the batch (or any component
of a vector-valued integrand) has not converged.  That keeps every integrand
call fully vectorized.
"""

import numpy as np

from .errors import QuadratureError

PANEL_POINTS = 15
TOLERANCE = 1e-12
MAX_DEPTH = 30

_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(PANEL_POINTS)


def _panel(func, a, width, u0, u1):
    t = u0 + (u1 - u0) * 0.5 * (_NODES + 1.0)
    x = a[..., None] + width[..., None] * t
    vals = np.asarray(func(x))
    if not np.all(np.isfinite(vals)):
        raise QuadratureError(f"non-finite integrand on panel [{u0:.6g}, {u1:.6g}]")
    nb = a.ndim
    vals = np.moveaxis(vals, nb, -1)
    est = vals @ _WEIGHTS
    scale = (0.5 * (u1 - u0)) * width
    return est * scale.reshape(scale.shape + (1,) * (est.ndim - scale.ndim))


def integrate(func, a, b, tol=TOLERANCE, max_depth=MAX_DEPTH):
    """Integral of ``func`` from ``a`` to ``b``.

    ``a`` and ``b`` broadcast to a batch shape ``B``.  ``func`` receives nodes
    of shape ``B + (q,)`` and must return an array of shape ``B + (q,) + E``;
    the result has shape ``B + E``.  ``tol`` is an absolute tolerance on the
    whole interval.
    """
    a, b = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    width = b - a
    total = None
    stack = [(0.0, 1.0, 0, _panel(func, a, width, 0.0, 1.0))]
    while stack:
        u0, u1, depth, whole = stack.pop()
        mid = 0.5 * (u0 + u1)
        left = _panel(func, a, width, u0, mid)
        right = _panel(func, a, width, mid, u1)
        halves = left + right
        err = np.max(np.abs(whole - halves)) if halves.size else 0.0
        # tiny panels next to an endpoint singularity stop at a fixed share of tol
        floor = max(64 * np.finfo(float).eps * (np.max(np.abs(halves)) if halves.size else 0.0),
                    1e-3 * tol / max_depth)
        if err <= max(tol * (u1 - u0), floor):
            total = halves if total is None else total + halves
        elif depth + 1 >= max_depth:
            raise QuadratureError(
                f"no convergence after {max_depth} bisections on [{u0:.6g}, {u1:.6g}] (error {err:.3g})")
        else:
            stack.append((mid, u1, depth + 1, right))
            stack.append((u0, mid, depth + 1, left))
    return total
