"""Adaptive bisection quadrature with a 7/15-point Gauss-Kronrod local rule.

All live subintervals are processed as one numpy batch per refinement level,
so cumulative integrals over a 10^5-point grid cost one vectorized pass per
level instead of 10^5 Python-level recursions. The local rule's error
estimate is ``|K15 - G7|``, which is conservative for the K15 value returned.

A subinterval of width ``w`` is accepted once its error estimate is below
``tol * w / total_width``, so the accepted pieces sum to at most ``tol``.
"""

from __future__ import annotations

import numpy as np

from .errors import QuadratureError

DEFAULT_TOL = 1e-10
MAX_DEPTH = 60

_XK = np.array(
    [
        0.991455371120812639206854697526329,
        0.949107912342758524526189684047851,
        0.864864423359769072789712788640926,
        0.741531185599394439863864773280788,
        0.586087235467691130294144845693013,
        0.405845151377397166906606412076961,
        0.207784955007898467600689403773245,
        0.000000000000000000000000000000000,
    ]
)
_WK = np.array(
    [
        0.022935322010529224963732008058970,
        0.063092092629978553290700663189204,
        0.104790010322250183839876322541518,
        0.140653259715525918745189590510238,
        0.169004726639267902826583426598550,
        0.190350578064785409913256402421014,
        0.204432940075298892414161999234649,
        0.209482141084727828012999174891714,
    ]
)
_WG = np.array(
    [
        0.129484966168869693270611432679082,
        0.279705391489276667901467771423780,
        0.381830050505118944950369775488975,
        0.417959183673469387755102040816327,
    ]
)
NODES = np.concatenate([-_XK[:-1], _XK[::-1]])  # 15 nodes in [-1, 1], ascending
KRONROD = np.concatenate([_WK[:-1], _WK[::-1]])
GAUSS = np.zeros(15)
GAUSS[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])

# Below this relative level the error estimate is roundoff noise, not truncation.
_ROUNDOFF = 50.0 * np.finfo(float).eps


def _gk15(f, lo: np.ndarray, hi: np.ndarray):
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x = mid[:, None] + half[:, None] * NODES[None, :]
    fx = np.asarray(f(x.ravel()), dtype=float).reshape(x.shape)
    if not np.all(np.isfinite(fx)):
        bad = np.argwhere(~np.isfinite(fx))[0]
        raise QuadratureError(
            "integrand is not finite", partial=float("nan"), worst=(float(lo[bad[0]]), float(hi[bad[0]]))
        )
    k = half * (fx @ KRONROD)
    g = half * (fx @ GAUSS)
    scale = half * (np.abs(fx) @ KRONROD)
    return k, np.abs(k - g), scale


def integrate_segments(f, edges, tol: float = DEFAULT_TOL, max_depth: int = MAX_DEPTH) -> np.ndarray:
    """Integrate ``f`` over each consecutive segment ``[edges[i], edges[i+1]]``.

    ``f`` must accept a 1-d numpy array. The total absolute error over all
    segments is at most ``tol`` (up to floating-point roundoff). Zero-width
    segments contribute exactly zero.
    """
    edges = np.asarray(edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2:
        raise ValueError("need at least two edges")
    if np.any(np.diff(edges) < 0):
        raise ValueError("edges must be nondecreasing")
    if not tol > 0:
        raise ValueError("tol must be positive")
    total_width = edges[-1] - edges[0]
    out = np.zeros(edges.size - 1)
    if total_width == 0:
        return out
    density = tol / total_width

    owner = np.flatnonzero(np.diff(edges) > 0)
    lo = edges[owner]
    hi = edges[owner + 1]
    partial_sum = 0.0
    for depth in range(max_depth + 1):
        k, err, scale = _gk15(f, lo, hi)
        done = (err <= density * (hi - lo)) | (err <= _ROUNDOFF * scale)
        np.add.at(out, owner[done], k[done])
        partial_sum += float(k[done].sum())
        if done.all():
            return out
        keep = ~done
        owner, lo, hi, k_open, err_open = owner[keep], lo[keep], hi[keep], k[keep], err[keep]
        mid = 0.5 * (lo + hi)
        if depth == max_depth or np.any((mid <= lo) | (mid >= hi)):
            break
        owner = np.repeat(owner, 2)
        lo, hi = np.column_stack([lo, mid]).ravel(), np.column_stack([mid, hi]).ravel()
    worst = int(np.argmax(err_open))
    raise QuadratureError(
        f"adaptive refinement did not converge within depth {max_depth}",
        partial=partial_sum + float(k_open.sum()),
        worst=(float(lo[worst]), float(hi[worst])),
    )


def integrate(f, a: float, b: float, tol: float = DEFAULT_TOL, max_depth: int = MAX_DEPTH) -> float:
    """Adaptive quadrature of ``f`` over ``[a, b]`` with absolute error at most ``tol``."""
    if b < a:
        return -integrate(f, b, a, tol, max_depth)
    return float(integrate_segments(f, [a, b], tol, max_depth)[0])


def cumulative(f, points, start: float = 0.0, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Return ``∫_start^p f`` for every ``p`` in ``points`` (any order, all ``>= start``).

    The combined error of all returned values is bounded by ``tol`` per value.
    """
    pts = np.asarray(points, dtype=float)
    flat = pts.ravel()
    if flat.size == 0:
        return pts.copy()
    if np.any(flat < start):
        raise ValueError("points must not precede start")
    order = np.argsort(flat, kind="stable")
    edges = np.concatenate([[start], flat[order]])
    pieces = integrate_segments(f, edges, tol)
    sums = np.empty_like(flat)
    sums[order] = np.cumsum(pieces)
    return sums.reshape(pts.shape)
