"""Derivative-free 1-d root and maximum location."""

from __future__ import annotations

import math

import numpy as np

from .errors import RootFindingError

ROOT_TOL = 1e-10
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def bisect(f, lo: float, hi: float, tol: float = ROOT_TOL, max_iter: int = 200):
    """Shrink a sign-change bracket of ``f`` to width ``tol``.

    Returns ``(lo, hi)``; the sign of ``f(lo)`` is preserved from the input
    bracket, which lets callers pick the side a root may be approached from.
    """
    flo, fhi = f(lo), f(hi)
    if math.isnan(flo) or math.isnan(fhi):
        raise RootFindingError("NaN at bracket endpoint", lo=lo, hi=hi)
    if flo == 0.0:
        return lo, lo
    if fhi == 0.0:
        return hi, hi
    if (flo > 0) == (fhi > 0):
        raise RootFindingError("bracket does not change sign", lo=lo, hi=hi, f_lo=flo, f_hi=fhi)
    neg_lo = flo < 0
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fm = f(mid)
        if math.isnan(fm):
            raise RootFindingError("NaN inside bracket", t=mid)
        if fm == 0.0:
            return mid, mid
        if (fm < 0) == neg_lo:
            lo = mid
        else:
            hi = mid
    return lo, hi


def sign_changes(values: np.ndarray) -> np.ndarray:
    """Indices ``i`` with ``values[i]`` and ``values[i+1]`` on opposite sides of zero.

    Zero is counted with the nonpositive side, so a sampled exact zero does not
    produce a double crossing.
    """
    pos = np.asarray(values) > 0
    return np.flatnonzero(pos[1:] != pos[:-1])


def golden_max(f, lo: float, hi: float, tol: float = 1e-10, max_iter: int = 200) -> float:
    """Golden-section search for a maximizer of a unimodal ``f`` on ``[lo, hi]``."""
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    best = max((f(lo), lo), (fc, c), (fd, d), (f(hi), hi))
    return best[1]
