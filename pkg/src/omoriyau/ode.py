"""Scalar explicit Runge-Kutta integration with Dormand-Prince 5(4) step control."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Butcher tableau, 5th-order solution propagated (FSAL)
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_E = (  # 5th minus 4th order weights
    71 / 57600,
    0.0,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)


@dataclass(frozen=True)
class Solution:
    t: np.ndarray
    y: np.ndarray
    blew_up: bool
    reason: str  # "completed", "blow-up", "step underflow"
    steps: int
    rejected: int


def solve(
    rhs,
    t0: float,
    y0: float,
    t_end: float,
    tol: float = 1e-9,
    max_step: float = 0.1,
    first_step: float | None = None,
    blowup: float = 1e12,
    min_step: float = 1e-14,
) -> Solution:
    """Integrate ``y' = rhs(t, y)`` from ``t0`` to ``t_end``.

    Each accepted step has its local error estimate below
    ``tol * max(1, |y|)``. Integration stops early, with ``blew_up`` set,
    once ``|y|`` exceeds ``blowup`` or the step size underflows.
    """
    if not t_end > t0:
        raise ValueError("t_end must exceed t0")
    ts, ys = [t0], [y0]
    t, y = t0, y0
    k1 = rhs(t, y)
    h = first_step if first_step is not None else min(max_step, 1e-3 * max(1.0, abs(t_end - t0)))
    steps = rejected = 0
    while t < t_end:
        h = min(h, max_step, t_end - t)
        if h < min_step * max(1.0, abs(t)):
            return Solution(np.array(ts), np.array(ys), True, "step underflow", steps, rejected)
        k = [k1]
        for i in range(1, 7):
            yi = y + h * sum(a * kj for a, kj in zip(_A[i], k))
            k.append(rhs(t + _C[i] * h, yi))
        y_new = y + h * sum(b * kj for b, kj in zip(_B, k))
        err = abs(h * sum(e * kj for e, kj in zip(_E, k)))
        scale = tol * max(1.0, abs(y), abs(y_new))
        if not math.isfinite(y_new) or not math.isfinite(err):
            h *= 0.25
            rejected += 1
            continue
        if err <= scale:
            t = t + h if t + h < t_end else t_end
            y = y_new
            k1 = k[6]
            ts.append(t)
            ys.append(y)
            steps += 1
            if abs(y) > blowup:
                return Solution(np.array(ts), np.array(ys), True, "blow-up", steps, rejected)
        else:
            rejected += 1
        factor = 0.9 * (scale / err) ** 0.2 if err > 0 else 5.0
        h *= min(5.0, max(0.2, factor))
    return Solution(np.array(ts), np.array(ys), False, "completed", steps, rejected)
