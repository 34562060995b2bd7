"""Rotationally symmetric model manifolds dr^2 + f(r)^2 dθ^2 and the Riccati comparison.

For a warped product all radial geometry is a function of the warping f:
Δr = (n-1) f'/f and Ricc(∂r, ∂r) = -(n-1) f''/f. Warpings keep f'/f and
f''/f as separate callables because f itself can overflow long before these
ratios do (t·exp(∫G) with G = (1+t)^2 is astronomically large at t = 50).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import ode, quadrature
from .errors import ConstructionFailed, PreconditionError
from .functions import DEFAULT_DOMAIN, Kind, ScalarFunction1D
from .growth import GrowthFunction

POLE_TOL = 1e-8


@dataclass(frozen=True)
class Warping:
    f: ScalarFunction1D
    log_f: Callable
    log_slope: Callable  # f'/f
    curvature: Callable  # f''/f

    @property
    def name(self) -> str:
        return self.f.name

    @classmethod
    def from_function(cls, f: ScalarFunction1D) -> "Warping":
        return cls(
            f,
            lambda t: np.log(f(t)),
            lambda t: np.asarray(f.deriv(t), dtype=float) / np.asarray(f(t), dtype=float),
            lambda t: np.asarray(f.deriv2(t), dtype=float) / np.asarray(f(t), dtype=float),
        )


def euclidean(domain_max: float = DEFAULT_DOMAIN) -> Warping:
    def f(t):
        return np.asarray(t, dtype=float) + 0.0

    fn = ScalarFunction1D(f, lambda t: np.ones_like(f(t)), lambda t: np.zeros_like(f(t)), domain_max, Kind.PRESET, "t")
    return Warping(fn, lambda t: np.log(f(t)), lambda t: 1.0 / f(t), lambda t: np.zeros_like(f(t)))


def hyperbolic(domain_max: float = 700.0) -> Warping:
    """f = sinh; constant curvature -1."""
    fn = ScalarFunction1D(np.sinh, np.cosh, np.sinh, domain_max, Kind.PRESET, "sinh")

    def log_sinh(t):
        t = np.asarray(t, dtype=float)
        return t + np.log1p(-np.exp(-2.0 * t)) - math.log(2.0)

    return Warping(fn, log_sinh, lambda t: 1.0 / np.tanh(t), lambda t: np.ones_like(np.asarray(t, dtype=float)))


def exponential_warping(G: GrowthFunction) -> Warping:
    """f(t) = t·exp(∫_0^t G), so f'/f = 1/t + G exceeds G by 1/t."""

    def integral(t):
        return quadrature.cumulative(lambda s: np.asarray(G(s), dtype=float), t)

    def f(t):
        t = np.asarray(t, dtype=float)
        with np.errstate(over="ignore"):
            return t * np.exp(integral(t))

    def df(t):
        t = np.asarray(t, dtype=float)
        with np.errstate(over="ignore"):
            return np.exp(integral(t)) * (1.0 + t * G(t))

    def d2f(t):
        t = np.asarray(t, dtype=float)
        g = np.asarray(G(t), dtype=float)
        with np.errstate(over="ignore"):
            return np.exp(integral(t)) * (2.0 * g + t * G.deriv(t) + t * g * g)

    def log_slope(t):
        t = np.asarray(t, dtype=float)
        return 1.0 / t + G(t)

    def curvature(t):
        t = np.asarray(t, dtype=float)
        g = np.asarray(G(t), dtype=float)
        return 2.0 * g / t + G.deriv(t) + g * g

    fn = ScalarFunction1D(f, df, d2f, G.domain_max, Kind.PRESET, f"t*exp(int[{G.name}])")
    return Warping(fn, lambda t: np.log(t) + integral(t), log_slope, curvature)


WARPINGS = {"t": euclidean, "euclidean": euclidean, "flat": euclidean, "sinh": hyperbolic, "hyperbolic": hyperbolic}


@dataclass(frozen=True)
class ModelManifold:
    dim: int
    warping: Warping

    def __post_init__(self):
        if self.dim < 2:
            raise PreconditionError("dimension must be at least 2", dim=self.dim)

    @property
    def domain_max(self) -> float:
        return self.warping.f.domain_max


def check_manifold(M: ModelManifold, grid: int = 1000) -> list:
    """Problems with the pole (f(0)=0, f'(0)=1) or positivity of f; empty if none."""
    problems = []
    f = M.warping.f
    if abs(float(f(0.0))) > POLE_TOL:
        problems.append(f"f(0) = {float(f(0.0))!r}, expected 0")
    if abs(float(f.deriv(0.0)) - 1.0) > POLE_TOL:
        problems.append(f"f'(0) = {float(f.deriv(0.0))!r}, expected 1")
    ts = np.linspace(0.0, M.domain_max, grid + 1)[1:]
    with np.errstate(all="ignore"):
        logs = np.asarray(M.warping.log_f(ts), dtype=float)
    if not np.all(np.isfinite(logs)):
        i = int(np.argmax(~np.isfinite(logs)))
        problems.append(f"f not positive at t={ts[i]!r}")
    return problems


def _positive(t):
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise PreconditionError("radial quantities are singular at the pole (t <= 0)", t=float(np.min(t)))
    return t


def delta_r(M: ModelManifold, t):
    """Laplacian of the distance to the pole, (n-1) f'/f."""
    t = _positive(t)
    return (M.dim - 1) * np.asarray(M.warping.log_slope(t), dtype=float)


def ricci_radial(M: ModelManifold, t):
    """Ricci curvature in the radial direction, -(n-1) f''/f."""
    t = _positive(t)
    return -(M.dim - 1) * np.asarray(M.warping.curvature(t), dtype=float)


def radial_laplacian(M: ModelManifold, g: ScalarFunction1D, t):
    """Δ(g∘r) = g'' + Δr g'."""
    t = _positive(t)
    return np.asarray(g.deriv2(t), dtype=float) + delta_r(M, t) * np.asarray(g.deriv(t), dtype=float)


# ----------------------------------------------------------------- Riccati


@dataclass(frozen=True)
class RiccatiTrace:
    t: np.ndarray
    m: np.ndarray
    R: np.ndarray
    dim: int
    blew_up: bool = False
    reason: str = "completed"


def growth_ricci_bound(G: GrowthFunction) -> Callable:
    """Ricci lower bound -G^2 of the comparison hypothesis."""
    return lambda t: -np.asarray(G(t), dtype=float) ** 2


def riccati_integrate(
    ricci,
    n: int,
    t0: float,
    m0: float,
    T: float,
    tol: float = 1e-9,
    max_step: float = 0.1,
    blowup: float = 1e12,
) -> RiccatiTrace:
    """Integrate m' = -R(t) - m^2/(n-1) from (t0, m0) to T.

    ``ricci`` is the radial Ricci curvature R (use :func:`growth_ricci_bound`
    for the comparison equation with R = -G^2). Escape of ``|m|`` past
    ``blowup`` ends the trace with ``blew_up`` set; m -> -∞ is the signature
    of a conjugate point.
    """
    if not t0 > 0:
        raise PreconditionError("t0 must be positive", t0=t0)
    if not T > t0:
        raise PreconditionError("T must exceed t0", t0=t0, T=T)
    if n < 2:
        raise PreconditionError("dimension must be at least 2", n=n)
    k = n - 1.0

    def rhs(t, m):
        return -float(ricci(t)) - m * m / k

    sol = ode.solve(rhs, t0, float(m0), T, tol=tol, max_step=max_step, blowup=blowup)
    R = np.asarray(ricci(sol.t), dtype=float) + np.zeros_like(sol.t)
    return RiccatiTrace(sol.t, sol.y, R, n, sol.blew_up, sol.reason)


@dataclass(frozen=True)
class ComparisonReport:
    holds_from: float | None  # earliest sample after which m < (√(n-1)+1) G at every later sample
    crossing_estimate: float | None
    holds_everywhere: bool
    witness: dict | None  # last violating sample, if any


def comparison_bound(G: GrowthFunction, n: int, t):
    return (math.sqrt(n - 1) + 1.0) * np.asarray(G(t), dtype=float)


def check_comparison_bound(trace: RiccatiTrace, G: GrowthFunction, n: int) -> ComparisonReport:
    bound = comparison_bound(G, n, trace.t)
    bad = np.flatnonzero(trace.m >= bound)
    if bad.size == 0:
        return ComparisonReport(float(trace.t[0]), None, True, None)
    k = int(bad[-1])
    witness = {"t": float(trace.t[k]), "m": float(trace.m[k]), "bound": float(bound[k])}
    if k == trace.t.size - 1:
        witness["status"] = "not yet below bound"
        return ComparisonReport(None, None, False, witness)
    # margin is >= 0 at k and < 0 at k+1
    m0, m1 = bound[k] - trace.m[k], bound[k + 1] - trace.m[k + 1]
    cross = trace.t[k] + (trace.t[k + 1] - trace.t[k]) * m0 / (m0 - m1)
    return ComparisonReport(float(trace.t[k + 1]), float(cross), False, witness)


def trace_table(trace: RiccatiTrace, G: GrowthFunction, n: int) -> list:
    """Rows ``(t, m, bound, margin)`` for CSV export."""
    bound = comparison_bound(G, n, trace.t)
    return list(zip(trace.t.tolist(), trace.m.tolist(), bound.tolist(), (bound - trace.m).tolist()))


# ---------------------------------------------------------- counterexample


def build_counterexample_manifold(G: GrowthFunction, n: int, grid: int = 10_000) -> ModelManifold:
    """Model manifold with Δr = (n-1)(1/t + G) > G on (0, domain_max].

    Smoothness at the pole would need f odd in t, which t·exp(∫G) is not in
    general; only r > 0 is checked.
    """
    G.require_admissible()
    M = ModelManifold(n, exponential_warping(G))
    ts = np.linspace(0.0, G.domain_max, grid + 1)[1:]
    dr = delta_r(M, ts)
    g = np.asarray(G(ts), dtype=float)
    margin = dr - g
    need = (n - 1) / ts
    # (n-1)(1/t + G) - G >= (n-1)/t for n >= 2; allow roundoff relative to Δr
    bad = margin < need - 1e-12 * np.maximum(1.0, np.abs(dr))
    if np.any(bad) or np.any(margin <= 0):
        i = int(np.argmax(bad | (margin <= 0)))
        raise ConstructionFailed("Δr > G fails on the counterexample manifold", t=float(ts[i]), delta_r=float(dr[i]), G=float(g[i]))
    return M
