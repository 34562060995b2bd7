"""The λ-sweep producing ε-certificates, and the counterexample when ∫ 1/G < ∞.

Lowering ``h_λ = λ F(r) + L - ε`` onto a function g that is bounded above by
L, the critical λ is

    λ0 = max_t (g(t) - L + ε) / F(t),

and the maximizer is the touching point x_ε. There g nearly attains L and
its gradient and Laplacian are controlled by those of h_λ0.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import roots
from .errors import ConstructionFailed, HorizonLimitedSweep, PreconditionError
from .functions import Kind, ScalarFunction1D
from .growth import GrowthFunction, build_F, require_converging
from .manifold import ModelManifold, build_counterexample_manifold, delta_r, radial_laplacian
from .slowdown import SCAN_GRID, build_H, integral_reciprocal_H, ledger

SWEEP_GRID = 100_000
HORIZON_GUARD = 0.01
TOUCH_TOL = 1e-8
VIOLATION_LEVEL = 1.0 - 1e-6


@dataclass(frozen=True)
class SweepCertificate:
    epsilon: float
    lambda0: float
    x_eps: float
    gap: float  # L - g(x_eps)
    grad_norm: float  # |g'(x_eps)|
    laplacian: float  # Δg(x_eps)
    F_at_x: float
    passed: dict  # inequality label -> bool
    touching: dict = field(default_factory=dict)
    trivial: bool = False

    @property
    def ok(self) -> bool:
        return all(self.passed.values())


def _check(epsilon, lambda0, F_at_x, gap, grad, lap) -> dict:
    return {
        "gap": bool(gap <= epsilon),
        "sweep_level": bool(lambda0 < epsilon / F_at_x and lambda0 < epsilon),
        "gradient": bool(grad < epsilon),
        "laplacian": bool(lap <= 2.0 * epsilon),
    }


def _refined_max(fn, ts, vals):
    i = int(np.argmax(vals))
    lo, hi = ts[max(i - 1, 0)], ts[min(i + 1, ts.size - 1)]
    x = roots.golden_max(lambda s: float(fn(s)), float(lo), float(hi))
    return (x, float(fn(x))) if float(fn(x)) >= vals[i] else (float(ts[i]), float(vals[i]))


def sup_near_pole(g: ScalarFunction1D, radius: float = 1.0, grid: int = 2001) -> float:
    """sup of g on the ball r < radius (equal to the max on the closed ball by continuity)."""
    ts = np.linspace(0.0, radius, grid)
    vals = np.asarray(g(ts), dtype=float)
    return _refined_max(g, ts, vals)[1]


def _check_laplacian_hypothesis(M, G, T, ts):
    outer = ts[ts > 1.0]
    if outer.size == 0:
        return
    dr = delta_r(M, outer)
    gv = np.asarray(G(outer), dtype=float)
    bad = dr > gv + 1e-12 * np.maximum(1.0, np.abs(gv))
    if np.any(bad):
        i = int(np.argmax(bad))
        raise PreconditionError(
            "hypothesis Δr <= G(r) fails for r > 1", t=float(outer[i]), delta_r=float(dr[i]), G=float(gv[i])
        )


def trivial_certificate(M: ModelManifold, g: ScalarFunction1D, L: float, epsilon: float, x: float) -> SweepCertificate:
    """Certificate at a point where g attains its supremum."""
    gap = L - float(g(x))
    grad = abs(float(g.deriv(x)))
    if x > 0:
        lap = float(radial_laplacian(M, g, x))
    else:
        # Δr g' -> (n-1) g''(0) at the pole for a smooth radial g
        lap = M.dim * float(g.deriv2(0.0))
    return SweepCertificate(
        float(epsilon), 0.0, float(x), gap, grad, lap, 1.0, _check(epsilon, 0.0, 1.0, gap, grad, lap), trivial=True
    )


def sweep_lambda0(
    M: ModelManifold,
    g: ScalarFunction1D,
    L: float,
    G: GrowthFunction,
    epsilon: float,
    T: float,
    grid: int = SWEEP_GRID,
    F: ScalarFunction1D | None = None,
) -> SweepCertificate:
    """Critical sweep level λ0 and the four certificate inequalities at the touching point."""
    if not epsilon > 0:
        raise PreconditionError("epsilon must be positive", epsilon=epsilon)
    if T > M.domain_max or T > G.domain_max:
        raise PreconditionError("horizon exceeds the manifold or growth domain", T=T)
    G.require_admissible()
    ts = np.linspace(0.0, T, grid)
    gv = np.asarray(g(ts), dtype=float)
    g_sup = _refined_max(g, ts, gv)[1]
    if not g_sup < L:
        raise PreconditionError("g reaches L on the horizon; the supremum is attained", sup=g_sup, L=L)
    near = L - sup_near_pole(g)
    # equality with L - sup_{r<1} g is admitted: g <= L - ε on r < 1 is all the argument uses
    if not (epsilon < 1.0 and epsilon <= near + 1e-12):
        raise PreconditionError(
            "epsilon must satisfy epsilon < min(1, L - sup{g : r < 1})",
            epsilon=epsilon,
            limit=min(1.0, near),
        )
    _check_laplacian_hypothesis(M, G, T, ts[1:])

    F = F if F is not None else build_F(G)
    Fv = np.asarray(F(ts), dtype=float)
    ratio = (gv - L + epsilon) / Fv
    objective = lambda s: (float(g(s)) - L + epsilon) / float(F(s))
    x, lam = _refined_max(objective, ts, ratio)
    if not lam > 0:
        raise PreconditionError("no point of the horizon has g > L - epsilon", epsilon=epsilon)
    if x >= (1.0 - HORIZON_GUARD) * T:
        raise HorizonLimitedSweep("horizon-limited sweep", x_eps=x, T=T, epsilon=epsilon)
    if x <= 0:
        raise PreconditionError("touching point at the pole", epsilon=epsilon)

    F_x = float(F(x))
    gap = L - float(g(x))
    g1 = float(g.deriv(x))
    lap = float(radial_laplacian(M, g, x))
    dF, d2F = float(F.deriv(x)), float(F.deriv2(x))
    dr = float(delta_r(M, x))
    h_lap = lam * (dF * dr + d2F)
    h_grid = lam * Fv + L - epsilon
    touching = {
        "touch_residual": lam * F_x + L - epsilon - float(g(x)),
        "min_h_minus_g": float(np.min(h_grid - gv)),
        "first_order_residual": abs(g1 - lam * dF),
        "laplacian_h": h_lap,
        "second_order_margin": h_lap - lap,
    }
    return SweepCertificate(
        float(epsilon), lam, float(x), gap, abs(g1), lap, F_x, _check(epsilon, lam, F_x, gap, abs(g1), lap), touching
    )


def certify_definition(
    M: ModelManifold,
    g: ScalarFunction1D,
    L: float,
    G: GrowthFunction,
    epsilons,
    T: float,
    grid: int = SWEEP_GRID,
    workers: int = 1,
) -> list:
    """One certificate per ε, in input order.

    When g attains L on the horizon, every ε gets the trivial certificate at
    the maximizer. Failed inequalities are flagged in ``passed``.
    """
    ts = np.linspace(0.0, T, grid)
    gv = np.asarray(g(ts), dtype=float)
    x_star, g_star = _refined_max(g, ts, gv)
    if g_star >= L - 1e-12:
        return [trivial_certificate(M, g, L, e, x_star) for e in epsilons]
    F = build_F(G)
    run = lambda e: sweep_lambda0(M, g, L, G, e, T, grid, F)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(run, epsilons))
    return [run(e) for e in epsilons]


def sweep_trace(g: ScalarFunction1D, L: float, G: GrowthFunction, cert: SweepCertificate, T: float, points: int = 1001):
    """Rows ``(t, g, h_λ0, h_λ0 - g)`` for CSV export."""
    ts = np.linspace(0.0, T, points)
    gv = np.asarray(g(ts), dtype=float)
    h = cert.lambda0 * np.asarray(build_F(G)(ts), dtype=float) + L - cert.epsilon
    return list(zip(ts.tolist(), gv.tolist(), h.tolist(), (h - gv).tolist()))


# ---------------------------------------------------------- counterexample


@dataclass(frozen=True)
class ViolationReport:
    growth: str
    dim: int
    horizon: float
    h_sup: float  # ∫_0^∞ 1/H when the tail is known, else ∫_0^T
    h_horizon: float
    tail_included: bool
    proof_bound: float | None  # ½(2/G(t_1))^2 + 2∫_0^∞ 1/G
    delta_h_min: float
    delta_h_argmin: float
    maximizing_tail: list  # [r, h(r), Δh(r)]
    joints: list  # {"t", "left", "right"} one-sided Δh at splice joints
    splices: list

    @property
    def certifies_failure(self) -> bool:
        return self.delta_h_min > VIOLATION_LEVEL and math.isfinite(self.h_sup)


def _restrict(G: GrowthFunction, T: float) -> GrowthFunction:
    return GrowthFunction(G.base.with_domain(T), G.verified_admissible, G.violations)


def bounded_profile(H) -> ScalarFunction1D:
    """h(r) = ∫_0^r 1/H with h' = 1/H and h'' = -H'/H^2."""

    def d2(t):
        hv = np.asarray(H(t), dtype=float)
        return -np.asarray(H.deriv(t), dtype=float) / hv**2

    return ScalarFunction1D(
        H.reciprocal_integral,
        lambda t: 1.0 / np.asarray(H(t), dtype=float),
        d2,
        H.T,
        Kind.PIECEWISE,
        f"int 1/H[{H.G.name}]",
    )


def build_counterexample(
    G: GrowthFunction,
    n: int,
    T: float,
    grid: int = SCAN_GRID,
    force: bool = False,
    tail_points: int = 11,
):
    """Bounded h with Δh > 1 everywhere on a manifold with Δr > G.

    Returns ``(h, M, report)``. Raises GateError when ``∫ 1/G`` is declared
    divergent (or not declared convergent, unless ``force``).
    """
    require_converging(G, force=force, T=T)
    G = _restrict(G.require_admissible(), T)
    H = build_H(G, T, grid, force=force)
    M = build_counterexample_manifold(G, n, grid)
    h = bounded_profile(H)

    ts = np.linspace(0.0, T, grid + 1)[1:]
    ts = ts[~H.near_joint(ts)]
    lap = radial_laplacian(M, h, ts)
    i = int(np.argmin(lap))

    tel = integral_reciprocal_H(H, T)
    declared = G.base.reciprocal if G.base.kind is Kind.PRESET else None
    tail = declared.tail if declared is not None and declared.tail is not None else None
    # beyond T no further splices are assumed, so H = G/2 there
    h_sup = tel.integral + (2.0 * float(tail(T)) if tail else 0.0)
    proof_bound = None
    if tail and declared.antiderivative is not None:
        full = float(declared.antiderivative(T)) + float(tail(T))
        proof_bound = (0.5 * tel.bound if tel.bound is not None else 0.0) + 2.0 * full

    radii = np.linspace(T / 2.0, T, tail_points)
    tail_rows = [[float(r), float(hv), float(d)] for r, hv, d in zip(radii, h(radii), radial_laplacian(M, h, radii))]

    joints = []
    for p in H.joints:
        if 0 < p <= T:
            hv = float(H(p))
            dr = float(delta_r(M, p))
            left = dr / hv - float(H.deriv_left(p)) / hv**2
            right = dr / hv - float(H.deriv(p)) / hv**2
            joints.append({"t": float(p), "left": left, "right": right})

    report = ViolationReport(
        G.name,
        n,
        float(T),
        float(h_sup),
        float(tel.integral),
        tail is not None,
        proof_bound,
        float(lap[i]),
        float(ts[i]),
        tail_rows,
        joints,
        ledger(H),
    )
    if not report.delta_h_min > 1.0:
        raise ConstructionFailed("construction failed: Δh <= 1", t=report.delta_h_argmin, delta_h=report.delta_h_min)
    return h, M, report


def delta_h_table(h: ScalarFunction1D, M: ModelManifold, T: float, points: int = 1001):
    """Rows ``(t, h, Δh)`` on (0, T] for CSV export."""
    ts = np.linspace(0.0, T, points)[1:]
    return list(zip(ts.tolist(), np.asarray(h(ts)).tolist(), np.asarray(radial_laplacian(M, h, ts)).tolist()))


# ------------------------------------------------------------- diagnostics


@dataclass(frozen=True)
class SequenceDiagnostics:
    horizons: tuple
    deltas: tuple
    sup_values: tuple
    inf_grad: tuple
    inf_laplacian: tuple
    witnesses: tuple  # radius of the smallest Δg in each near-supremum region
    verdict: str  # "violated", "plausible" or "inconclusive"


def search_omori_sequence(
    M: ModelManifold,
    g: ScalarFunction1D,
    horizons,
    L: float | None = None,
    deltas=None,
    grid: int = 10_000,
    trend_tol: float = 1e-2,
) -> SequenceDiagnostics:
    """Look for points with g near its supremum, small |g'| and small Δg.

    On each horizon the near-supremum region is {t : g(t) > sup - δ}, with
    ``sup`` the given L or else the maximum on that horizon, and δ halving
    from 0.1 unless ``deltas`` is given. The verdict is "violated" when the
    smallest Δg there stays above 1 - 1e-6 on every horizon, "plausible" when
    both infima on the last horizon are below ``trend_tol``.
    """
    horizons = tuple(float(h) for h in horizons)
    if deltas is None:
        deltas = tuple(0.1 * 0.5**k for k in range(len(horizons)))
    sups, grads, laps, wits = [], [], [], []
    for T, delta in zip(horizons, deltas):
        ts = np.linspace(0.0, T, grid)[1:]
        gv = np.asarray(g(ts), dtype=float)
        ref = float(gv.max()) if L is None else L
        region = gv > ref - delta
        if not region.any():
            region = gv == gv.max()
        rt = ts[region]
        lap = np.asarray(radial_laplacian(M, g, rt), dtype=float)
        k = int(np.argmin(lap))
        sups.append(float(gv.max()))
        grads.append(float(np.min(np.abs(np.asarray(g.deriv(rt), dtype=float)))))
        laps.append(float(lap[k]))
        wits.append(float(rt[k]))
    if all(v >= VIOLATION_LEVEL for v in laps):
        verdict = "violated"
    elif grads[-1] <= trend_tol and laps[-1] <= trend_tol:
        verdict = "plausible"
    else:
        verdict = "inconclusive"
    return SequenceDiagnostics(horizons, tuple(deltas), tuple(sups), tuple(grads), tuple(laps), tuple(wits), verdict)
