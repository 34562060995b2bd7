"""Slowing a fast-growing G down to H with H' <= H^2 while keeping ∫ 1/H finite.

Where G/2 grows faster than its own square (the set A), the graph of G/2 is
replaced by the hyperbola ``1/(a - t)`` that leaves G/2 at the left end of a
component of A and meets it again at the first crossing ``v``. Hyperbolas are
translates of one another, so the resulting intervals ``(t, v)`` are nested
or disjoint and only the maximal ones are kept.
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import quadrature, roots
from .errors import EvaluationError, NestingViolated, PreconditionError, SpliceEscapesHorizon
from .functions import Kind, ScalarFunction1D
from .growth import GrowthFunction, require_converging

SCAN_GRID = 10_000
NEST_TOL = 1e-12
LEMMA_TOL = 1e-9


class EndpointKind(str, enum.Enum):
    BOUNDARY = "boundary"
    ROOT = "root"
    TRUNCATION = "truncation"


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    lo_kind: EndpointKind
    hi_kind: EndpointKind


@dataclass(frozen=True)
class IntervalSet:
    intervals: tuple = ()

    def __post_init__(self):
        prev_hi = -np.inf
        for iv in self.intervals:
            if not iv.lo < iv.hi:
                raise ValueError(f"empty interval ({iv.lo}, {iv.hi})")
            if iv.lo < prev_hi:
                raise ValueError("intervals must be sorted and disjoint")
            prev_hi = iv.hi

    def __len__(self):
        return len(self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    def __getitem__(self, i):
        return self.intervals[i]


def allowance(scale, tol: float = LEMMA_TOL):
    """Absolute tolerance for O(1) quantities, relative once they exceed 10^3."""
    return tol * np.maximum(1.0, np.abs(scale) * 1e-3)


def fast_growth_indicator(G: GrowthFunction):
    """φ(t) = G'(t)/2 - (G(t)/2)^2; A is where φ > 0."""

    def phi(t):
        half = 0.5 * np.asarray(G(t), dtype=float)
        return 0.5 * np.asarray(G.deriv(t), dtype=float) - half * half

    return phi


def detect_fast_growth_set(
    G: GrowthFunction, T: float, grid: int = SCAN_GRID, tol: float = roots.ROOT_TOL
) -> IntervalSet:
    """Components of {t in (0, T]: G'/2 > (G/2)^2} found by grid scan and bisection.

    Roots closer together than the grid spacing can be missed.
    """
    if grid < 2:
        raise PreconditionError("grid must be at least 2", grid=grid)
    if not 0 < T <= G.domain_max:
        raise PreconditionError(f"horizon T={T} outside (0, {G.domain_max}]", T=T)
    phi = fast_growth_indicator(G)
    ts = np.linspace(0.0, T, grid)
    vals = phi(ts)
    if np.any(np.isnan(vals)):
        i = int(np.argmax(np.isnan(vals)))
        raise EvaluationError("fast-growth indicator is NaN", t=float(ts[i]))
    scalar_phi = lambda s: float(phi(s))
    pos = vals > 0
    out = []
    i = 0
    while i < grid:
        if not pos[i]:
            i += 1
            continue
        j = i
        while j + 1 < grid and pos[j + 1]:
            j += 1
        if i == 0:
            lo, lo_kind = 0.0, EndpointKind.BOUNDARY
        else:
            # keep the endpoint on the φ > 0 side of the bracket
            lo = roots.bisect(scalar_phi, ts[i - 1], ts[i], tol)[1]
            lo_kind = EndpointKind.ROOT
        if j == grid - 1:
            hi, hi_kind = float(T), EndpointKind.TRUNCATION
        else:
            hi = roots.bisect(scalar_phi, ts[j], ts[j + 1], tol)[0]
            hi_kind = EndpointKind.ROOT
        if hi > lo:
            out.append(Interval(float(lo), float(hi), lo_kind, hi_kind))
        i = j + 1
    return IntervalSet(tuple(out))


@dataclass(frozen=True)
class SpliceInterval:
    t_n: float
    s_n: float
    a_n: float
    v_n: float

    def contains(self, other: "SpliceInterval", tol: float = NEST_TOL) -> bool:
        return self.t_n - tol <= other.t_n and other.v_n <= self.v_n + tol

    def hyperbola(self, t):
        return 1.0 / (self.a_n - np.asarray(t, dtype=float))


def build_splice(
    G: GrowthFunction,
    t_n: float,
    T: float,
    s_n: float | None = None,
    grid: int = SCAN_GRID,
) -> SpliceInterval:
    """Hyperbola ``1/(a - t)`` leaving G/2 at ``t_n`` and its first return ``v_n``.

    ``a_n = t_n + 2/G(t_n)``. When ``s_n`` (right end of the component of A)
    is known, the scan starts there since the hyperbola stays below G/2 on
    the whole component. ``v_n`` is refined to adjacent floating-point
    numbers and taken on the side where the hyperbola is still below G/2.
    """
    g_t = float(G(t_n))
    a_n = t_n + 2.0 / g_t
    start = t_n if s_n is None else s_n
    end = min(a_n, T)
    if not start < end:
        raise SpliceEscapesHorizon("splice escapes horizon", t_n=t_n, a_n=a_n, T=T)

    def psi(t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore"):
            return 1.0 / (a_n - t) - 0.5 * np.asarray(G(t), dtype=float)

    ts = np.linspace(start, end, grid + 1)
    if end == a_n:
        ts = ts[:-1]
    vals = psi(ts)
    if np.any(np.isnan(vals)):
        raise EvaluationError("splice crossing function is NaN", t_n=t_n)
    crossing = np.flatnonzero((vals[1:] > 0) & (vals[:-1] <= 0))
    if crossing.size == 0:
        raise SpliceEscapesHorizon("splice escapes horizon", t_n=t_n, a_n=a_n, T=T)
    i = int(crossing[0])
    v_n, _ = roots.bisect(lambda s: float(psi(s)), ts[i], ts[i + 1], tol=0.0)
    if s_n is None:
        s_n = _component_end(G, t_n, v_n)
    return SpliceInterval(float(t_n), float(s_n), float(a_n), float(v_n))


def _component_end(G, t_n, v_n, grid: int = SCAN_GRID) -> float:
    # first sign change of φ from + to - in (t_n, v_n); the component of A starting at t_n
    phi = fast_growth_indicator(G)
    ts = np.linspace(t_n, v_n, grid)
    vals = phi(ts)
    drops = np.flatnonzero((vals[:-1] > 0) & (vals[1:] <= 0))
    if drops.size == 0:
        return float(t_n)
    i = int(drops[0])
    return float(roots.bisect(lambda s: float(phi(s)), ts[i], ts[i + 1])[0])


def disjointify(splices, tol: float = NEST_TOL) -> list:
    """Keep only maximal splices; input must be sorted by ``t_n``."""
    kept: list[SpliceInterval] = []
    for sp in splices:
        if kept and sp.t_n < kept[-1].t_n - tol:
            raise PreconditionError("splices must be sorted by t_n")
        if kept and kept[-1].contains(sp, tol):
            continue
        if kept and sp.t_n < kept[-1].v_n - tol:
            raise NestingViolated(
                "nesting violated",
                outer=[kept[-1].t_n, kept[-1].v_n],
                inner=[sp.t_n, sp.v_n],
            )
        kept.append(sp)
    return kept


@dataclass(frozen=True)
class SlowedGrowth:
    """Piecewise H: ``1/(a_n - t)`` on ``[t_n, v_n)`` and ``G/2`` elsewhere.

    The half-open convention fixes which one-sided derivative ``deriv``
    returns at a joint; ``deriv_left`` gives the other one.
    """

    G: GrowthFunction
    splices: tuple
    T: float
    components: IntervalSet = field(default_factory=IntervalSet)

    @property
    def _arrays(self):
        return (
            np.array([s.t_n for s in self.splices]),
            np.array([s.v_n for s in self.splices]),
            np.array([s.a_n for s in self.splices]),
        )

    def branch(self, t) -> np.ndarray:
        """0 off the splices, ``k`` on the k-th splice (1-based)."""
        t = np.asarray(t, dtype=float)
        if not self.splices:
            return np.zeros(t.shape, dtype=int)
        starts, ends, _ = self._arrays
        idx = np.searchsorted(starts, t, side="right") - 1
        safe = np.clip(idx, 0, None)
        on = (idx >= 0) & (t < ends[safe])
        return np.where(on, idx + 1, 0)

    def _left_branch(self, t):
        t = np.asarray(t, dtype=float)
        if not self.splices:
            return np.zeros(t.shape, dtype=int)
        starts, ends, _ = self._arrays
        idx = np.searchsorted(starts, t, side="left") - 1
        safe = np.clip(idx, 0, None)
        on = (idx >= 0) & (t <= ends[safe])
        return np.where(on, idx + 1, 0)

    def _pieces(self, t, br):
        t = np.asarray(t, dtype=float)
        if self.splices:
            _, _, poles = self._arrays
            a = poles[np.clip(br - 1, 0, None)]
        else:
            a = np.zeros_like(t)
        with np.errstate(divide="ignore", invalid="ignore"):
            k = 1.0 / (a - t)
        return t, br > 0, k

    def __call__(self, t):
        t, on, k = self._pieces(t, self.branch(t))
        return np.where(on, k, 0.5 * np.asarray(self.G(t), dtype=float))

    def deriv(self, t):
        t, on, k = self._pieces(t, self.branch(t))
        return np.where(on, k * k, 0.5 * np.asarray(self.G.deriv(t), dtype=float))

    def deriv_left(self, t):
        t, on, k = self._pieces(t, self._left_branch(t))
        return np.where(on, k * k, 0.5 * np.asarray(self.G.deriv(t), dtype=float))

    def deriv2(self, t):
        t, on, k = self._pieces(t, self.branch(t))
        return np.where(on, 2.0 * k**3, 0.5 * np.asarray(self.G.deriv2(t), dtype=float))

    @property
    def joints(self) -> np.ndarray:
        pts = sorted({p for s in self.splices for p in (s.t_n, s.v_n)})
        return np.array(pts, dtype=float)

    def near_joint(self, t, tol: float = 1e-9) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        j = self.joints
        if j.size == 0:
            return np.zeros(t.shape, dtype=bool)
        d = np.min(np.abs(t[..., None] - j), axis=-1)
        return d <= tol * np.maximum(1.0, np.abs(t))

    def reciprocal_integral(self, t, tol: float = quadrature.DEFAULT_TOL):
        """``∫_0^t ds/H(s)``: exact antiderivative on splices, quadrature of 2/G elsewhere."""
        t = np.asarray(t, dtype=float)
        flat = t.ravel()
        if flat.size == 0:
            return t.copy()
        top = float(flat.max())
        cuts = [p for p in self.joints if p < top]
        edges = np.unique(np.concatenate([[0.0], cuts, flat]))
        pieces = quadrature.integrate_segments(lambda s: 1.0 / self(s), edges, tol)
        mids = 0.5 * (edges[:-1] + edges[1:])
        br = self.branch(mids)
        for i in np.flatnonzero(br > 0):
            a = self.splices[br[i] - 1].a_n
            lo, hi = edges[i], edges[i + 1]
            pieces[i] = 0.5 * ((a - lo) ** 2 - (a - hi) ** 2)
        cum = np.concatenate([[0.0], np.cumsum(pieces)])
        out = cum[np.searchsorted(edges, flat)]
        return out.reshape(t.shape)

    def as_function(self) -> ScalarFunction1D:
        return ScalarFunction1D(self.__call__, self.deriv, self.deriv2, self.T, Kind.PIECEWISE, f"H[{self.G.name}]")


def build_H(
    G: GrowthFunction,
    T: float,
    grid: int = SCAN_GRID,
    force: bool = False,
    workers: int = 1,
) -> SlowedGrowth:
    """Detect A, splice each component, drop nested splices, and assemble H.

    ``force`` bypasses the requirement that ``∫ 1/G`` be declared convergent
    (a declared divergence is still refused).
    """
    G.require_admissible()
    require_converging(G, force=force, T=T)
    comps = detect_fast_growth_set(G, T, grid)
    jobs = [(c.lo, c.hi) for c in comps]

    def one(job):
        lo, hi = job
        return build_splice(G, lo, T, s_n=hi, grid=grid)

    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(workers) as pool:
            splices = list(pool.map(one, jobs))
    else:
        splices = [one(j) for j in jobs]
    splices.sort(key=lambda s: s.t_n)
    kept = disjointify(splices)
    return SlowedGrowth(G, tuple(kept), float(T), comps)


# ---------------------------------------------------------------- reports


@dataclass(frozen=True)
class TelescopingReport:
    horizon: float
    integral: float  # ∫_0^T 1/H
    splice_exact: float  # exact antiderivative summed over splices inside the horizon
    splice_quadrature: float  # adaptive quadrature of the assembled H over the same splices
    splice_sum: float  # ½ Σ [(a-t)^2 - (a-v)^2]
    bound: float | None  # (2 / G(t_1))^2
    prefix_sums: tuple  # Σ_{n<=m} [(2/G(t_n))^2 - (2/G(v_n))^2]
    bound_holds: bool


def integral_reciprocal_H(H: SlowedGrowth, T: float, tol: float = quadrature.DEFAULT_TOL) -> TelescopingReport:
    if not 0 < T <= H.G.domain_max:
        raise PreconditionError(f"horizon T={T} outside (0, {H.G.domain_max}]", T=T)
    inside = [s for s in H.splices if s.v_n <= T]
    total = float(H.reciprocal_integral(T, tol))
    exact = sum(0.5 * ((s.a_n - s.t_n) ** 2 - (s.a_n - s.v_n) ** 2) for s in inside)
    quad = sum(quadrature.integrate(lambda x: 1.0 / H(x), s.t_n, s.v_n, tol) for s in inside)
    squares = [(2.0 / float(H.G(s.t_n))) ** 2 - (2.0 / float(H.G(s.v_n))) ** 2 for s in inside]
    prefix = tuple(float(x) for x in np.cumsum(squares))
    bound = (2.0 / float(H.G(inside[0].t_n))) ** 2 if inside else None
    holds = bound is None or all(p < bound + 1e-9 for p in prefix)
    half = 0.5 * prefix[-1] if prefix else 0.0
    return TelescopingReport(float(T), total, float(exact), float(quad), float(half), bound, prefix, holds)


def lemma_properties(H: SlowedGrowth, T: float | None = None, grid: int = 10_000, tol: float = LEMMA_TOL) -> dict:
    """Check H >= 1/2, H' >= 0, 2H <= G, H' <= H^2 at every non-joint grid point.

    Each entry gives the worst margin (negative means violated) and whether
    the check passed at the stated tolerance.
    """
    T = H.T if T is None else T
    ts = np.linspace(0.0, T, grid)
    ts = ts[~H.near_joint(ts)]
    h = np.asarray(H(ts), dtype=float)
    dh = np.asarray(H.deriv(ts), dtype=float)
    g = np.asarray(H.G(ts), dtype=float)
    margins = {
        "H>=1/2": (h - 0.5, allowance(h, tol)),
        "H'>=0": (dh, allowance(dh, tol)),
        "2H<=G": (g - 2.0 * h, allowance(g, tol)),
        "H'<=H^2": (h * h - dh, allowance(h * h, tol)),
    }
    out = {}
    for name, (m, allow) in margins.items():
        i = int(np.argmin(m + allow))
        out[name] = {"passed": bool(np.all(m >= -allow)), "worst_margin": float(m[i]), "worst_t": float(ts[i])}
    jumps = []
    for s in H.splices:
        for p, a in ((s.t_n, s.a_n), (s.v_n, s.a_n)):
            if p <= T:
                jumps.append(abs(1.0 / (a - p) - 0.5 * float(H.G(p))))
    cont = max(jumps, default=0.0)
    out["continuity"] = {"passed": cont <= 1e-8, "worst_margin": -cont, "worst_t": None}
    dh_all = np.diff(np.asarray(H(np.linspace(0.0, T, grid)), dtype=float))
    out["monotone"] = {"passed": bool(np.all(dh_all >= -1e-12)), "worst_margin": float(dh_all.min(initial=0.0)), "worst_t": None}
    contained = all(any(c.lo >= s.t_n - NEST_TOL and c.hi <= s.v_n + NEST_TOL for s in H.splices) for c in H.components)
    out["components_covered"] = {"passed": contained, "worst_margin": None, "worst_t": None}
    return out


def ledger(H: SlowedGrowth) -> list:
    return [{"t_n": s.t_n, "s_n": s.s_n, "a_n": s.a_n, "v_n": s.v_n} for s in H.splices]


def table(H: SlowedGrowth, ts) -> list:
    """Rows ``(t, H, H', branch)`` for CSV export."""
    ts = np.asarray(ts, dtype=float)
    return list(zip(ts.tolist(), np.asarray(H(ts)).tolist(), np.asarray(H.deriv(ts)).tolist(), H.branch(ts).tolist()))
