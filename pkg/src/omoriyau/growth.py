"""Growth functions G with G >= 1, G' >= 0 and the auxiliary F = exp(∫ 1/G).

Whether ``∫_0^∞ dt/G`` diverges decides which side of the maximum principle
a growth rate falls on. Numerics cannot settle an improper integral, so only
presets carry a verdict; anything user-supplied is reported as inconclusive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import quadrature
from .errors import GateError, InadmissibleGrowth, PreconditionError
from .functions import (
    DEFAULT_DOMAIN,
    SEED,
    Kind,
    ReciprocalIntegral,
    ScalarFunction1D,
    constant,
    from_expression,
)

DIVERGES = "diverges-declared"
CONVERGES = "converges-declared"
INCONCLUSIVE = "inconclusive-numeric"

DERIV_TOL = 1e-9
_VALUE_TOL = 1e-12  # roundoff allowance on G >= 1


# ------------------------------------------------------------------ presets


def linear(domain_max: float = DEFAULT_DOMAIN) -> ScalarFunction1D:
    """G(t) = 1 + t."""
    return ScalarFunction1D(
        lambda t: 1.0 + np.asarray(t, dtype=float),
        lambda t: np.ones_like(np.asarray(t, dtype=float)),
        lambda t: np.zeros_like(np.asarray(t, dtype=float)),
        domain_max,
        Kind.PRESET,
        "1+t",
        ReciprocalIntegral("diverges", antiderivative=np.log1p),
    )


def quadratic(domain_max: float = DEFAULT_DOMAIN) -> ScalarFunction1D:
    """G(t) = (1 + t)^2."""
    return ScalarFunction1D(
        lambda t: (1.0 + np.asarray(t, dtype=float)) ** 2,
        lambda t: 2.0 * (1.0 + np.asarray(t, dtype=float)),
        lambda t: np.full_like(np.asarray(t, dtype=float), 2.0),
        domain_max,
        Kind.PRESET,
        "(1+t)^2",
        ReciprocalIntegral(
            "converges",
            antiderivative=lambda T: 1.0 - 1.0 / (1.0 + np.asarray(T, dtype=float)),
            tail=lambda T: 1.0 / (1.0 + np.asarray(T, dtype=float)),
        ),
    )


def exponential(domain_max: float = 500.0) -> ScalarFunction1D:
    """G(t) = e^t."""
    return ScalarFunction1D(
        np.exp,
        np.exp,
        np.exp,
        domain_max,
        Kind.PRESET,
        "exp(t)",
        ReciprocalIntegral(
            "converges",
            antiderivative=lambda T: -np.expm1(-np.asarray(T, dtype=float)),
            tail=lambda T: np.exp(-np.asarray(T, dtype=float)),
        ),
    )


def loglinear(domain_max: float = DEFAULT_DOMAIN) -> ScalarFunction1D:
    """G(t) = (1 + t) log(1 + t) + 1; ``∫ 1/G`` diverges like log log t."""
    return ScalarFunction1D(
        lambda t: (1.0 + np.asarray(t, dtype=float)) * np.log1p(t) + 1.0,
        lambda t: np.log1p(t) + 1.0,
        lambda t: 1.0 / (1.0 + np.asarray(t, dtype=float)),
        domain_max,
        Kind.PRESET,
        "(1+t)*log(1+t)+1",
        ReciprocalIntegral("diverges"),
    )


def constant_growth(c: float, domain_max: float = DEFAULT_DOMAIN) -> ScalarFunction1D:
    """G(t) = c."""
    base = constant(c, domain_max)
    return ScalarFunction1D(
        base.eval,
        base.deriv,
        base.deriv2,
        domain_max,
        Kind.PRESET,
        base.name,
        ReciprocalIntegral("diverges", antiderivative=lambda T: np.asarray(T, dtype=float) / c),
    )


PRESETS = {
    "linear": linear,
    "1+t": linear,
    "t+1": linear,
    "quadratic": quadratic,
    "(1+t)^2": quadratic,
    "(t+1)^2": quadratic,
    "exponential": exponential,
    "exp(t)": exponential,
    "e^t": exponential,
    "loglinear": loglinear,
    "(1+t)*log(1+t)+1": loglinear,
    "(1+t)log(1+t)+1": loglinear,
}


def resolve(src: str, domain_max: float | None = None) -> ScalarFunction1D:
    """Map a user string to a preset when it names one, else parse it.

    Plain numbers become constant presets (``"2"`` is G ≡ 2) so that they
    keep their declared divergence verdict.
    """
    key = "".join(src.split())
    if key.startswith("const:"):
        key = key[len("const:"):]
    try:
        c = float(key)
    except ValueError:
        c = None
    if c is not None and math.isfinite(c):
        fn = constant_growth(c)
    elif key in PRESETS:
        fn = PRESETS[key]()
    else:
        fn = from_expression(src)
    return fn.with_domain(domain_max) if domain_max is not None else fn


# ------------------------------------------------------------ admissibility


@dataclass(frozen=True)
class Violation:
    t: float
    condition: str  # "G>=1", "G'>=0" or "finite"
    value: float


@dataclass(frozen=True)
class GrowthFunction:
    base: ScalarFunction1D
    verified_admissible: bool
    violations: tuple = field(default=())

    def __call__(self, t):
        return self.base.eval(t)

    def deriv(self, t):
        return self.base.deriv(t)

    def deriv2(self, t):
        return self.base.deriv2(t)

    @property
    def domain_max(self) -> float:
        return self.base.domain_max

    @property
    def name(self) -> str:
        return self.base.name

    @property
    def first_violation(self) -> Violation | None:
        return self.violations[0] if self.violations else None

    def require_admissible(self) -> "GrowthFunction":
        if not self.verified_admissible:
            v = self.first_violation
            raise InadmissibleGrowth(
                f"growth function {self.name!r} violates {v.condition} at t={v.t:.17g}",
                t=v.t,
                condition=v.condition,
                value=v.value,
            )
        return self


def sample_points(domain_max: float, samples: int, extra: int = 100, seed: int = SEED) -> np.ndarray:
    """Uniform grid of ``samples`` points on [0, domain_max] plus ``extra`` seeded random points."""
    rng = np.random.default_rng(seed)
    pts = np.concatenate([np.linspace(0.0, domain_max, samples), rng.uniform(0.0, domain_max, extra)])
    return np.sort(pts)


def validate_growth(fn: ScalarFunction1D, samples: int = 1000, seed: int = SEED) -> GrowthFunction:
    """Scan G >= 1 and G' >= -1e-9 on a dense grid.

    The returned ``violations`` hold the first offending point for each failed
    condition, ordered by position.
    """
    if samples < 2:
        raise PreconditionError("need at least two samples", samples=samples)
    ts = sample_points(fn.domain_max, samples, seed=seed)
    with np.errstate(all="ignore"):
        g = np.asarray(fn(ts), dtype=float)
        dg = np.asarray(fn.deriv(ts), dtype=float)
    checks = [
        ("finite", ~(np.isfinite(g) & np.isfinite(dg)), g),
        ("G>=1", g < 1.0 - _VALUE_TOL, g),
        ("G'>=0", dg < -DERIV_TOL, dg),
    ]
    violations = []
    for name, mask, values in checks:
        if mask.any():
            i = int(np.argmax(mask))
            violations.append(Violation(float(ts[i]), name, float(values[i])))
    violations.sort(key=lambda v: v.t)
    return GrowthFunction(fn, not violations, tuple(violations))


# ---------------------------------------------------------------- integrals


def _reciprocal(G):
    return lambda s: 1.0 / np.asarray(G(s), dtype=float)


def integrate_reciprocal(G: GrowthFunction, T: float, tol: float = quadrature.DEFAULT_TOL) -> float:
    """``∫_0^T ds / G(s)`` to absolute accuracy ``tol``."""
    if not 0 < T <= G.domain_max:
        raise PreconditionError(f"horizon T={T} outside (0, {G.domain_max}]", T=T)
    if not tol > 0:
        raise PreconditionError("tol must be positive", tol=tol)
    return quadrature.integrate(_reciprocal(G), 0.0, T, tol)


@dataclass(frozen=True)
class IntegralClassification:
    horizons: tuple
    values: tuple
    increments: tuple
    verdict: str
    tail_estimate: float | None

    @property
    def value_on_horizon(self) -> float:
        return self.values[-1]


def classify_integral(G: GrowthFunction, horizons, tol: float = quadrature.DEFAULT_TOL) -> IntegralClassification:
    horizons = [float(h) for h in horizons]
    if not horizons or any(b <= a for a, b in zip(horizons, horizons[1:])):
        raise PreconditionError("horizons must be nonempty and strictly increasing", horizons=horizons)
    if horizons[0] <= 0 or horizons[-1] > G.domain_max:
        raise PreconditionError("horizons must lie in (0, domain_max]", horizons=horizons)
    values = quadrature.cumulative(_reciprocal(G), horizons, tol=tol)
    increments = np.diff(values, prepend=0.0)
    declared = G.base.reciprocal if G.base.kind is Kind.PRESET else None
    tail = None
    if declared is None:
        verdict = INCONCLUSIVE
    elif declared.verdict == "converges":
        verdict = CONVERGES
        if declared.tail is not None:
            tail = float(declared.tail(horizons[-1]))
    else:
        verdict = DIVERGES
    return IntegralClassification(
        tuple(horizons),
        tuple(float(v) for v in values),
        tuple(float(v) for v in increments),
        verdict,
        tail,
    )


def require_converging(G: GrowthFunction, force: bool = False, T: float | None = None) -> str:
    """Gate for the counterexample side: the 1/G integral must be declared finite."""
    horizon = G.domain_max if T is None else min(T, G.domain_max)
    verdict = classify_integral(G, [horizon]).verdict
    if verdict == DIVERGES:
        raise GateError("integral of 1/G diverges (declared)", growth=G.name)
    if verdict != CONVERGES and not force:
        raise GateError(
            "integral of 1/G is not declared convergent; pass force to proceed",
            growth=G.name,
            verdict=verdict,
        )
    return verdict


def build_F(G: GrowthFunction, tol: float = 1e-12) -> ScalarFunction1D:
    """F(t) = exp(∫_0^t 1/G), with F' = F/G and F'' = F/G^2 - F G'/G^2."""
    G.require_admissible()
    recip = _reciprocal(G)

    def F(t):
        t = np.asarray(t, dtype=float)
        return np.exp(quadrature.cumulative(recip, t, tol=tol))

    def dF(t):
        return F(t) / G(t)

    def d2F(t):
        g = np.asarray(G(t), dtype=float)
        f = F(t)
        return f / g**2 - f * G.deriv(t) / g**2

    return ScalarFunction1D(F, dF, d2F, G.domain_max, G.base.kind, f"F[{G.name}]")
