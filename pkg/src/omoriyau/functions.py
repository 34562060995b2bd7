"""Real functions of one nonnegative variable, carried with two derivatives."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from . import expression

SEED = 0x5EED
DEFAULT_DOMAIN = 1000.0


class Kind(str, enum.Enum):
    PRESET = "preset"
    EXPRESSION = "parsed-expression"
    PIECEWISE = "piecewise"


@dataclass(frozen=True)
class ReciprocalIntegral:
    """Analytic facts about ``∫_0^T dt/f(t)`` attached to a preset.

    ``verdict`` is ``"diverges"`` or ``"converges"``. ``antiderivative(T)``
    gives the integral from 0 to T when known in closed form; ``tail(T)``
    gives ``∫_T^∞`` for converging presets.
    """

    verdict: str
    antiderivative: Optional[Callable] = None
    tail: Optional[Callable] = None


@dataclass(frozen=True)
class ScalarFunction1D:
    eval: Callable
    deriv: Callable
    deriv2: Callable
    domain_max: float = DEFAULT_DOMAIN
    kind: Kind = Kind.PRESET
    name: str = ""
    reciprocal: Optional[ReciprocalIntegral] = None

    def __call__(self, t):
        return self.eval(t)

    def with_domain(self, domain_max: float) -> "ScalarFunction1D":
        return replace(self, domain_max=float(domain_max))


def _shape_like(t, value):
    return value + np.zeros_like(np.asarray(t, dtype=float))


def constant(c: float, domain_max: float = DEFAULT_DOMAIN, name: str | None = None) -> ScalarFunction1D:
    return ScalarFunction1D(
        lambda t: _shape_like(t, float(c)),
        lambda t: _shape_like(t, 0.0),
        lambda t: _shape_like(t, 0.0),
        domain_max,
        Kind.PRESET,
        name or repr(float(c)),
    )


def identity(domain_max: float = DEFAULT_DOMAIN) -> ScalarFunction1D:
    return ScalarFunction1D(
        lambda t: np.asarray(t, dtype=float) + 0.0,
        lambda t: _shape_like(t, 1.0),
        lambda t: _shape_like(t, 0.0),
        domain_max,
        Kind.PRESET,
        "t",
    )


def from_expression(src: str, domain_max: float = DEFAULT_DOMAIN) -> ScalarFunction1D:
    """Parse ``src`` (variable ``t``) into a function with forward-mode derivatives."""
    tree = expression.parse(src)
    return ScalarFunction1D(
        lambda t: expression.evaluate(tree, t)[0],
        lambda t: expression.evaluate(tree, t)[1],
        lambda t: expression.evaluate(tree, t)[2],
        domain_max,
        Kind.EXPRESSION,
        src.strip(),
    )


def from_table(ts, values, name: str = "table") -> ScalarFunction1D:
    """Shape-preserving cubic (PCHIP) interpolant through tabulated samples.

    PCHIP keeps monotone data monotone, so a tabulated nondecreasing growth
    function stays nondecreasing between the nodes.
    """
    from scipy.interpolate import PchipInterpolator

    ts = np.asarray(ts, dtype=float)
    values = np.asarray(values, dtype=float)
    if ts[0] != 0.0:
        raise ValueError("table must start at t=0")
    p = PchipInterpolator(ts, values, extrapolate=False)
    d1, d2 = p.derivative(1), p.derivative(2)
    return ScalarFunction1D(p, d1, d2, float(ts[-1]), Kind.PIECEWISE, name)


def derivative_mismatches(fn: ScalarFunction1D, n: int = 100, rtol: float = 1e-5, seed: int = SEED):
    """Compare ``fn.deriv`` with central differences of ``fn.eval`` at ``n`` random points.

    Returns the list of ``(t, deriv, finite_difference)`` triples exceeding the
    relative tolerance; an empty list means the triple is consistent.
    """
    rng = np.random.default_rng(seed)
    span = fn.domain_max
    h0 = np.cbrt(np.finfo(float).eps)
    bad = []
    for t in rng.uniform(0.0, span, n):
        h = h0 * max(1.0, t)
        t = min(max(t, h), span - h)
        fd = (float(fn(t + h)) - float(fn(t - h))) / (2 * h)
        d = float(fn.deriv(t))
        scale = max(abs(d), abs(fd), 1e-8 * max(1.0, abs(float(fn(t)))))
        if not math.isclose(d, fd, rel_tol=rtol, abs_tol=rtol * scale):
            bad.append((float(t), d, fd))
    return bad
