import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from omoriyau import growth
from omoriyau.errors import GateError, InadmissibleGrowth, PreconditionError
from omoriyau.functions import derivative_mismatches, from_expression


def admissible(fn):
    return growth.validate_growth(fn).require_admissible()


def test_linear_is_admissible():
    assert growth.validate_growth(growth.linear(), samples=1000).verified_admissible


def test_quadratic_is_admissible():
    assert growth.validate_growth(growth.quadratic()).verified_admissible


def test_decreasing_growth_reports_first_violation():
    G = growth.validate_growth(from_expression("2-t", 5.0))
    assert not G.verified_admissible
    first = G.first_violation
    assert (first.t, first.condition) == (0.0, "G'>=0")
    below_one = [v for v in G.violations if v.condition == "G>=1"][0]
    assert 1.0 < below_one.t < 1.01
    with pytest.raises(InadmissibleGrowth, match="G'>=0"):
        G.require_admissible()


def test_validation_is_seeded():
    a = growth.validate_growth(from_expression("1+t-0.001*t^3", 30.0))
    b = growth.validate_growth(from_expression("1+t-0.001*t^3", 30.0))
    assert a.violations == b.violations and not a.verified_admissible


@pytest.mark.parametrize(
    "G, T, expected",
    [
        (growth.linear(), math.e - 1.0, 1.0),  # ∫ = ln(1+T)
        (growth.constant_growth(1.0), 7.0, 7.0),
        (growth.quadratic(), 9.0, 0.9),  # ∫ = 1 - 1/(1+T)
    ],
)
def test_integrate_reciprocal(G, T, expected):
    assert growth.integrate_reciprocal(admissible(G), T) == pytest.approx(expected, abs=1e-10)


def test_integrate_reciprocal_rejects_bad_horizon():
    with pytest.raises(PreconditionError):
        growth.integrate_reciprocal(admissible(growth.linear(10.0)), 20.0)


@pytest.mark.parametrize("factory", [growth.linear, growth.quadratic, growth.exponential, growth.loglinear])
def test_preset_triples_are_consistent(factory):
    assert derivative_mismatches(factory(50.0)) == []


@pytest.mark.parametrize("factory", [growth.linear, growth.quadratic, growth.exponential])
def test_preset_antiderivatives_match_quadrature(factory):
    G = admissible(factory(20.0))
    for T in (0.5, 3.0, 20.0):
        assert growth.integrate_reciprocal(G, T) == pytest.approx(float(G.base.reciprocal.antiderivative(T)), abs=1e-10)


def test_classification_declared_divergent():
    cls = growth.classify_integral(admissible(growth.linear()), [1.0, 10.0, 100.0])
    assert cls.verdict == growth.DIVERGES
    assert cls.values == pytest.approx(np.log1p([1.0, 10.0, 100.0]).tolist(), abs=1e-10)
    assert cls.tail_estimate is None


def test_classification_declared_convergent_with_tail():
    cls = growth.classify_integral(admissible(growth.quadratic()), [5.0, 50.0])
    assert cls.verdict == growth.CONVERGES
    assert cls.tail_estimate == pytest.approx(1.0 / 51.0)
    assert cls.value_on_horizon + cls.tail_estimate == pytest.approx(1.0, abs=1e-10)


def test_classification_parsed_is_inconclusive():
    G = admissible(from_expression("1+t^2", 100.0))
    cls = growth.classify_integral(G, [1.0, 10.0, 100.0])
    assert cls.verdict == growth.INCONCLUSIVE
    assert sum(cls.increments) == pytest.approx(cls.value_on_horizon)
    assert cls.increments[0] == pytest.approx(math.atan(1.0), abs=1e-10)


def test_classification_needs_increasing_horizons():
    with pytest.raises(PreconditionError):
        growth.classify_integral(admissible(growth.linear()), [2.0, 1.0])


def test_converging_gate():
    with pytest.raises(GateError, match="diverges"):
        growth.require_converging(admissible(growth.linear()))
    with pytest.raises(GateError):
        growth.require_converging(admissible(from_expression("1+t^2", 50.0)))
    assert growth.require_converging(admissible(from_expression("1+t^2", 50.0)), force=True)


def test_resolve_presets_and_expressions():
    assert growth.resolve("2").reciprocal.verdict == "diverges"
    assert growth.resolve(" (1 + t)^2 ").name == "(1+t)^2"
    assert growth.resolve("e^t").name == "exp(t)"
    assert growth.resolve("1+t^2").reciprocal is None


def test_F_for_linear_growth():
    F = growth.build_F(admissible(growth.linear(10.0)))
    assert float(F(3.0)) == pytest.approx(4.0, rel=1e-12)  # exp(ln(1+t)) = 1+t
    assert float(F(0.0)) == 1.0


def test_F_for_constant_growth():
    F = growth.build_F(admissible(growth.constant_growth(2.0, 10.0)))
    assert float(F(2.0)) == pytest.approx(math.e, rel=1e-12)


growth_cases = st.sampled_from(["(1+t)^2", "1+t", "exp(t)", "(1+t)*log(1+t)+1", "1+t^2", "3", "1+t+sinh(t/4)"])


@settings(max_examples=15, deadline=None)
@given(growth_cases)
def test_F_invariants(src):
    G = admissible(growth.resolve(src, 10.0))
    F = growth.build_F(G)
    ts = np.linspace(0.0, 10.0, 200)
    h = 1e-5
    inner = ts[1:-1]
    fd = (F(inner + h) - F(inner - h)) / (2 * h)
    assert np.allclose(F.deriv(inner), fd, rtol=1e-4)
    Fv = F(ts)
    assert np.all(F.deriv2(ts) <= Fv / G(ts) ** 2 + 1e-9)
    assert Fv[0] == 1.0
    assert np.all(Fv >= 1.0) and np.all(np.diff(Fv) >= 0)
