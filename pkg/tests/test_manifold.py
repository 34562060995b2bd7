import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from omoriyau import growth, manifold
from omoriyau.errors import PreconditionError
from omoriyau.functions import constant, from_expression
from omoriyau.manifold import ModelManifold


def coth(t):
    return 1.0 / np.tanh(t)


def G_const(c, T=100.0):
    return growth.validate_growth(growth.constant_growth(c, T)).require_admissible()


@pytest.fixture
def plane():
    return ModelManifold(2, manifold.hyperbolic())


def test_delta_r_examples(plane):
    assert float(manifold.delta_r(plane, 1.0)) == pytest.approx(1.3130352855, abs=1e-9)
    assert float(manifold.delta_r(ModelManifold(3, manifold.euclidean()), 2.0)) == 1.0
    assert float(manifold.delta_r(ModelManifold(4, manifold.hyperbolic()), 40.0)) == pytest.approx(3.0, abs=1e-12)


def test_delta_r_far_out_does_not_overflow():
    M = ModelManifold(4, manifold.hyperbolic())
    assert float(manifold.delta_r(M, 690.0)) == 3.0


def test_ricci_examples(plane):
    assert float(manifold.ricci_radial(plane, 1.0)) == pytest.approx(-1.0, abs=1e-12)
    assert float(manifold.ricci_radial(ModelManifold(5, manifold.euclidean()), 3.0)) == 0.0
    ts = np.linspace(0.1, 50, 30)
    assert manifold.ricci_radial(ModelManifold(3, manifold.hyperbolic()), ts) == pytest.approx(-2.0, abs=1e-12)


def test_radial_laplacian_examples(plane):
    flat3 = ModelManifold(3, manifold.euclidean())
    ts = np.linspace(0.5, 20, 9)
    assert manifold.radial_laplacian(flat3, from_expression("t^2"), ts) == pytest.approx(6.0, abs=1e-12)
    assert float(manifold.radial_laplacian(plane, from_expression("t"), 1.0)) == pytest.approx(coth(1.0), abs=1e-12)
    assert np.all(manifold.radial_laplacian(plane, constant(-1.0), ts) == 0.0)


def test_pole_is_rejected(plane):
    for fn in (manifold.delta_r, manifold.ricci_radial):
        with pytest.raises(PreconditionError):
            fn(plane, 0.0)
    with pytest.raises(PreconditionError):
        manifold.radial_laplacian(plane, constant(1.0), np.array([1.0, -1.0]))


def test_dimension_guard():
    with pytest.raises(PreconditionError):
        ModelManifold(1, manifold.euclidean())


@pytest.mark.parametrize("warp", [manifold.euclidean(), manifold.hyperbolic()])
def test_presets_have_a_smooth_pole(warp):
    assert manifold.check_manifold(ModelManifold(3, warp)) == []


@pytest.mark.parametrize("warp", [manifold.euclidean(50.0), manifold.hyperbolic(50.0)])
def test_log_slope_matches_finite_differences(warp):
    ts = np.linspace(0.5, 40, 50)
    h = 1e-6
    fd = (warp.log_f(ts + h) - warp.log_f(ts - h)) / (2 * h)
    assert warp.log_slope(ts) == pytest.approx(fd, rel=1e-6)


def test_riccati_reproduces_coth():
    tr = manifold.riccati_integrate(manifold.growth_ricci_bound(G_const(1.0)), 2, 0.1, coth(0.1), 10.0)
    assert not tr.blew_up
    assert np.max(np.abs(tr.m - coth(tr.t))) <= 1e-6


def test_riccati_equilibrium_is_fixed():
    tr = manifold.riccati_integrate(manifold.growth_ricci_bound(G_const(1.0)), 2, 0.1, 1.0, 10.0)
    assert np.max(np.abs(tr.m - 1.0)) <= 1e-12


def test_riccati_relaxes_to_equilibrium():
    tr = manifold.riccati_integrate(manifold.growth_ricci_bound(G_const(2.0)), 5, 0.1, 10.0, 10.0)
    assert np.all(np.diff(tr.m) < 0)
    assert np.all(tr.m > 4.0)
    assert tr.m[-1] == pytest.approx(4.0, abs=1e-6)


def test_riccati_flags_conjugate_point():
    # R = 0 with m0 < 0: m = 1/(t + c) runs to -inf in finite time
    tr = manifold.riccati_integrate(lambda t: np.zeros_like(np.asarray(t, dtype=float)), 2, 1.0, -1.0, 5.0)
    assert tr.blew_up
    assert tr.m[-1] < -1e6
    assert tr.t[-1] < 2.0


def test_riccati_guards():
    R = manifold.growth_ricci_bound(G_const(1.0))
    with pytest.raises(PreconditionError):
        manifold.riccati_integrate(R, 2, 0.0, 1.0, 1.0)
    with pytest.raises(PreconditionError):
        manifold.riccati_integrate(R, 2, 1.0, 1.0, 0.5)


@pytest.mark.parametrize("n", [2, 3, 5])
@pytest.mark.parametrize("warp", ["t", "sinh", "t*e^t"])
def test_riccati_reproduces_model_delta_r(n, warp):
    M = ModelManifold(n, manifold.exponential_warping(G_const(1.0, 20.0)) if warp == "t*e^t" else manifold.WARPINGS[warp]())
    t0 = 0.1
    R = lambda t: manifold.ricci_radial(M, t)
    tr = manifold.riccati_integrate(R, n, t0, float(manifold.delta_r(M, t0)), 10.0)
    assert np.max(np.abs(tr.m - manifold.delta_r(M, tr.t))) <= 1e-6


def test_comparison_holds_from_first_sample():
    tr = manifold.riccati_integrate(manifold.growth_ricci_bound(G_const(1.0)), 2, 0.3, coth(0.3), 10.0)
    rep = manifold.check_comparison_bound(tr, G_const(2.0), 2)
    assert rep.holds_everywhere and rep.holds_from == 0.3 and rep.witness is None


def test_comparison_at_equilibrium():
    tr = manifold.riccati_integrate(manifold.growth_ricci_bound(G_const(2.0)), 5, 0.1, 4.0, 5.0)
    assert manifold.check_comparison_bound(tr, G_const(2.0), 5).holds_everywhere


def test_comparison_not_yet_below_bound():
    tr = manifold.riccati_integrate(manifold.growth_ricci_bound(G_const(1.0)), 2, 0.1, 1e4, 0.1001)
    rep = manifold.check_comparison_bound(tr, G_const(1.0), 2)
    assert not rep.holds_everywhere
    assert rep.witness["status"] == "not yet below bound"


def test_comparison_crossing_for_coth():
    tr = manifold.riccati_integrate(manifold.growth_ricci_bound(G_const(1.0)), 2, 0.1, coth(0.1), 10.0)
    rep = manifold.check_comparison_bound(tr, G_const(1.0), 2)
    # coth t < 2  <=>  t > arccoth 2 = ln(3)/2
    assert rep.crossing_estimate == pytest.approx(0.5 * math.log(3.0), abs=1e-2)
    assert rep.witness["t"] < 0.5 * math.log(3.0) <= rep.holds_from


def test_counterexample_manifold_constant_growth():
    M = manifold.build_counterexample_manifold(G_const(1.0, 20.0), 2)
    ts = np.linspace(0.05, 20, 40)
    assert manifold.delta_r(M, ts) == pytest.approx(1.0 / ts + 1.0, rel=1e-12)


def test_counterexample_manifold_quadratic_growth():
    G = growth.validate_growth(growth.quadratic(20.0)).require_admissible()
    M = manifold.build_counterexample_manifold(G, 2)
    assert float(manifold.delta_r(M, 1.0)) == pytest.approx(5.0, rel=1e-12)
    assert float(manifold.delta_r(M, 1e-8)) > 1e7


def test_exponential_warping_matches_quadrature():
    G = growth.validate_growth(from_expression("1+t^2", 5.0)).require_admissible()
    w = manifold.exponential_warping(G)
    # log f = log t + ∫G = log t + t + t^3/3
    ts = np.array([0.5, 1.0, 3.0])
    assert w.log_f(ts) == pytest.approx(np.log(ts) + ts + ts**3 / 3, rel=1e-12)
    assert w.curvature(ts) == pytest.approx(2 * G(ts) / ts + G.deriv(ts) + G(ts) ** 2, rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(["1+t", "(1+t)^2", "exp(t/3)", "2"]), st.floats(0.2, 9.0))
def test_radial_laplacian_of_F(src, t):
    # Δ(F∘r) = F'Δr + F''; cross-checks manifold against the growth module
    M = ModelManifold(3, manifold.hyperbolic())
    G = growth.validate_growth(growth.resolve(src, 10.0)).require_admissible()
    F = growth.build_F(G)
    lhs = float(manifold.radial_laplacian(M, F, t))
    rhs = float(F.deriv(t)) * 2 * coth(t) + float(F(t)) / float(G(t)) ** 2 - float(F(t)) * float(G.deriv(t)) / float(G(t)) ** 2
    assert lhs == pytest.approx(rhs, rel=1e-9)
