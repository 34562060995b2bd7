"""Numbered acceptance criteria, each at its stated tolerance.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one line per
criterion; the terminal summary repeats them as PASS/FAIL.
"""

import math
import time

import numpy as np
import pytest

from omoriyau import growth, manifold, principle, slowdown
from omoriyau.cli import main
from omoriyau.functions import from_expression
from omoriyau.manifold import ModelManifold


def verdict(label, ok, **facts):
    detail = " ".join(f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}" for k, v in facts.items())
    print(f"\n[{label}] {'PASS' if ok else 'FAIL'} {detail}")
    return ok


def coth(t):
    return 1.0 / np.tanh(t)


@pytest.mark.acceptance("1 Lemma property suite")
def test_lemma_property_suite():
    start = time.perf_counter()
    cases = {
        "(1+t)^2": (growth.quadratic(50.0), False),
        "1+t^2": (from_expression("1+t^2", 50.0), True),
    }
    worst = {}
    for name, (fn, force) in cases.items():
        G = growth.validate_growth(fn).require_admissible()
        H = slowdown.build_H(G, 50.0, grid=10_000, force=force)
        ts = np.linspace(0.0, 50.0, 10_000)
        ts = ts[~H.near_joint(ts)]
        Hv, dH, Gv = H(ts), H.deriv(ts), G(ts)
        worst[name] = min(
            float(np.min(Hv - (0.5 - 1e-9))),
            float(np.min(dH + 1e-9)),
            float(np.min(Gv + 1e-9 - 2 * Hv)),
            float(np.min(Hv**2 + 1e-9 - dH)),
        )
    elapsed = time.perf_counter() - start
    ok = all(w >= 0 for w in worst.values()) and elapsed < 5.0
    assert verdict("1", ok, seconds=elapsed, **{f"margin[{k}]": v for k, v in worst.items()})


@pytest.mark.acceptance("2 splice anchors for (1+t)^2")
def test_splice_anchors():
    G = growth.validate_growth(growth.quadratic(50.0)).require_admissible()
    (sp,) = slowdown.build_H(G, 50.0).splices
    errs = {
        "t1": abs(sp.t_n - 0.0),
        "s1": abs(sp.s_n - (4 ** (1 / 3) - 1)),
        "a1": abs(sp.a_n - 2.0),
        "v1": abs(sp.v_n - math.sqrt(3)),
    }
    ok = errs["t1"] == 0 and errs["s1"] <= 1e-8 and errs["a1"] <= 1e-12 and errs["v1"] <= 1e-8
    assert verdict("2", ok, **errs)


@pytest.mark.acceptance("3 telescoping identity")
def test_telescoping_identity():
    G = growth.validate_growth(growth.quadratic(50.0)).require_admissible()
    H = slowdown.build_H(G, 50.0)
    rep = slowdown.integral_reciprocal_H(H, 50.0)
    diff = abs(rep.splice_quadrature - rep.splice_sum)
    ok = diff <= 1e-9 and rep.splice_sum < rep.bound and abs(rep.splice_sum - 1.9641) < 1e-4 and rep.bound == 4.0
    assert verdict("3", ok, splice=rep.splice_sum, bound=rep.bound, identity_error=diff)


@pytest.fixture(scope="module")
def coth_trace():
    G1 = growth.validate_growth(growth.constant_growth(1.0, 20.0)).require_admissible()
    start = time.perf_counter()
    tr = manifold.riccati_integrate(manifold.growth_ricci_bound(G1), 2, 0.1, coth(0.1), 10.0)
    return G1, tr, time.perf_counter() - start


@pytest.mark.acceptance("4a Riccati matches coth")
def test_riccati_matches_coth(coth_trace):
    _, tr, elapsed = coth_trace
    err = float(np.max(np.abs(tr.m - coth(tr.t))))
    ok = err <= 1e-6 and not tr.blew_up and elapsed < 1.0 and tr.t[0] == 0.1 and tr.t[-1] == 10.0
    assert verdict("4a", ok, max_error=err, seconds=elapsed)


@pytest.mark.acceptance("4b comparison bound for t >= 0.31")
def test_riccati_bound_from_031(coth_trace):
    # stated threshold; coth t < 2 only for t > ln(3)/2 = 0.549, see the decisions ledger
    G1, tr, _ = coth_trace
    late = tr.t >= 0.31
    bound = manifold.comparison_bound(G1, 2, tr.t[late])
    worst = float(np.max(tr.m[late] - bound))
    ok = worst < 0
    assert verdict("4b", ok, max_m_minus_bound=worst, at_t=float(tr.t[late][np.argmax(tr.m[late] - bound)]))


@pytest.mark.acceptance("5 model-manifold exactness")
def test_model_manifold_exactness():
    G1 = growth.validate_growth(growth.constant_growth(1.0, 20.0)).require_admissible()
    warps = {"t": manifold.euclidean(), "sinh": manifold.hyperbolic(), "t*e^t": manifold.exponential_warping(G1)}
    worst = 0.0
    for warp in warps.values():
        for n in (2, 3, 4, 5):
            M = ModelManifold(n, warp)
            tr = manifold.riccati_integrate(lambda t: manifold.ricci_radial(M, t), n, 0.1, float(manifold.delta_r(M, 0.1)), 10.0)
            worst = max(worst, float(np.max(np.abs(tr.m - manifold.delta_r(M, tr.t)))))
    assert verdict("5", worst <= 1e-6, max_error=worst)


@pytest.mark.acceptance("6 sweep certificates")
def test_sweep_certificates():
    start = time.perf_counter()
    M = ModelManifold(2, manifold.hyperbolic())
    G2 = growth.validate_growth(growth.constant_growth(2.0, 100.0)).require_admissible()
    certs = principle.certify_definition(M, from_expression("-1/(1+t)"), 0.0, G2, [0.5, 0.25, 0.1], 100.0)
    elapsed = time.perf_counter() - start
    checks = all(
        c.gap <= c.epsilon and c.lambda0 < c.epsilon / c.F_at_x and c.grad_norm < c.epsilon and c.laplacian <= 2 * c.epsilon
        for c in certs
    )
    x = certs[-1].x_eps
    ok = checks and abs(x - 10.7082) <= 1e-3 and elapsed < 5.0
    assert verdict("6", ok, x_eps=x, seconds=elapsed)


@pytest.mark.acceptance("7 counterexample pipeline")
def test_counterexample_pipeline():
    G = growth.validate_growth(growth.quadratic()).require_admissible()
    h, M, rep = principle.build_counterexample(G, 2, 50.0)
    seq = principle.search_omori_sequence(M, h, [10.0, 25.0, 50.0])
    ok = abs(rep.h_sup - 2.6962) <= 1e-4 and rep.delta_h_min > 1.0 and seq.verdict == "violated"
    assert verdict("7", ok, h_sup=rep.h_sup, delta_h_min=rep.delta_h_min, verdict=seq.verdict)


COMMANDS = {
    "growth": ["growth", "--G", "(1+t)^2", "--T", "50"],
    "slowdown": ["slowdown", "--G", "(1+t)^2", "--T", "50"],
    "slowdown-forced": ["slowdown", "--G", "1+t^2", "--T", "50", "--force"],
    "riccati": ["riccati", "--G", "1", "--n", "2", "--t0", "0.1", "--m0", repr(float(coth(0.1))), "--T", "10"],
    "riccati-model": ["riccati", "--G", "1", "--n", "3", "--warping", "sinh"],
    "sweep": ["sweep", "--warping", "sinh", "--n", "2", "--g", "-1/(1+t)", "--L", "0", "--G", "2", "--eps", "0.5,0.25,0.1", "--T", "100"],
    "counterexample": ["counterexample", "--G", "(1+t)^2", "--n", "2", "--T", "50"],
}


@pytest.mark.acceptance("8 determinism")
def test_determinism(tmp_path, capsys):
    differing = []
    for name, argv in COMMANDS.items():
        outs = []
        for run in ("a", "b"):
            d = tmp_path / name / run
            main([*argv, "--out", str(d)])
            outs.append({f.name: f.read_bytes() for f in sorted(d.iterdir())})
        if not outs[0] or outs[0] != outs[1]:
            differing.append(name)
    capsys.readouterr()
    ok = not differing
    assert verdict("8", ok, commands=len(COMMANDS), differing=",".join(differing) or "none")
