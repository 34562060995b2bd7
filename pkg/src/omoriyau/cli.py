"""Command-line front end.

Each subcommand runs one pipeline, collects its outputs in memory and writes
them at the end. Exit status: 0 when every checked property holds, 2 on a
property violation, 1 on a usage, parse or precondition error. Diagnostics
go to stderr as one JSON object.

A ``--config FILE`` of ``key = value`` lines (keys spelled like the long
flags) supplies defaults; flags given on the command line take precedence.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import growth, manifold, principle, report, slowdown
from .errors import EvaluationError, ExpressionSyntaxError, OmoriYauError, PreconditionError
from .functions import derivative_mismatches, from_expression

USAGE_ERRORS = (ExpressionSyntaxError, PreconditionError, EvaluationError)


class UsageError(Exception):
    pass


def _floats(text: str) -> list:
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    value = str(text).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"expected a boolean, got {text!r}")


def load_config(path) -> dict:
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.lstrip("-").replace("-", "_")] = value
    return out


def _growth(args, samples: int = 1000) -> growth.GrowthFunction:
    return growth.validate_growth(growth.resolve(args.G, args.T), samples, seed=args.seed)


def _warping(name: str, G: growth.GrowthFunction | None, T: float) -> manifold.Warping:
    key = name.strip().lower()
    if key in manifold.WARPINGS:
        return manifold.WARPINGS[key](T)
    if key in ("counterexample", "t*exp(int g)"):
        if G is None:
            raise UsageError("the counterexample warping needs --G")
        return manifold.exponential_warping(G.require_admissible())
    return manifold.Warping.from_function(from_expression(name, T))


# ---------------------------------------------------------------- commands


def cmd_growth(args) -> tuple[bool, dict]:
    G = _growth(args, args.samples)
    horizons = args.horizons or [args.T / 4, args.T / 2, args.T]
    out = {"growth": G.name, "admissible": G.verified_admissible, "violations": G.violations}
    ok = G.verified_admissible
    files = {}
    if ok:
        cls = growth.classify_integral(G, horizons, args.tol)
        F = growth.build_F(G)
        ts = np.linspace(0.0, args.T, args.points)
        Fv, dF, d2F = F(ts), F.deriv(ts), F.deriv2(ts)
        gv = np.asarray(G(ts), dtype=float)
        f_checks = {
            "F(0)=1": bool(abs(float(Fv[0]) - 1.0) <= 1e-12),
            "F>=1": bool(np.all(Fv >= 1.0 - 1e-12)),
            "F nondecreasing": bool(np.all(np.diff(Fv) >= 0)),
            "F''<=F/G^2": bool(np.all(d2F <= Fv / gv**2 + 1e-9 * np.maximum(1.0, Fv))),
            "derivatives consistent": not derivative_mismatches(G.base, seed=args.seed),
        }
        ok = all(f_checks.values())
        out.update(classification=cls, value_on_horizon=cls.value_on_horizon, F_checks=f_checks)
        files["F_table.csv"] = report.csv_text(
            ["t", "G", "F", "dF", "d2F"], zip(ts.tolist(), gv.tolist(), Fv.tolist(), dF.tolist(), d2F.tolist())
        )
    out["passed"] = ok
    files["growth_report.json"] = report.dumps(out)
    return ok, files


def cmd_slowdown(args) -> tuple[bool, dict]:
    G = _growth(args).require_admissible()
    H = slowdown.build_H(G, args.T, args.grid, force=args.force, workers=args.workers)
    props = slowdown.lemma_properties(H, args.T, args.grid)
    tel = slowdown.integral_reciprocal_H(H, args.T)
    ok = all(p["passed"] for p in props.values()) and tel.bound_holds
    ts = np.linspace(0.0, args.T, args.points)
    files = {
        "splices.json": report.dumps(slowdown.ledger(H)),
        "H_table.csv": report.csv_text(["t", "H", "dH", "branch"], slowdown.table(H, ts)),
        "slowdown_report.json": report.dumps(
            {
                "growth": G.name,
                "horizon": args.T,
                "components": H.components,
                "splices": slowdown.ledger(H),
                "lemma_properties": props,
                "telescoping": tel,
                "passed": ok,
            }
        ),
    }
    return ok, files


def cmd_riccati(args) -> tuple[bool, dict]:
    G = _growth(args).require_admissible()
    model_error = None
    if args.warping:
        M = manifold.ModelManifold(args.n, _warping(args.warping, G, args.T))
        ricci = lambda t: manifold.ricci_radial(M, t)
        m0 = args.m0 if args.m0 is not None else float(manifold.delta_r(M, args.t0))
    else:
        if args.m0 is None:
            raise UsageError("riccati needs --m0 or --warping")
        ricci = manifold.growth_ricci_bound(G)
        m0 = args.m0
    trace = manifold.riccati_integrate(ricci, args.n, args.t0, m0, args.T, args.tol, args.max_step)
    cmp = manifold.check_comparison_bound(trace, G, args.n)
    ok = not trace.blew_up and cmp.holds_from is not None
    if args.warping:
        model_error = float(np.max(np.abs(trace.m - manifold.delta_r(M, trace.t))))
        ok = ok and model_error <= 1e-6
    body = {
        "growth": G.name,
        "n": args.n,
        "t0": args.t0,
        "m0": m0,
        "horizon": args.T,
        "samples": int(trace.t.size),
        "blew_up": trace.blew_up,
        "reason": trace.reason,
        "comparison": cmp,
        "model_max_error": model_error,
        "passed": ok,
    }
    files = {
        "riccati_trace.csv": report.csv_text(["t", "m", "bound", "margin"], manifold.trace_table(trace, G, args.n)),
        "riccati_report.json": report.dumps(body),
    }
    return ok, files


def cmd_sweep(args) -> tuple[bool, dict]:
    G = _growth(args).require_admissible()
    M = manifold.ModelManifold(args.n, _warping(args.warping, G, args.T))
    g = from_expression(args.g, args.T)
    certs = principle.certify_definition(M, g, args.L, G, args.eps, args.T, args.grid, args.workers)
    ok = all(c.ok for c in certs)
    files = {"certificates.json": report.dumps({"certificates": certs, "passed": ok})}
    for i, c in enumerate(certs):
        rows = principle.sweep_trace(g, args.L, G, c, args.T, args.points)
        files[f"sweep_trace_{i}.csv"] = report.csv_text(["t", "g", "h_lambda0", "gap"], rows)
    return ok, files


def cmd_counterexample(args) -> tuple[bool, dict]:
    G = _growth(args)
    h, M, rep = principle.build_counterexample(G, args.n, args.T, args.grid, force=args.force)
    horizons = args.horizons or [args.T / 5, args.T / 2, args.T]
    seq = principle.search_omori_sequence(M, h, horizons, grid=args.grid)
    ok = rep.certifies_failure and seq.verdict == "violated"
    files = {
        "violation_report.json": report.dumps({"report": rep, "sequence": seq, "passed": ok}),
        "delta_h.csv": report.csv_text(["t", "h", "delta_h"], principle.delta_h_table(h, M, args.T, args.points)),
    }
    return ok, files


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="omoriyau", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key = value file supplying defaults")
        p.add_argument("--out", help=f"output directory (default: ${report.OUTPUT_ENV} or .)")
        p.add_argument("--seed", type=int, default=0x5EED, help="sampling seed")
        p.add_argument("--points", type=int, default=1001, help="rows in emitted tables")
        return p

    p = common(sub.add_parser("growth", help="admissibility, 1/G integral and F table"))
    p.add_argument("--G", default=None)
    p.add_argument("--T", type=float, default=10.0)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--horizons", type=_floats, default=None)
    p.add_argument("--tol", type=float, default=1e-10)
    p.set_defaults(func=cmd_growth)

    p = common(sub.add_parser("slowdown", help="splice ledger, H table and Lemma checks"))
    p.add_argument("--G", default=None)
    p.add_argument("--T", type=float, default=50.0)
    p.add_argument("--grid", type=int, default=10_000)
    p.add_argument("--force", action="store_true", help="accept G without a declared convergent 1/G integral")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_slowdown)

    p = common(sub.add_parser("riccati", help="comparison ODE trace and bound report"))
    p.add_argument("--G", default="1")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--t0", type=float, default=0.1)
    p.add_argument("--m0", type=float, default=None)
    p.add_argument("--warping", default=None, help="integrate with the model's own Ricci curvature")
    p.add_argument("--T", type=float, default=10.0)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--max-step", type=float, default=0.1)
    p.set_defaults(func=cmd_riccati)

    p = common(sub.add_parser("sweep", help="ε-certificates from the λ-sweep"))
    p.add_argument("--warping", default="sinh")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--g", default=None)
    p.add_argument("--L", type=float, default=None)
    p.add_argument("--G", default=None)
    p.add_argument("--eps", type=_floats, default=None)
    p.add_argument("--T", type=float, default=100.0)
    p.add_argument("--grid", type=int, default=principle.SWEEP_GRID)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = common(sub.add_parser("counterexample", help="bounded function with Δh > 1"))
    p.add_argument("--G", default=None)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--T", type=float, default=50.0)
    p.add_argument("--grid", type=int, default=10_000)
    p.add_argument("--horizons", type=_floats, default=None)
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_counterexample)
    return parser


REQUIRED = {
    "growth": ("G",),
    "slowdown": ("G",),
    "riccati": (),
    "sweep": ("g", "L", "G", "eps"),
    "counterexample": ("G",),
}


def _glue_dash_values(argv, parser) -> list:
    """Rewrite ``--g -1/(1+t)`` as ``--g=-1/(1+t)``; argparse would read the value as a flag."""
    takes_value, flags = set(), set()
    for sp in parser._subparsers._group_actions[0].choices.values():
        for action in sp._actions:
            flags.update(action.option_strings)
            if action.option_strings and action.nargs is None and not isinstance(
                action, (argparse._StoreTrueAction, argparse._HelpAction)
            ):
                takes_value.update(action.option_strings)
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        nxt = argv[i + 1] if i + 1 < len(argv) else None
        if tok in takes_value and nxt is not None and nxt.startswith("-") and nxt not in flags:
            out.append(f"{tok}={nxt}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def parse_args(argv):
    parser = build_parser()
    argv = _glue_dash_values(list(argv), parser)
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("command", nargs="?")
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config and known.command:
        config = load_config(known.config)
        subparser = parser._subparsers._group_actions[0].choices.get(known.command)
        if subparser is None:
            raise UsageError(f"unknown command {known.command!r}")
        dests = {a.dest: a for a in subparser._actions}
        for key, value in config.items():
            if key not in dests or key in ("help", "config"):
                raise UsageError(f"unknown config key {key!r} for {known.command}")
            action = dests[key]
            if isinstance(action, argparse._StoreTrueAction):
                value = _bool(value)
            elif action.type is not None:
                value = action.type(value)
            subparser.set_defaults(**{key: value})
    args = parser.parse_args(argv)
    missing = [f"--{k}" for k in REQUIRED[args.command] if getattr(args, k) is None]
    if missing:
        raise UsageError(f"{args.command}: missing {', '.join(missing)}")
    if getattr(args, "n", 2) < 2:
        raise UsageError("--n must be at least 2")
    for name in ("T", "tol"):
        if getattr(args, name, 1.0) is not None and not getattr(args, name, 1.0) > 0:
            raise UsageError(f"--{name} must be positive")
    return args


def _diagnostic(payload: dict) -> None:
    sys.stderr.write(json.dumps(report.plain(payload), sort_keys=True) + "\n")


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parse_args(argv)
    except UsageError as exc:
        _diagnostic({"error": "UsageError", "message": str(exc)})
        return 1
    except argparse.ArgumentTypeError as exc:
        _diagnostic({"error": "UsageError", "message": str(exc)})
        return 1
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        ok, files = args.func(args)
    except UsageError as exc:
        _diagnostic({"error": "UsageError", "message": str(exc)})
        return 1
    except USAGE_ERRORS as exc:
        _diagnostic(exc.as_dict())
        return 1
    except OmoriYauError as exc:
        _diagnostic(exc.as_dict())
        return 2
    out = report.output_dir(args.out)
    for name in sorted(files):
        report.write_atomic(out / name, files[name])
        print(f"wrote {out / name}")
    print(f"{args.command}: {'pass' if ok else 'FAIL'}")
    return 0 if ok else 2


if __name__ == "__main__":
    sys.exit(main())
