"""Command-line front end.

Verbs: run, sweep, classify, certify, converge.  Exit codes: 0 success,
2 config error, 3 non-convergence, 4 internal failure.  The default output
root comes from NLHEAT_OUTPUT_ROOT when set.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

from ..certificates import (
    build_boundary_layer_supersolution,
    build_eigen_supersolution,
    build_ode_bound,
    check_certificate,
    solve_eigenpair,
)
from ..errors import (
    CertificateInfeasibleError,
    ConfigError,
    HypothesisNotMetError,
    NlheatError,
    NonConvergenceError,
)
from ..regimes import classify_spec
from .config import load_config
from .convergence import blowup_cauchy, convergence_suite
from .records import run_and_record
from .sweep import load_plan, run_sweep

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NONCONVERGENCE = 3
EXIT_INTERNAL = 4


def _default_out() -> str:
    return os.environ.get("NLHEAT_OUTPUT_ROOT", "nlheat-out")


def _apply_overrides(setup, args):
    # keep setup.raw in sync so the stored record replays the overridden run
    if getattr(args, "n", None):
        from ..discretization import Grid

        setup.grid = Grid(n=args.n, length=setup.spec.domain.length)
        setup.raw.setdefault("grid", {})["n"] = args.n
    if getattr(args, "horizon", None):
        setup.horizon = args.horizon
        setup.raw.setdefault("run", {})["horizon"] = args.horizon
    if getattr(args, "err_tol", None):
        setup.control = replace(setup.control, err_tol=args.err_tol)
        setup.raw.setdefault("control", {})["err_tol"] = args.err_tol
    if getattr(args, "u_cap", None):
        setup.control = replace(setup.control, u_cap=args.u_cap)
        setup.raw.setdefault("control", {})["u_cap"] = args.u_cap
    if getattr(args, "name", None):
        setup.name = args.name
        setup.raw.setdefault("run", {})["name"] = args.name
    return setup


def _cmd_run(args) -> int:
    setup = _apply_overrides(load_config(args.config), args)
    record, outcome, target = run_and_record(setup, args.out)
    print(f"outcome: {outcome.kind.value}  t_end={outcome.t_end:.6g}")
    if outcome.t_star_estimate is not None:
        print(
            f"blow-up: t*~{outcome.t_star_estimate:.6g}  rate~{outcome.rate_exponent:.3g}  "
            f"location={outcome.location.value}"
        )
    print(f"prediction: {record.prediction['verdict']} {record.prediction['citations']}")
    print(f"record: {target / 'record.json'}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    plan = load_plan(args.plan)
    manifest = run_sweep(plan, args.out, parallelism=args.parallel)
    summary = manifest["summary"]
    print(
        f"sweep: {summary['total']} points  agreement={summary['agreement_counts']}  "
        f"contradictions={summary['contradictions']}"
    )
    failed = [p for p in manifest["points"] if p["status"] != "ok"]
    for p in failed:
        print(f"  point {p['index']} {p['status']}: {p['error']}")
    return EXIT_OK


def _cmd_classify(args) -> int:
    setup = load_config(args.config)
    import numpy as np

    u0_mass = float(
        np.dot(setup.grid.weights, setup.spec.u0.value(setup.grid.nodes))
    )
    prediction = classify_spec(setup.spec, u0_mass=u0_mass)
    print(json.dumps(prediction.to_dict(), indent=2))
    return EXIT_OK


_CERT_KINDS = (
    "eigen",
    "boundary-layer",
    "sub-low-absorption",
    "sub-steep-absorption",
    "super-small-data",
    "super-kernel-dominated",
)


def _cmd_certify(args) -> int:
    setup = load_config(args.config)
    window = (0.0, args.window if args.window else setup.horizon)
    try:
        if args.kind == "eigen":
            cert = build_eigen_supersolution(setup.spec, solve_eigenpair(setup.grid), window)
            direction = "super"
        elif args.kind == "boundary-layer":
            cert = build_boundary_layer_supersolution(setup.spec, setup.grid, window)
            direction = "super"
        else:
            cert = build_ode_bound(setup.spec, args.kind, {"window": window}, grid=setup.grid)
            direction = "sub" if args.kind.startswith("sub") else "super"
    except (HypothesisNotMetError, CertificateInfeasibleError) as exc:
        print(f"certificate not available: {exc}")
        return EXIT_OK
    report = check_certificate(cert, setup.spec, setup.grid, window, direction)
    payload = {"certificate": cert.to_dict(), "direction": direction, "report": report.to_dict()}
    print(json.dumps(payload, indent=2))
    return EXIT_OK


def _cmd_converge(args) -> int:
    levels = tuple(int(v) for v in args.levels.split(","))
    blow_spec = None
    horizon = 1.0
    if args.config:
        setup = load_config(args.config)
        blow_spec = setup.spec
        horizon = setup.horizon
    report = convergence_suite(levels, blowup_spec=blow_spec, blowup_horizon=horizon)
    print(report.format_table())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nlheat",
        description=(
            "Simulate a semilinear heat equation with a nonlinear nonlocal boundary "
            "flux, detect blow-up, verify comparison certificates, and classify regimes."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one config and write its record")
    p_run.add_argument("config")
    p_run.add_argument("--out", default=_default_out())
    p_run.add_argument("--n", type=int, help="override grid cells")
    p_run.add_argument("--horizon", type=float)
    p_run.add_argument("--err-tol", dest="err_tol", type=float)
    p_run.add_argument("--u-cap", dest="u_cap", type=float)
    p_run.add_argument("--name")
    p_run.set_defaults(fn=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="execute a sweep plan on a worker pool")
    p_sweep.add_argument("plan")
    p_sweep.add_argument("--out", default=_default_out())
    p_sweep.add_argument("--parallel", type=int, default=1)
    p_sweep.set_defaults(fn=_cmd_sweep)

    p_cls = sub.add_parser("classify", help="print the regime prediction for a config")
    p_cls.add_argument("config")
    p_cls.set_defaults(fn=_cmd_classify)

    p_cert = sub.add_parser("certify", help="build and verify a comparison certificate")
    p_cert.add_argument("config")
    p_cert.add_argument("--kind", choices=_CERT_KINDS, required=True)
    p_cert.add_argument("--window", type=float, help="upper end of the check window")
    p_cert.set_defaults(fn=_cmd_certify)

    p_conv = sub.add_parser("converge", help="manufactured-solution order study")
    p_conv.add_argument("--levels", default="100,200,400")
    p_conv.add_argument("--config", help="optional blow-up config for a refinement study")
    p_conv.set_defaults(fn=_cmd_converge)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NonConvergenceError as exc:
        print(f"non-convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except NlheatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal failure: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    raise SystemExit(main())
