"""Command-line entry point.

    gic run --scenario tracking --controller gic1 --out trace.csv
    gic compare --scenario regulation --controllers gic1 benchmark
    gic verify

Scenario and model names resolve against the bundled files, a directory
given in $GIC_MODEL_DIR, or explicit paths. Runs are deterministic; the
CSV column layout is documented in the README.
"""
from __future__ import annotations

import argparse
import sys

from .config import load_scenario, summary_table, write_trace_csv
from .controllers import CONTROLLERS
from .dynamics import NearSingularJacobian
from .simulation import run_scenario

_CONTROLLER_NAMES = sorted(CONTROLLERS)


def _add_scenario_args(p: argparse.ArgumentParser, multi: bool) -> None:
    p.add_argument("--scenario", required=True,
                   help="bundled scenario name (regulation, tracking) or YAML path")
    if multi:
        p.add_argument("--controllers", nargs="+", metavar="NAME", required=True,
                       choices=_CONTROLLER_NAMES,
                       help="controllers to sweep; table columns keep this order")
    else:
        p.add_argument("--controller", choices=_CONTROLLER_NAMES, default=None,
                       help="override the controller named in the scenario file")
    p.add_argument("--out", default=None, metavar="PATH",
                   help="write the trace CSV here (compare appends the controller "
                        "name before the suffix)")
    p.add_argument("--dt", type=float, default=None, help="integration step override [s]")
    p.add_argument("--duration", type=float, default=None, help="run length override [s]")
    p.add_argument("--kp", type=float, default=None, help="translational stiffness override")
    p.add_argument("--ko", type=float, default=None, help="rotational stiffness override")
    p.add_argument("--kd", type=float, default=None, help="damping override")
    p.add_argument("--lambda-g", dest="lambda_g", type=float, default=None,
                   help="spring-rate weight for the shifted-error law")


def _load(args, controller=None):
    return load_scenario(
        args.scenario, controller=controller or getattr(args, "controller", None),
        dt=args.dt, duration=args.duration,
        kp=args.kp, ko=args.ko, kd=args.kd, lambda_g=args.lambda_g)


def _cmd_run(args) -> int:
    sc = _load(args)
    try:
        trace = run_scenario(sc)
    except (NearSingularJacobian, RuntimeError) as e:
        print(f"run aborted: {e}", file=sys.stderr)
        return 1
    if args.out:
        write_trace_csv(trace, args.out)
        print(f"wrote {len(trace)} records to {args.out}")
    print(summary_table({sc.controller: trace}))
    return 0


def _cmd_compare(args) -> int:
    traces = {}
    failed = []
    for name in args.controllers:
        sc = _load(args, controller=name)
        try:
            traces[name] = run_scenario(sc)
        except (NearSingularJacobian, RuntimeError) as e:
            failed.append(name)
            print(f"{name}: run aborted: {e}", file=sys.stderr)
            continue
        if args.out:
            path = _suffixed(args.out, name)
            write_trace_csv(traces[name], path)
            print(f"wrote {path}")
    if traces:
        print(summary_table(traces))
    return 1 if failed else 0


def _suffixed(path: str, name: str) -> str:
    stem, dot, ext = path.rpartition(".")
    return f"{stem}_{name}.{ext}" if dot else f"{path}_{name}"


def _cmd_verify(args) -> int:
    from .verify import run_all
    progress = None if args.quiet else (lambda m: print(f"  {m}", flush=True))
    results = run_all(stride=args.stride, samples=args.samples, progress=progress)
    for r in results:
        print(r.line())
    bad = [r.name for r in results if not r.ok]
    if bad:
        print(f"FAILED: {', '.join(bad)}")
        return 1
    print(f"all {len(results)} checks passed")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gic",
                                 description="Geometric impedance control toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="integrate one scenario and print RMS metrics")
    _add_scenario_args(p_run, multi=False)
    p_run.set_defaults(func=_cmd_run)

    p_cmp = sub.add_parser("compare", help="sweep controllers on one scenario")
    _add_scenario_args(p_cmp, multi=True)
    p_cmp.set_defaults(func=_cmd_compare)

    p_ver = sub.add_parser("verify",
                           help="check the structural identities on this build")
    p_ver.add_argument("--stride", type=int, default=10,
                       help="subsample factor for along-run derivative checks "
                            "(1 = every step, slower)")
    p_ver.add_argument("--samples", type=int, default=500,
                       help="random samples per pointwise check")
    p_ver.add_argument("--quiet", action="store_true", help="suppress progress lines")
    p_ver.set_defaults(func=_cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
