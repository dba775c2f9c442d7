"""Command-line interface: single runs, parameter sweeps and state audits."""

from __future__ import annotations

import argparse
import sys

from .config_io import load_config, load_state, save_state
from .runner import (SCHEMES, SweepSpec, audit_state, run_benchmark,
                     rows_to_csv, run_sweep)


def _canon_scheme(name: str) -> str:
    return name.replace("-", "_")


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = cfg.with_(seed=args.seed)
    scheme = _canon_scheme(args.scheme)
    report = run_benchmark(cfg, scheme, cfg.seed)
    print(f"scheme={scheme} seed={report.seed} sr={report.final_sr:.6f} "
          f"bits/s/Hz outer_iters={report.outer_iters} "
          f"converged={report.converged} feasible={report.feasible} "
          f"wall_ms={report.wall_ms:.1f}")
    if report.failure:
        print(f"failure: {report.failure}", file=sys.stderr)
        return 1
    if args.trace:
        for i, val in enumerate(report.trace):
            print(f"iter {i}: {val:.12f}")
    if args.trace_csv:
        rows = [{"scheme": scheme, "param": "iter", "value": float(i),
                 "seed": report.seed, "sr": max(0.0, val), "iters": i,
                 "wall_ms": 0.0, "feasible": int(report.feasible)}
                for i, val in enumerate(report.trace)]
        with open(args.trace_csv, "w", encoding="utf-8") as fh:
            fh.write(rows_to_csv(rows))
        print(f"trace written to {args.trace_csv}")
    if args.save_state:
        save_state(args.save_state, report.config, report.phase, report.beam)
        print(f"state written to {args.save_state}")
    return 0


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    values = [float(v) for v in args.values.split(",")]
    schemes = tuple(_canon_scheme(s) for s in args.schemes.split(","))
    spec = SweepSpec(param=args.param, values=values, seeds=args.seeds,
                     schemes=schemes)
    rows, _ = run_sweep(spec, cfg, workers=args.workers,
                        timing=not args.no_timing)
    csv_text = rows_to_csv(rows)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(csv_text)
    print(f"{len(rows)} rows written to {args.out}")
    return 0


def cmd_audit(args) -> int:
    cfg = load_config(args.config)
    try:
        phase, beam = load_state(args.state, cfg)
    except ValueError as exc:
        print(f"audit error: {exc}", file=sys.stderr)
        return 1
    checks = audit_state(cfg, args.scheme, phase, beam)
    for name, ok in checks.items():
        print(f"{name}: {'pass' if ok else 'FAIL'}")
    return 0 if checks["ok"] else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="srsim",
        description="Secrecy-rate maximization for a hybrid-relay IRS link")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="optimize one scenario")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--scheme", required=True,
                       choices=[s.replace("_", "-") for s in SCHEMES] + list(SCHEMES))
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--trace", action="store_true",
                       help="print the per-iteration objective")
    p_run.add_argument("--trace-csv", default=None,
                       help="write the per-iteration trace as sweep-format CSV")
    p_run.add_argument("--save-state", default=None,
                       help="write the final state to this JSON file")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="sweep one parameter to CSV")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--param", required=True,
                         choices=list(SweepSpec.PARAMS))
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated value list")
    p_sweep.add_argument("--seeds", type=int, default=1)
    p_sweep.add_argument("--schemes", default="sop,jop")
    p_sweep.add_argument("--out", required=True)
    p_sweep.add_argument("--workers", type=int, default=1)
    p_sweep.add_argument("--no-timing", action="store_true",
                         help="zero the wall_ms column for byte-stable replays")
    p_sweep.set_defaults(func=cmd_sweep)

    p_audit = sub.add_parser("audit", help="re-check a saved state")
    p_audit.add_argument("--config", required=True)
    p_audit.add_argument("--state", required=True)
    p_audit.add_argument("--scheme", default="sop")
    p_audit.set_defaults(func=cmd_audit)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
