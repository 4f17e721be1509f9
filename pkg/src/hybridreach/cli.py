"""Command-line entry point: ``hybridreach {solve,table,verify}``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import verify as verify_mod
from .config import parse_config, with_overrides
from .errors import HybridReachError, VerificationFailed
from .oracle import convergence_table, format_table
from .output import write_manifest, write_solve_bundle, write_table
from .solver import Solver

logger = logging.getLogger("hybridreach")

EXIT_OK = 0


def _dx_list(text: str) -> tuple:
    try:
        vals = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad --dx list {text!r}") from exc
    if not vals or any(v <= 0 for v in vals):
        raise argparse.ArgumentTypeError("--dx entries must be positive")
    return vals


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hybridreach", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, need_config=True):
        p.add_argument("--config", required=need_config, help="run configuration file")
        p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
        p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("solve", help="solve one instance and write a result bundle")
    common(p)
    p.add_argument("--out", required=True)
    p.add_argument("--dx", type=float, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--output-cadence", type=int, default=None)

    p = sub.add_parser("table", help="convergence table against the closed-form autonomy")
    common(p)
    p.add_argument("--out", default=".")
    p.add_argument("--dx", type=_dx_list, default=None)
    p.add_argument("--tol", type=float, default=None)

    p = sub.add_parser("verify", help="run the property suites")
    common(p, need_config=False)
    p.add_argument("--quick", action="store_true", help="reduced sizes")
    return parser


def cmd_solve(args) -> int:
    cfg = parse_config(args.config)
    cfg = with_overrides(cfg, dx=args.dx, tol=args.tol, output_cadence=args.output_cadence)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    try:
        result = Solver(cfg.build_model(), cfg.scheme, workers=args.workers).run()
        written = write_solve_bundle(out, result, cfg)
    except BaseException as exc:
        write_manifest(out, written, cfg.sha256(), complete=False, note=f"{type(exc).__name__}: {exc}")
        raise
    write_manifest(out, written, cfg.sha256(), complete=True)
    print(f"autonomy: {result.autonomy}")
    return EXIT_OK


def cmd_table(args) -> int:
    cfg = parse_config(args.config)
    cfg = with_overrides(cfg, tol=args.tol)
    dx_list = args.dx if args.dx is not None else cfg.table.dx_list
    p = cfg.model
    params = {"a_x": p.a_x, "a_y": p.a_y, "u_max": p.u_max, "delta": p.delta, "switch_policy": p.switch_policy}
    rows = convergence_table(cfg.table.instances, dx_list, cfg.scheme, params, workers=args.workers)
    written = write_table(args.out, rows, cfg.sha256())
    write_manifest(args.out, written, cfg.sha256(), complete=all(r.note == "" for r in rows))
    print(format_table(rows))
    return EXIT_OK


def cmd_verify(args) -> int:
    checks = verify_mod.run_all(quick=args.quick)
    for c in checks:
        print(c.line())
    failed = [c.name for c in checks if not c.passed]
    if failed:
        raise VerificationFailed("failed: " + ", ".join(failed))
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "table": cmd_table, "verify": cmd_verify}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except HybridReachError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
