"""Command-line entry point: ``qubound {fuzz,tightness,demo,selftest}``.

Exit status is 0 when everything passes, 1 when a violation is found and 2
for usage or configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from contextlib import contextmanager
from datetime import datetime, timezone

import numpy as np

from qubound.errors import QuboundError

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _list(conv):
    def parse(text: str):
        try:
            return [conv(x) for x in text.split(",") if x.strip()]
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from exc

    return parse


def _colour(text: str, ok: bool, stream) -> str:
    if os.environ.get("NO_COLOR") or not getattr(stream, "isatty", lambda: False)():
        return text
    return f"\033[{32 if ok else 31}m{text}\033[0m"


@contextmanager
def _output(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qubound", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    fz = sub.add_parser("fuzz", help="randomized check of every inequality")
    fz.add_argument("--dims", type=_list(int), default=[2, 3, 4, 6, 8])
    fz.add_argument("--m-max", type=int, default=6)
    fz.add_argument("--trials", type=int, default=1000)
    fz.add_argument("--seed", type=int, default=0)
    fz.add_argument("--checks", type=_list(str), default=None, help="comma-separated check names (default: all)")
    fz.add_argument("--p-values", type=_list(float), default=[1.1, 2.0, 5.0])
    fmt = fz.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="format", action="store_const", const="json")
    fmt.add_argument("--csv", dest="format", action="store_const", const="csv")
    fz.set_defaults(format="json")
    fz.add_argument("--out", default=None)
    fz.add_argument("--workers", type=int, default=1)
    fz.add_argument("--no-timestamp", action="store_true", help="omit the timestamp so reports are byte-stable")
    fz.add_argument("--dump-dir", default=None, help="write violating instances here as .npz")

    tg = sub.add_parser("tightness", help="sweep the extremal families")
    tg.add_argument("--kind", choices=("qubit", "club", "qutrit"), default=None)
    tg.add_argument("--m", type=_list(int), default=None)
    tg.add_argument("--delta", type=_list(float), default=None)
    tg.add_argument("--a-ratio", type=_list(float), default=[1.0], help="a_t ratio r; exponent p = 1 + 1/r")
    tg.add_argument("--grid", choices=("acceptance",), default=None, help="named preset grid")
    tg.add_argument("--out", default=None)

    sub.add_parser("demo", help="walk through the two-step qubit example")
    sub.add_parser("selftest", help="run the acceptance suite")
    return parser


def cmd_fuzz(args) -> int:
    from qubound.harness.fuzz import ALL_CHECKS, FuzzConfig, fuzz

    try:
        cfg = FuzzConfig(
            dims=tuple(args.dims),
            m_range=(1, args.m_max),
            trials=args.trials,
            checks=tuple(args.checks) if args.checks else ALL_CHECKS,
            kmw_p_values=tuple(args.p_values),
            seed=args.seed,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if args.workers < 1:
        raise UsageError("--workers must be >= 1")

    report = fuzz(cfg, workers=args.workers, dump_dir=args.dump_dir)
    with _output(args.out) as fh:
        if args.format == "csv":
            csv.writer(fh, lineterminator="\n").writerows(report.csv_rows())
        else:
            stamp = None if args.no_timestamp else datetime.now(timezone.utc).isoformat(timespec="seconds")
            fh.write(report.to_json(stamp))
    if args.out not in (None, "-"):
        print(_colour("PASS" if report.passed else "FAIL", report.passed, sys.stdout))
    return EXIT_OK if report.passed else EXIT_VIOLATION


def cmd_tightness(args) -> int:
    from qubound.harness import sweep

    if args.grid:
        kinds = (args.kind,) if args.kind else sweep.KINDS
        rows = sweep.preset_rows(args.grid, kinds)
    else:
        if args.kind is None:
            raise UsageError("--kind is required unless --grid is given")
        if args.kind == "club" and any(r <= 0 for r in args.a_ratio):
            raise UsageError("--a-ratio values must be positive")
        rows = sweep.tightness_sweep(args.kind, args.m or [], args.delta or [], args.a_ratio)
    with _output(args.out) as fh:
        sweep.write_csv(rows, fh)
    return EXIT_OK


def cmd_demo(args) -> int:
    from qubound.bounds import check_gentle, check_theorem1, check_union_bound
    from qubound.qstate import trace_distance
    from qubound.tightness import qubit_family, _simulate

    delta, m = 0.1, 2
    deltas = np.full(m, delta)
    traj = _simulate(deltas)
    print(f"qubit |0>, m={m} measurements onto lines at angles +{delta}, -{delta} (radians)")
    for t in range(1, m + 1):
        print(
            f"  step {t}: eps={traj.eps[t - 1]:.10f}  q={traj.q[t - 1]:.10f}  p={traj.p[t]:.10f}  "
            f"F(rho,rho_t)={traj.fid[t]:.10f}  r={traj.r[t]:.10f}  "
            f"r decrement={traj.r[t - 1] - traj.r[t]:.10f} <= {np.sqrt(traj.q[t - 1] * traj.eps[t - 1]):.10f}"
        )
    rep = qubit_family(m, delta)
    print(f"  Succ={traj.succ:.10f}  Fail={traj.fail:.10f}  Loss={traj.loss:.10f}")
    print(f"  closed-form Fail={rep.fail_exact:.10f}  Fail/Loss={rep.ratio:.6f}  (limit (4m-3)/m={(4 * m - 3) / m:g})")
    print(f"  trace distance to start={trace_distance(traj.rho0, traj.final_state):.10f}  sqrt(Loss)={np.sqrt(traj.loss):.10f}")
    margins = [check_theorem1(traj), *check_union_bound(traj), *check_gentle(traj)]
    for mg in margins:
        print(f"  {mg.name:<20} lhs={mg.lhs:.10f} rhs={mg.rhs:.10f} margin={mg.margin:+.3e}")
    ok = all(mg.ok for mg in margins)
    return EXIT_OK if ok else EXIT_VIOLATION


def cmd_selftest(args) -> int:
    from qubound.acceptance import run_all

    results = run_all()
    for res in results:
        print(_colour(res.line(), res.passed, sys.stdout), flush=True)
    return EXIT_OK if all(r.passed for r in results) else EXIT_VIOLATION


COMMANDS = {"fuzz": cmd_fuzz, "tightness": cmd_tightness, "demo": cmd_demo, "selftest": cmd_selftest}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on bad usage
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (UsageError, QuboundError, OSError) as exc:
        print(f"qubound: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
