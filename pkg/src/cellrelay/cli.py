"""Command-line entry point.

    cellrelay alloc --per1 0.001 --per2 0.0005 --t1 0.002 --t2 0.004 --k 10
    cellrelay run --config scenario.json [--seed N] [--out result.csv]
    cellrelay sweep-relays [--config relays.json] [--seed N] [--out relays.csv]
    cellrelay sweep-ratio [--config ratio.json] [--seed N] [--out ratio.csv]

Exit codes: 0 success, 1 runtime or configuration error, 2 usage error.
CSV goes to ``--out`` (standard output by default); the seed preamble and
any report go to standard error so the CSV stream stays clean.
"""

import argparse
import json
import sys

from . import allocation
from .engine import SimConfig, run
from .exceptions import CellRelayError
from .experiments import (RatioSweepSpec, RelaySweepSpec, relay_sweep_report, run_ratio_sweep,
                          run_relay_sweep, run_row, write_csv)

DEFAULT_SEED = 1


def _seed(text):
    value = int(text, 0)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed, default=None,
                        help="random seed (overrides the config; default 1)")
    common.add_argument("--out", default="-", help="output path ('-' for standard output)")
    common.add_argument("--config", default=None, help="JSON configuration file")

    parser = argparse.ArgumentParser(
        prog="cellrelay", description="Adaptive burst allocation at a cooperative relay.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)

    p = sub.add_parser("alloc", parents=[common], help="one-shot allocation calculator")
    p.add_argument("--per1", type=float, required=True, help="link PER estimate of mobile 1")
    p.add_argument("--per2", type=float, required=True, help="link PER estimate of mobile 2")
    p.add_argument("--t1", type=float, required=True, help="target PER of mobile 1")
    p.add_argument("--t2", type=float, required=True, help="target PER of mobile 2")
    p.add_argument("--k", type=int, default=10, help="burst length (default 10)")
    p.add_argument("--per-floor", type=float, default=allocation.DEFAULT_PER_FLOOR)

    sub.add_parser("run", parents=[common], help="simulate one scenario")
    sub.add_parser("sweep-relays", parents=[common], help="throughput vs number of relays")
    p = sub.add_parser("sweep-ratio", parents=[common], help="goodput/PER vs target ratio a")
    p.add_argument("--workers", type=int, default=None, help="parallel sweep points")
    return parser


def _load_json(path):
    if path is None:
        return {}
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise CellRelayError(f"{path}: top-level JSON value must be an object")
    return data


def _emit(rows, out):
    if out == "-":
        write_csv(rows, sys.stdout)
    else:
        write_csv(rows, out)


def cmd_alloc(args, seed):
    per1, per2, t1, t2, k = args.per1, args.per2, args.t1, args.t2, args.k
    for name, value in (("per1", per1), ("per2", per2)):
        if not 0 <= value <= 1:
            raise CellRelayError(f"{name} must lie in [0, 1], got {value}")
    for name, value in (("t1", t1), ("t2", t2)):
        if not 0 < value <= 1:
            raise CellRelayError(f"{name} must lie in (0, 1], got {value}")
    if k < 1:
        raise CellRelayError(f"k must be >= 1, got {k}")
    floor = args.per_floor
    a = t2 / t1
    winner = 1 if t1 >= t2 else 2

    lines = [f"seed: {seed} (alloc draws no random numbers)",
             f"inputs: per1={per1:g} per2={per2:g} t1={t1:g} t2={t2:g} k={k} a={a:.9g}"]
    try:
        n1_real, n2_real = allocation.floored_split(per1, per2, a, k, floor)
        counts = allocation.integerize(n1_real, k, winner)
        lines.append(f"closed form: n1_real={n1_real:.6f} n2_real={n2_real:.6f}")
    except allocation.DegenerateDenominator:
        counts = allocation.uniform_split(k, winner)
        lines.append("closed form: degenerate (both link PERs zero), uniform fallback applied")
    lines.append(f"integerized: N1={counts[0]} N2={counts[1]} (priority: mobile {winner})")

    p1, p2 = max(per1, floor), max(per2, floor)
    (m1, m2), (ok1, ok2) = allocation.constraint_report(counts, p1, p2, t1, t2)
    status = {True: "satisfied", False: "violated"}
    lines.append(f"constraint margins: mobile1={m1:.6g} ({status[ok1]}) "
                 f"mobile2={m2:.6g} ({status[ok2]})")
    lines.append(f"expected errors per burst: {allocation.expected_errors(counts, p1, p2):.6g}")
    best = allocation.brute_force_optimum(p1, p2, t1, t2, k)
    got = allocation.satisfying_packets(counts, p1, p2, t1, t2)
    lines.append(f"oracle optimum: N1={best.n1} N2={best.n2} objective={best.objective}")
    lines.append(f"closed-form constraint-satisfying packets: {got} (gap {best.objective - got})")
    text = "\n".join(lines) + "\n"
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def cmd_run(args, seed):
    data = _load_json(args.config)
    data["seed"] = seed
    config = SimConfig.from_dict(data)
    result = run(config)
    _emit([run_row(config, result)], args.out)


def cmd_sweep_relays(args, seed):
    data = _load_json(args.config)
    data["seed"] = seed
    rows = run_relay_sweep(RelaySweepSpec.from_dict(data))
    print(relay_sweep_report(rows), file=sys.stderr)
    _emit(rows, args.out)


def cmd_sweep_ratio(args, seed):
    data = _load_json(args.config)
    data["seed"] = seed
    if args.workers is not None:
        data["workers"] = args.workers
    _emit(run_ratio_sweep(RatioSweepSpec.from_dict(data)), args.out)


COMMANDS = {
    "alloc": cmd_alloc,
    "run": cmd_run,
    "sweep-relays": cmd_sweep_relays,
    "sweep-ratio": cmd_sweep_ratio,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "run" and args.config is None:
        parser.error("run requires --config")
    try:
        seed = args.seed
        if seed is None and args.command != "alloc":
            seed = _load_json(args.config).get("seed", DEFAULT_SEED)
        elif seed is None:
            seed = DEFAULT_SEED
        if args.command != "alloc":
            print(f"# cellrelay {args.command} seed={seed}", file=sys.stderr)
        COMMANDS[args.command](args, seed)
    except (CellRelayError, ValueError, OSError, KeyError, TypeError) as exc:
        print(f"cellrelay: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
