"""Command-line runner: ``shiftlab <command> [options]``.

Writes a JSON report (``--out``) and prints one line per check.  Exit status
is 0 when every check passes, 1 on a failing check, 2 on a usage error and
3 when a resource cap is hit.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from typing import Sequence

from . import __version__
from .generators import AlgebraSpec
from .numerics import ResourceLimitError
from .report import Check, RelationReport
from .runner import (
    commutant_checks,
    conditional_expectation_checks,
    definition1_checks,
    entropy_checks,
    generator_checks,
    groupshift_checks,
    realization_agreement,
    tower_checks,
)
from .groupshift import bures_yin_bicharacter, stream_bicharacter
from .tower import DEFAULT_CAP, parse_shift_set

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3


class UsageError(ValueError):
    pass


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _m_range(text: str) -> list[int]:
    if ".." not in text:
        return _int_list(text)
    lo, hi = text.split("..", 1)
    try:
        lo_i, hi_i = int(lo), int(hi)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected LO..HI, got {text!r}") from exc
    if lo_i < 1 or hi_i < lo_i:
        raise argparse.ArgumentTypeError(f"empty or non-positive range {text!r}")
    return list(range(lo_i, hi_i + 1))


def _blocks(text: str) -> AlgebraSpec:
    try:
        return AlgebraSpec.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--set", dest="sset", default="triangular",
                        help="shift set: 'triangular' or a comma list with increasing gaps")
    common.add_argument("--tol", type=float, default=None, help="deviation tolerance")
    common.add_argument("--cap", type=int, default=DEFAULT_CAP, help="largest ambient matrix side")
    common.add_argument("--out", default=None, help="write the JSON report here")
    common.add_argument("--seed", type=int, default=0, help="seed for generic elements and word sampling")
    common.add_argument("--csv", default=None, help="also write a CSV table (commutant dimensions)")

    p = argparse.ArgumentParser(prog="shiftlab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"shiftlab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("verify-generators", parents=[common], help="generator relations for one block spec")
    g.add_argument("--blocks", type=_blocks, default=AlgebraSpec((1, 2)))

    t = sub.add_parser("tower", parents=[common], help="tower relations and dimension counts")
    t.add_argument("--blocks", type=_blocks, default=AlgebraSpec((1, 1)))
    t.add_argument("--depth", type=int, default=3)

    c = sub.add_parser("commutant", parents=[common], help="finite-stage relative commutants")
    c.add_argument("--blocks", type=_blocks, default=AlgebraSpec((1, 1)))
    c.add_argument("--k", type=int, default=1)
    c.add_argument("--m-range", type=_m_range, default=[1, 2, 3, 4])

    e = sub.add_parser("entropy", parents=[common], help="tracial entropies of tensor powers")
    e.add_argument("--blocks", type=_blocks, default=AlgebraSpec((1, 2)))
    e.add_argument("--max-power", type=int, default=3)

    gs = sub.add_parser("groupshift", parents=[common], help="congruence commutants of group shifts")
    gs.add_argument("--n", type=int, default=2)
    gs.add_argument("--k", type=int, default=2, help="run k = 1..K")
    gs.add_argument("--truncation", type=_int_list, default=[8, 10])

    d = sub.add_parser("definition1", parents=[common], help="word phases for a one-step stream shift")
    d.add_argument("--n", type=int, default=2)
    d.add_argument("--q", type=_int_list, default=[0, 1])
    d.add_argument("--s", type=_int_list, default=[1, 1])
    d.add_argument("--k-bound", type=int, default=5)
    d.add_argument("--truncation", type=int, default=None)

    sub.add_parser("all", parents=[common], help="every battery at default sizes")
    return p


def _config(args: argparse.Namespace) -> dict:
    out = {}
    for key, val in sorted(vars(args).items()):
        if key in ("out", "csv"):
            continue
        out[key] = list(val.blocks) if isinstance(val, AlgebraSpec) else val
    return out


def _validate(args: argparse.Namespace) -> None:
    if args.cap < 1:
        raise UsageError("--cap must be positive")
    if getattr(args, "depth", 1) < 1 or getattr(args, "k", 1) < 1:
        raise UsageError("--depth and --k must be at least 1")
    if getattr(args, "max_power", 1) < 1:
        raise UsageError("--max-power must be at least 1")
    if getattr(args, "n", 2) < 2:
        raise UsageError("--n must be at least 2")


def _run(args: argparse.Namespace, sset) -> tuple[list[Check], dict]:
    cmd, extra = args.command, {}

    def tol_or(default: float) -> float:
        return default if args.tol is None else args.tol
    if cmd == "verify-generators":
        return generator_checks(args.blocks, tol_or(1e-12)), extra
    if cmd == "tower":
        return tower_checks(args.blocks, args.depth, sset, args.cap, tol_or(1e-12), args.seed), extra
    if cmd == "commutant":
        checks, data = commutant_checks(args.blocks, args.k, args.m_range, sset, args.cap, args.seed)
        return checks, {"commutant": data}
    if cmd == "entropy":
        checks, vals = entropy_checks(args.blocks, args.max_power, tol_or(1e-10))
        return checks, {"entropy": vals}
    if cmd == "groupshift":
        checks, data = groupshift_checks(args.n, range(1, args.k + 1), args.truncation, sset)
        if args.n**6 <= max(args.cap, 64):
            for bc, step in ((bures_yin_bicharacter(args.n, sset), 2), (stream_bicharacter(args.n, sset), 1)):
                checks.append(realization_agreement(bc, step, 1, 6 if args.n == 2 else 4))
        return checks, {"groupshift": data}
    if cmd == "definition1":
        checks, data = definition1_checks(args.n, sset, args.q, args.s, args.k_bound, args.truncation)
        return checks, {"definition1": data}
    if cmd == "all":
        checks, extra = [], {}
        for b in [(1, 1), (2,), (1, 2), (2, 1), (2, 2), (1, 1, 2)]:
            checks += generator_checks(AlgebraSpec(b), tol_or(1e-12))
        for b, depth in [((1, 1), 3), ((1, 2), 2), ((2,), 2)]:
            checks += tower_checks(AlgebraSpec(b), depth, sset, args.cap, tol_or(1e-12), args.seed)
        cc, extra["commutant"] = commutant_checks(AlgebraSpec((1, 1)), 1, [1, 2, 3, 4], sset, args.cap, args.seed)
        checks += cc
        ent = {}
        for b in [(1, 1), (1, 2)]:
            ec, ent[str(AlgebraSpec(b))] = entropy_checks(AlgebraSpec(b), 3, tol_or(1e-10))
            checks += ec
            checks += conditional_expectation_checks(AlgebraSpec(b))
        extra["entropy"] = ent
        gc, extra["groupshift"] = groupshift_checks(2, [1, 2], [8, 10], sset)
        checks += gc
        dc, extra["definition1"] = definition1_checks(2, sset, [0, 1], [1, 1], 5)
        checks += dc
        return checks, extra
    raise UsageError(f"unknown command {cmd}")


def _write_csv(path: str, data: dict) -> None:
    rows = data.get("commutant", {}).get("rows", [])
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["m", "literal_dim", "literal_blocks", "stabilized_dim", "stabilized_blocks"])
        for r in rows:
            wr.writerow([r["m"], r["literal"]["dim"], " ".join(map(str, r["literal"]["blocks"])),
                         r["stabilized"]["dim"], " ".join(map(str, r["stabilized"]["blocks"]))])


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    try:
        _validate(args)
        sset = parse_shift_set(args.sset)
    except ValueError as exc:
        print(f"shiftlab: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    start = time.perf_counter()
    try:
        checks, extra = _run(args, sset)
    except ResourceLimitError as exc:
        print(f"shiftlab: resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except ValueError as exc:
        print(f"shiftlab: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    elapsed = time.perf_counter() - start
    report = RelationReport(checks)
    body = {
        "config": _config(args),
        "checks": [c.to_dict() for c in checks],
        "seed": args.seed,
        "version": __version__,
    }
    body.update({key: extra[key] for key in sorted(extra)})
    body["passed"] = report.passed
    body["timing"] = {"seconds": round(elapsed, 3)}
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(body, fh, indent=2, default=_json_default)
            fh.write("\n")
    if args.csv:
        _write_csv(args.csv, extra)
    print(report.summary())
    n_fail = len(report.failures())
    print(f"{len(checks) - n_fail}/{len(checks)} checks passed ({elapsed:.2f}s)")
    return EXIT_OK if report.passed else EXIT_FAIL


def _json_default(obj):
    import numpy as np

    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [obj.real, obj.imag]
    raise TypeError(f"not serializable: {type(obj)}")


if __name__ == "__main__":
    sys.exit(main())
