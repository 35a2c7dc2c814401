"""Command-line front end.

Exit codes: 0 success, 1 I/O error, 2 validation error, 3 verification mismatch.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from . import excess, gmt
from .fixtures import write_fixtures
from .invariants import (
    ERROR_ON_MISSING,
    ZERO_ON_MISSING,
    Context,
    InvariantTable,
    MissingEntry,
    TableError,
    WKey,
    enumerate_w_keys,
    format_value,
    load_table,
    store_table,
)
from .series import Truncation, verify_conjecture

EXIT_OK, EXIT_IO, EXIT_INVALID, EXIT_MISMATCH = 0, 1, 2, 3


class UsageError(ValueError):
    pass


def parse_key_spec(spec: str, context: Context) -> WKey:
    """``"a,b:c1,c2,...:d"``, e.g. ``"2,2:2:1"`` or ``"5,0::1"``."""
    try:
        bounds, ins, d = spec.split(":")
        a, b = (int(x) for x in bounds.split(","))
        insertions = [int(x) for x in ins.split(",") if x.strip()]
        return WKey(context, a, b, insertions, int(d))
    except ValueError:
        raise UsageError(f"bad key {spec!r}; expected 'a,b:c1,c2,...:d'") from None


def _policy(args) -> str:
    return ZERO_ON_MISSING if args.assume_missing_zero else ERROR_ON_MISSING


def _load(path: str, args, kind: str | None) -> InvariantTable:
    table = load_table(path, policy=_policy(args))
    if kind is not None and table.kind != kind:
        raise TableError(f"{path}: expected a {kind} table, found {table.kind}")
    if args.N is not None and table.context.N != args.N or args.k is not None and table.context.k != args.k:
        raise TableError(f"{path}: context {table.context} differs from --N/--k")
    return table


def _emit(args, payload: dict, text_lines: list[str]) -> None:
    if args.format == "json":
        sys.stdout.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write("\n".join(text_lines) + "\n")


def _domain(args, context: Context, table: InvariantTable | None, *, need_b: bool = True) -> list[WKey]:
    keys = [parse_key_spec(s, context) for s in args.key or []]
    if getattr(args, "all", False):
        if table is None:
            raise UsageError("--all needs an input W table")
        keys.extend(k for k in table if k.b >= 1 or not need_b)
    if args.dmax is not None or args.nmax is not None:
        if args.dmax is None or args.nmax is None:
            raise UsageError("--dmax and --nmax go together")
        keys.extend(enumerate_w_keys(context, args.dmax, args.nmax, min_b=1))
    return keys


# -- commands ------------------------------------------------------------------


def cmd_validate(args) -> int:
    table = _load(args.input, args, None)
    payload = {
        "path": args.input,
        "kind": table.kind,
        "N": table.context.N,
        "k": table.context.k,
        "entries": len(table),
        "valid": True,
    }
    _emit(args, payload, [f"{args.input}: valid {table.kind} table for {table.context}, {len(table)} entries"])
    return EXIT_OK


def _identity_text(report: gmt.IdentityReport) -> list[str]:
    lines = [f"{report.key}  {'PASS' if report.equal else 'FAIL'}"]
    lines.append(f"  lhs = {format_value(report.lhs)}")
    lines.append(f"  rhs = {format_value(report.rhs)}")
    if report.scale != 1:
        lines.append(f"  divisor factor = {format_value(report.scale)}")
    for tv in report.terms:
        factors = " * ".join(f"{k}={format_value(v)}" for k, v in zip(tv.term.factors(), tv.factor_values))
        lines.append(f"  [{tv.term.label()}] {format_value(tv.term.scalar)} * {factors} = {format_value(tv.value)}")
    return lines


def cmd_verify_theorem(args) -> int:
    w = _load(args.w, args, "W")
    gw = _load(args.gw, args, "GW")
    if w.context != gw.context:
        raise TableError("W and GW tables have different contexts")
    keys = [parse_key_spec(s, w.context) for s in args.key or []]
    if args.all or not keys:
        keys.extend(k for k in w if k not in keys)
    reports = [gmt.verify_identity(k, gw, w) for k in keys]
    ok = all(r.equal for r in reports)
    lines = []
    for r in reports:
        lines.extend(_identity_text(r))
    lines.append(f"{sum(r.equal for r in reports)}/{len(reports)} identities hold")
    _emit(args, {"passed": ok, "reports": [r.as_dict() for r in reports]}, lines)
    return EXIT_OK if ok else EXIT_MISMATCH


def _write_table(args, table: InvariantTable) -> None:
    store_table(table, args.output)
    rows = [f"{k} = {format_value(v)}" for k, v in table.items()]
    payload = {
        "output": args.output,
        "kind": table.kind,
        "entries": {str(k): format_value(v) for k, v in table.items()},
    }
    _emit(args, payload, [f"wrote {len(table)} {table.kind} entries to {args.output}"] + rows)


def cmd_gw_from_w(args) -> int:
    w = _load(args.w, args, "W")
    keys = _domain(args, w.context, w)
    if args.close:
        keys = gmt.close_domain(keys, w.context)
    _write_table(args, gmt.solve_gw_from_w(w, keys))
    return EXIT_OK


def cmd_w_from_gw(args) -> int:
    gw = _load(args.gw, args, "GW")
    mirror = _load(args.mirror_data, args, "W")
    keys = _domain(args, gw.context, None)
    _write_table(args, gmt.solve_w_from_gw(gw, mirror, keys))
    return EXIT_OK


def cmd_verify_conjecture(args) -> int:
    if args.selftest:
        from .selftest import run_selftest

        results = run_selftest(args.trials, args.seed)
        ok = all(r.passed for r in results)
        lines = [
            f"trial {i}: {r.context} {r.trunc} pairs={r.pairs} keys={r.keys} {'PASS' if r.passed else 'FAIL'}"
            + ("".join(f"\n  {f}" for f in r.failures))
            for i, r in enumerate(results)
        ]
        lines.append(f"{sum(r.passed for r in results)}/{len(results)} trials pass")
        payload = {
            "passed": ok,
            "trials": [
                {
                    "N": r.context.N,
                    "k": r.context.k,
                    "d_max": r.trunc.d_max,
                    "n_max": r.trunc.n_max,
                    "pairs": r.pairs,
                    "keys": r.keys,
                    "failures": r.failures,
                }
                for r in results
            ],
        }
        _emit(args, payload, lines)
        return EXIT_OK if ok else EXIT_MISMATCH
    missing = [f for f in ("w", "gw", "a", "b", "dmax", "nmax") if getattr(args, f) is None]
    if missing:
        raise UsageError("verify-conjecture needs " + ", ".join("--" + m for m in missing) + " (or --selftest)")
    w = _load(args.w, args, "W")
    gw = _load(args.gw, args, "GW")
    report = verify_conjecture(args.a, args.b, gw, w, Truncation(args.dmax, args.nmax))
    lines = [
        f"pair ({report.a},{report.b}) truncation {report.trunc}: "
        f"{'PASS' if report.passed else 'FAIL'} ({report.compared} coefficients compared)"
    ]
    lines.extend(f"  {m}: GW side {format_value(x)} vs W side {format_value(y)}" for m, x, y in report.differences)
    _emit(args, report.as_dict(), lines)
    return EXIT_OK if report.passed else EXIT_MISMATCH


def cmd_predict(args) -> int:
    if None in (args.N, args.k, args.a, args.b, args.d):
        raise UsageError("predict needs --N, --k, --a, --b and --d")
    context = Context(args.N, args.k)
    ins = [int(x) for x in (args.insertions or "").split(",") if x.strip()]
    key = WKey(context, args.a, args.b, ins, args.d)
    preds = excess.predict_corrections(key)
    lines = [f"excess patterns for {key} in {context}"]
    for p in preds:
        line = (
            f"  g={p.g} sigma={p.sigma} coinciding={{{','.join(map(str, p.coinciding))}}} "
            f"x{p.choices} {p.kind} count={p.count} {'permitted' if p.permitted else 'excluded'}"
        )
        if p.variant_count is not None:
            line += f" (without the -1 offset: {p.variant_count})"
        lines.append(line)
    payload = {"key": str(key), "predictions": [p.as_dict() for p in preds]}
    _emit(args, payload, lines)
    return EXIT_OK


def cmd_fixtures(args) -> int:
    if not args.output:
        raise UsageError("fixtures needs --output DIR")
    paths = write_fixtures(args.output)
    _emit(args, {"written": paths}, [f"wrote {p}" for p in paths])
    return EXIT_OK


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mirrorgmt",
        description="Exact mirror transformation between virtual structure constants and GW invariants.",
        allow_abbrev=False,
    )
    common = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--assume-missing-zero", action="store_true", help="treat absent entries as 0")
    common.add_argument("--N", type=int)
    common.add_argument("--k", type=int)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], allow_abbrev=False, help="check a table file")
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("verify-theorem", parents=[common], allow_abbrev=False, help="check the relation per key")
    p.add_argument("--w", required=True)
    p.add_argument("--gw", required=True)
    p.add_argument("--key", action="append", help="a,b:c1,c2,...:d (repeatable)")
    p.add_argument("--all", action="store_true", help="every key of the W table (default without --key)")
    p.set_defaults(func=cmd_verify_theorem)

    p = sub.add_parser("gw-from-w", parents=[common], allow_abbrev=False, help="solve for GW invariants")
    p.add_argument("--w", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--key", action="append")
    p.add_argument("--all", action="store_true", help="every b >= 1 key of the W table")
    p.add_argument("--dmax", type=int)
    p.add_argument("--nmax", type=int)
    p.add_argument("--close", action="store_true", help="add keys until the recursion is closed")
    p.set_defaults(func=cmd_gw_from_w)

    p = sub.add_parser("w-from-gw", parents=[common], allow_abbrev=False, help="evaluate W values from GW data")
    p.add_argument("--gw", required=True)
    p.add_argument("--mirror-data", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--key", action="append")
    p.add_argument("--dmax", type=int)
    p.add_argument("--nmax", type=int)
    p.set_defaults(func=cmd_w_from_gw)

    p = sub.add_parser("verify-conjecture", parents=[common], allow_abbrev=False, help="series-composition check")
    p.add_argument("--w")
    p.add_argument("--gw")
    p.add_argument("--a", type=int)
    p.add_argument("--b", type=int)
    p.add_argument("--dmax", type=int)
    p.add_argument("--nmax", type=int)
    p.add_argument("--selftest", action="store_true", help="random consistent tables instead of files")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify_conjecture)

    p = sub.add_parser("predict", parents=[common], allow_abbrev=False, help="excess-intersection counts")
    p.add_argument("--a", type=int)
    p.add_argument("--b", type=int)
    p.add_argument("--insertions", default="")
    p.add_argument("--d", type=int)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("fixtures", parents=[common], allow_abbrev=False, help="write the reference tables")
    p.add_argument("--output", required=True, help="output directory")
    p.set_defaults(func=cmd_fixtures)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (TableError, MissingEntry, gmt.DomainNotClosed, gmt.InconsistentTables, UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
