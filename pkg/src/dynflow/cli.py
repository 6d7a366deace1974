"""Command-line front end: check, bench, validate, trace and encode."""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from typing import Optional, Sequence

from . import anntrace
from .anntrace import DEFAULT_BOUND, DEFAULT_MATRIX, TestCaseError
from .lang import DEFAULT_FUEL
from .policies import BudgetExceeded, INSECURE, NOT_APPLICABLE, SECURE
from .labels import parse_label
from .policies.gradual import EncodingError, encode_gradual_release, encode_tight_gr
from .policies.paralocks import encode_paralocks, normalize_flowlocks, parse_attacker
from .syntax import ParseError, parse_program, show_label, show_program, variables_of

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_USAGE = 2
EXIT_NO_TESTS = 3
EXIT_INPUT = 4
EXIT_BUDGET = 5

log = logging.getLogger("dynflow")


class Usage(Exception):
    pass


def _policies(args) -> list:
    if args.all_policies or (not args.policy and args.command == "bench"):
        chosen = list(DEFAULT_MATRIX)
    else:
        chosen = list(args.policy or ["dynrelease"])
    unknown = [p for p in chosen if p not in DEFAULT_MATRIX]
    if unknown:
        raise Usage(f"unknown policy id(s): {', '.join(unknown)}; known: {', '.join(DEFAULT_MATRIX)}")
    return chosen


def _matrix(args) -> dict:
    return anntrace.load_matrix(args.matrix) if args.matrix else dict(DEFAULT_MATRIX)


def _load(paths: Sequence[str]) -> list:
    return anntrace.load_corpus(paths)


# ----------------------------------------------------------------- check

def cmd_check(args, out) -> int:
    policies = _policies(args)
    matrix = _matrix(args)
    tests = _load(args.paths)
    if not tests:
        print("no tests found", file=sys.stderr)
        return EXIT_NO_TESTS
    rows, bad = [], 0
    for test in sorted(tests, key=lambda t: t.path or t.name):
        for p in policies:
            if anntrace.applicable(test, p, matrix):
                v = anntrace.check(test, p, args.fuel)
            else:
                v = anntrace.Verdict(NOT_APPLICABLE, p)
            if args.raw:
                ok = v.kind != INSECURE
            else:
                ok = v.kind == NOT_APPLICABLE or (v.kind == SECURE) == test.secure
            bad += not ok
            rows.append({
                "test": test.name, "policy": p, "verdict": v.kind,
                "expected": SECURE if test.secure else INSECURE, "match": ok,
                "witness": v.witness.describe() if (args.witness and v.witness) else None,
            })
    if args.format == "json":
        json.dump({"results": rows, "mismatches": bad}, out, indent=2, ensure_ascii=False)
        out.write("\n")
    elif args.format == "csv":
        w = csv.writer(out)
        w.writerow(["test", "policy", "verdict", "expected", "match"])
        for r in rows:
            w.writerow([r["test"], r["policy"], r["verdict"], r["expected"], r["match"]])
    else:
        for r in rows:
            flag = "ok" if r["match"] else "MISMATCH"
            print(f"{r['test']:28} {r['policy']:16} {r['verdict']:14} expected {r['expected']:9} {flag}", file=out)
            if r["witness"]:
                print(f"    witness: {r['witness']}", file=out)
    return EXIT_OK if bad == 0 else EXIT_MISMATCH


# ----------------------------------------------------------------- bench

SYMBOL = {"yes": "✓", "no": "✗", "n-a": "–"}


def render_text(table) -> str:
    width = max([len(t) for t in table.tests] + [4])
    head = f"{'test':{width}}  " + " ".join(f"{p:>10}" for p in table.policies)
    lines = [head, "-" * len(head)]
    for t in table.tests:
        marks = " ".join(f"{SYMBOL[table.mark(p, t)]:>10}" for p in table.policies)
        lines.append(f"{t:{width}}  {marks}")
    lines.append("")
    parts = sorted(set(table.partitions.values()))
    for part in parts:
        lines.append(f"partition {part}: yes/no/n-a")
        for p in table.policies:
            c = table.counts(p, part)
            lines.append(f"  {p:16} {c['yes']:3} {c['no']:3} {c['n-a']:3}")
    return "\n".join(lines) + "\n"


def render_csv(table) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["test", "partition"] + list(table.policies))
    for t in table.tests:
        w.writerow([t, table.partitions.get(t, "")] + [table.mark(p, t) for p in table.policies])
    return buf.getvalue()


def cmd_bench(args, out) -> int:
    policies = _policies(args)
    matrix = _matrix(args)
    paths = args.paths or [str(anntrace.corpus_dir())]
    tests = _load(paths)
    if not tests:
        print("no tests found", file=sys.stderr)
        return EXIT_NO_TESTS
    table = anntrace.evaluate(policies, tests, matrix, args.fuel)
    if args.format == "json":
        out.write(json.dumps(table.to_json(), indent=2, ensure_ascii=False) + "\n")
    elif args.format == "csv":
        out.write(render_csv(table))
    else:
        out.write(render_text(table))
    return EXIT_OK


# -------------------------------------------------------------- validate

def cmd_validate(args, out) -> int:
    tests = _load(args.paths or [str(anntrace.corpus_dir())])
    if not tests:
        print("no tests found", file=sys.stderr)
        return EXIT_NO_TESTS
    bad = 0
    for t in tests:
        if t.source is None:
            status = "no source"
        else:
            fresh = [r.to_json() for r in anntrace.regenerate(t, args.fuel, args.bound)]
            same = json.dumps(fresh, sort_keys=True) == json.dumps([r.to_json() for r in t.traces], sort_keys=True)
            status = "ok" if same else "DIFFERS"
            bad += not same
        print(f"{t.name:28} {status}", file=out)
    return EXIT_OK if bad == 0 else EXIT_MISMATCH


# ----------------------------------------------------------------- trace

def cmd_trace(args, out) -> int:
    test = anntrace.load_file(args.test)
    recs = test.traces
    if args.attacker:
        recs = [r for r in recs if r.attacker == args.attacker]
    if not 0 <= args.memory < len(recs):
        raise Usage(f"memory index {args.memory} out of range 0..{len(recs) - 1}")
    rec = recs[args.memory]
    if args.format == "json":
        out.write(json.dumps(rec.to_json(), indent=2) + "\n")
        return EXIT_OK
    tag = f" [{rec.attacker}]" if rec.attacker else ""
    print(f"init {json.dumps(rec.init)}{tag}", file=out)
    for i, o in enumerate(rec.outputs, 1):
        pol = ", ".join(f"{x}: {lv}" for x, lv in o["policy"].items())
        print(f"{i:3}  <{o['level']}, {o['value']}, {{{pol}}}>", file=out)
    return EXIT_OK


# ---------------------------------------------------------------- encode

def cmd_encode(args, out) -> int:
    test = anntrace.load_file(args.source)
    if test.source is None:
        raise Usage(f"{args.source} has no source program")
    lat = test.lattice
    prog = parse_program(test.source.program, lat.levelset)
    if args.encoder == "paralocks":
        if not test.source.flowlocks:
            raise Usage("paralocks encoding needs flowlocks in the test source")
        if not args.attacker:
            raise Usage("paralocks encoding needs --attacker, e.g. 'a:{D}'")
        specs = normalize_flowlocks(test.source.flowlocks)
        p2, g2 = encode_paralocks(prog, specs, parse_attacker(args.attacker), variables_of(prog))
        names = None
    else:
        if test.source.gamma is None:
            raise Usage("gradual release encodings need gamma")
        gamma = {x: parse_label(t, lat) for x, t in test.source.gamma.items()}
        enc = encode_gradual_release if args.encoder == "gr" else encode_tight_gr
        p2, g2 = enc(prog, gamma, lat)
        names = lat.name_of
    print(show_program(p2, names=names).rstrip("\n"), file=out)
    print("", file=out)
    for x in sorted(g2):
        print(f"// {x} : {show_label(g2[x], names)}", file=out)
    return EXIT_OK


# ------------------------------------------------------------------ main

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dynflow", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true", help="log skipped runs and progress")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, policies=True):
        if policies:
            p.add_argument("--policy", action="append", help="policy id (repeatable)")
            p.add_argument("--all-policies", action="store_true", help="every known policy id")
            p.add_argument("--matrix", help="JSON file overriding applicability rules")
        p.add_argument("--fuel", type=int, default=DEFAULT_FUEL, help="step limit per run (default %(default)s)")
        p.add_argument("--bound", type=int, default=DEFAULT_BOUND, help="largest number of initial memories (default %(default)s)")
        p.add_argument("--format", choices=("text", "json", "csv"), default="text", help="output format")

    p = sub.add_parser("check", help="check tests against policies")
    p.add_argument("paths", nargs="+", help="test files or directories")
    common(p)
    p.add_argument("--witness", action="store_true", help="print witnesses for Insecure verdicts")
    p.add_argument("--raw", action="store_true", help="exit on verdicts, not on ground-truth agreement")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("bench", help="render the result table")
    p.add_argument("paths", nargs="*", help="test files or directories (default: bundled corpus)")
    common(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("validate", help="regenerate traces from source and compare")
    p.add_argument("paths", nargs="*", help="test files or directories (default: bundled corpus)")
    common(p, policies=False)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("trace", help="print one annotated trace")
    p.add_argument("test", help="test file")
    p.add_argument("--memory", type=int, default=0, help="position among the stored traces, after --attacker filtering")
    p.add_argument("--attacker", help="lock attacker such as 'a:{D}'")
    common(p, policies=False)
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("encode", help="print an encoded program and its labels")
    p.add_argument("source", help="test file with a source section")
    p.add_argument("--encoder", choices=("gr", "tgr", "paralocks"), required=True)
    p.add_argument("--attacker", help="lock attacker such as 'a:{D}'")
    p.set_defaults(func=cmd_encode)
    return ap


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args, out)
    except Usage as exc:
        print(f"dynflow: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, TestCaseError, ParseError, EncodingError, ValueError, KeyError) as exc:
        print(f"dynflow: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except BudgetExceeded as exc:
        print(f"dynflow: {exc}", file=sys.stderr)
        return EXIT_BUDGET


if __name__ == "__main__":
    raise SystemExit(main())
