"""Acceptance criteria AC1-AC7, one printed PASS/FAIL line each.

Run with pytest, or directly: ``python3 tests/test_acceptance.py``.
"""
import sys
import time
from itertools import product
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from dynflow.anntrace import (  # noqa: E402
    POLICIES, check, corpus_dir, direct_check, evaluate, load_corpus, load_file, replay, tables,
    validate,
)
from dynflow.knowledge import k1, k2  # noqa: E402
from dynflow.labels import all_levelsets, leq  # noqa: E402
from dynflow.policies import INSECURE, SECURE  # noqa: E402
from dynflow.traces import keys, project_secret  # noqa: E402

LO = frozenset({"L", "H"})

APP = ["app-A1-bidding", "app-A2-bidding-early", "app-B1-erase", "app-B2-erase-stale",
       "app-C1-revoke", "app-C2-revoke-leak"]
EXPECTED_ROWS = {
    "dynrelease": "✓✓✓✓✓✓",
    "gr": "✓✓––✓✓",
    "tgr": "✓✓––✓✓",
    "ap": "✓✓✓✗––",
    "ce": "––✓✓––",
    "fa-single": "✓✓✓✗✓✓",
}


def report(capsys, ac, ok, detail):
    line = f"{ac} {'PASS' if ok else 'FAIL'}  {detail}"
    if capsys is None:
        print(line)
    else:
        with capsys.disabled():
            print("\n" + line)
    return ok


def _load(name):
    return load_file(corpus_dir() / f"{name}.json")


def ac1(capsys=None):
    start = time.perf_counter()
    tests = [_load(n) for n in APP]
    table = evaluate(list(EXPECTED_ROWS), tests)
    rows = {p: "".join(table.row(p)) for p in EXPECTED_ROWS}
    elapsed = time.perf_counter() - start
    bad = {p: r for p, r in rows.items() if r != EXPECTED_ROWS[p]}
    ok = not bad and elapsed < 5
    detail = f"six-program table slice in {elapsed:.2f}s" + (f"; differing rows {bad}" if bad else "")
    return report(capsys, "AC1", ok, detail)


def ac2(capsys=None):
    checks = {
        "ce accepts insecure ce-counterexample": check(_load("ce-counterexample"), "ce").kind == SECURE,
        "dynrelease rejects it": check(_load("ce-counterexample"), "dynrelease").kind == INSECURE,
        "paralocks rejects secure locks-counterexample":
            check(_load("locks-counterexample"), "paralocks").kind == INSECURE,
        "dynrelease accepts it": check(_load("locks-counterexample"), "dynrelease").kind == SECURE,
        "gr rejects secure gr-branch": check(_load("gr-branch"), "gr").kind == INSECURE,
    }
    failed = [k for k, v in checks.items() if not v]
    return report(capsys, "AC2", not failed,
                  "documented failure fixtures" + (f"; failed: {failed}" if failed else ""))


def ac3(capsys=None):
    (_, up), = tables(_load("challenge-2"))
    (_, down), = tables(_load("challenge-3"))
    gx = lambda tab: next(g for g in tab.groups if "x" in g.variables)  # noqa: E731
    t = up.seqs[0]
    checks = [
        k1(up, t[:1], LO) == {0, 1},
        k1(up, t[:2], LO) == {0},
        all(k2(up, s, LO, gx(up)) == {0, 1} for s in up.seqs),
        all(k2(down, s, LO, gx(down)) == {0, 1} for s in down.seqs),
        [keys(project_secret(s, gx(up), LO)) for s in up.seqs] == [((LO, 2),), ((LO, 2),)],
        [keys(project_secret(s, gx(down), LO)) for s in down.seqs] == [(), ((LO, 1),)],
        k1(down, down.seqs[1], LO) == {0, 1},
    ]
    return report(capsys, "AC3", all(checks),
                  f"challenge knowledge sets {sum(checks)}/{len(checks)} equal")


def ac4(capsys=None):
    agree = total = 0
    disagreements = []
    for test in load_corpus([corpus_dir()]):
        for p in ("gr", "tgr", "ap", "ce", "fa-single", "paralocks"):
            d = direct_check(test, p)
            if d is None:
                continue
            total += 1
            if d.kind == check(test, p).kind:
                agree += 1
            else:
                disagreements.append((test.name, p))
    ok = total > 0 and agree == total
    return report(capsys, "AC4", ok, f"direct vs framework agreement {agree}/{total}"
                  + (f"; {disagreements}" if disagreements else ""))


def ac5(capsys=None):
    import test_properties as props
    start = time.perf_counter()
    failures = []
    for name in ("test_k1_is_antitone", "test_k2_contains_k1", "test_persistent_allowance_within_transient",
                 "test_transient_secure_implies_persistent_secure",
                 "test_static_labels_reduce_to_noninterference", "test_projection_identities"):
        try:
            getattr(props, name)()
        except Exception as exc:  # a falsifying example
            failures.append(f"{name}: {type(exc).__name__}")
    for n in range(5):
        sets = all_levelsets(tuple("abcd"[:n]))
        for a, b, c in product(sets, repeat=3):
            if not leq(a, a) or (leq(a, b) and leq(b, a) and a != b) or (leq(a, b) and leq(b, c) and not leq(a, c)):
                failures.append(f"order law at size {n}")
                break
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 60
    return report(capsys, "AC5", ok, f"property suite in {elapsed:.1f}s"
                  + (f"; failures: {failures}" if failures else ""))


def ac6(capsys=None):
    n = good = 0
    for test in load_corpus([corpus_dir()]):
        for p in POLICIES:
            v = check(test, p)
            if v.kind == INSECURE:
                n += 1
                good += bool(v.witness) and replay(test, p, v)
    return report(capsys, "AC6", n > 0 and good == n, f"witnesses replayed {good}/{n}")


def ac7(capsys=None):
    sourced = [t for t in load_corpus([corpus_dir()]) if t.source is not None]
    good = sum(validate(t) for t in sourced)
    return report(capsys, "AC7", bool(sourced) and good == len(sourced),
                  f"byte-identical regeneration {good}/{len(sourced)}")


CRITERIA = [ac1, ac2, ac3, ac4, ac5, ac6, ac7]


@pytest.mark.parametrize("criterion", CRITERIA, ids=[f"AC{i}" for i in range(1, 8)])
def test_acceptance(criterion, capsys):
    assert criterion(capsys)


if __name__ == "__main__":
    results = [c() for c in CRITERIA]
    raise SystemExit(0 if all(results) else 1)
